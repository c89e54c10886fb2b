//! Scalar root finding: Brent's bracketed bisection–secant–inverse-quadratic
//! hybrid and a uniform sign-change scan.

/// Finds a root of `f` in `[a, b]` given `fa = f(a)`, `fb = f(b)` of
/// opposite sign. Stops when the bracket is narrower than `xtol` or
/// `|f| <= ftol`.
pub fn brent<F>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
) -> f64
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(fa * fb <= 0.0, "root not bracketed");
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= ftol {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}

/// A sign change of a sampled function between two neighbouring samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Samples `f` at `n` uniform points of `[a, b]` and returns the values
/// together with every bracketing interval, in increasing order.
pub fn scan<F>(f: F, a: f64, b: f64, n: usize) -> (Vec<(f64, f64)>, Vec<Bracket>)
where
    F: FnMut(f64) -> f64,
{
    let step = (b - a) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect();
    scan_at(f, &xs)
}

/// Like [`scan`] on an arbitrary increasing sequence of abscissae.
pub fn scan_at<F>(mut f: F, xs: &[f64]) -> (Vec<(f64, f64)>, Vec<Bracket>)
where
    F: FnMut(f64) -> f64,
{
    let samples: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f(x))).collect();
    let brackets = samples
        .windows(2)
        .filter(|w| w[0].1.is_finite() && w[1].1.is_finite())
        .filter(|w| (w[0].1 <= 0.0) != (w[1].1 <= 0.0))
        .map(|w| Bracket {
            lo: w[0].0,
            hi: w[1].0,
            f_lo: w[0].1,
            f_hi: w[1].1,
        })
        .collect();
    (samples, brackets)
}
