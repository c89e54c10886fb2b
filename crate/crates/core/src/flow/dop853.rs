//! Fixed-dimension explicit Runge–Kutta 8(5,3) stepper with adaptive step
//! control. Shared by the phase-space integrator and the fundamental-matrix
//! solver.

use std::ops::ControlFlow;

use super::tableau::{A, B, C, E3, E5, STAGES};
use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

/// Step-control settings for [`solve`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct Control {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Fixed step length; disables error control when set.
    pub fixed_step: Option<f64>,
    pub max_steps: usize,
}

/// One accepted step, handed to the observer.
pub(crate) struct Accepted<'a, const N: usize> {
    pub t_prev: f64,
    pub y_prev: &'a [f64; N],
    pub t: f64,
    pub y: &'a [f64; N],
}

/// Advances `y` by a single step of length `h` without error control.
/// Returns the new state, the derivative there and the stage matrix.
pub(crate) fn rk_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> ([f64; N], [[f64; N]; STAGES])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; STAGES];
    k[0] = *f0;
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    let mut y_new = *y;
    for (s, ks) in k.iter().enumerate() {
        let b = B[s];
        if b != 0.0 {
            for i in 0..N {
                y_new[i] += h * b * ks[i];
            }
        }
    }
    (y_new, k)
}

fn error_norm<const N: usize>(
    k: &[[f64; N]; STAGES],
    f_new: &[f64; N],
    h: f64,
    y: &[f64; N],
    y_new: &[f64; N],
    ctl: &Control,
) -> f64 {
    let mut e5 = 0.0;
    let mut e3 = 0.0;
    for i in 0..N {
        let scale = ctl.atol + y[i].abs().max(y_new[i].abs()) * ctl.rtol;
        let mut s5 = E5[STAGES] * f_new[i];
        let mut s3 = E3[STAGES] * f_new[i];
        for s in 0..STAGES {
            s5 += E5[s] * k[s][i];
            s3 += E3[s] * k[s][i];
        }
        e5 += (s5 / scale).powi(2);
        e3 += (s3 / scale).powi(2);
    }
    if e5 == 0.0 && e3 == 0.0 {
        return 0.0;
    }
    h.abs() * e5 / ((e5 + 0.01 * e3) * N as f64).sqrt()
}

fn rms_norm<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    (v.iter()
        .zip(scale)
        .map(|(x, s)| (x / s).powi(2))
        .sum::<f64>()
        / N as f64)
        .sqrt()
}

/// Hairer's starting-step heuristic.
fn initial_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    ctl: &Control,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut scale = [0.0; N];
    for i in 0..N {
        scale[i] = ctl.atol + y[i].abs() * ctl.rtol;
    }
    let d0 = rms_norm(y, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let mut y1 = *y;
    for i in 0..N {
        y1[i] += dir * h0 * f0[i];
    }
    let f1 = f(t + dir * h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1).min(ctl.max_step)
}

/// Integrates `y' = f(t, y)` from `t0` towards `t1`. After every accepted
/// step `project` may modify the state (e.g. renormalise onto a constraint
/// surface) and `observe` may stop the integration early.
///
/// Returns the final time and state.
pub(crate) fn solve<const N: usize, F, P, O>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    ctl: &Control,
    project: P,
    mut observe: O,
) -> Result<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    P: Fn(&mut [f64; N]),
    O: FnMut(Accepted<'_, N>) -> ControlFlow<()>,
{
    let mut t = t0;
    let mut y = y0;
    if t1 == t0 {
        return Ok((t, y));
    }
    let dir = (t1 - t0).signum();
    let mut f0 = f(t, &y);
    let mut h_abs = match ctl.fixed_step {
        Some(h) => h,
        None => initial_step(f, t, &y, &f0, dir, ctl),
    };
    let mut rejected = false;
    let mut steps = 0usize;

    while dir * (t1 - t) > 0.0 {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(Error::ToleranceNotMet { tol: ctl.rtol, t });
        }
        let min_step = 10.0 * (next_after(t, dir) - t).abs();
        h_abs = h_abs.min(ctl.max_step);
        if h_abs < min_step {
            return Err(Error::StepSizeUnderflow { t, h: h_abs });
        }
        let mut h = dir * h_abs;
        let mut t_new = t + h;
        if dir * (t_new - t1) > 0.0 {
            t_new = t1;
        }
        h = t_new - t;

        let (mut y_new, k) = rk_step(f, t, &y, &f0, h);
        if let Some(fixed) = ctl.fixed_step {
            project(&mut y_new);
            let y_prev = y;
            let t_prev = t;
            t = t_new;
            y = y_new;
            f0 = f(t, &y);
            h_abs = fixed;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::ToleranceNotMet { tol: 0.0, t });
            }
            if observe(Accepted {
                t_prev,
                y_prev: &y_prev,
                t,
                y: &y,
            })
            .is_break()
            {
                break;
            }
            continue;
        }

        let f_new = f(t_new, &y_new);
        let err = error_norm(&k, &f_new, h, &y, &y_new, ctl);
        if err.is_finite() && err < 1.0 {
            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(ERROR_EXPONENT)).min(MAX_FACTOR)
            };
            if rejected {
                factor = factor.min(1.0);
            }
            h_abs *= factor;
            rejected = false;

            project(&mut y_new);
            let y_prev = y;
            let t_prev = t;
            t = t_new;
            y = y_new;
            f0 = f(t, &y);
            if observe(Accepted {
                t_prev,
                y_prev: &y_prev,
                t,
                y: &y,
            })
            .is_break()
            {
                break;
            }
        } else {
            let factor = if err.is_finite() {
                (SAFETY * err.powf(ERROR_EXPONENT)).max(MIN_FACTOR)
            } else {
                MIN_FACTOR
            };
            h_abs *= factor;
            rejected = true;
        }
    }
    Ok((t, y))
}

fn next_after(t: f64, dir: f64) -> f64 {
    if t == 0.0 {
        return dir * f64::MIN_POSITIVE;
    }
    let bits = t.to_bits();
    let up = (t > 0.0) == (dir > 0.0);
    f64::from_bits(if up { bits + 1 } else { bits - 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl(tol: f64) -> Control {
        Control {
            rtol: tol,
            atol: tol,
            max_step: f64::INFINITY,
            fixed_step: None,
            max_steps: 1_000_000,
        }
    }

    #[test]
    fn tableau_consistency() {
        for s in 0..STAGES {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-14, "row {s}: {row} vs {}", C[s]);
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(E5.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn exponential_decay() {
        let f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let (t, y) = solve(
            &f,
            0.0,
            [1.0],
            5.0,
            &ctl(1e-12),
            |_| {},
            |_| ControlFlow::Continue(()),
        )
        .unwrap();
        assert_eq!(t, 5.0);
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let (_, y) = solve(
            &f,
            0.0,
            [1.0, 0.0],
            -3.0,
            &ctl(1e-12),
            |_| {},
            |_| ControlFlow::Continue(()),
        )
        .unwrap();
        assert!((y[0] - 3.0f64.cos()).abs() < 1e-11);
        assert!((y[1] - 3.0f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn fixed_step_is_eighth_order() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let err = |h: f64| {
            let c = Control {
                fixed_step: Some(h),
                ..ctl(1.0)
            };
            let (_, y) = solve(
                &f,
                0.0,
                [1.0, 0.0],
                4.0,
                &c,
                |_| {},
                |_| ControlFlow::Continue(()),
            )
            .unwrap();
            (y[0] - 4.0f64.cos()).abs()
        };
        let ratio = err(0.4) / err(0.2);
        assert!(ratio > 128.0, "ratio {ratio}");
    }
}
