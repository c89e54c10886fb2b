//! Fundamental solution matrix G(γ₃) of the linear system satisfied by the
//! K-variables when γ₃ is taken as the independent variable:
//!
//! ```text
//! K₁' = ρ I3 (b3² − b1²)/b1² · K₂
//! K₂' = m ρ b1⁴ (b3² − b1²)(1 − γ₃²) / (b1² + (b3² − b1²)γ₃²)² · K₁
//! ```
//!
//! with G(0) = Id. The coefficient matrix is trace-free, so det G ≡ 1.

use std::ops::ControlFlow;

use serde::Serialize;

use super::measure_density_at;
use crate::body::BodyParams;
use crate::error::{Error, Result};
use crate::flow::dop853::{self, Control};

/// Tolerance of direct solves used for integral evaluation.
pub const DIRECT_TOL: f64 = 1e-12;

const TABLE_NODES: usize = 512;
const TABLE_EDGE: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalMatrix {
    pub gamma3: f64,
    pub entries: [[f64; 2]; 2],
}

impl FundamentalMatrix {
    pub fn identity(gamma3: f64) -> Self {
        Self {
            gamma3,
            entries: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.entries;
        a * d - b * c
    }

    pub fn inverse(&self) -> [[f64; 2]; 2] {
        let [[a, b], [c, d]] = self.entries;
        let det = self.det();
        [[d / det, -b / det], [-c / det, a / det]]
    }

    /// C = G⁻¹ K.
    pub fn solve(&self, k1: f64, k2: f64) -> (f64, f64) {
        let inv = self.inverse();
        (
            inv[0][0] * k1 + inv[0][1] * k2,
            inv[1][0] * k1 + inv[1][1] * k2,
        )
    }

    /// K = G C.
    pub fn apply(&self, c1: f64, c2: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.entries;
        (a * c1 + b * c2, c * c1 + d * c2)
    }
}

/// Off-diagonal entries (a₁₂, a₂₁) of the coefficient matrix at γ₃.
pub fn coefficients(gamma3: f64, params: &BodyParams) -> (f64, f64) {
    let BodyParams { i3, b1, b3, m, .. } = *params;
    let (b1s, b3s) = (b1 * b1, b3 * b3);
    let rho = measure_density_at(gamma3, params);
    let denom = b1s + (b3s - b1s) * gamma3 * gamma3;
    let a12 = rho * i3 * (b3s - b1s) / b1s;
    let a21 = m * rho * b1s * b1s * (b3s - b1s) * (1.0 - gamma3 * gamma3) / (denom * denom);
    (a12, a21)
}

fn rhs(gamma3: f64, y: &[f64; 4], params: &BodyParams) -> [f64; 4] {
    let (a12, a21) = coefficients(gamma3, params);
    // y = [g11, g12, g21, g22]; G' = A G
    [a12 * y[2], a12 * y[3], a21 * y[0], a21 * y[1]]
}

fn control(tol: f64) -> Control {
    Control {
        rtol: tol,
        atol: tol,
        max_step: f64::INFINITY,
        fixed_step: None,
        max_steps: 200_000,
    }
}

fn propagate(from: f64, g: [f64; 4], to: f64, params: &BodyParams, tol: f64) -> Result<[f64; 4]> {
    let f = |t: f64, y: &[f64; 4]| rhs(t, y, params);
    let (_, y) = dop853::solve(
        &f,
        from,
        g,
        to,
        &control(tol),
        |_| {},
        |_| ControlFlow::Continue(()),
    )?;
    Ok(y)
}

fn from_flat(gamma3: f64, y: [f64; 4]) -> FundamentalMatrix {
    FundamentalMatrix {
        gamma3,
        entries: [[y[0], y[1]], [y[2], y[3]]],
    }
}

/// Integrates the K-system from γ₃ = 0 (G = Id) to `gamma3` at local
/// tolerance `tol`.
pub fn fundamental_matrix(gamma3: f64, params: &BodyParams, tol: f64) -> Result<FundamentalMatrix> {
    if !(gamma3 > -1.0 && gamma3 < 1.0) {
        return Err(Error::Config(format!(
            "gamma3 must lie in (-1, 1), got {gamma3}"
        )));
    }
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::Config(format!(
            "tolerance must lie in (0, 1e-2], got {tol}"
        )));
    }
    if gamma3 == 0.0 {
        return Ok(FundamentalMatrix::identity(0.0));
    }
    let y = propagate(0.0, [1.0, 0.0, 0.0, 1.0], gamma3, params, tol)?;
    Ok(from_flat(gamma3, y))
}

/// Piecewise-cubic Hermite table of G on [−1+1e−6, 1−1e−6], using the
/// exact derivative G' = A G at the nodes.
#[derive(Debug, Clone)]
pub struct GTable {
    params: BodyParams,
    nodes: Vec<f64>,
    values: Vec<[f64; 4]>,
    slopes: Vec<[f64; 4]>,
}

impl GTable {
    pub fn build(params: &BodyParams) -> Result<Self> {
        let n = TABLE_NODES;
        let step = 2.0 * TABLE_EDGE / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| -TABLE_EDGE + step * i as f64).collect();
        let mut values = vec![[0.0; 4]; n];
        let first_pos = nodes.partition_point(|&x| x < 0.0);

        let mut march = |range: &mut dyn Iterator<Item = usize>| -> Result<()> {
            let (mut at, mut g) = (0.0, [1.0, 0.0, 0.0, 1.0]);
            for i in range {
                g = propagate(at, g, nodes[i], params, DIRECT_TOL)?;
                at = nodes[i];
                values[i] = g;
            }
            Ok(())
        };
        march(&mut (first_pos..n))?;
        march(&mut (0..first_pos).rev())?;

        let slopes = nodes
            .iter()
            .zip(&values)
            .map(|(&x, y)| rhs(x, y, params))
            .collect();
        Ok(Self {
            params: *params,
            nodes,
            values,
            slopes,
        })
    }

    pub fn covers(&self, gamma3: f64) -> bool {
        gamma3 >= self.nodes[0] && gamma3 <= self.nodes[self.nodes.len() - 1]
    }

    pub fn params(&self) -> &BodyParams {
        &self.params
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Interpolated G(γ₃). `gamma3` is clamped to the table range.
    pub fn eval(&self, gamma3: f64) -> FundamentalMatrix {
        let n = self.nodes.len();
        let x = gamma3.clamp(self.nodes[0], self.nodes[n - 1]);
        let step = self.nodes[1] - self.nodes[0];
        let i = (((x - self.nodes[0]) / step).floor() as usize).min(n - 2);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut y = [0.0; 4];
        for (k, yk) in y.iter_mut().enumerate() {
            *yk = h00 * self.values[i][k]
                + h10 * h * self.slopes[i][k]
                + h01 * self.values[i + 1][k]
                + h11 * h * self.slopes[i + 1][k];
        }
        from_flat(gamma3, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn default_body() -> BodyParams {
        BodyParams::default()
    }

    #[test]
    fn identity_at_zero() {
        let g = fundamental_matrix(0.0, &default_body(), 1e-12).unwrap();
        assert_eq!(g.entries, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn unit_determinant() {
        for g3 in [0.1, -0.1, 0.5, -0.5, 0.9, -0.9, 0.999, -0.999] {
            let g = fundamental_matrix(g3, &default_body(), 1e-12).unwrap();
            assert!((g.det() - 1.0).abs() <= 1e-8, "det G({g3}) = {}", g.det());
        }
    }

    #[test]
    fn first_order_taylor_expansion() {
        let p = default_body();
        let eps = 1e-4;
        let (a12, a21) = coefficients(0.0, &p);
        let g = fundamental_matrix(eps, &p, 1e-12).unwrap();
        let expect = [[1.0, a12 * eps], [a21 * eps, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(g.entries[i][j], expect[i][j], epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn coefficients_finite_at_poles() {
        let (a12, a21) = coefficients(1.0, &default_body());
        assert!(a12.is_finite() && a21 == 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(fundamental_matrix(1.0, &default_body(), 1e-12).is_err());
        assert!(fundamental_matrix(0.3, &default_body(), 0.5).is_err());
    }

    #[test]
    fn table_matches_direct_solves() {
        let p = default_body();
        let table = GTable::build(&p).unwrap();
        let nodes = table.nodes();
        let mut worst = 0.0f64;
        for w in nodes.windows(2).step_by(7) {
            let mid = 0.5 * (w[0] + w[1]);
            let direct = fundamental_matrix(mid, &p, 1e-12).unwrap();
            let interp = table.eval(mid);
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((direct.entries[i][j] - interp.entries[i][j]).abs());
                }
            }
        }
        assert!(worst <= 1e-8, "interpolation error {worst:e}");
    }

    #[test]
    fn apply_and_solve_are_inverse() {
        let g = fundamental_matrix(0.7, &default_body(), 1e-12).unwrap();
        let (k1, k2) = g.apply(0.3, -1.2);
        let (c1, c2) = g.solve(k1, k2);
        assert_abs_diff_eq!(c1, 0.3, epsilon = 1e-13);
        assert_abs_diff_eq!(c2, -1.2, epsilon = 1e-13);
    }
}
