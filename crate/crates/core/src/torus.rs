//! Points on an invariant torus with prescribed integral values, placed on
//! the section γ̇₃ = 0 at a turning point of the nutation.

use serde::{Deserialize, Serialize};

use crate::body::{gamma_from_angles, BodyState, Mat3, Vec3};
use crate::error::{Error, Result};
use crate::model::{Dynamics, ModelKind, Precision};
use crate::roots::{brent, scan_at};

/// Number of γ₃ samples used to bracket turning points.
pub const SCAN_POINTS: usize = 400;
/// The uniform scan covers (−1 + SCAN_MARGIN, 1 − SCAN_MARGIN); beyond it
/// points approach the poles geometrically down to 1 − |γ₃| = 1e−14.
pub const SCAN_MARGIN: f64 = 1e-4;

/// Abscissae of the turning-point scan. Tori whose orbits pass close to a
/// pole have their turning point inside a thin layer at γ₃ = ±1.
fn scan_abscissae() -> Vec<f64> {
    let lo = -1.0 + SCAN_MARGIN;
    let step = 2.0 * (1.0 - SCAN_MARGIN) / (SCAN_POINTS - 1) as f64;
    let tail: Vec<f64> = (5..=14).rev().map(|k| 1.0 - 10f64.powi(-k)).collect();
    let mut xs: Vec<f64> = tail.iter().map(|x| -x).collect();
    xs.extend((0..SCAN_POINTS).map(|i| {
        if i == SCAN_POINTS - 1 {
            -lo
        } else {
            lo + step * i as f64
        }
    }));
    xs.extend(tail.iter().rev());
    xs
}

/// A point (j₁, j₂, h) of integral space. Smooth: (p_ψ, p_φ, h);
/// rough: (c₁, c₂, h).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralPoint {
    pub model: ModelKind,
    pub j1: f64,
    pub j2: f64,
    pub h: f64,
}

/// Which turning point of γ₃ on the torus to start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Minimum of γ₃ over the torus.
    LowerTurning,
    /// Maximum of γ₃ over the torus.
    UpperTurning,
}

/// Solves for M at the normal γ(γ₃, φ) such that γ̇₃ = 0 and the two linear
/// integrals take the values (j₁, j₂).
pub fn momentum_on_section<D: Dynamics + ?Sized>(
    model: &D,
    gamma3: f64,
    phi: f64,
    j1: f64,
    j2: f64,
    precision: Precision,
) -> Result<BodyState> {
    if !(gamma3 > -1.0 && gamma3 < 1.0) {
        return Err(Error::SingularSystem { gamma3 });
    }
    let gamma = gamma_from_angles(gamma3.acos(), phi);
    let covectors = model.integral_covectors(&gamma, precision)?;
    momentum_for_covectors(model, &gamma, covectors, j1, j2)
}

/// Section state at the normal `gamma` with (L₁, M) = j₁ and (L₂, M) = j₂
/// for arbitrary covectors L.
pub fn momentum_for_covectors<D: Dynamics + ?Sized>(
    model: &D,
    gamma: &Vec3,
    covectors: [Vec3; 2],
    j1: f64,
    j2: f64,
) -> Result<BodyState> {
    let gamma3 = gamma.z;
    let w = Vec3::new(-gamma.y, gamma.x, 0.0);
    let section_row = model.mobility(gamma) * w;
    let [l1, l2] = covectors;
    let sys = Mat3::from_rows(&[section_row.transpose(), l1.transpose(), l2.transpose()]);
    let scale = section_row.norm() * l1.norm() * l2.norm();
    if !(sys.determinant().abs() > 1e-13 * scale) {
        return Err(Error::SingularSystem { gamma3 });
    }
    let m = sys
        .lu()
        .solve(&Vec3::new(0.0, j1, j2))
        .ok_or(Error::SingularSystem { gamma3 })?;
    Ok(BodyState::new(m, *gamma))
}

/// Energy of the section state at γ₃; the effective potential of the
/// reduced γ₃-motion.
pub fn section_energy<D: Dynamics + ?Sized>(
    model: &D,
    gamma3: f64,
    j1: f64,
    j2: f64,
    precision: Precision,
) -> Result<f64> {
    let state = momentum_on_section(model, gamma3, 0.0, j1, j2, precision)?;
    Ok(model.energy(&state))
}

/// Finds the turning point γ₃* of the torus `point` on the chosen branch
/// and returns the section state there with self-rotation angle `phi`.
pub fn state_on_torus<D: Dynamics + ?Sized>(
    model: &D,
    point: &IntegralPoint,
    branch: Branch,
    phi: f64,
) -> Result<BodyState> {
    let gamma3 = turning_point(model, point, branch)?;
    momentum_on_section(model, gamma3, phi, point.j1, point.j2, Precision::Exact)
}

/// γ₃ of the turning point on the given branch.
pub fn turning_point<D: Dynamics + ?Sized>(
    model: &D,
    point: &IntegralPoint,
    branch: Branch,
) -> Result<f64> {
    let IntegralPoint { j1, j2, h, .. } = *point;
    let fast = |g3: f64| {
        section_energy(model, g3, j1, j2, Precision::Fast)
            .map(|e| e - h)
            .unwrap_or(f64::NAN)
    };
    let (samples, brackets) = scan_at(fast, &scan_abscissae());

    let chosen = match branch {
        Branch::LowerTurning => brackets.iter().find(|b| b.f_lo > 0.0),
        Branch::UpperTurning => brackets.iter().rev().find(|b| b.f_hi > 0.0),
    };
    let Some(bracket) = chosen else {
        let min = samples
            .iter()
            .map(|s| s.1)
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        return Err(if min > 0.0 {
            Error::NoRoot { h, min: min + h }
        } else {
            Error::RootNotBracketed
        });
    };

    let exact = |g3: f64| section_energy(model, g3, j1, j2, Precision::Exact).map(|e| e - h);
    let (f_lo, f_hi) = (exact(bracket.lo)?, exact(bracket.hi)?);
    let root = if f_lo * f_hi <= 0.0 {
        brent(
            |g3| exact(g3).unwrap_or(f64::NAN),
            bracket.lo,
            bracket.hi,
            f_lo,
            f_hi,
            1e-14,
            1e-14,
        )
    } else {
        // table and direct solve disagree on the sign at a bracket end
        brent(
            fast,
            bracket.lo,
            bracket.hi,
            bracket.f_lo,
            bracket.f_hi,
            1e-14,
            1e-14,
        )
    };
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{euler_phi, BodyParams};
    use crate::roots::scan;
    use crate::rough::{k_variables, RoughModel};
    use crate::smooth::{integrals_smooth, reduced_energy_smooth, SmoothModel};
    use approx::assert_abs_diff_eq;

    fn smooth() -> SmoothModel {
        SmoothModel::new(BodyParams::default())
    }

    #[test]
    fn homogeneous_section_state() {
        let m = smooth();
        let s = momentum_on_section(&m, 0.0, 0.0, 0.0, 0.0, Precision::Exact).unwrap();
        assert_eq!(integrals_smooth(&s), (0.0, 0.0));
        assert!(m.gamma3_rate(&s).abs() < 1e-15);
    }

    #[test]
    fn section_state_round_trip() {
        let m = smooth();
        for &(g3, phi, j1, j2) in &[
            (0.3, 0.0, 0.157, 0.2),
            (-0.8, 1.3, -0.4, 0.157),
            (0.95, -2.0, 0.5, 0.5),
        ] {
            let s = momentum_on_section(&m, g3, phi, j1, j2, Precision::Exact).unwrap();
            let (p_phi, p_psi) = integrals_smooth(&s);
            assert_abs_diff_eq!(p_psi, j1, epsilon = 1e-10);
            assert_abs_diff_eq!(p_phi, j2, epsilon = 1e-10);
            assert!(m.gamma3_rate(&s).abs() <= 1e-11);
            assert_abs_diff_eq!(s.gamma.z, g3, epsilon = 1e-15);
            assert_abs_diff_eq!(euler_phi(&s.gamma).unwrap(), phi, epsilon = 1e-14);
        }
    }

    #[test]
    fn rough_section_state_at_equator_matches_k() {
        let model = RoughModel::new(BodyParams::default()).unwrap();
        let s = momentum_on_section(&model, 0.0, 0.7, 0.3, -0.2, Precision::Exact).unwrap();
        let (k1, k2) = k_variables(&s, &model.params);
        assert_abs_diff_eq!(k1, 0.3, epsilon = 1e-13);
        assert_abs_diff_eq!(k2, -0.2, epsilon = 1e-13);
        assert!(model.gamma3_rate(&s).abs() <= 1e-12);
    }

    #[test]
    fn rough_section_state_round_trip() {
        let model = RoughModel::new(BodyParams::default()).unwrap();
        let s = momentum_on_section(&model, -0.6, 0.2, 0.157, 0.3, Precision::Exact).unwrap();
        let (c1, c2) = model.linear_integrals(&s, Precision::Exact).unwrap();
        assert_abs_diff_eq!(c1, 0.157, epsilon = 1e-10);
        assert_abs_diff_eq!(c2, 0.3, epsilon = 1e-10);
    }

    #[test]
    fn symmetric_turning_points_at_zero_momenta() {
        let m = smooth();
        let p = m.params;
        let h = p.m * p.g * p.b1 + 0.25;
        // oracle: scan of the closed-form reduced energy
        let f = |g3: f64| reduced_energy_smooth(g3, 0.0, 0.0, 0.0, &p) - h;
        let (_, br) = scan(f, -0.999, 0.999, 2001);
        assert_eq!(br.len(), 2);
        let upper = brent(f, br[1].lo, br[1].hi, br[1].f_lo, br[1].f_hi, 1e-15, 0.0);
        let lower = brent(f, br[0].lo, br[0].hi, br[0].f_lo, br[0].f_hi, 1e-15, 0.0);
        assert_abs_diff_eq!(lower, -upper, epsilon = 1e-12);

        let point = IntegralPoint {
            model: ModelKind::Smooth,
            j1: 0.0,
            j2: 0.0,
            h,
        };
        let lo = state_on_torus(&m, &point, Branch::LowerTurning, 0.0).unwrap();
        let hi = state_on_torus(&m, &point, Branch::UpperTurning, 0.0).unwrap();
        assert_abs_diff_eq!(lo.gamma.z, lower, epsilon = 1e-11);
        assert_abs_diff_eq!(hi.gamma.z, upper, epsilon = 1e-11);
    }

    #[test]
    fn torus_state_reproduces_integrals() {
        let m = smooth();
        let point = IntegralPoint {
            model: ModelKind::Smooth,
            j1: 0.157,
            j2: 0.2,
            h: 2.0,
        };
        let s = state_on_torus(&m, &point, Branch::LowerTurning, 0.4).unwrap();
        let (p_phi, p_psi) = integrals_smooth(&s);
        assert_abs_diff_eq!(p_psi, point.j1, epsilon = 1e-10);
        assert_abs_diff_eq!(p_phi, point.j2, epsilon = 1e-10);
        assert_abs_diff_eq!(m.energy(&s), point.h, epsilon = 1e-10);
    }

    #[test]
    fn phi_equivariance() {
        let m = smooth();
        let point = IntegralPoint {
            model: ModelKind::Smooth,
            j1: 0.157,
            j2: 0.2,
            h: 2.0,
        };
        let base = state_on_torus(&m, &point, Branch::LowerTurning, 0.0).unwrap();
        let turned = state_on_torus(&m, &point, Branch::LowerTurning, 1.0).unwrap();
        let rotated = base.rotated(1.0);
        assert!((turned.m - rotated.m).norm() <= 1e-10);
        assert!((turned.gamma - rotated.gamma).norm() <= 1e-10);
    }

    #[test]
    fn energy_below_potential_has_no_root() {
        let m = smooth();
        let point = IntegralPoint {
            model: ModelKind::Smooth,
            j1: 0.157,
            j2: 0.2,
            h: 0.5,
        };
        let err = state_on_torus(&m, &point, Branch::LowerTurning, 0.0).unwrap_err();
        assert!(matches!(err, Error::NoRoot { .. }), "{err:?}");
    }

    #[test]
    fn rough_torus_state_reproduces_integrals() {
        let model = RoughModel::new(BodyParams::default()).unwrap();
        let point = IntegralPoint {
            model: ModelKind::Rough,
            j1: 0.157,
            j2: 0.3,
            h: 2.0,
        };
        let s = state_on_torus(&model, &point, Branch::LowerTurning, 0.0).unwrap();
        let (c1, c2) = model.linear_integrals(&s, Precision::Exact).unwrap();
        assert_abs_diff_eq!(c1, point.j1, epsilon = 1e-10);
        assert_abs_diff_eq!(c2, point.j2, epsilon = 1e-10);
        assert_abs_diff_eq!(model.energy(&s), point.h, epsilon = 1e-10);
    }
}
