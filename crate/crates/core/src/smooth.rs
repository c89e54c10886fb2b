//! Ellipsoid of revolution sliding on a frictionless plane.
//!
//! The motion is Hamiltonian with respect to the Lie–Poisson bracket of
//! e(3), with Casimirs (M, γ) and γ², plus the Lagrange integral M₃.

use crate::body::{BodyParams, BodyState, Mat3, StateRate, Vec3};
use crate::error::Result;
use crate::model::{Dynamics, ModelKind, Precision};

/// Values of the three first integrals of the smooth model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SmoothIntegrals {
    pub p_phi: f64,
    pub p_psi: f64,
    pub h: f64,
}

pub fn contact_vector(gamma: &Vec3, params: &BodyParams) -> Vec3 {
    params.contact_vector(gamma)
}

/// A = (I + m a⊗a)⁻¹ with a = γ × r, by the rank-one update formula.
fn mobility_smooth(gamma: &Vec3, params: &BodyParams) -> (Mat3, Vec3) {
    let r = params.contact_vector(gamma);
    let a = gamma.cross(&r);
    let inv_i = params.inertia().map(|v| 1.0 / v);
    let u = inv_i.component_mul(&a);
    let denom = 1.0 + params.m * a.dot(&u);
    let mob = Mat3::from_diagonal(&inv_i) - (params.m / denom) * u * u.transpose();
    (mob, a)
}

/// Energy H = ½(M, AM) − mg(r, γ).
pub fn energy_smooth(state: &BodyState, params: &BodyParams) -> f64 {
    let (mob, _) = mobility_smooth(&state.gamma, params);
    let r = params.contact_vector(&state.gamma);
    0.5 * state.m.dot(&(mob * state.m)) - params.m * params.g * r.dot(&state.gamma)
}

/// Analytic (∂H/∂M, ∂H/∂γ).
pub fn energy_gradient_smooth(state: &BodyState, params: &BodyParams) -> (Vec3, Vec3) {
    let gamma = &state.gamma;
    let (mob, a) = mobility_smooth(gamma, params);
    let omega = mob * state.m;
    let r = params.contact_vector(gamma);
    let jac = params.contact_jacobian(gamma);
    let kinetic = -params.m * omega.dot(&a) * (r.cross(&omega) + jac * omega.cross(gamma));
    let potential = -params.m * params.g * r;
    (omega, kinetic + potential)
}

/// Ṁ = M × ∂H/∂M + γ × ∂H/∂γ,  γ̇ = γ × ∂H/∂M.
pub fn field_smooth(state: &BodyState, params: &BodyParams) -> StateRate {
    let (dh_dm, dh_dg) = energy_gradient_smooth(state, params);
    StateRate {
        m: state.m.cross(&dh_dm) + state.gamma.cross(&dh_dg),
        gamma: state.gamma.cross(&dh_dm),
    }
}

/// (p_φ, p_ψ) = (M₃, (M, γ)).
pub fn integrals_smooth(state: &BodyState) -> (f64, f64) {
    (state.m.z, state.m.dot(&state.gamma))
}

/// Energy in the coordinates (γ₃, γ̇₃, φ, p_φ, p_ψ).
pub fn reduced_energy_smooth(
    gamma3: f64,
    gamma3_dot: f64,
    p_phi: f64,
    p_psi: f64,
    params: &BodyParams,
) -> f64 {
    let BodyParams {
        i1,
        i3,
        b1,
        b3,
        m,
        g,
    } = *params;
    let d = b1 * b1 - b3 * b3;
    let s2 = b1 * b1 - d * gamma3 * gamma3;
    let sin2 = 1.0 - gamma3 * gamma3;
    let kinetic_coef = m * d * d * gamma3 * gamma3 / s2 + i1 / sin2;
    let spin = p_psi - p_phi * gamma3;
    0.5 * kinetic_coef * gamma3_dot * gamma3_dot
        + spin * spin / (2.0 * i1 * sin2)
        + p_phi * p_phi / (2.0 * i3)
        + m * g * s2.sqrt()
}

/// ∂/∂γ₃ of the reduced energy on γ̇₃ = 0; its zeros are the regular
/// precessions.
pub fn reduced_energy_slope_smooth(
    gamma3: f64,
    p_phi: f64,
    p_psi: f64,
    params: &BodyParams,
) -> f64 {
    let BodyParams {
        i1, b1, b3, m, g, ..
    } = *params;
    let sin2 = 1.0 - gamma3 * gamma3;
    let s = params.height(gamma3);
    (p_psi - p_phi * gamma3) * (p_psi * gamma3 - p_phi) / (i1 * sin2 * sin2)
        + m * g * (b3 * b3 - b1 * b1) * gamma3 / s
}

/// Smooth-plane model; j₁ = p_ψ, j₂ = p_φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothModel {
    pub params: BodyParams,
}

impl SmoothModel {
    pub fn new(params: BodyParams) -> Self {
        Self { params }
    }

    pub fn integrals(&self, state: &BodyState) -> SmoothIntegrals {
        let (p_phi, p_psi) = integrals_smooth(state);
        SmoothIntegrals {
            p_phi,
            p_psi,
            h: energy_smooth(state, &self.params),
        }
    }
}

impl Dynamics for SmoothModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Smooth
    }

    fn params(&self) -> &BodyParams {
        &self.params
    }

    fn mobility(&self, gamma: &Vec3) -> Mat3 {
        mobility_smooth(gamma, &self.params).0
    }

    fn rate(&self, state: &BodyState) -> StateRate {
        field_smooth(state, &self.params)
    }

    fn integral_covectors(&self, gamma: &Vec3, _precision: Precision) -> Result<[Vec3; 2]> {
        Ok([*gamma, Vec3::z()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{gamma_from_angles, rotate_about_axis};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn default_body() -> BodyParams {
        BodyParams::default()
    }

    /// Central differences of H; the independent route for the gradient.
    fn gradient_fd(state: &BodyState, params: &BodyParams) -> (Vec3, Vec3) {
        let h = 1e-6;
        let mut dm = Vec3::zeros();
        let mut dg = Vec3::zeros();
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h * state.m[i].abs().max(1.0);
            let plus = energy_smooth(&BodyState::new(state.m + e, state.gamma), params);
            let minus = energy_smooth(&BodyState::new(state.m - e, state.gamma), params);
            dm[i] = (plus - minus) / (2.0 * e[i]);
            let mut e = Vec3::zeros();
            e[i] = h;
            let plus = energy_smooth(&BodyState::new(state.m, state.gamma + e), params);
            let minus = energy_smooth(&BodyState::new(state.m, state.gamma - e), params);
            dg[i] = (plus - minus) / (2.0 * h);
        }
        (dm, dg)
    }

    fn generic_state() -> BodyState {
        BodyState::new(Vec3::new(0.4, -0.7, 0.3), gamma_from_angles(1.1, 0.6))
    }

    #[test]
    fn energy_at_vertical_rotation() {
        let p = default_body();
        for p_phi in [0.0, 0.157, -1.3] {
            let h = energy_smooth(&BodyState::vertical(p_phi, true), &p);
            assert_abs_diff_eq!(
                h,
                p.m * p.g * p.b3 + p_phi * p_phi / (2.0 * p.i3),
                epsilon = 1e-14
            );
        }
        let h = energy_smooth(&BodyState::vertical(0.157, true), &p);
        assert_abs_diff_eq!(h, 2.0 + 0.157 * 0.157 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h, 2.008216333333333, epsilon = 1e-12);
    }

    #[test]
    fn energy_at_rest_on_side() {
        let state = BodyState::new(Vec3::zeros(), Vec3::x());
        assert_abs_diff_eq!(energy_smooth(&state, &default_body()), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mass_enters_the_kinetic_term() {
        let p = BodyParams { m: 2.5, ..default_body() };
        let state = generic_state();
        let r = p.contact_vector(&state.gamma);
        let a = state.gamma.cross(&r);
        let full_inertia = Mat3::from_diagonal(&p.inertia()) + p.m * a * a.transpose();
        let omega = full_inertia.try_inverse().unwrap() * state.m;
        let expect = 0.5 * omega.dot(&(full_inertia * omega)) - p.m * p.g * r.dot(&state.gamma);
        assert_abs_diff_eq!(energy_smooth(&state, &p), expect, epsilon = 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = BodyParams {
            m: 1.3,
            g: 0.9,
            ..default_body()
        };
        for state in [
            generic_state(),
            BodyState::new(Vec3::new(-1.0, 0.2, 0.8), gamma_from_angles(2.4, -2.0)),
        ] {
            let (am, ag) = energy_gradient_smooth(&state, &p);
            let (fm, fg) = gradient_fd(&state, &p);
            assert_abs_diff_eq!(am, fm, epsilon = 1e-8);
            // only the tangential part of ∂H/∂γ enters the flow
            assert_abs_diff_eq!(
                state.gamma.cross(&ag),
                state.gamma.cross(&fg),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn vertical_rotation_is_equilibrium() {
        let rate = field_smooth(&BodyState::vertical(0.8, true), &default_body());
        assert_abs_diff_eq!(rate.m, Vec3::zeros(), epsilon = 1e-15);
        assert_abs_diff_eq!(rate.gamma, Vec3::zeros(), epsilon = 1e-15);
    }

    #[test]
    fn field_respects_integrals() {
        let p = default_body();
        let state = generic_state();
        let rate = field_smooth(&state, &p);
        assert!(rate.m.z.abs() < 1e-10);
        assert!(state.gamma.dot(&rate.gamma).abs() < 1e-12);
        let d_psi = rate.m.dot(&state.gamma) + state.m.dot(&rate.gamma);
        assert!(d_psi.abs() < 1e-12);
        let (dm, dg) = energy_gradient_smooth(&state, &p);
        assert!((dm.dot(&rate.m) + dg.dot(&rate.gamma)).abs() < 1e-12);
    }

    #[test]
    fn time_reversal() {
        let p = default_body();
        let s = generic_state();
        let fwd = field_smooth(&s, &p);
        let rev = field_smooth(&BodyState::new(-s.m, s.gamma), &p);
        assert_abs_diff_eq!(rev.gamma, -fwd.gamma, epsilon = 1e-14);
        assert_abs_diff_eq!(rev.m, fwd.m, epsilon = 1e-14);
    }

    #[test]
    fn integral_values() {
        assert_eq!(
            integrals_smooth(&BodyState::vertical(0.157, true)),
            (0.157, 0.157)
        );
        assert_eq!(
            integrals_smooth(&BodyState::new(Vec3::new(1.0, 2.0, 3.0), Vec3::z())),
            (3.0, 3.0)
        );
        assert_eq!(
            integrals_smooth(&BodyState::new(Vec3::x(), Vec3::y())),
            (0.0, 0.0)
        );
    }

    #[test]
    fn reduced_energy_minimum_on_side() {
        let p = default_body();
        assert_abs_diff_eq!(
            reduced_energy_smooth(0.0, 0.0, 0.0, 0.0, &p),
            p.m * p.g * p.b1
        );
    }

    /// Builds the state with prescribed (γ₃, γ̇₃, φ, p_φ, p_ψ) by solving the
    /// linear conditions on M directly; independent of the torus module.
    fn state_from_reduced(
        g3: f64,
        g3dot: f64,
        phi: f64,
        p_phi: f64,
        p_psi: f64,
        p: &BodyParams,
    ) -> BodyState {
        let gamma = gamma_from_angles(g3.acos(), phi);
        let mob = mobility_smooth(&gamma, p).0;
        let w = Vec3::new(-gamma.y, gamma.x, 0.0);
        let row0 = mob * w;
        let sys = Mat3::from_rows(&[row0.transpose(), gamma.transpose(), Vec3::z().transpose()]);
        let m = sys.lu().solve(&Vec3::new(g3dot, p_psi, p_phi)).unwrap();
        BodyState::new(m, gamma)
    }

    #[test]
    fn reduced_energy_matches_full_energy_on_and_off_section() {
        let p = BodyParams {
            m: 1.3,
            g: 0.9,
            ..default_body()
        };
        for &(g3, g3dot, phi, p_phi, p_psi) in &[
            (0.3, 0.0, 0.2, 0.157, 0.157),
            (-0.6, 0.0, 1.7, 0.4, -0.2),
            (0.3, 0.25, 0.2, 0.157, 0.157),
            (-0.8, -0.6, 2.5, -0.3, 0.9),
        ] {
            let state = state_from_reduced(g3, g3dot, phi, p_phi, p_psi, &p);
            let full = energy_smooth(&state, &p);
            let reduced = reduced_energy_smooth(g3, g3dot, p_phi, p_psi, &p);
            assert_abs_diff_eq!(full, reduced, epsilon = 1e-12);
        }
    }

    #[test]
    fn reduced_energy_kinetic_block() {
        let p = default_body();
        let (g3, g3dot) = (0.45, 0.3);
        let d = p.b1 * p.b1 - p.b3 * p.b3;
        let coef = p.m * d * d * g3 * g3 / (p.b1 * p.b1 - d * g3 * g3) + p.i1 / (1.0 - g3 * g3);
        let diff = reduced_energy_smooth(g3, g3dot, 0.2, 0.1, &p)
            - reduced_energy_smooth(g3, 0.0, 0.2, 0.1, &p);
        assert_abs_diff_eq!(diff, 0.5 * coef * g3dot * g3dot, epsilon = 1e-14);
    }

    #[test]
    fn slope_matches_central_differences() {
        let p = default_body();
        for &(g3, p_phi, p_psi) in &[(0.2, 0.157, 0.157), (-0.7, 0.3, -0.1), (0.9, 1.0, 0.4)] {
            let h = 1e-6;
            let fd = (reduced_energy_smooth(g3 + h, 0.0, p_phi, p_psi, &p)
                - reduced_energy_smooth(g3 - h, 0.0, p_phi, p_psi, &p))
                / (2.0 * h);
            assert_abs_diff_eq!(
                reduced_energy_slope_smooth(g3, p_phi, p_psi, &p),
                fd,
                epsilon = 1e-7
            );
        }
    }

    proptest! {
        #[test]
        fn so2_equivariance(
            m1 in -1.0f64..1.0, m2 in -1.0f64..1.0, m3 in -1.0f64..1.0,
            theta in 0.1f64..3.0, phi in -3.0f64..3.0, angle in -3.0f64..3.0,
        ) {
            let p = default_body();
            let s = BodyState::new(Vec3::new(m1, m2, m3), gamma_from_angles(theta, phi));
            let r = s.rotated(angle);
            prop_assert!((energy_smooth(&s, &p) - energy_smooth(&r, &p)).abs() <= 1e-12);
            let (a1, a2) = integrals_smooth(&s);
            let (b1, b2) = integrals_smooth(&r);
            prop_assert!((a1 - b1).abs() <= 1e-12 && (a2 - b2).abs() <= 1e-12);
            let fr = field_smooth(&r, &p);
            let rf = field_smooth(&s, &p);
            prop_assert!((fr.m - rotate_about_axis(&rf.m, angle)).norm() <= 1e-12);
            prop_assert!((fr.gamma - rotate_about_axis(&rf.gamma, angle)).norm() <= 1e-12);
        }
    }
}
