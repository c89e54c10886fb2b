//! Ellipsoid of revolution rolling without slipping.
//!
//! Besides the energy the system keeps an invariant measure and two first
//! integrals that are linear in M with non-algebraic coefficients in γ₃.
//! They are recovered by integrating a 2×2 linear system in γ₃ (see
//! [`fundamental`]).

pub mod fundamental;

use serde::Serialize;

use crate::body::{BodyParams, BodyState, Mat3, StateRate, Vec3};
use crate::error::Result;
use crate::model::{Dynamics, ModelKind, Precision};

pub use fundamental::{fundamental_matrix, FundamentalMatrix, GTable, DIRECT_TOL};

/// Values of the three first integrals of the rough model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoughIntegrals {
    pub c1: f64,
    pub c2: f64,
    pub h: f64,
}

/// I + m(|r|²·Id − r⊗r): maps ω to M.
fn rolling_inertia(gamma: &Vec3, params: &BodyParams) -> Mat3 {
    let r = params.contact_vector(gamma);
    Mat3::from_diagonal(&params.inertia())
        + params.m * (Mat3::identity() * r.norm_squared() - r * r.transpose())
}

fn mobility_rough(gamma: &Vec3, params: &BodyParams) -> Mat3 {
    rolling_inertia(gamma, params)
        .cholesky()
        .expect("rolling inertia is positive definite")
        .inverse()
}

/// Solves M = Iω + m r×(ω×r) for ω.
pub fn omega_from_momentum(state: &BodyState, params: &BodyParams) -> Vec3 {
    rolling_inertia(&state.gamma, params)
        .cholesky()
        .expect("rolling inertia is positive definite")
        .solve(&state.m)
}

/// γ̇ = γ × ω,  Ṁ = M × ω + m ṙ × (ω × r) + mg r × γ.
pub fn field_rough(state: &BodyState, params: &BodyParams) -> StateRate {
    let omega = omega_from_momentum(state, params);
    let r = params.contact_vector(&state.gamma);
    let gamma_dot = state.gamma.cross(&omega);
    let r_dot = params.contact_jacobian(&state.gamma) * gamma_dot;
    let m_dot = state.m.cross(&omega)
        + params.m * r_dot.cross(&omega.cross(&r))
        + params.m * params.g * r.cross(&state.gamma);
    StateRate {
        m: m_dot,
        gamma: gamma_dot,
    }
}

/// H = ½(M, ω) − mg(r, γ).
pub fn energy_rough(state: &BodyState, params: &BodyParams) -> f64 {
    let omega = omega_from_momentum(state, params);
    let r = params.contact_vector(&state.gamma);
    0.5 * state.m.dot(&omega) - params.m * params.g * r.dot(&state.gamma)
}

/// Invariant-measure density ρ = 1/√(I1·I3 + m(r, Ir)).
pub fn measure_density(gamma: &Vec3, params: &BodyParams) -> f64 {
    let r = params.contact_vector(gamma);
    let r_i_r = r.dot(&params.inertia().component_mul(&r));
    1.0 / (params.i1 * params.i3 + params.m * r_i_r).sqrt()
}

/// ρ as a function of γ₃ alone.
pub fn measure_density_at(gamma3: f64, params: &BodyParams) -> f64 {
    let BodyParams {
        i1, i3, b1, b3, m, ..
    } = *params;
    let (b1s, b3s) = (b1 * b1, b3 * b3);
    let sin2 = 1.0 - gamma3 * gamma3;
    let s2 = b1s * sin2 + b3s * gamma3 * gamma3;
    let r_i_r = (i1 * b1s * b1s * sin2 + i3 * b3s * b3s * gamma3 * gamma3) / s2;
    1.0 / (i1 * i3 + m * r_i_r).sqrt()
}

/// Covector of K₁: K₁ = M₁γ₁ + M₂γ₂ + (b3²/b1²)M₃γ₃.
fn k1_covector(gamma: &Vec3, params: &BodyParams) -> Vec3 {
    let ratio = (params.b3 * params.b3) / (params.b1 * params.b1);
    Vec3::new(gamma.x, gamma.y, ratio * gamma.z)
}

/// Covector of K₂ = ω₃/ρ.
fn k2_covector(gamma: &Vec3, params: &BodyParams) -> Vec3 {
    let mob = mobility_rough(gamma, params);
    mob.row(2).transpose() / measure_density(gamma, params)
}

/// Covectors of (K₁, K₂); both integrals are K = G(γ₃)·C.
pub fn k_covectors(gamma: &Vec3, params: &BodyParams) -> [Vec3; 2] {
    [k1_covector(gamma, params), k2_covector(gamma, params)]
}

/// The SO(2)-invariant combinations (K₁, K₂) = (M₁γ₁ + M₂γ₂ + (b3²/b1²)M₃γ₃, ω₃/ρ).
pub fn k_variables(state: &BodyState, params: &BodyParams) -> (f64, f64) {
    let k1 = k1_covector(&state.gamma, params).dot(&state.m);
    let omega = omega_from_momentum(state, params);
    (k1, omega.z / measure_density(&state.gamma, params))
}

/// Evaluates C = G(γ₃)⁻¹ K with G from a direct solve at tolerance `tol`.
/// At the poles G is taken at ±(1 − 1e−9).
pub fn integrals_rough(state: &BodyState, params: &BodyParams, tol: f64) -> Result<(f64, f64)> {
    let g3 = clamp_pole(state.gamma.z);
    let g = fundamental_matrix(g3, params, tol)?;
    let (k1, k2) = k_variables(state, params);
    Ok(g.solve(k1, k2))
}

pub(crate) fn clamp_pole(gamma3: f64) -> f64 {
    gamma3.clamp(-1.0 + 1e-9, 1.0 - 1e-9)
}

/// Rough-plane model; j₁ = c₁, j₂ = c₂.
///
/// Holds an interpolation table of the fundamental matrix for
/// [`Precision::Fast`] evaluations; the table is immutable once built.
#[derive(Debug, Clone)]
pub struct RoughModel {
    pub params: BodyParams,
    table: GTable,
}

impl RoughModel {
    pub fn new(params: BodyParams) -> Result<Self> {
        let table = GTable::build(&params)?;
        Ok(Self { params, table })
    }

    pub fn table(&self) -> &GTable {
        &self.table
    }

    pub fn fundamental(&self, gamma3: f64, precision: Precision) -> Result<FundamentalMatrix> {
        let g3 = clamp_pole(gamma3);
        match precision {
            Precision::Fast if self.table.covers(g3) => Ok(self.table.eval(g3)),
            _ => fundamental_matrix(g3, &self.params, DIRECT_TOL),
        }
    }

    pub fn integrals(&self, state: &BodyState, precision: Precision) -> Result<RoughIntegrals> {
        let (c1, c2) = self.linear_integrals(state, precision)?;
        Ok(RoughIntegrals {
            c1,
            c2,
            h: energy_rough(state, &self.params),
        })
    }
}

impl Dynamics for RoughModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Rough
    }

    fn params(&self) -> &BodyParams {
        &self.params
    }

    fn mobility(&self, gamma: &Vec3) -> Mat3 {
        mobility_rough(gamma, &self.params)
    }

    fn rate(&self, state: &BodyState) -> StateRate {
        field_rough(state, &self.params)
    }

    fn integral_covectors(&self, gamma: &Vec3, precision: Precision) -> Result<[Vec3; 2]> {
        let g = self.fundamental(gamma.z, precision)?;
        let inv = g.inverse();
        let k1 = k1_covector(gamma, &self.params);
        let k2 = k2_covector(gamma, &self.params);
        Ok([
            inv[0][0] * k1 + inv[0][1] * k2,
            inv[1][0] * k1 + inv[1][1] * k2,
        ])
    }
}
