//! The two rolling models behind a common interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::body::{BodyParams, BodyState, Mat3, StateRate, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Frictionless plane; Hamiltonian on e(3).
    Smooth,
    /// Rolling without slipping; nonholonomic.
    Rough,
}

impl ModelKind {
    /// Names of the (first, second) linear integrals.
    pub fn integral_names(self) -> (&'static str, &'static str) {
        match self {
            ModelKind::Smooth => ("p_psi", "p_phi"),
            ModelKind::Rough => ("c1", "c2"),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Smooth => "smooth",
            ModelKind::Rough => "rough",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(ModelKind::Smooth),
            "rough" => Ok(ModelKind::Rough),
            other => Err(Error::Config(format!(
                "unknown model `{other}` (expected smooth|rough)"
            ))),
        }
    }
}

/// Accuracy of non-algebraic integral evaluation (only the rough model
/// distinguishes the two).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Interpolated fundamental matrix, for scans and sweeps.
    Fast,
    /// Direct ODE solve of the fundamental matrix.
    Exact,
}

/// Equations of motion and first integrals of a rolling model.
///
/// In both models the energy is ½(M, ω) − mg(r, γ) with ω = `mobility(γ)`·M,
/// and both linear integrals are linear functionals of M.
pub trait Dynamics: Sync {
    fn kind(&self) -> ModelKind;

    fn params(&self) -> &BodyParams;

    /// Symmetric positive-definite map M ↦ ω at the given normal.
    fn mobility(&self, gamma: &Vec3) -> Mat3;

    fn rate(&self, state: &BodyState) -> StateRate;

    /// Covectors (L₁, L₂) with j₁ = (L₁, M) and j₂ = (L₂, M).
    fn integral_covectors(&self, gamma: &Vec3, precision: Precision) -> Result<[Vec3; 2]>;

    fn omega(&self, state: &BodyState) -> Vec3 {
        self.mobility(&state.gamma) * state.m
    }

    fn energy(&self, state: &BodyState) -> f64 {
        let p = self.params();
        let r = p.contact_vector(&state.gamma);
        0.5 * state.m.dot(&self.omega(state)) - p.m * p.g * r.dot(&state.gamma)
    }

    /// Values (j₁, j₂) of the linear integrals.
    fn linear_integrals(&self, state: &BodyState, precision: Precision) -> Result<(f64, f64)> {
        let [l1, l2] = self.integral_covectors(&state.gamma, precision)?;
        Ok((l1.dot(&state.m), l2.dot(&state.m)))
    }

    /// γ̇₃, the section function of the Poincaré map.
    fn gamma3_rate(&self, state: &BodyState) -> f64 {
        let w = self.omega(state);
        state.gamma.x * w.y - state.gamma.y * w.x
    }
}

/// Constructs the model of the given kind. The rough model builds its
/// fundamental-matrix table here.
pub fn build_model(kind: ModelKind, params: BodyParams) -> Result<Box<dyn Dynamics>> {
    params.validate()?;
    Ok(match kind {
        ModelKind::Smooth => Box::new(crate::smooth::SmoothModel::new(params)),
        ModelKind::Rough => Box::new(crate::rough::RoughModel::new(params)?),
    })
}
