//! Body parameters, phase-space points and the Euler-angle chart on the
//! unit sphere of normals.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Inertia, shape and gravity of a dynamically and geometrically
/// axisymmetric ellipsoid. The centre of mass is the geometric centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodyParams {
    /// Transverse central moment of inertia.
    #[serde(rename = "I1")]
    pub i1: f64,
    /// Axial central moment of inertia.
    #[serde(rename = "I3")]
    pub i3: f64,
    /// Equatorial semi-axis.
    pub b1: f64,
    /// Semi-axis along the symmetry axis.
    pub b3: f64,
    pub m: f64,
    pub g: f64,
}

impl Default for BodyParams {
    /// Prolate body used throughout: I1=1, I3=1.5, b1=1, b3=2, m=1, g=1.
    fn default() -> Self {
        Self {
            i1: 1.0,
            i3: 1.5,
            b1: 1.0,
            b3: 2.0,
            m: 1.0,
            g: 1.0,
        }
    }
}

impl BodyParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("I1", self.i1),
            ("I3", self.i3),
            ("b1", self.b1),
            ("b3", self.b3),
            ("m", self.m),
            ("g", self.g),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// diag(I1, I1, I3)
    pub fn inertia(&self) -> Vec3 {
        Vec3::new(self.i1, self.i1, self.i3)
    }

    /// diag(b1², b1², b3²)
    pub fn shape(&self) -> Vec3 {
        Vec3::new(self.b1 * self.b1, self.b1 * self.b1, self.b3 * self.b3)
    }

    /// Vector from the contact point to the centre of mass for the plane
    /// normal `gamma`, r = −Bγ / √(γ, Bγ).
    pub fn contact_vector(&self, gamma: &Vec3) -> Vec3 {
        let bg = self.shape().component_mul(gamma);
        -bg / gamma.dot(&bg).sqrt()
    }

    /// Jacobian dr/dγ of [`contact_vector`](Self::contact_vector). Symmetric.
    pub fn contact_jacobian(&self, gamma: &Vec3) -> Mat3 {
        let bg = self.shape().component_mul(gamma);
        let s2 = gamma.dot(&bg);
        let s = s2.sqrt();
        Mat3::from_diagonal(&(-self.shape() / s)) + bg * bg.transpose() / (s2 * s)
    }

    /// Height of the centre of mass above the plane, √(γ, Bγ), as a
    /// function of γ₃ alone.
    pub fn height(&self, gamma3: f64) -> f64 {
        let b1s = self.b1 * self.b1;
        let b3s = self.b3 * self.b3;
        (b1s - (b1s - b3s) * gamma3 * gamma3).sqrt()
    }
}

/// A point (M, γ) of the five-dimensional phase space: angular momentum
/// about the contact point and the unit plane normal, both in body axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub m: Vec3,
    pub gamma: Vec3,
}

impl BodyState {
    pub fn new(m: Vec3, gamma: Vec3) -> Self {
        Self { m, gamma }
    }

    /// Relative equilibrium: spin `m3` about the vertical symmetry axis,
    /// standing on the tip `gamma3 = ±1`.
    pub fn vertical(m3: f64, upper: bool) -> Self {
        let g3 = if upper { 1.0 } else { -1.0 };
        Self::new(Vec3::new(0.0, 0.0, m3), Vec3::new(0.0, 0.0, g3))
    }

    pub fn normalized(mut self) -> Self {
        self.gamma /= self.gamma.norm();
        self
    }

    /// Rotation of the body about its symmetry axis by `angle`, applied to
    /// both (M₁, M₂) and (γ₁, γ₂). In the Euler chart this shifts φ by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        Self::new(
            rotate_about_axis(&self.m, angle),
            rotate_about_axis(&self.gamma, angle),
        )
    }
}

/// Time derivative of a [`BodyState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub m: Vec3,
    pub gamma: Vec3,
}

/// One sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: BodyState,
    /// Continuous self-rotation angle (no 2π jumps).
    pub phi_unwrapped: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Rotation of (v₁, v₂) that increases the chart angle φ = atan2(v₁, v₂) by `angle`.
pub fn rotate_about_axis(v: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
}

/// Self-rotation angle φ of the chart γ = (sinθ sinφ, sinθ cosφ, cosθ).
pub fn euler_phi(gamma: &Vec3) -> Result<f64> {
    let rho2 = gamma.x * gamma.x + gamma.y * gamma.y;
    if rho2 < 1e-20 {
        return Err(Error::VerticalState(rho2));
    }
    Ok(gamma.x.atan2(gamma.y))
}

/// Inverse of the chart: γ = (sinθ sinφ, sinθ cosφ, cosθ).
pub fn gamma_from_angles(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * sp, st * cp, ct)
}
