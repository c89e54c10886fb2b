//! Rolling of an axisymmetric ellipsoid on a horizontal plane, in two
//! models: frictionless sliding ([`smooth`]) and rolling without slipping
//! ([`rough`]).
//!
//! The crate reconstructs all first integrals (including the non-algebraic
//! integrals of the rolling model), builds the bifurcation diagrams in
//! integral space, and measures the monodromy around the focus singularities
//! by following the Poincaré map on a torus transversal to the flow.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod body;
pub mod cli;
pub mod config;
pub mod error;
pub mod flow;
pub mod model;
pub mod monodromy;
pub mod output;
pub mod reproduce;
pub mod roots;
pub mod rough;
pub mod smooth;
pub mod svg;
pub mod torus;

pub use body::{euler_phi, gamma_from_angles, BodyParams, BodyState, Trajectory, Vec3};
pub use error::{Error, Result};
pub use flow::{
    integrate, next_section_crossing, CrossingDirection, IntegratorConfig, SectionEvent,
};
pub use model::{Dynamics, ModelKind, Precision};
pub use rough::RoughModel;
pub use smooth::SmoothModel;
