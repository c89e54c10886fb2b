//! Monodromy around the focus threads of the bifurcation diagram.
//!
//! A circle in a plane j_fixed = const of integral space is sampled at
//! angles α. On each torus of the circle the ν cycle is the orbit of the
//! SO(2) action through the lower turning point of γ₃; one application of
//! the Poincaré map on the section γ̇₃ = 0 shifts it along φ by Δφ(α). The
//! monodromy coefficient k is the number of turns α ↦ Δφ(α) makes in φ.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::{euler_phi, BodyState};
use crate::error::{Error, Result};
use crate::flow::{next_section_crossing, CrossingDirection, IntegratorConfig};
use crate::model::{Dynamics, ModelKind, Precision};
use crate::torus::{state_on_torus, Branch, IntegralPoint};

/// Default circle radius in integral space.
pub const DEFAULT_RADIUS: f64 = 0.05;
/// Default number of α samples before refinement.
pub const DEFAULT_SAMPLES: usize = 128;
/// Minimum number of α samples.
pub const MIN_SAMPLES: usize = 64;

/// Which linear integral is held constant along the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedAxis {
    /// j₁ fixed (p_ψ or c₁), j₂ varies.
    J1Fixed,
    /// j₂ fixed (p_φ or c₂), j₁ varies.
    J2Fixed,
}

impl FixedAxis {
    /// Parses a plane name. Each model accepts its own integral names and
    /// the paired names of the other model (p_psi ↔ c1, p_phi ↔ c2), as well
    /// as `j1` and `j2`.
    pub fn from_plane_name(model: ModelKind, name: &str) -> Result<Self> {
        match name {
            "p_psi" | "c1" | "j1" => Ok(FixedAxis::J1Fixed),
            "p_phi" | "c2" | "j2" => Ok(FixedAxis::J2Fixed),
            other => {
                let (n1, n2) = model.integral_names();
                Err(Error::Config(format!(
                    "unknown plane `{other}` for the {model} model (expected {n1} or {n2})"
                )))
            }
        }
    }

    pub fn plane_name(self, model: ModelKind) -> &'static str {
        let (n1, n2) = model.integral_names();
        match self {
            FixedAxis::J1Fixed => n1,
            FixedAxis::J2Fixed => n2,
        }
    }
}

/// Which vertical-rotation threads the loop encloses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Enclose {
    /// Rotation on the tip γ₃ = +1.
    Upper,
    /// Rotation on the tip γ₃ = −1.
    Lower,
    Both,
}

impl std::str::FromStr for Enclose {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Enclose::Upper),
            "lower" => Ok(Enclose::Lower),
            "both" => Ok(Enclose::Both),
            other => Err(Error::Config(format!(
                "unknown thread selection `{other}` (expected upper|lower|both)"
            ))),
        }
    }
}

/// Center of a loop: (j_varying, j_fixed, h).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopCenter {
    pub varying: f64,
    pub fixed: f64,
    pub h: f64,
}

/// Circle j_varying = c + r sin α, h = h⁰ + r cos α in the plane j_fixed = const.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub model: ModelKind,
    pub fixed_axis: FixedAxis,
    pub center: LoopCenter,
    pub radius: f64,
    pub n_samples: usize,
}

impl Loop {
    /// The integral point at angle `alpha`.
    pub fn point(&self, alpha: f64) -> IntegralPoint {
        let (s, c) = alpha.sin_cos();
        let varying = self.center.varying + self.radius * s;
        let h = self.center.h + self.radius * c;
        let (j1, j2) = match self.fixed_axis {
            FixedAxis::J1Fixed => (self.center.fixed, varying),
            FixedAxis::J2Fixed => (varying, self.center.fixed),
        };
        IntegralPoint {
            model: self.model,
            j1,
            j2,
            h,
        }
    }
}

pub fn make_loop(
    model: ModelKind,
    fixed_axis: FixedAxis,
    center: LoopCenter,
    radius: f64,
    n_samples: usize,
) -> Result<Loop> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Config(format!(
            "loop radius must be positive, got {radius}"
        )));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "loop needs at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    Ok(Loop {
        model,
        fixed_axis,
        center,
        radius,
        n_samples,
    })
}

/// Intersection of a vertical-rotation thread with the plane
/// j_fixed = `plane_value`, as a loop center.
///
/// Both linear integrals are linear in M₃ at a vertical state, so the spin
/// is found from the values at unit spin.
pub fn thread_point<D: Dynamics + ?Sized>(
    model: &D,
    fixed_axis: FixedAxis,
    plane_value: f64,
    upper: bool,
) -> Result<LoopCenter> {
    let unit = BodyState::vertical(1.0, upper);
    let (u1, u2) = model.linear_integrals(&unit, Precision::Exact)?;
    let (u_fixed, u_varying) = match fixed_axis {
        FixedAxis::J1Fixed => (u1, u2),
        FixedAxis::J2Fixed => (u2, u1),
    };
    if u_fixed.abs() < 1e-12 {
        return Err(Error::Config("the thread does not cross this plane".into()));
    }
    let spin = plane_value / u_fixed;
    let h = model.energy(&BodyState::vertical(spin, upper));
    Ok(LoopCenter {
        varying: spin * u_varying,
        fixed: plane_value,
        h,
    })
}

/// A loop around the selected thread(s). For both threads the circle is
/// centred between them, with `margin` added to half their distance.
pub fn loop_around<D: Dynamics + ?Sized>(
    model: &D,
    fixed_axis: FixedAxis,
    plane_value: f64,
    enclose: Enclose,
    margin: f64,
    n_samples: usize,
) -> Result<Loop> {
    let (center, radius) = match enclose {
        Enclose::Upper => (thread_point(model, fixed_axis, plane_value, true)?, margin),
        Enclose::Lower => (thread_point(model, fixed_axis, plane_value, false)?, margin),
        Enclose::Both => {
            let a = thread_point(model, fixed_axis, plane_value, true)?;
            let b = thread_point(model, fixed_axis, plane_value, false)?;
            let half = 0.5 * (a.varying - b.varying).hypot(a.h - b.h);
            let mid = LoopCenter {
                varying: 0.5 * (a.varying + b.varying),
                fixed: plane_value,
                h: 0.5 * (a.h + b.h),
            };
            (mid, half + margin)
        }
    };
    make_loop(model.kind(), fixed_axis, center, radius, n_samples)
}

/// One Poincaré return from a section state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareReturn {
    pub delta_phi: f64,
    pub return_time: f64,
    pub state: BodyState,
}

/// Follows the flow from a section state to the next rising crossing of
/// γ̇₃ = 0.
pub fn poincare_return<D: Dynamics + ?Sized>(
    model: &D,
    state: &BodyState,
    cfg: &IntegratorConfig,
) -> Result<PoincareReturn> {
    let phi0 = euler_phi(&state.gamma)?;
    let event = next_section_crossing(
        model,
        state,
        |s| model.gamma3_rate(s),
        CrossingDirection::Rising,
        cfg,
    )?;
    Ok(PoincareReturn {
        delta_phi: event.phi_unwrapped - phi0,
        return_time: event.t,
        state: event.state,
    })
}

/// φ-displacement of one Poincaré return.
pub fn rotation_increment<D: Dynamics + ?Sized>(
    model: &D,
    state_on_section: &BodyState,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    poincare_return(model, state_on_section, cfg).map(|r| r.delta_phi)
}

/// Settings of [`monodromy_index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonodromyConfig {
    pub integrator: IntegratorConfig,
    pub branch: Branch,
    /// φ of the ν-cycle base point.
    pub base_phi: f64,
    /// First sample angle as a fraction of the sample spacing. The default
    /// half step keeps samples off α = 0 and α = π, where a loop centred on
    /// a thread meets the tori whose orbits pass through the pole.
    pub alpha_offset: f64,
    /// Maximum number of midpoints inserted by refinement.
    pub refine_budget: usize,
}

impl Default for MonodromyConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            branch: Branch::LowerTurning,
            base_phi: 0.0,
            alpha_offset: 0.5,
            refine_budget: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonodromySample {
    pub alpha: f64,
    pub point: IntegralPoint,
    /// Δφ(α), unwrapped continuously along the loop.
    pub delta_phi: f64,
    /// Δφ(α) reduced to [0, 2π).
    pub delta_phi_mod: f64,
    pub return_time: f64,
    pub start: BodyState,
    pub end: BodyState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyResult {
    #[serde(rename = "loop")]
    pub loop_spec: Loop,
    pub base_phi: f64,
    pub samples: Vec<MonodromySample>,
    pub k: i64,
    pub closure_defect: f64,
    pub refinements: usize,
}

impl MonodromyResult {
    /// Largest gap between consecutive unwrapped samples.
    pub fn max_gap(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].delta_phi - w[0].delta_phi).abs())
            .fold(0.0, f64::max)
    }

    /// The torus-image polyline (α, Δφ mod 2π).
    pub fn polyline(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.alpha, s.delta_phi_mod))
            .collect()
    }
}

fn sample_at<D: Dynamics + ?Sized>(
    model: &D,
    lp: &Loop,
    alpha: f64,
    cfg: &MonodromyConfig,
) -> Result<MonodromySample> {
    let point = lp.point(alpha);
    let run = || -> Result<MonodromySample> {
        let start = state_on_torus(model, &point, cfg.branch, cfg.base_phi)?;
        let ret = poincare_return(model, &start, &cfg.integrator)?;
        Ok(MonodromySample {
            alpha,
            point,
            delta_phi: ret.delta_phi,
            delta_phi_mod: ret.delta_phi.rem_euclid(TAU),
            return_time: ret.return_time,
            start,
            end: ret.state,
        })
    };
    run().map_err(|e| match e {
        Error::Config(_) | Error::Io(_) => e,
        other => Error::LoopHitsSingularity {
            alpha,
            reason: other.to_string(),
        },
    })
}

fn sample_many<D: Dynamics + ?Sized>(
    model: &D,
    lp: &Loop,
    alphas: &[f64],
    cfg: &MonodromyConfig,
) -> Result<Vec<MonodromySample>> {
    alphas
        .par_iter()
        .map(|&a| sample_at(model, lp, a, cfg))
        .collect()
}

/// Wraps an angle difference into [−π, π).
fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(TAU) - PI
}

/// Replaces each Δφ by the representative closest to its predecessor.
fn unwrap(samples: &mut [MonodromySample]) {
    for i in 1..samples.len() {
        let prev = samples[i - 1].delta_phi;
        samples[i].delta_phi = prev + wrap(samples[i].delta_phi - prev);
    }
}

/// Samples Δφ around the loop and extracts the winding number k.
pub fn monodromy_index<D: Dynamics + ?Sized>(
    model: &D,
    lp: &Loop,
    cfg: &MonodromyConfig,
) -> Result<MonodromyResult> {
    if model.kind() != lp.model {
        return Err(Error::Config(format!(
            "loop is for the {} model, got the {} model",
            lp.model,
            model.kind()
        )));
    }
    if lp.n_samples < MIN_SAMPLES || !(lp.radius > 0.0) {
        return Err(Error::Config("invalid loop".into()));
    }
    cfg.integrator.validate()?;
    let n = lp.n_samples;
    let step = TAU / n as f64;
    let alpha0 = cfg.alpha_offset * step;
    let alphas: Vec<f64> = (0..=n).map(|i| alpha0 + step * i as f64).collect();
    let mut samples = sample_many(model, lp, &alphas, cfg)?;
    unwrap(&mut samples);

    let mut inserted = 0;
    loop {
        let wide: Vec<f64> = samples
            .windows(2)
            .filter(|w| (w[1].delta_phi - w[0].delta_phi).abs() >= 0.5 * PI)
            .map(|w| 0.5 * (w[0].alpha + w[1].alpha))
            .collect();
        if wide.is_empty() {
            break;
        }
        if inserted + wide.len() > cfg.refine_budget {
            let gap = samples
                .windows(2)
                .map(|w| (w[1].delta_phi - w[0].delta_phi).abs())
                .fold(0.0, f64::max);
            return Err(Error::WindingAmbiguous { gap, inserted });
        }
        inserted += wide.len();
        let extra = sample_many(model, lp, &wide, cfg)?;
        for s in &mut samples {
            s.delta_phi = s.delta_phi.rem_euclid(TAU);
        }
        samples.extend(extra);
        samples.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        unwrap(&mut samples);
    }

    let total = samples[samples.len() - 1].delta_phi - samples[0].delta_phi;
    let k = (total / TAU).round();
    Ok(MonodromyResult {
        loop_spec: *lp,
        base_phi: cfg.base_phi,
        closure_defect: (total - TAU * k).abs(),
        k: k as i64,
        samples,
        refinements: inserted,
    })
}
