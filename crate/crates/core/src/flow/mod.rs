//! Adaptive integration of either model on the phase space {γ² = 1}.
//!
//! The integrated vector is (M, γ, φ): the self-rotation angle φ is carried
//! along as a quadrature of φ̇ = (γ̇₁γ₂ − γ₁γ̇₂)/(γ₁² + γ₂²), so it stays
//! continuous however fast the body spins. After every accepted step γ is
//! projected back onto the unit sphere.

pub(crate) mod dop853;
mod tableau;

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::body::{euler_phi, BodyState, Trajectory, TrajectorySample, Vec3};
use crate::error::{Error, Result};
use crate::model::Dynamics;
use crate::roots::brent;
use dop853::{Accepted, Control};

/// Departure guard of [`next_section_crossing`].
pub const DEPARTURE_GUARD: f64 = 1e-8;
/// Required accuracy of a located section crossing.
pub const SECTION_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Project γ onto the unit sphere after each accepted step.
    pub renorm: bool,
    /// Longest time searched by [`next_section_crossing`].
    pub horizon: f64,
    pub max_steps: usize,
    /// Fixed step length (no error control). For convergence studies.
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 1.0,
            renorm: true,
            horizon: 1000.0,
            max_steps: 5_000_000,
            fixed_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::Config(format!(
                    "{name} must lie in (0, 1e-2], got {tol}"
                )));
            }
        }
        if !(self.max_step > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::Config(
                "max_step and horizon must be positive".into(),
            ));
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!(
                    "fixed_step must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }

    fn control(&self) -> Control {
        Control {
            rtol: self.rel_tol,
            atol: self.abs_tol,
            max_step: self.max_step,
            fixed_step: self.fixed_step,
            max_steps: self.max_steps,
        }
    }
}

/// Which sign change of the section function counts as a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingDirection {
    /// From negative to positive.
    Rising,
    /// From positive to negative.
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionEvent {
    pub t: f64,
    pub state: BodyState,
    pub phi_unwrapped: f64,
}

type Packed = [f64; 7];

fn pack(state: &BodyState, phi: f64) -> Packed {
    let (m, g) = (state.m, state.gamma);
    [m.x, m.y, m.z, g.x, g.y, g.z, phi]
}

fn unpack(y: &Packed) -> (BodyState, f64) {
    (
        BodyState::new(Vec3::new(y[0], y[1], y[2]), Vec3::new(y[3], y[4], y[5])),
        y[6],
    )
}

fn packed_rate<D: Dynamics + ?Sized>(model: &D, y: &Packed) -> Packed {
    let (state, _) = unpack(y);
    let rate = model.rate(&state);
    let g = state.gamma;
    let rho2 = g.x * g.x + g.y * g.y;
    // φ is undefined on the symmetry axis; an exact pole is only reached by
    // equilibria, where nothing moves.
    let phi_dot = if rho2 > 0.0 {
        (rate.gamma.x * g.y - g.x * rate.gamma.y) / rho2
    } else {
        0.0
    };
    [
        rate.m.x,
        rate.m.y,
        rate.m.z,
        rate.gamma.x,
        rate.gamma.y,
        rate.gamma.z,
        phi_dot,
    ]
}

fn renormalize(y: &mut Packed) {
    let n = (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]).sqrt();
    y[3] /= n;
    y[4] /= n;
    y[5] /= n;
}

fn check_start(state: &BodyState) -> Result<()> {
    let n = state.gamma.norm();
    if !((n - 1.0).abs() <= 1e-9) || !state.m.iter().all(|v| v.is_finite()) {
        return Err(Error::Config(format!(
            "initial gamma must be a unit vector, |gamma| = {n}"
        )));
    }
    Ok(())
}

/// φ of the starting state, or 0 on the symmetry axis.
fn initial_phi(state: &BodyState) -> f64 {
    euler_phi(&state.gamma).unwrap_or(0.0)
}

/// Integrates the model over `t_span`, recording every accepted step.
pub fn integrate<D: Dynamics + ?Sized>(
    model: &D,
    state0: &BodyState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_start(state0)?;
    let phi0 = initial_phi(state0);
    let mut samples = vec![TrajectorySample {
        t: t_span.0,
        state: *state0,
        phi_unwrapped: phi0,
    }];
    let f = |_t: f64, y: &Packed| packed_rate(model, y);
    let renorm = cfg.renorm;
    dop853::solve(
        &f,
        t_span.0,
        pack(state0, phi0),
        t_span.1,
        &cfg.control(),
        |y: &mut Packed| {
            if renorm {
                renormalize(y)
            }
        },
        |acc: Accepted<'_, 7>| {
            let (state, phi) = unpack(acc.y);
            samples.push(TrajectorySample {
                t: acc.t,
                state,
                phi_unwrapped: phi,
            });
            ControlFlow::Continue(())
        },
    )?;
    Ok(Trajectory { samples })
}

/// Locates the first crossing of `section(state) = 0` in the requested
/// direction after `t = DEPARTURE_GUARD`, refined to |section| ≤ 1e−11 by
/// re-stepping from the bracketing accepted step.
pub fn next_section_crossing<D, S>(
    model: &D,
    state0: &BodyState,
    section: S,
    direction: CrossingDirection,
    cfg: &IntegratorConfig,
) -> Result<SectionEvent>
where
    D: Dynamics + ?Sized,
    S: Fn(&BodyState) -> f64,
{
    cfg.validate()?;
    check_start(state0)?;
    let phi0 = initial_phi(state0);
    let f = |_t: f64, y: &Packed| packed_rate(model, y);
    let renorm = cfg.renorm;
    let project = |y: &mut Packed| {
        if renorm {
            renormalize(y)
        }
    };
    let section_of = |y: &Packed| section(&unpack(y).0);

    let mut s_prev = section(state0);
    let mut found: Option<SectionEvent> = None;
    let mut failure: Option<Error> = None;

    dop853::solve(
        &f,
        0.0,
        pack(state0, phi0),
        cfg.horizon,
        &cfg.control(),
        project,
        |acc| {
            let s_new = section_of(acc.y);
            let crossed = match direction {
                CrossingDirection::Rising => s_prev < 0.0 && s_new >= 0.0,
                CrossingDirection::Falling => s_prev > 0.0 && s_new <= 0.0,
            };
            let s_start = s_prev;
            s_prev = s_new;
            if !crossed {
                return ControlFlow::Continue(());
            }
            let h = acc.t - acc.t_prev;
            let f0 = f(acc.t_prev, acc.y_prev);
            let substep = |tau: f64| -> Packed {
                let (mut y, _) = dop853::rk_step(&f, acc.t_prev, acc.y_prev, &f0, tau);
                project(&mut y);
                y
            };
            let tau = brent(
                |tau| section_of(&substep(tau)),
                0.0,
                h,
                s_start,
                s_new,
                1e-15 * h.abs().max(1.0),
                0.25 * SECTION_TOL,
            );
            let t_cross = acc.t_prev + tau;
            if t_cross <= DEPARTURE_GUARD {
                return ControlFlow::Continue(());
            }
            let y = substep(tau);
            let (state, phi) = unpack(&y);
            if !phi.is_finite() {
                failure = Some(Error::StepSizeUnderflow { t: t_cross, h });
                return ControlFlow::Break(());
            }
            found = Some(SectionEvent {
                t: t_cross,
                state,
                phi_unwrapped: phi,
            });
            ControlFlow::Break(())
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    found.ok_or(Error::NoCrossingFound {
        horizon: cfg.horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{gamma_from_angles, BodyParams};
    use crate::smooth::SmoothModel;
    use std::f64::consts::TAU;

    fn model() -> SmoothModel {
        SmoothModel::new(BodyParams::default())
    }

    fn generic() -> BodyState {
        BodyState::new(Vec3::new(0.3, -0.2, 0.25), gamma_from_angles(1.2, 0.4))
    }

    #[test]
    fn equilibrium_stays_put() {
        let s = BodyState::vertical(0.5, true);
        let traj = integrate(&model(), &s, (0.0, 10.0), &IntegratorConfig::default()).unwrap();
        let last = traj.last().unwrap();
        assert_eq!(last.t, 10.0);
        assert!((last.state.m - s.m).norm() < 1e-14);
        assert!((last.state.gamma - s.gamma).norm() < 1e-14);
    }

    #[test]
    fn gamma_stays_unit_and_phi_tracks_chart() {
        let traj = integrate(
            &model(),
            &generic(),
            (0.0, 30.0),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(traj.len() > 10);
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        for s in &traj.samples {
            assert!((s.state.gamma.norm() - 1.0).abs() <= 1e-12);
            let chart = euler_phi(&s.state.gamma).unwrap();
            let turns = (s.phi_unwrapped - chart) / TAU;
            assert!((turns - turns.round()).abs() < 1e-8, "phi offset {turns}");
        }
    }

    #[test]
    fn crossing_matches_dense_sign_scan() {
        let m = model();
        let cfg = IntegratorConfig::default();
        let section = |s: &BodyState| m.gamma3_rate(s);
        let ev = next_section_crossing(&m, &generic(), section, CrossingDirection::Rising, &cfg)
            .unwrap();
        assert!(section(&ev.state).abs() <= SECTION_TOL);
        // γ̈₃ > 0 at a rising crossing of γ̇₃
        let eps = 1e-6;
        let rate = m.rate(&ev.state);
        let ahead = BodyState::new(ev.state.m + eps * rate.m, ev.state.gamma + eps * rate.gamma);
        assert!(section(&ahead) > 0.0);

        // oracle: fixed sampling at dt = 1e-4 and a sign scan
        let dense = IntegratorConfig {
            max_step: 1e-4,
            ..IntegratorConfig::with_tol(1e-12)
        };
        let traj = integrate(&m, &generic(), (0.0, ev.t + 0.01), &dense).unwrap();
        let first = traj
            .samples
            .windows(2)
            .find(|w| section(&w[0].state) < 0.0 && section(&w[1].state) >= 0.0)
            .unwrap();
        assert!(
            first[0].t <= ev.t && ev.t <= first[1].t + 1e-9,
            "{} not in [{}, {}]",
            ev.t,
            first[0].t,
            first[1].t
        );
    }

    #[test]
    fn start_on_section_returns_next_crossing() {
        let m = model();
        let cfg = IntegratorConfig::default();
        let section = |s: &BodyState| m.gamma3_rate(s);
        let first = next_section_crossing(&m, &generic(), section, CrossingDirection::Rising, &cfg)
            .unwrap();
        let second =
            next_section_crossing(&m, &first.state, section, CrossingDirection::Rising, &cfg)
                .unwrap();
        assert!(second.t > 1e-3);
        // periodic reduced motion: the return has the same γ₃
        assert!((second.state.gamma.z - first.state.gamma.z).abs() < 1e-8);
    }

    #[test]
    fn equilibrium_never_crosses() {
        let m = model();
        let cfg = IntegratorConfig {
            horizon: 20.0,
            ..IntegratorConfig::default()
        };
        let s = BodyState::vertical(0.3, true);
        let err = next_section_crossing(
            &m,
            &s,
            |s: &BodyState| m.gamma3_rate(s),
            CrossingDirection::Rising,
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoCrossingFound { .. }));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig::with_tol(0.1);
        assert!(integrate(&model(), &generic(), (0.0, 1.0), &cfg)
            .unwrap_err()
            .is_config());
    }
}
