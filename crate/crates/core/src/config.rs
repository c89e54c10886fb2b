//! Run configuration, read from a TOML file. Every key is optional and
//! defaults to the values below.
//!
//! ```toml
//! model = "smooth"          # smooth | rough
//! out = "out"
//! seed = 1
//!
//! [params]
//! I1 = 1.0
//! I3 = 1.5
//! b1 = 1.0
//! b3 = 2.0
//! m = 1.0
//! g = 1.0
//!
//! [integrator]
//! rel_tol = 1e-10
//! abs_tol = 1e-10
//! max_step = 1.0
//! renorm = true
//! horizon = 1000.0
//! max_steps = 5000000
//! # fixed_step = 0.01
//!
//! [simulate]
//! state = [0.3, -0.2, 0.5, 0.6, 0.0, 0.8]   # M1 M2 M3 gamma1 gamma2 gamma3
//! t_end = 100.0
//!
//! [integrals]
//! states = 20
//! t_end = 100.0
//! momentum_bound = 1.0
//!
//! [gmatrix]
//! points = 200
//! limit = 0.999
//!
//! [bifurcate]
//! slice_value = 0.157
//! slice_range = [-1.5, 1.5]
//! slice_points = 121
//! [bifurcate.grid]
//! j1_range = [-1.5, 1.5]
//! j2_range = [-1.5, 1.5]
//! n_j1 = 41
//! n_j2 = 41
//! spin_range = [-3.0, 3.0]
//! n_spin = 121
//!
//! [monodromy]
//! plane = "p_psi"           # p_psi | p_phi (smooth), c1 | c2 (rough)
//! plane_value = 0.157
//! enclose = "both"          # upper | lower | both
//! radius = 0.05
//! samples = 128
//! base_phi = 0.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bifurcation::GridSpec;
use crate::body::BodyParams;
use crate::error::{Error, Result};
use crate::flow::IntegratorConfig;
use crate::model::ModelKind;
use crate::monodromy::{Enclose, DEFAULT_RADIUS, DEFAULT_SAMPLES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub out: PathBuf,
    /// Seed for randomly sampled initial states.
    pub seed: u64,
    pub params: BodyParams,
    pub integrator: IntegratorConfig,
    pub simulate: SimulateConfig,
    pub integrals: IntegralsConfig,
    pub gmatrix: GMatrixConfig,
    pub bifurcate: BifurcateConfig,
    pub monodromy: MonodromyRunConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Smooth,
            out: PathBuf::from("out"),
            seed: 1,
            params: BodyParams::default(),
            integrator: IntegratorConfig::default(),
            simulate: SimulateConfig::default(),
            integrals: IntegralsConfig::default(),
            gmatrix: GMatrixConfig::default(),
            bifurcate: BifurcateConfig::default(),
            monodromy: MonodromyRunConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// (M₁, M₂, M₃, γ₁, γ₂, γ₃); γ is normalized on input.
    pub state: [f64; 6],
    pub t_end: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            state: [0.3, -0.2, 0.5, 0.6, 0.0, 0.8],
            t_end: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegralsConfig {
    pub states: usize,
    pub t_end: f64,
    /// Components of M are drawn uniformly from [−bound, bound].
    pub momentum_bound: f64,
}

impl Default for IntegralsConfig {
    fn default() -> Self {
        Self {
            states: 20,
            t_end: 100.0,
            momentum_bound: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GMatrixConfig {
    pub points: usize,
    pub limit: f64,
}

impl Default for GMatrixConfig {
    fn default() -> Self {
        Self {
            points: 200,
            limit: 0.999,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BifurcateConfig {
    pub grid: GridSpec,
    pub slice_value: f64,
    pub slice_range: (f64, f64),
    pub slice_points: usize,
}

impl Default for BifurcateConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            slice_value: 0.157,
            slice_range: (-1.5, 1.5),
            slice_points: 121,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonodromyRunConfig {
    /// Name of the fixed integral.
    pub plane: String,
    pub plane_value: f64,
    pub enclose: Enclose,
    pub radius: f64,
    pub samples: usize,
    pub base_phi: f64,
}

impl Default for MonodromyRunConfig {
    fn default() -> Self {
        Self {
            plane: "p_psi".into(),
            plane_value: 0.157,
            enclose: Enclose::Both,
            radius: DEFAULT_RADIUS,
            samples: DEFAULT_SAMPLES,
            base_phi: 0.0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.integrator.validate()?;
        if !(self.simulate.t_end > 0.0) || !(self.integrals.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if !(self.gmatrix.limit > 0.0 && self.gmatrix.limit < 1.0) || self.gmatrix.points < 2 {
            return Err(Error::Config(
                "gmatrix needs limit in (0, 1) and at least 2 points".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn documented_example_parses() {
        let doc: String = include_str!("config.rs")
            .lines()
            .take_while(|l| l.starts_with("//!"))
            .map(|l| l.trim_start_matches("//!").trim_start())
            .skip_while(|l| !l.starts_with("```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("```"))
            .collect::<Vec<_>>()
            .join("\n");
        let cfg = RunConfig::from_toml(&doc).unwrap();
        assert_eq!(cfg.params, BodyParams::default());
        assert_eq!(cfg.integrator, IntegratorConfig::default());
        assert_eq!(cfg.bifurcate, BifurcateConfig::default());
        assert_eq!(cfg.monodromy, MonodromyRunConfig::default());
    }

    #[test]
    fn partial_sections_and_errors() {
        let cfg = RunConfig::from_toml("model = \"rough\"\n[params]\nm = 2.0\n").unwrap();
        assert_eq!(cfg.model, ModelKind::Rough);
        assert_eq!(cfg.params.m, 2.0);
        assert_eq!(cfg.params.b3, 2.0);
        assert!(RunConfig::from_toml("bogus = 1").unwrap_err().is_config());
        assert!(RunConfig::from_toml("[params]\nb1 = -1.0")
            .unwrap_err()
            .is_config());
    }
}
