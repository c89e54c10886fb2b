//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on configuration or I/O errors, 2 on
//! numerical failures. Errors are also reported as one JSON object on
//! standard error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bifurcation::{build_diagram, slice, Slice};
use crate::body::{BodyState, Vec3};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flow::integrate;
use crate::model::{build_model, ModelKind, Precision};
use crate::monodromy::{
    loop_around, monodromy_index, Enclose, FixedAxis, MonodromyConfig, MonodromyResult,
};
use crate::output::{to_json, write_json, Table};
use crate::reproduce::{conservation_drift, format_table, random_states, run_battery, Drift};
use crate::rough::{fundamental_matrix, DIRECT_TOL};
use crate::svg::{emit_svg, PlotSpec, Series};

#[derive(Debug, Parser)]
#[command(
    name = "rolling-ellipsoid",
    version,
    about = "Rolling ellipsoid of revolution: integrals, bifurcation diagrams and monodromy"
)]
pub struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Plane model.
    #[arg(long, global = true, value_name = "smooth|rough")]
    pub model: Option<ModelKind>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Conservation drift of all first integrals over random initial states.
    Integrals(IntegralsArgs),
    /// Tabulate the fundamental matrix G(γ₃) of the rolling model.
    Gmatrix(GmatrixArgs),
    /// Bifurcation diagram, its slices and their plots.
    Bifurcate(BifurcateArgs),
    /// Monodromy coefficient of a loop around the focus threads.
    Monodromy(MonodromyArgs),
    /// Run the whole reproduction battery and print a pass/fail table.
    Reproduce,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Initial state M1,M2,M3,gamma1,gamma2,gamma3.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 6,
        allow_negative_numbers = true
    )]
    pub state: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IntegralsArgs {
    /// Number of random initial states.
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GmatrixArgs {
    /// Evaluate at a single γ₃ instead of a grid.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma3: Option<f64>,
    /// Number of grid points in [−limit, limit].
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BifurcateArgs {
    /// Grid points per linear-integral axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Plane value of the two slices.
    #[arg(long, allow_negative_numbers = true)]
    pub slice: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MonodromyArgs {
    /// Fixed integral and its value, e.g. `p_psi=0.157` or `c2=0`.
    #[arg(long, value_name = "NAME=VALUE")]
    pub plane: Option<String>,
    /// Threads enclosed by the loop.
    #[arg(long, value_name = "upper|lower|both")]
    pub enclose: Option<Enclose>,
    /// Loop radius (margin around the threads when enclosing both).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Self-rotation angle of the cycle base point.
    #[arg(long, allow_negative_numbers = true)]
    pub base_phi: Option<f64>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            return report(&Error::Config(e.to_string().trim_end().to_string()));
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

fn report(e: &Error) -> i32 {
    let body = ErrorReport {
        error: e.kind(),
        message: e.to_string(),
    };
    eprintln!(
        "{}",
        serde_json::to_string(&body).unwrap_or_else(|_| e.to_string())
    );
    if e.is_config() {
        1
    } else {
        2
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = cli.model {
        cfg.model = m;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::Simulate(a) => {
            if let Some(s) = &a.state {
                cfg.simulate.state.copy_from_slice(s);
            }
            if let Some(t) = a.t_end {
                cfg.simulate.t_end = t;
            }
            cfg.validate()?;
            simulate(&cfg)
        }
        Command::Integrals(a) => {
            if let Some(n) = a.states {
                cfg.integrals.states = n;
            }
            if let Some(t) = a.t_end {
                cfg.integrals.t_end = t;
            }
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            integrals(&cfg)
        }
        Command::Gmatrix(a) => {
            if let Some(n) = a.points {
                cfg.gmatrix.points = n;
            }
            cfg.validate()?;
            gmatrix(&cfg, a.gamma3)
        }
        Command::Bifurcate(a) => {
            if let Some(n) = a.grid {
                cfg.bifurcate.grid.n_j1 = n;
                cfg.bifurcate.grid.n_j2 = n;
            }
            if let Some(v) = a.slice {
                cfg.bifurcate.slice_value = v;
            }
            cfg.validate()?;
            bifurcate(&cfg)
        }
        Command::Monodromy(a) => {
            if let Some(p) = &a.plane {
                let (name, value) = p.split_once('=').ok_or_else(|| {
                    Error::Config(format!("--plane expects NAME=VALUE, got `{p}`"))
                })?;
                cfg.monodromy.plane = name.trim().to_string();
                cfg.monodromy.plane_value = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad plane value `{value}`")))?;
            }
            if let Some(e) = a.enclose {
                cfg.monodromy.enclose = e;
            }
            if let Some(r) = a.radius {
                cfg.monodromy.radius = r;
            }
            if let Some(n) = a.samples {
                cfg.monodromy.samples = n;
            }
            if let Some(phi) = a.base_phi {
                cfg.monodromy.base_phi = phi;
            }
            cfg.validate()?;
            monodromy(&cfg)
        }
        Command::Reproduce => {
            cfg.validate()?;
            let mcfg = MonodromyConfig {
                integrator: cfg.integrator,
                ..Default::default()
            };
            let checks = run_battery(&cfg.params, &mcfg)?;
            print!("{}", format_table(&checks));
            std::fs::create_dir_all(&cfg.out)?;
            write_json(&cfg.out.join("reproduce.json"), &checks)?;
            match checks.iter().filter(|c| !c.pass).count() {
                0 => Ok(()),
                failed => Err(Error::ChecksFailed {
                    failed,
                    total: checks.len(),
                }),
            }
        }
    }
}

fn state_columns(model: ModelKind) -> Vec<(&'static str, &'static str)> {
    let (n1, n2) = model.integral_names();
    vec![
        ("t", "time"),
        ("M1", "angular momentum"),
        ("M2", "angular momentum"),
        ("M3", "angular momentum"),
        ("gamma1", "1"),
        ("gamma2", "1"),
        ("gamma3", "1"),
        ("phi", "rad"),
        ("H", "energy"),
        (n1, "angular momentum"),
        (n2, "angular momentum"),
    ]
}

fn simulate(cfg: &RunConfig) -> Result<()> {
    let model = build_model(cfg.model, cfg.params)?;
    let s = cfg.simulate.state;
    let gamma = Vec3::new(s[3], s[4], s[5]);
    if !(gamma.norm() > 0.0) {
        return Err(Error::Config("gamma must be non-zero".into()));
    }
    let state = BodyState::new(Vec3::new(s[0], s[1], s[2]), gamma).normalized();
    let traj = integrate(
        model.as_ref(),
        &state,
        (0.0, cfg.simulate.t_end),
        &cfg.integrator,
    )?;
    let mut table = Table::new(&state_columns(cfg.model));
    for p in &traj.samples {
        let (j1, j2) = model.linear_integrals(&p.state, Precision::Exact)?;
        let (m, g) = (p.state.m, p.state.gamma);
        table.push(vec![
            p.t,
            m.x,
            m.y,
            m.z,
            g.x,
            g.y,
            g.z,
            p.phi_unwrapped,
            model.energy(&p.state),
            j1,
            j2,
        ]);
    }
    let path = cfg.out.join("trajectory.csv");
    table.write(&path)?;
    println!("wrote {} samples to {}", table.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct DriftReport<'a> {
    model: ModelKind,
    integral_names: (&'a str, &'a str),
    t_end: f64,
    rel_tol: f64,
    seed: u64,
    max_drift_energy: f64,
    max_drift_j1: f64,
    max_drift_j2: f64,
    states: Vec<Drift>,
}

fn integrals(cfg: &RunConfig) -> Result<()> {
    use rayon::prelude::*;
    let model = build_model(cfg.model, cfg.params)?;
    let states = random_states(cfg.seed, cfg.integrals.states, cfg.integrals.momentum_bound);
    let drifts: Vec<Drift> = states
        .par_iter()
        .map(|s| conservation_drift(model.as_ref(), s, cfg.integrals.t_end, &cfg.integrator))
        .collect::<Result<_>>()?;
    let max = |f: fn(&Drift) -> f64| drifts.iter().map(f).fold(0.0, f64::max);
    let report = DriftReport {
        model: cfg.model,
        integral_names: cfg.model.integral_names(),
        t_end: cfg.integrals.t_end,
        rel_tol: cfg.integrator.rel_tol,
        seed: cfg.seed,
        max_drift_energy: max(|d| d.energy),
        max_drift_j1: max(|d| d.j1),
        max_drift_j2: max(|d| d.j2),
        states: drifts,
    };
    let path = cfg.out.join("integrals.json");
    write_json(&path, &report)?;
    println!(
        "{{\"max_drift_energy\": {:e}, \"max_drift_j1\": {:e}, \"max_drift_j2\": {:e}}}",
        report.max_drift_energy, report.max_drift_j1, report.max_drift_j2
    );
    Ok(())
}

#[derive(Serialize)]
struct GReport {
    points: usize,
    max_det_defect: f64,
    identity_at_zero: bool,
}

fn gmatrix(cfg: &RunConfig, single: Option<f64>) -> Result<()> {
    let grid: Vec<f64> = match single {
        Some(g3) => vec![g3],
        None => {
            let (n, l) = (cfg.gmatrix.points, cfg.gmatrix.limit);
            (0..n)
                .map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64)
                .collect()
        }
    };
    let mut table = Table::new(&[
        ("gamma3", "1"),
        ("G11", "1"),
        ("G12", "1"),
        ("G21", "1"),
        ("G22", "1"),
        ("det_defect", "1"),
    ]);
    let mut worst: f64 = 0.0;
    for &g3 in &grid {
        let g = fundamental_matrix(g3, &cfg.params, DIRECT_TOL)?;
        let defect = (g.det() - 1.0).abs();
        worst = worst.max(defect);
        let [[a, b], [c, d]] = g.entries;
        table.push(vec![g3, a, b, c, d, defect]);
    }
    table.write(&cfg.out.join("gmatrix.csv"))?;
    let report = GReport {
        points: grid.len(),
        max_det_defect: worst,
        identity_at_zero: fundamental_matrix(0.0, &cfg.params, DIRECT_TOL)?.entries
            == [[1.0, 0.0], [0.0, 1.0]],
    };
    write_json(&cfg.out.join("gmatrix_report.json"), &report)?;
    print!("{}", to_json(&report)?);
    Ok(())
}

fn slice_outputs(s: &Slice, model: ModelKind, dir: &Path) -> Result<()> {
    let plane = s.fixed_axis.plane_name(model);
    let (n1, n2) = model.integral_names();
    let varying = if s.fixed_axis == FixedAxis::J1Fixed {
        n2
    } else {
        n1
    };
    let mut table = Table::new(&[
        (varying, "angular momentum"),
        ("gamma3", "1"),
        ("h", "energy"),
    ]);
    for p in &s.surface {
        table.push(vec![p.varying, p.gamma3, p.h]);
    }
    table.write(&dir.join(format!("slice_{plane}.csv")))?;
    let spec = PlotSpec {
        title: format!("{model} model, slice {plane} = {}", s.plane_value),
        x_label: varying.into(),
        y_label: "h".into(),
        ..Default::default()
    };
    let series = [
        Series::points(
            "regular precessions",
            s.surface.iter().map(|p| (p.varying, p.h)).collect(),
        ),
        Series::points(
            "vertical rotations",
            s.threads.iter().map(|t| (t.varying, t.h)).collect(),
        ),
    ];
    emit_svg(&dir.join(format!("slice_{plane}.svg")), &spec, &series)
}

fn bifurcate(cfg: &RunConfig) -> Result<()> {
    let model = build_model(cfg.model, cfg.params)?;
    let b = &cfg.bifurcate;
    let diagram = build_diagram(model.as_ref(), &b.grid)?;
    let (n1, n2) = cfg.model.integral_names();
    let mut surface = Table::new(&[
        (n1, "angular momentum"),
        (n2, "angular momentum"),
        ("gamma3", "1"),
        ("h", "energy"),
    ]);
    for s in &diagram.surface {
        surface.push(vec![s.j1, s.j2, s.gamma3, s.h]);
    }
    surface.write(&cfg.out.join("surface.csv"))?;
    let mut curves = Table::new(&[
        ("tip", "+1 upper / -1 lower"),
        ("spin", "angular momentum"),
        (n1, "angular momentum"),
        (n2, "angular momentum"),
        ("h", "energy"),
    ]);
    for (tip, curve) in [1.0, -1.0].into_iter().zip(&diagram.curves) {
        for p in curve {
            curves.push(vec![tip, p.spin, p.j1, p.j2, p.h]);
        }
    }
    curves.write(&cfg.out.join("curves.csv"))?;
    for axis in [FixedAxis::J1Fixed, FixedAxis::J2Fixed] {
        let s = slice(
            model.as_ref(),
            axis,
            b.slice_value,
            b.slice_range,
            b.slice_points,
        )?;
        slice_outputs(&s, cfg.model, &cfg.out)?;
    }
    println!(
        "{} surface samples, {} vertical-rotation samples written to {}",
        diagram.surface.len(),
        diagram.curves[0].len() + diagram.curves[1].len(),
        cfg.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct MonodromySummary<'a> {
    model: ModelKind,
    plane: &'a str,
    plane_value: f64,
    enclose: Enclose,
    radius: f64,
    k: i64,
    closure_defect: f64,
    samples: usize,
    refinements: usize,
}

fn monodromy_outputs(res: &MonodromyResult, dir: &Path) -> Result<()> {
    write_json(&dir.join("monodromy.json"), res)?;
    let mut image = Table::new(&[("alpha", "rad"), ("delta_phi_mod", "rad")]);
    for (a, d) in res.polyline() {
        image.push(vec![a, d]);
    }
    image.write(&dir.join("torus_image.csv"))?;
    let tau = std::f64::consts::TAU;
    let spec = PlotSpec {
        title: format!("image of the cycle under the Poincaré map, k = {}", res.k),
        x_label: "alpha".into(),
        y_label: "phi".into(),
        x_range: Some((0.0, tau)),
        y_range: Some((0.0, tau)),
        split_jumps: Some(std::f64::consts::PI),
    };
    let folded: Vec<(f64, f64)> = res
        .polyline()
        .into_iter()
        .map(|(a, d)| (a.rem_euclid(tau), d))
        .collect();
    emit_svg(
        &dir.join("torus_image.svg"),
        &spec,
        &[Series::line("delta phi mod 2 pi", folded)],
    )?;

    let lp = &res.loop_spec;
    let (n1, _) = lp.model.integral_names();
    let third = if lp.fixed_axis == FixedAxis::J1Fixed {
        "M3"
    } else {
        n1
    };
    let mut cloud = Table::new(&[
        ("alpha", "rad"),
        ("gamma1", "1"),
        ("gamma2", "1"),
        (third, "angular momentum"),
    ]);
    let mut pts = Vec::new();
    for s in &res.samples {
        let z = if lp.fixed_axis == FixedAxis::J1Fixed {
            s.end.m.z
        } else {
            s.point.j1
        };
        cloud.push(vec![s.alpha, s.end.gamma.x, s.end.gamma.y, z]);
        pts.push((s.end.gamma.x, s.end.gamma.y, z));
    }
    cloud.write(&dir.join("projection.csv"))?;
    let xy = PlotSpec {
        title: "return points, (gamma1, gamma2)".into(),
        x_label: "gamma1".into(),
        y_label: "gamma2".into(),
        ..Default::default()
    };
    emit_svg(
        &dir.join("projection_xy.svg"),
        &xy,
        &[Series::points(
            "return points",
            pts.iter().map(|p| (p.0, p.1)).collect(),
        )],
    )?;
    let xz = PlotSpec {
        title: format!("return points, (gamma1, {third})"),
        x_label: "gamma1".into(),
        y_label: third.into(),
        ..Default::default()
    };
    emit_svg(
        &dir.join("projection_xz.svg"),
        &xz,
        &[Series::points(
            "return points",
            pts.iter().map(|p| (p.0, p.2)).collect(),
        )],
    )
}

fn monodromy(cfg: &RunConfig) -> Result<()> {
    let model = build_model(cfg.model, cfg.params)?;
    let m = &cfg.monodromy;
    let axis = FixedAxis::from_plane_name(cfg.model, &m.plane)?;
    let lp = loop_around(
        model.as_ref(),
        axis,
        m.plane_value,
        m.enclose,
        m.radius,
        m.samples,
    )?;
    let mcfg = MonodromyConfig {
        integrator: cfg.integrator,
        base_phi: m.base_phi,
        ..Default::default()
    };
    let res = monodromy_index(model.as_ref(), &lp, &mcfg)?;
    monodromy_outputs(&res, &cfg.out)?;
    let summary = MonodromySummary {
        model: cfg.model,
        plane: &m.plane,
        plane_value: m.plane_value,
        enclose: m.enclose,
        radius: lp.radius,
        k: res.k,
        closure_defect: res.closure_defect,
        samples: res.samples.len(),
        refinements: res.refinements,
    };
    print!("{}", to_json(&summary)?);
    Ok(())
}
