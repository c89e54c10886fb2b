//! Integrates a trajectory of each model and reports how well the energy and
//! the two linear integrals are kept.
//!
//! Run with `cargo run --release --example conservation`.

use rolling_ellipsoid::model::build_model;
use rolling_ellipsoid::reproduce::conservation_drift;
use rolling_ellipsoid::{BodyParams, BodyState, IntegratorConfig, ModelKind, Vec3};

fn main() -> rolling_ellipsoid::Result<()> {
    let state = BodyState::new(Vec3::new(0.3, -0.2, 0.5), Vec3::new(0.6, 0.0, 0.8));
    let cfg = IntegratorConfig::with_tol(1e-10);
    for kind in [ModelKind::Smooth, ModelKind::Rough] {
        let model = build_model(kind, BodyParams::default())?;
        let (n1, n2) = kind.integral_names();
        let d = conservation_drift(model.as_ref(), &state, 100.0, &cfg)?;
        println!(
            "{kind:6} over t in [0, 100]: |dH| {:.2e}  |d{n1}| {:.2e}  |d{n2}| {:.2e}",
            d.energy, d.j1, d.j2
        );
    }
    Ok(())
}
