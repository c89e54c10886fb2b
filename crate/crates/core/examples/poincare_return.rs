//! Builds a starting state on one Liouville torus of the rolling model and
//! follows it once around the Poincaré section γ̇₃ = 0.
//!
//! Run with `cargo run --release --example poincare_return`.

use rolling_ellipsoid::monodromy::{poincare_return, thread_point, FixedAxis};
use rolling_ellipsoid::torus::{state_on_torus, turning_point, Branch, IntegralPoint};
use rolling_ellipsoid::{BodyParams, Dynamics, IntegratorConfig, ModelKind, Precision, RoughModel};

fn main() -> rolling_ellipsoid::Result<()> {
    let model = RoughModel::new(BodyParams::default())?;
    // a torus next to the upper thread in the plane c1 = 0.157
    let thread = thread_point(&model, FixedAxis::J1Fixed, 0.157, true)?;
    let point = IntegralPoint {
        model: ModelKind::Rough,
        j1: 0.157,
        j2: thread.varying + 0.05,
        h: thread.h,
    };
    let lo = turning_point(&model, &point, Branch::LowerTurning)?;
    let hi = turning_point(&model, &point, Branch::UpperTurning)?;
    println!("gamma3 oscillates in [{lo:.6}, {hi:.6}]");

    let start = state_on_torus(&model, &point, Branch::LowerTurning, 0.0)?;
    let ret = poincare_return(&model, &start, &IntegratorConfig::default())?;
    let (c1, c2) = model.linear_integrals(&ret.state, Precision::Exact)?;
    println!(
        "return time {:.6}, phi advanced by {:.6} rad",
        ret.return_time, ret.delta_phi
    );
    println!(
        "at the return: gamma3 = {:.6}, h - h0 = {:.1e}, c1 - c1_0 = {:.1e}, c2 - c2_0 = {:.1e}",
        ret.state.gamma.z,
        model.energy(&ret.state) - point.h,
        c1 - point.j1,
        c2 - point.j2
    );
    Ok(())
}
