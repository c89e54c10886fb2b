//! Monodromy coefficients around the focus threads for both models.
//!
//! Run with `cargo run --release --example monodromy_table`.

use std::time::Instant;

use rolling_ellipsoid::model::build_model;
use rolling_ellipsoid::monodromy::{
    loop_around, monodromy_index, Enclose, FixedAxis, MonodromyConfig,
};
use rolling_ellipsoid::{BodyParams, ModelKind};

fn main() -> rolling_ellipsoid::Result<()> {
    let cfg = MonodromyConfig::default();
    for kind in [ModelKind::Smooth, ModelKind::Rough] {
        let model = build_model(kind, BodyParams::default())?;
        for axis in [FixedAxis::J1Fixed, FixedAxis::J2Fixed] {
            for enclose in [Enclose::Upper, Enclose::Lower, Enclose::Both] {
                let lp = loop_around(model.as_ref(), axis, 0.157, enclose, 0.05, 128)?;
                let start = Instant::now();
                let res = monodromy_index(model.as_ref(), &lp, &cfg)?;
                println!(
                    "{kind:6} {:5}=0.157 {enclose:?}: k = {:2}  closure {:.2e}  max gap {:.3}  refined {}  ({:.1?})",
                    axis.plane_name(kind),
                    res.k,
                    res.closure_defect,
                    res.max_gap(),
                    res.refinements,
                    start.elapsed()
                );
            }
        }
    }
    Ok(())
}
