//! A slice of the bifurcation diagram: regular precessions and the two
//! vertical-rotation threads in the plane p_ψ = 0.157, written as CSV and SVG.
//!
//! Run with `cargo run --release --example bifurcation_slice -- [out_dir]`.

use std::path::PathBuf;

use rolling_ellipsoid::bifurcation::slice;
use rolling_ellipsoid::monodromy::FixedAxis;
use rolling_ellipsoid::output::Table;
use rolling_ellipsoid::svg::{emit_svg, PlotSpec, Series};
use rolling_ellipsoid::{BodyParams, SmoothModel};

fn main() -> rolling_ellipsoid::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "out/example_slice".into()),
    );
    let model = SmoothModel::new(BodyParams::default());
    let s = slice(&model, FixedAxis::J1Fixed, 0.157, (-1.5, 1.5), 121)?;

    let mut table = Table::new(&[
        ("p_phi", "angular momentum"),
        ("gamma3", "1"),
        ("h", "energy"),
    ]);
    for p in &s.surface {
        table.push(vec![p.varying, p.gamma3, p.h]);
    }
    table.write(&out.join("slice.csv"))?;
    let spec = PlotSpec {
        title: "p_psi = 0.157".into(),
        x_label: "p_phi".into(),
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
    emit_svg(&out.join("slice.svg"), &spec, &series)?;

    let bottom = s.surface_min().map(|p| p.h).unwrap_or(f64::NAN);
    println!(
        "{} precession points, lowest h = {bottom:.5}",
        s.surface.len()
    );
    for t in &s.threads {
        println!("thread at p_phi = {:+.3}, h = {:.5}", t.varying, t.h);
    }
    println!("written to {}", out.display());
    Ok(())
}
