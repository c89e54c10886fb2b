use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use rolling_ellipsoid::svg::{render_svg, PlotSpec, Series};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Compares against the stored file; `UPDATE_GOLDEN=1` rewrites it.
fn check(name: &str, rendered: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, rendered).unwrap();
    }
    let stored = std::fs::read_to_string(&path).unwrap();
    assert!(stored == rendered, "{name} differs from the golden file");
}

#[test]
fn torus_image_square() {
    // a curve winding twice around φ, wrapped into [0, 2π)
    let pts: Vec<(f64, f64)> = (0..=32)
        .map(|i| {
            let a = TAU * i as f64 / 32.0;
            (a, (1.0 + 2.0 * a).rem_euclid(TAU))
        })
        .collect();
    let spec = PlotSpec {
        title: "image of the cycle, k = 2".into(),
        x_label: "alpha".into(),
        y_label: "phi".into(),
        x_range: Some((0.0, TAU)),
        y_range: Some((0.0, TAU)),
        split_jumps: Some(PI),
    };
    let svg = render_svg(&spec, &[Series::line("delta phi mod 2 pi", pts)]).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    check("torus_image.svg", &svg);
}

#[test]
fn slice_scatter() {
    let surface: Vec<(f64, f64)> = (0..11)
        .map(|i| {
            let x = -1.0 + 0.2 * i as f64;
            (x, 1.0 + x * x)
        })
        .collect();
    let spec = PlotSpec {
        title: "slice p_psi = 0.157".into(),
        x_label: "p_phi".into(),
        y_label: "h".into(),
        ..Default::default()
    };
    let series = [
        Series::points("regular precessions", surface),
        Series::points("vertical rotations", vec![(0.157, 2.008), (-0.157, 2.008)]),
    ];
    check("slice.svg", &render_svg(&spec, &series).unwrap());
}
