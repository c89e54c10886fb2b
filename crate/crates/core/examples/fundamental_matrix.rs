//! The fundamental matrix of the rolling model's integral equation: a few
//! entries and the determinant check across (−1, 1).
//!
//! Run with `cargo run --release --example fundamental_matrix`.

use rolling_ellipsoid::rough::{fundamental_matrix, GTable, DIRECT_TOL};
use rolling_ellipsoid::BodyParams;

fn main() -> rolling_ellipsoid::Result<()> {
    let p = BodyParams::default();
    let table = GTable::build(&p)?;
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>12} {:>10} {:>10}",
        "gamma3", "G11", "G12", "G21", "G22", "det-1", "table err"
    );
    for i in 0..=10 {
        let g3 = -0.99 + 1.98 * i as f64 / 10.0;
        let g = fundamental_matrix(g3, &p, DIRECT_TOL)?;
        let t = table.eval(g3);
        let err = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (g.entries[r][c] - t.entries[r][c]).abs())
            .fold(0.0, f64::max);
        let [[a, b], [c, d]] = g.entries;
        println!(
            "{g3:8.3} {a:12.6} {b:12.6} {c:12.6} {d:12.6} {:10.1e} {err:10.1e}",
            g.det() - 1.0
        );
    }
    Ok(())
}
