//! Bifurcation diagrams in integral space (j₁, j₂, h): the surface of
//! regular precessions and the two curves of vertical rotations.
//!
//! On the section γ̇₃ = 0 the energy restricted to fixed linear integrals is
//! a function E(γ₃) of the inclination alone. Regular precessions are its
//! critical points; the vertical rotations are the focus threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::{gamma_from_angles, BodyState};
use crate::error::{Error, Result};
use crate::model::{Dynamics, ModelKind, Precision};
use crate::monodromy::{thread_point, FixedAxis, LoopCenter};
use crate::roots::{brent, scan};
use crate::rough::{fundamental::coefficients, k_covectors, k_variables};
use crate::smooth::{reduced_energy_slope_smooth, reduced_energy_smooth};
use crate::torus::{momentum_for_covectors, momentum_on_section};

/// γ₃ samples of the critical-point scan.
pub const SCAN_POINTS: usize = 400;
const SCAN_MARGIN: f64 = 1e-4;
/// Roots closer than this are merged.
const MERGE_TOL: f64 = 1e-7;
/// Step of the five-point derivative of the rough reduced energy.
pub const SLOPE_STEP: f64 = 1e-5;

/// A regular precession at inclination γ₃ with energy h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecessionPoint {
    pub gamma3: f64,
    pub h: f64,
    /// |dE/dγ₃| at the returned root.
    pub residual: f64,
}

/// A vertical rotation with axial spin `spin` and integral values (j₁, j₂, h).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerticalPoint {
    pub spin: f64,
    pub j1: f64,
    pub j2: f64,
    pub h: f64,
}

/// dE/dγ₃ on the section at fixed (j₁, j₂).
///
/// Smooth model: closed form. Rough model: along γ₃ the K-values obey the
/// linear system K' = A(γ₃)K, so E(γ₃ + t) agrees to first order with the
/// algebraic energy at (γ₃ + t, K + tAK); that function is differentiated
/// with a five-point stencil.
pub fn energy_slope<D: Dynamics + ?Sized>(
    model: &D,
    gamma3: f64,
    j1: f64,
    j2: f64,
    precision: Precision,
) -> Result<f64> {
    let p = *model.params();
    match model.kind() {
        ModelKind::Smooth => Ok(reduced_energy_slope_smooth(gamma3, j2, j1, &p)),
        ModelKind::Rough => {
            let state = momentum_on_section(model, gamma3, 0.0, j1, j2, precision)?;
            let (k1, k2) = k_variables(&state, &p);
            let (a12, a21) = coefficients(gamma3, &p);
            let e = |t: f64| -> Result<f64> {
                let g3 = gamma3 + t;
                let gamma = gamma_from_angles(g3.acos(), 0.0);
                let s = momentum_for_covectors(
                    model,
                    &gamma,
                    k_covectors(&gamma, &p),
                    k1 + t * a12 * k2,
                    k2 + t * a21 * k1,
                )?;
                Ok(model.energy(&s))
            };
            let h = SLOPE_STEP;
            Ok((e(-2.0 * h)? - 8.0 * e(-h)? + 8.0 * e(h)? - e(2.0 * h)?) / (12.0 * h))
        }
    }
}

/// E(γ₃) on the section at fixed (j₁, j₂).
pub fn section_energy<D: Dynamics + ?Sized>(
    model: &D,
    gamma3: f64,
    j1: f64,
    j2: f64,
    precision: Precision,
) -> Result<f64> {
    match model.kind() {
        ModelKind::Smooth => Ok(reduced_energy_smooth(gamma3, 0.0, j2, j1, model.params())),
        ModelKind::Rough => {
            let state = momentum_on_section(model, gamma3, 0.0, j1, j2, precision)?;
            Ok(model.energy(&state))
        }
    }
}

/// All regular precessions with linear integrals (j₁, j₂), by increasing γ₃.
pub fn precession_points<D: Dynamics + ?Sized>(
    model: &D,
    j1: f64,
    j2: f64,
) -> Result<Vec<PrecessionPoint>> {
    let fast = |g3: f64| energy_slope(model, g3, j1, j2, Precision::Fast).unwrap_or(f64::NAN);
    let (_, brackets) = scan(fast, -1.0 + SCAN_MARGIN, 1.0 - SCAN_MARGIN, SCAN_POINTS);
    let exact = |g3: f64| energy_slope(model, g3, j1, j2, Precision::Exact);

    let mut out: Vec<PrecessionPoint> = Vec::new();
    for br in brackets {
        let (f_lo, f_hi) = (exact(br.lo)?, exact(br.hi)?);
        if f_lo * f_hi > 0.0 {
            continue;
        }
        let root = brent(
            |g| exact(g).unwrap_or(f64::NAN),
            br.lo,
            br.hi,
            f_lo,
            f_hi,
            1e-15,
            0.0,
        );
        if out
            .last()
            .is_some_and(|p| (p.gamma3 - root).abs() < MERGE_TOL)
        {
            continue;
        }
        out.push(PrecessionPoint {
            gamma3: root,
            h: section_energy(model, root, j1, j2, Precision::Exact)?,
            residual: exact(root)?.abs(),
        });
    }
    Ok(out)
}

/// The two curves of vertical rotations (on the tips γ₃ = +1 and γ₃ = −1),
/// sampled at `n` spins M₃ in `spin_range`.
pub fn vertical_curves<D: Dynamics + ?Sized>(
    model: &D,
    spin_range: (f64, f64),
    n: usize,
) -> Result<[Vec<VerticalPoint>; 2]> {
    if n < 2 {
        return Err(Error::Config(format!(
            "need at least 2 spin samples, got {n}"
        )));
    }
    let p = *model.params();
    let spins: Vec<f64> = (0..n)
        .map(|i| spin_range.0 + (spin_range.1 - spin_range.0) * i as f64 / (n - 1) as f64)
        .collect();
    let curve = |upper: bool| -> Result<Vec<VerticalPoint>> {
        spins
            .iter()
            .map(|&spin| match model.kind() {
                ModelKind::Smooth => {
                    let sign = if upper { 1.0 } else { -1.0 };
                    Ok(VerticalPoint {
                        spin,
                        j1: sign * spin,
                        j2: spin,
                        h: p.m * p.g * p.b3 + spin * spin / (2.0 * p.i3),
                    })
                }
                ModelKind::Rough => {
                    let state = BodyState::vertical(spin, upper);
                    let (j1, j2) = model.linear_integrals(&state, Precision::Exact)?;
                    Ok(VerticalPoint {
                        spin,
                        j1,
                        j2,
                        h: model.energy(&state),
                    })
                }
            })
            .collect()
    };
    Ok([curve(true)?, curve(false)?])
}

/// Sampling of integral space for [`build_diagram`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub j1_range: (f64, f64),
    pub j2_range: (f64, f64),
    pub n_j1: usize,
    pub n_j2: usize,
    pub spin_range: (f64, f64),
    pub n_spin: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            j1_range: (-1.5, 1.5),
            j2_range: (-1.5, 1.5),
            n_j1: 41,
            n_j2: 41,
            spin_range: (-3.0, 3.0),
            n_spin: 121,
        }
    }
}

/// One point of the precession surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceSample {
    pub j1: f64,
    pub j2: f64,
    pub gamma3: f64,
    pub h: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationDiagram {
    pub model: ModelKind,
    pub surface: Vec<SurfaceSample>,
    /// Vertical rotations on the upper and the lower tip.
    pub curves: [Vec<VerticalPoint>; 2],
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn build_diagram<D: Dynamics + ?Sized>(
    model: &D,
    grid: &GridSpec,
) -> Result<BifurcationDiagram> {
    if grid.n_j1 < 2 || grid.n_j2 < 2 {
        return Err(Error::Config(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    let nodes: Vec<(f64, f64)> = linspace(grid.j1_range, grid.n_j1)
        .into_iter()
        .flat_map(|a| {
            linspace(grid.j2_range, grid.n_j2)
                .into_iter()
                .map(move |b| (a, b))
        })
        .collect();
    let per_node: Vec<Vec<SurfaceSample>> = nodes
        .par_iter()
        .map(|&(j1, j2)| {
            precession_points(model, j1, j2).map(|pts| {
                pts.into_iter()
                    .map(|p| SurfaceSample {
                        j1,
                        j2,
                        gamma3: p.gamma3,
                        h: p.h,
                        residual: p.residual,
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    Ok(BifurcationDiagram {
        model: model.kind(),
        surface: per_node.into_iter().flatten().collect(),
        curves: vertical_curves(model, grid.spin_range, grid.n_spin)?,
    })
}

/// A point of the precession surface within a plane slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicePoint {
    pub varying: f64,
    pub gamma3: f64,
    pub h: f64,
    pub residual: f64,
}

/// Intersection of the diagram with the plane j_fixed = `plane_value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slice {
    pub model: ModelKind,
    pub fixed_axis: FixedAxis,
    pub plane_value: f64,
    pub surface: Vec<SlicePoint>,
    /// Where the upper and lower vertical-rotation curves cross the plane.
    pub threads: [LoopCenter; 2],
}

impl Slice {
    /// Lowest energy of the surface in the slice.
    pub fn surface_min(&self) -> Option<&SlicePoint> {
        self.surface.iter().min_by(|a, b| a.h.total_cmp(&b.h))
    }
}

/// Slices the diagram by the plane j_fixed = `plane_value`, sampling the
/// varying integral at `n` points of `range`.
pub fn slice<D: Dynamics + ?Sized>(
    model: &D,
    fixed_axis: FixedAxis,
    plane_value: f64,
    range: (f64, f64),
    n: usize,
) -> Result<Slice> {
    if n < 2 {
        return Err(Error::Config("slice needs at least 2 points".into()));
    }
    let per_node: Vec<Vec<SlicePoint>> = linspace(range, n)
        .par_iter()
        .map(|&v| {
            let (j1, j2) = match fixed_axis {
                FixedAxis::J1Fixed => (plane_value, v),
                FixedAxis::J2Fixed => (v, plane_value),
            };
            precession_points(model, j1, j2).map(|pts| {
                pts.into_iter()
                    .map(|p| SlicePoint {
                        varying: v,
                        gamma3: p.gamma3,
                        h: p.h,
                        residual: p.residual,
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    Ok(Slice {
        model: model.kind(),
        fixed_axis,
        plane_value,
        surface: per_node.into_iter().flatten().collect(),
        threads: [
            thread_point(model, fixed_axis, plane_value, true)?,
            thread_point(model, fixed_axis, plane_value, false)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::BodyParams;
    use crate::rough::RoughModel;
    use crate::smooth::SmoothModel;
    use approx::assert_abs_diff_eq;

    fn smooth() -> SmoothModel {
        SmoothModel::new(BodyParams::default())
    }

    #[test]
    fn equatorial_rest_is_the_only_precession_at_zero_momenta() {
        let m = smooth();
        let pts = precession_points(&m, 0.0, 0.0).unwrap();
        assert_eq!(pts.len(), 1, "{pts:?}");
        assert_abs_diff_eq!(pts[0].gamma3, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[0].h, 1.0, epsilon = 1e-12);

        // oracle: brute-force minimum of the closed-form potential
        let p = m.params;
        let (best, _) = (0..=20000)
            .map(|i| -0.999 + 1.998 * i as f64 / 20000.0)
            .map(|g| (g, reduced_energy_smooth(g, 0.0, 0.0, 0.0, &p)))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert!((best - pts[0].gamma3).abs() < 1e-3);
    }

    #[test]
    fn smooth_residuals_are_small() {
        let m = smooth();
        for &(j1, j2) in &[(0.157, 0.3), (-0.8, 0.4), (1.2, -1.1), (0.157, 0.157)] {
            for p in precession_points(&m, j1, j2).unwrap() {
                assert!(p.residual <= 1e-9, "{p:?}");
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        let m = smooth();
        let a = precession_points(&m, 0.4, -0.7).unwrap();
        let b = precession_points(&m, -0.4, 0.7).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x.h, y.h, epsilon = 1e-10);
        }
        // (p_ψ, p_φ, γ₃) → (p_ψ, −p_φ, −γ₃)
        let c = precession_points(&m, 0.4, 0.7).unwrap();
        assert_eq!(a.len(), c.len());
        for (x, y) in a.iter().zip(c.iter().rev()) {
            assert_abs_diff_eq!(x.gamma3, -y.gamma3, epsilon = 1e-9);
            assert_abs_diff_eq!(x.h, y.h, epsilon = 1e-10);
        }
    }

    #[test]
    fn rough_slope_matches_finite_differences_of_exact_energy() {
        let model = RoughModel::new(BodyParams::default()).unwrap();
        let (c1, c2) = (0.3, -0.5);
        for g3 in [-0.6, 0.1, 0.7] {
            let e = |g: f64| section_energy(&model, g, c1, c2, Precision::Exact).unwrap();
            let d = 1e-4;
            let fd = (e(g3 - 2.0 * d) - 8.0 * e(g3 - d) + 8.0 * e(g3 + d) - e(g3 + 2.0 * d))
                / (12.0 * d);
            let slope = energy_slope(&model, g3, c1, c2, Precision::Exact).unwrap();
            assert_abs_diff_eq!(slope, fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn rough_residuals_are_small() {
        let model = RoughModel::new(BodyParams::default()).unwrap();
        let pts = precession_points(&model, 0.157, 0.3).unwrap();
        assert!(!pts.is_empty());
        for p in pts {
            assert!(p.residual <= 1e-9, "{p:?}");
        }
    }

    #[test]
    fn vertical_curves_at_zero_spin_meet() {
        let m = smooth();
        let rough = RoughModel::new(BodyParams::default()).unwrap();
        for curves in [
            vertical_curves(&m, (-1.0, 1.0), 3).unwrap(),
            vertical_curves(&rough, (-1.0, 1.0), 3).unwrap(),
        ] {
            for c in &curves {
                assert_abs_diff_eq!(c[1].h, 2.0, epsilon = 1e-14);
                assert_abs_diff_eq!(c[1].j1, 0.0, epsilon = 1e-14);
                assert_abs_diff_eq!(c[1].j2, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn smooth_vertical_curve_value() {
        let m = smooth();
        let [up, down] = vertical_curves(&m, (0.157, 1.0), 2).unwrap();
        assert_abs_diff_eq!(up[0].h, 2.0 + 0.157 * 0.157 / 3.0, epsilon = 1e-15);
        assert_eq!((up[0].j1, down[0].j1), (0.157, -0.157));
    }

    #[test]
    fn slice_has_two_isolated_threads_above_the_bottom() {
        let m = smooth();
        let s = slice(&m, FixedAxis::J1Fixed, 0.157, (-1.5, 1.5), 61).unwrap();
        let bottom = s.surface_min().unwrap().h;
        for t in &s.threads {
            assert!(t.h > bottom);
        }
    }
}
