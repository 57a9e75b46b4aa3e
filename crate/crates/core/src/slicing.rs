//! The slicing inequality
//!
//! ∫_S f(x) g(y) ≤ ∫_{Π(S)} f(x) Σ_{sheets} g(h) + ∫ (∫_{S^y} f) g(y) dy
//!
//! for a simplicial S in R^n split as (x, y) ∈ R^(n-1) × R, with Π the
//! horizontal projection and S^y the slice at height y.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::phi;
use crate::linalg;
use crate::quadrature::{integrate_cells, integrate_interval, integrate_manifold, Estimate, QuadConfig};
use crate::simplicial::{SimplicialManifold, DEFAULT_DEGENERACY_EPS};

/// Heights beyond this carry a Φ_1 tail below 1e-31.
pub const GAUSSIAN_HEIGHT_CUTOFF: f64 = 12.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicingConfig {
    pub quad: QuadConfig,
    /// Restricts the outer height integral, e.g. to the effective support of g.
    pub y_range: Option<(f64, f64)>,
}

impl Default for SlicingConfig {
    fn default() -> Self {
        SlicingConfig { quad: QuadConfig::with_tol(1e-6), y_range: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlicingTerms {
    pub lhs: Estimate,
    pub proj_term: Estimate,
    pub slice_term: Estimate,
}

impl SlicingTerms {
    pub fn rhs(&self) -> f64 {
        self.proj_term.value + self.slice_term.value
    }

    pub fn tol(&self) -> f64 {
        self.lhs.error + self.proj_term.error + self.slice_term.error
    }
}

/// Projection Jacobian J = vol(Πσ)/vol(σ) and |∇_σ h| of one simplex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimplexSlopes {
    pub jacobian: f64,
    pub height_gradient: f64,
}

pub fn simplex_slopes(s: &SimplicialManifold) -> Result<Vec<SimplexSlopes>> {
    let n = s.ambient_dim();
    let d = s.intrinsic_dim();
    if d == 0 || d >= n {
        return Err(Error::invalid("slopes need 0 < intrinsic dimension < ambient dimension"));
    }
    Ok((0..s.num_simplices())
        .map(|i| {
            let pts = s.simplex_points(i);
            let edges: Vec<Vec<f64>> = pts[1..].iter().map(|p| linalg::sub(p, pts[0])).collect();
            let (basis, vol) = linalg::gram_schmidt(&edges);
            let flat: Vec<Vec<f64>> = pts.iter().map(|p| p[..n - 1].to_vec()).collect();
            let flat_refs: Vec<&[f64]> = flat.iter().map(|p| p.as_slice()).collect();
            let vol = vol / linalg::factorial(d);
            let jacobian = if vol > 0.0 { linalg::simplex_volume(&flat_refs) / vol } else { 0.0 };
            let tangential: f64 = basis.iter().map(|b| b[n - 1] * b[n - 1]).sum();
            SimplexSlopes { jacobian, height_gradient: tangential.sqrt().min(1.0) }
        })
        .collect())
}

fn guard<'a>(flag: &'a AtomicBool) -> impl Fn(f64) -> f64 + 'a {
    move |v| {
        if v < 0.0 || v.is_nan() {
            flag.store(true, Ordering::Relaxed);
        }
        v
    }
}

/// The three terms of the slicing inequality for weights `f` on R^(n-1)
/// and `g` on R. Each sheet over a projected point contributes `g` at its
/// own height, so the fiber sum is exact for a simplicial S.
pub fn slicing_terms<F, G>(s: &SimplicialManifold, f: &F, g: &G, cfg: &SlicingConfig) -> Result<SlicingTerms>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    let n = s.ambient_dim();
    let d = s.intrinsic_dim();
    if d == 0 || d >= n {
        return Err(Error::invalid("slicing needs 0 < intrinsic dimension < ambient dimension"));
    }
    if !(cfg.quad.tol > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    let negative = AtomicBool::new(false);
    let check = guard(&negative);

    let lhs = integrate_manifold(s, &|_, p: &[f64]| check(f(&p[..n - 1])) * check(g(p[n - 1])), &cfg.quad);

    // Projected simplices with the heights of their vertices.
    let mut sheets: Vec<(Vec<Vec<f64>>, Vec<f64>)> = Vec::new();
    let mut cells = Vec::new();
    for i in 0..s.num_simplices() {
        let pts = s.simplex_points(i);
        let flat: Vec<Vec<f64>> = pts.iter().map(|p| p[..n - 1].to_vec()).collect();
        let refs: Vec<&[f64]> = flat.iter().map(|p| p.as_slice()).collect();
        let vol = linalg::simplex_volume(&refs);
        if vol <= DEFAULT_DEGENERACY_EPS * s.longest_edge(i).powi(d as i32) {
            continue;
        }
        let heights = pts.iter().map(|p| p[n - 1]).collect();
        cells.push((flat.clone(), s.multiplicity(i), sheets.len()));
        sheets.push((flat, heights));
    }
    let proj_term = integrate_cells(
        cells,
        &|tag, x: &[f64]| {
            let (flat, heights) = &sheets[tag];
            let refs: Vec<&[f64]> = flat.iter().map(|p| p.as_slice()).collect();
            let h = linalg::affine_coordinates(&refs, x)
                .map_or(heights[0], |l| l.iter().zip(heights).map(|(a, b)| a * b).sum());
            check(f(x)) * check(g(h))
        },
        &cfg.quad,
    );

    let slice_term = slice_integral(s, f, g, cfg, &check)?;
    if negative.load(Ordering::Relaxed) {
        return Err(Error::invalid("weight functions must be non-negative"));
    }
    Ok(SlicingTerms { lhs, proj_term, slice_term })
}

fn slice_integral<F, G, C>(s: &SimplicialManifold, f: &F, g: &G, cfg: &SlicingConfig, check: &C) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
    C: Fn(f64) -> f64 + Sync,
{
    let n = s.ambient_dim();
    let mut heights: Vec<f64> = s.vertices().map(|p| p[n - 1]).collect();
    heights.sort_by(f64::total_cmp);
    heights.dedup();
    let (Some(&lo), Some(&hi)) = (heights.first(), heights.last()) else {
        return Ok(Estimate::default());
    };
    let (lo, hi) = match cfg.y_range {
        Some((a, b)) => (lo.max(a), hi.min(b)),
        None => (lo, hi),
    };
    if hi <= lo {
        return Ok(Estimate::default());
    }
    // Vertex heights are the kinks of the slice measure; keep a bounded
    // number of them as initial breakpoints.
    let inside: Vec<f64> = heights.into_iter().filter(|&h| h > lo && h < hi).collect();
    let stride = inside.len().div_ceil(256).max(1);
    let mut breaks = vec![lo];
    breaks.extend(inside.into_iter().step_by(stride));
    breaks.push(hi);

    let inner = QuadConfig { tol: cfg.quad.tol * 0.1 / (hi - lo).max(1.0), ..cfg.quad };
    let failure = std::cell::Cell::new(None);
    let inner_error = std::cell::Cell::new(0.0f64);
    let integrand = |y: f64| {
        let gy = check(g(y));
        if gy == 0.0 {
            return 0.0;
        }
        match s.slice_by_height(y) {
            Ok(slice) => {
                let e = integrate_manifold(&slice, &|_, x: &[f64]| check(f(x)), &inner);
                inner_error.set(inner_error.get().max(e.error));
                e.value * gy
            }
            Err(err) => {
                failure.set(Some(err));
                0.0
            }
        }
    };
    let mut outer = integrate_interval(&integrand, &breaks, 0.9 * cfg.quad.tol, 20_000);
    if let Some(err) = failure.take() {
        return Err(err);
    }
    outer.error += inner_error.get() * (hi - lo);
    Ok(outer)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussSlicingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub proj_term: f64,
    pub slice_term: f64,
    /// rhs - lhs; should be at least -tol.
    pub margin: f64,
    pub tol: f64,
}

/// Gaussian slicing: Φ_m[S] ≤ Φ_m[Π|S] + ∫ Φ_(m-1)[S^y] Φ_1(y) dy, using
/// Φ_m(x, y) = Φ_(m-1)(x) Φ_1(y).
pub fn verify_gauss_slicing(s: &SimplicialManifold, quad: &QuadConfig) -> Result<GaussSlicingReport> {
    let m = s.intrinsic_dim();
    let cfg = SlicingConfig { quad: *quad, y_range: Some((-GAUSSIAN_HEIGHT_CUTOFF, GAUSSIAN_HEIGHT_CUTOFF)) };
    let f = |x: &[f64]| phi(m - 1, linalg::norm_sq(x));
    let g = |y: f64| phi(1, y * y);
    let terms = slicing_terms(s, &f, &g, &cfg)?;
    let lhs = integrate_manifold(s, &|_, p: &[f64]| phi(m, linalg::norm_sq(p)), quad);
    let rhs = terms.rhs();
    Ok(GaussSlicingReport {
        lhs: lhs.value,
        rhs,
        proj_term: terms.proj_term.value,
        slice_term: terms.slice_term.value,
        margin: rhs - lhs.value,
        tol: lhs.error + terms.proj_term.error + terms.slice_term.error,
    })
}
