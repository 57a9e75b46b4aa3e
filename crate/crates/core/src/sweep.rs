//! Moving boundaries Γ(t) = F(Σ, t), their parabolic rescaling
//! F̃ = F / |t|^(1/2), the Φ-area A(F̃, a, b) of the swept surface
//! F̃(Σ × [a, b]), and the translator surface
//! S = {(r x, (r a - 1/r) v) : r > 0, x ∈ Σ}.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gaussian::{self, phi, OptimizerConfig};
use crate::linalg;
use crate::quadrature::{integrate_cells, integrate_interval, Estimate, QuadConfig};
use crate::simplicial::SimplicialManifold;
use crate::slicing::{self, SlicingConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum MotionKind {
    /// Vertex positions (flat, ambient dimension per vertex) at strictly
    /// increasing negative times. Rescaled positions F / |t|^(1/2) are
    /// interpolated linearly in between, so self-similar motions are exact.
    General { samples: Vec<(f64, Vec<f64>)> },
    /// F(x, t) = (x, 0) + (a + t) v e_n for Σ in R^(n-1).
    Translator { offset_a: f64, speed_v: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMotion {
    sigma: SimplicialManifold,
    kind: MotionKind,
}

impl BoundaryMotion {
    /// `sigma` supplies the combinatorics and multiplicities; its own
    /// coordinates are not used.
    pub fn general(sigma: SimplicialManifold, samples: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("a general motion needs at least one sample"));
        }
        let len = sigma.coords().len();
        for (i, (t, pos)) in samples.iter().enumerate() {
            if !(*t < 0.0) {
                return Err(Error::invalid(format!("sample time {t} is not negative")));
            }
            if i > 0 && !(samples[i - 1].0 < *t) {
                return Err(Error::invalid("sample times must be strictly increasing"));
            }
            if pos.len() != len {
                return Err(Error::invalid(format!("sample {i} has {} coordinates, expected {len}", pos.len())));
            }
            if pos.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("sample {i} has non-finite coordinates")));
            }
        }
        Ok(BoundaryMotion { sigma, kind: MotionKind::General { samples } })
    }

    pub fn translator(sigma: SimplicialManifold, offset_a: f64, speed_v: f64) -> Result<Self> {
        if speed_v == 0.0 || !speed_v.is_finite() || !offset_a.is_finite() {
            return Err(Error::invalid("translator needs finite a and nonzero finite v"));
        }
        Ok(BoundaryMotion { sigma, kind: MotionKind::Translator { offset_a, speed_v } })
    }

    /// A boundary that is fixed in rescaled coordinates:
    /// F(x, t) = |t|^(1/2) x on the given times.
    pub fn self_similar(sigma: SimplicialManifold, times: &[f64]) -> Result<Self> {
        let samples = times
            .iter()
            .map(|&t| (t, sigma.coords().iter().map(|c| c * t.abs().sqrt()).collect()))
            .collect();
        Self::general(sigma, samples)
    }

    /// A boundary that does not move at all.
    pub fn stationary(sigma: SimplicialManifold, times: &[f64]) -> Result<Self> {
        let samples = times.iter().map(|&t| (t, sigma.coords().to_vec())).collect();
        Self::general(sigma, samples)
    }

    pub fn sigma(&self) -> &SimplicialManifold {
        &self.sigma
    }

    pub fn kind(&self) -> &MotionKind {
        &self.kind
    }

    /// Ambient dimension of the moving boundary.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            MotionKind::General { .. } => self.sigma.ambient_dim(),
            MotionKind::Translator { .. } => self.sigma.ambient_dim() + 1,
        }
    }

    pub fn time_range(&self) -> (f64, f64) {
        match &self.kind {
            MotionKind::General { samples } => (samples[0].0, samples[samples.len() - 1].0),
            MotionKind::Translator { .. } => (f64::NEG_INFINITY, 0.0),
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.time_range();
        if !(t < 0.0) {
            return Err(Error::invalid(format!("time {t} is not negative")));
        }
        if t < lo || t > hi {
            return Err(Error::invalid(format!("time {t} is outside the motion's range [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Sample times strictly inside (a, b).
    fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        match &self.kind {
            MotionKind::General { samples } => samples.iter().map(|s| s.0).filter(|&t| t > a && t < b).collect(),
            MotionKind::Translator { .. } => Vec::new(),
        }
    }

    /// Unrescaled vertex positions F(·, t), flat. Assumes `t` in range.
    pub fn positions(&self, t: f64) -> Vec<f64> {
        match &self.kind {
            MotionKind::General { .. } => {
                let s = t.abs().sqrt();
                self.rescaled_positions(t).into_iter().map(|c| c * s).collect()
            }
            MotionKind::Translator { offset_a, speed_v } => {
                let h = (offset_a + t) * speed_v;
                self.sigma.vertices().flat_map(|p| p.iter().copied().chain(std::iter::once(h))).collect()
            }
        }
    }

    /// F̃(·, t) = F(·, t) / |t|^(1/2), flat.
    pub fn rescaled_positions(&self, t: f64) -> Vec<f64> {
        match &self.kind {
            MotionKind::General { samples } => {
                let rescale = |j: usize| {
                    let s = samples[j].0.abs().sqrt();
                    samples[j].1.iter().map(move |c| c / s)
                };
                let j = samples.partition_point(|s| s.0 <= t);
                if j == 0 || j == samples.len() {
                    return rescale(j.saturating_sub(1)).collect();
                }
                let (t0, t1) = (samples[j - 1].0, samples[j].0);
                let u = (t - t0) / (t1 - t0);
                rescale(j - 1).zip(rescale(j)).map(|(a, b)| a + u * (b - a)).collect()
            }
            MotionKind::Translator { .. } => {
                let s = t.abs().sqrt();
                self.positions(t).into_iter().map(|c| c / s).collect()
            }
        }
    }

    /// ∂F̃/∂t, flat. For sampled motions this is constant on each sample
    /// interval; `hint` picks the interval (any time strictly inside it).
    pub fn rescaled_velocity(&self, t: f64, hint: f64) -> Vec<f64> {
        match &self.kind {
            MotionKind::General { samples } => {
                if samples.len() < 2 {
                    return vec![0.0; samples[0].1.len()];
                }
                let j = samples.partition_point(|s| s.0 <= hint).clamp(1, samples.len() - 1);
                let (t0, p0) = (samples[j - 1].0, &samples[j - 1].1);
                let (t1, p1) = (samples[j].0, &samples[j].1);
                let (s0, s1) = (t0.abs().sqrt(), t1.abs().sqrt());
                p1.iter().zip(p0).map(|(b, a)| (b / s1 - a / s0) / (t1 - t0)).collect()
            }
            MotionKind::Translator { speed_v, .. } => {
                // d/dt (F / |t|^(1/2)) = F_t / |t|^(1/2) + F / (2 |t|^(3/2))
                let n = self.ambient_dim();
                let tau = t.abs();
                let s = tau.sqrt();
                let mut w: Vec<f64> = self.positions(t).into_iter().map(|p| p / (2.0 * tau * s)).collect();
                for i in 0..self.sigma.num_vertices() {
                    w[i * n + n - 1] += speed_v / s;
                }
                w
            }
        }
    }

    fn manifold(&self, coords: Vec<f64>) -> SimplicialManifold {
        SimplicialManifold::from_raw(
            self.ambient_dim(),
            self.sigma.intrinsic_dim(),
            coords,
            self.sigma.simplices().flatten().copied().collect(),
            self.sigma.multiplicities().to_vec(),
        )
    }
}

/// Γ(t) / |t|^(1/2) with the multiplicities of Σ.
pub fn rescaled_boundary(f: &BoundaryMotion, t: f64) -> Result<SimplicialManifold> {
    f.check_time(t)?;
    Ok(f.manifold(f.rescaled_positions(t)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    /// Required agreement between the mesh and double-integral routes.
    pub tol: f64,
    pub quad: QuadConfig,
    pub initial_slabs: usize,
    pub max_slabs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { tol: 1e-3, quad: QuadConfig::with_tol(1e-7), initial_slabs: 32, max_slabs: 1 << 14 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepEstimate {
    pub value: f64,
    pub error: f64,
    /// Φ-area of the space-time prism mesh.
    pub mesh_value: f64,
    /// Double integral of |(∂F̃/∂t)^⊥| Φ over Σ and t.
    pub integral_value: f64,
    pub slabs: usize,
    pub converged: bool,
}

/// Time nodes from `a` to `b`: `slabs` pieces geometric in |t|, merged with
/// the motion's sample times.
fn time_nodes(f: &BoundaryMotion, a: f64, b: f64, slabs: usize) -> Vec<f64> {
    let ratio = b / a;
    let mut nodes: Vec<f64> = (0..=slabs).map(|k| a * ratio.powf(k as f64 / slabs as f64)).collect();
    nodes[0] = a;
    nodes[slabs] = b;
    nodes.extend(f.breakpoints(a, b));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * y.abs());
    nodes
}

/// The swept surface F̃(Σ × [a, b]) as an m-dimensional mesh: each slab
/// between consecutive nodes is a prism over every simplex of Σ, split
/// into simplices.
pub fn swept_mesh(f: &BoundaryMotion, nodes: &[f64]) -> SimplicialManifold {
    let sigma = &f.sigma;
    let n = f.ambient_dim();
    let mut coords = Vec::with_capacity(nodes.len() * sigma.num_vertices() * n);
    for &t in nodes {
        coords.extend(f.rescaled_positions(t));
    }
    prism_mesh(sigma, n, nodes.len(), coords)
}

/// Stacks `rings` copies of Σ (coordinates given ring-major) and joins
/// consecutive rings by staircase-split prisms.
fn prism_mesh(sigma: &SimplicialManifold, n: usize, rings: usize, coords: Vec<f64>) -> SimplicialManifold {
    let d = sigma.intrinsic_dim();
    let nv = sigma.num_vertices();
    let ring = |k: usize, v: usize| k * nv + v;
    let mut simplices = Vec::new();
    let mut mult = Vec::new();
    for k in 0..rings.saturating_sub(1) {
        for s in 0..sigma.num_simplices() {
            let simplex = sigma.simplex(s);
            for j in 0..=d {
                simplices.extend(simplex[..=j].iter().map(|&v| ring(k, v)));
                simplices.extend(simplex[j..].iter().map(|&v| ring(k + 1, v)));
                mult.push(sigma.multiplicity(s));
            }
        }
    }
    SimplicialManifold::from_raw(n, d + 1, coords, simplices, mult)
}

const GAUSS_LEGENDRE_4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// ∫_Σ |(∂F̃/∂t)^⊥| Φ_m(F̃) dμ̃ at time `t`, with the velocity taken inside
/// the interval `[lo, hi]` that contains `t`.
fn normal_flux(f: &BoundaryMotion, t: f64, lo: f64, hi: f64, quad: &QuadConfig) -> Estimate {
    let sigma = &f.sigma;
    let n = f.ambient_dim();
    let m = sigma.intrinsic_dim() + 1;
    let x = f.rescaled_positions(t);
    let w = f.rescaled_velocity(t, 0.5 * (lo + hi));
    let at = |flat: &[f64], v: usize| flat[v * n..(v + 1) * n].to_vec();
    let mut bases = Vec::with_capacity(sigma.num_simplices());
    let mut cells = Vec::with_capacity(sigma.num_simplices());
    for (i, simplex) in sigma.simplices().enumerate() {
        let pts: Vec<Vec<f64>> = simplex.iter().map(|&v| at(&x, v)).collect();
        let edges: Vec<Vec<f64>> = pts[1..].iter().map(|p| linalg::sub(p, &pts[0])).collect();
        bases.push(linalg::gram_schmidt(&edges).0);
        cells.push((pts, sigma.multiplicity(i), i));
    }
    let integrand = |i: usize, p: &[f64]| {
        let simplex = sigma.simplex(i);
        let pts: Vec<Vec<f64>> = simplex.iter().map(|&v| at(&x, v)).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|q| q.as_slice()).collect();
        let Some(lambda) = linalg::affine_coordinates(&refs, p) else { return 0.0 };
        let mut vp = vec![0.0; n];
        for (l, &v) in lambda.iter().zip(simplex) {
            for (k, c) in vp.iter_mut().enumerate() {
                *c += l * w[v * n + k];
            }
        }
        linalg::norm(&linalg::reject(&vp, &bases[i])) * phi(m, linalg::norm_sq(p))
    };
    integrate_cells(cells, &integrand, quad)
}

/// Double-integral route on each consecutive node interval, 4-point
/// Gauss-Legendre in t.
fn slab_integrals(f: &BoundaryMotion, nodes: &[f64], quad: &QuadConfig) -> Vec<Estimate> {
    let per_node = QuadConfig { tol: quad.tol / nodes.len().max(1) as f64, ..*quad };
    nodes
        .par_windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            GAUSS_LEGENDRE_4
                .iter()
                .map(|&(x, wt)| {
                    let e = normal_flux(f, mid + half * x, lo, hi, &per_node);
                    Estimate { value: wt * half * e.value, error: wt * half * e.error }
                })
                .sum()
        })
        .collect()
}

fn check_interval(f: &BoundaryMotion, a: f64, b: f64) -> Result<()> {
    if !(a < b) {
        return Err(Error::invalid(format!("need a < b, got a = {a}, b = {b}")));
    }
    if !(b < 0.0) {
        return Err(Error::invalid(format!("need b < 0, got {b}")));
    }
    f.check_time(a)?;
    f.check_time(b)
}

/// A(F̃, a, b): the Φ_m-area of F̃(Σ × [a, b]), counting multiplicity.
///
/// Evaluated both as the Φ-area of a space-time mesh and as the double
/// integral ∫∫ |(∂F̃/∂t)^⊥| Φ_m(F̃) dμ̃ dt; slabs are doubled until the two
/// agree within `cfg.tol`. The reported value is the double integral.
pub fn swept_phi_area(f: &BoundaryMotion, a: f64, b: f64, cfg: &SweepConfig) -> Result<SweepEstimate> {
    check_interval(f, a, b)?;
    if !(cfg.tol > 0.0 && cfg.quad.tol > 0.0) {
        return Err(Error::invalid("sweep tolerances must be positive"));
    }
    let m = f.sigma.intrinsic_dim() + 1;
    if m > f.ambient_dim() {
        return Err(Error::invalid("swept surface would exceed the ambient dimension"));
    }
    let mut slabs = cfg.initial_slabs.max(1);
    loop {
        let nodes = time_nodes(f, a, b, slabs);
        let mesh = swept_mesh(f, &nodes);
        let mesh_est = gaussian::phi_area(&mesh, &cfg.quad)?;
        let integral: Estimate = slab_integrals(f, &nodes, &cfg.quad).into_iter().sum();
        let gap = (mesh_est.value - integral.value).abs();
        let converged = gap <= cfg.tol;
        if converged || slabs * 2 > cfg.max_slabs {
            return Ok(SweepEstimate {
                value: integral.value,
                error: gap + integral.error + mesh_est.error,
                mesh_value: mesh_est.value,
                integral_value: integral.value,
                slabs,
                converged,
            });
        }
        slabs *= 2;
    }
}

/// A(F̃, a, t_i) for increasing `times` in (a, 0), by the double-integral
/// route on the motion's own sample times refined to at least `slabs`
/// pieces.
pub fn swept_phi_area_cumulative(
    f: &BoundaryMotion,
    a: f64,
    times: &[f64],
    slabs: usize,
    quad: &QuadConfig,
) -> Result<Vec<Estimate>> {
    let Some(&last) = times.last() else { return Ok(Vec::new()) };
    if times.windows(2).any(|w| !(w[0] <= w[1])) || times.iter().any(|&t| t < a) {
        return Err(Error::invalid("report times must be increasing and not before a"));
    }
    if last == a {
        return Ok(vec![Estimate::default(); times.len()]);
    }
    check_interval(f, a, last)?;
    let mut nodes = time_nodes(f, a, last, slabs.max(1));
    nodes.extend(times.iter().copied().filter(|&t| t > a && t < last));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let pieces = slab_integrals(f, &nodes, quad);
    let mut out = Vec::with_capacity(times.len());
    let mut acc = Estimate::default();
    let mut k = 0;
    for &t in times {
        while k + 1 < nodes.len() && nodes[k + 1] <= t {
            acc = acc + pieces[k];
            k += 1;
        }
        out.push(acc);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialGrid {
    pub rings: usize,
    /// Bound on the Φ-mass left outside [r_min, r_max].
    pub tail_tol: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid { rings: 512, tail_tol: 1e-4 }
    }
}

/// Radius beyond which Φ of a point falls below `tol` by a wide margin.
fn tail_radius(tol: f64) -> f64 {
    2.0 * (1.0 / tol).ln().sqrt() + 4.0
}

/// The r-range of the translator surface carrying all but a negligible
/// part of its Φ-mass: outside it every ring has |position| ≥ R. The range
/// also covers the projected cone up to a negligible part: its mass inside
/// radius ρ is of order ρ^m, and beyond R it is below the tail tolerance.
pub fn translator_radii(sigma: &SimplicialManifold, a: f64, v: f64, tail_tol: f64) -> (f64, f64) {
    let d_min = closest_distance(sigma);
    let (lo, hi) = surface_radii(d_min, a, v, tail_tol);
    let m = sigma.intrinsic_dim() + 1;
    let d_max = sigma.vertices().map(linalg::norm).fold(0.0, f64::max);
    if d_max > 0.0 && d_min > 0.0 {
        let inner = 0.25 * tail_tol.powf(1.0 / m as f64) / d_max;
        let outer = tail_radius(tail_tol) / d_min;
        (lo.min(inner), hi.max(outer))
    } else {
        (lo, hi)
    }
}

fn closest_distance(sigma: &SimplicialManifold) -> f64 {
    let origin = vec![0.0; sigma.ambient_dim()];
    let d = (0..sigma.num_simplices())
        .map(|s| linalg::norm(&linalg::closest_point_on_simplex(&sigma.simplex_points(s), &origin)))
        .fold(f64::INFINITY, f64::min);
    if d.is_finite() {
        d
    } else {
        0.0
    }
}

fn surface_radii(d_min: f64, a: f64, v: f64, tail_tol: f64) -> (f64, f64) {
    let big = tail_radius(tail_tol);
    let far = |r: f64| r * r * d_min * d_min + ((r * a - 1.0 / r) * v).powi(2) >= big * big;
    let grid: Vec<f64> = (-400..=400).map(|k| 10f64.powf(k as f64 / 50.0)).collect();
    let first_near = grid.iter().position(|&r| !far(r));
    let last_near = grid.iter().rposition(|&r| !far(r));
    match (first_near, last_near) {
        (Some(i), Some(j)) => (grid[i.saturating_sub(1)], grid[(j + 1).min(grid.len() - 1)]),
        _ => (1.0, 1.0),
    }
}

/// Mesh of S = {(r x, (r a - 1/r) v)} over a geometric r-grid chosen so the
/// Φ-mass outside is below `grid.tail_tol`.
pub fn translator_sweep(sigma: &SimplicialManifold, a: f64, v: f64, grid: &RadialGrid) -> Result<SimplicialManifold> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::invalid("translator speed must be nonzero"));
    }
    if grid.rings == 0 {
        return Err(Error::invalid("radial grid needs at least one ring"));
    }
    let (r_min, r_max) = translator_radii(sigma, a, v, grid.tail_tol);
    let radii: Vec<f64> = (0..=grid.rings)
        .map(|k| r_min * (r_max / r_min).powf(k as f64 / grid.rings as f64))
        .collect();
    translator_rings(sigma, a, v, &radii)
}

/// Translator surface through the given rings.
pub fn translator_rings(sigma: &SimplicialManifold, a: f64, v: f64, radii: &[f64]) -> Result<SimplicialManifold> {
    let n = sigma.ambient_dim() + 1;
    let mut coords = Vec::with_capacity(radii.len() * sigma.num_vertices() * n);
    for &r in radii {
        if !(r > 0.0) {
            return Err(Error::invalid("ring radii must be positive"));
        }
        let h = (r * a - 1.0 / r) * v;
        for p in sigma.vertices() {
            coords.extend(p.iter().map(|c| r * c));
            coords.push(h);
        }
    }
    Ok(prism_mesh(sigma, n, radii.len(), coords))
}

/// Number of positive roots of a v r² - y r + v = 0; a double root counts
/// once.
pub fn root_count(y: f64, a: f64, v: f64) -> usize {
    if a == 0.0 {
        return usize::from(y != 0.0 && v / y > 0.0);
    }
    let (qa, qb, qc) = (a * v, -y, v);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return 0;
    }
    if disc == 0.0 {
        return usize::from(-qb / (2.0 * qa) > 0.0);
    }
    let sign = if qb >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (qb + sign * disc.sqrt());
    let roots = [q / qa, qc / q];
    roots.iter().filter(|&&r| r > 0.0).count()
}

/// Number of r > 0 with (r a - 1/r) v = y, the slice count of the
/// translator surface: positive roots of a v r² - y r - v = 0. This is
/// `root_count` with a and y negated.
pub fn surface_root_count(y: f64, a: f64, v: f64) -> usize {
    root_count(-y, -a, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootIntegral {
    /// Closed form of ∫ n(y) Φ_1(y) dy.
    pub closed_form: f64,
    /// Adaptive quadrature of the same integral.
    pub quadrature: f64,
    /// Set for a = 0, where the equation is linear.
    pub linear_case: bool,
}

/// ∫ n(y) Φ_1(y) dy: 1 for a < 0, erfc(√a |v|) for a > 0, and 1/2 for the
/// linear case a = 0.
pub fn root_count_integral(a: f64, v: f64) -> Result<RootIntegral> {
    if v == 0.0 || !v.is_finite() || !a.is_finite() {
        return Err(Error::invalid("root integral needs finite a and nonzero finite v"));
    }
    let closed_form = if a < 0.0 {
        1.0
    } else if a > 0.0 {
        erfc(a.sqrt() * v.abs())
    } else {
        0.5
    };
    let integrand = |y: f64| root_count(y, a, v) as f64 * phi(1, y * y);
    // n jumps where the discriminant vanishes and at y = 0
    let mut breaks = vec![-40.0, 0.0, 40.0];
    if a > 0.0 {
        let y0 = 2.0 * a.sqrt() * v.abs();
        breaks.extend([-y0, y0].into_iter().filter(|y| y.abs() < 40.0));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let quadrature = integrate_interval(&integrand, &breaks, 1e-11, 100_000).value;
    Ok(RootIntegral { closed_form, quadrature, linear_case: a == 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainCalculationReport {
    pub phi_s: Estimate,
    pub entropy_sigma: f64,
    pub entropy_flag: bool,
    pub cone_density: f64,
    pub mcd: f64,
    pub bound_cone: f64,
    pub bound_mcd: f64,
    /// Φ_m-area of the horizontal projection of S (the cone over Σ).
    pub proj_term: f64,
    /// ∫ Φ_(m-1)[S^y] Φ_1(y) dy.
    pub slice_term: f64,
    /// ∫ n Φ_1 for the root count of a v r² - y r + v = 0.
    pub root_integral: RootIntegral,
    /// ∫ n Φ_1 for the number of sheets of S over each height.
    pub surface_root_integral: RootIntegral,
    /// entropy(Σ) times the surface root integral: the bound on `slice_term`.
    pub slice_bound: f64,
    /// Θ(C(Σ)) + `slice_bound`.
    pub tight_bound: f64,
    pub margin_cone: f64,
    pub margin_mcd: f64,
    pub margin_tight: f64,
    pub margin_slicing: f64,
    pub margin_slice_bound: f64,
    pub projection_gap: f64,
    pub tol: f64,
}

impl MainCalculationReport {
    /// Every link of the chain holds within `tol`.
    pub fn holds(&self) -> bool {
        [self.margin_cone, self.margin_mcd, self.margin_tight, self.margin_slicing, self.margin_slice_bound]
            .iter()
            .all(|&m| m >= -self.tol)
            && self.projection_gap <= self.tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MainCalculationConfig {
    pub grid: RadialGrid,
    pub quad: QuadConfig,
    pub optimizer: OptimizerConfig,
    pub tol: f64,
}

impl Default for MainCalculationConfig {
    fn default() -> Self {
        MainCalculationConfig {
            grid: RadialGrid::default(),
            quad: QuadConfig::with_tol(1e-5),
            optimizer: OptimizerConfig::default(),
            tol: 1e-2,
        }
    }
}

/// Φ_m[S] ≤ Φ_m[Π S] + ∫ Φ_(m-1)[S^y] Φ_1(y) dy
///        ≤ Θ(C(Σ)) + entropy(Σ) ∫ n Φ_1 ≤ entropy(Σ) + Θ(C(Σ)) ≤ entropy(Σ) + mcd(Σ),
/// each term computed independently.
pub fn verify_main_calculation(
    sigma: &SimplicialManifold,
    a: f64,
    v: f64,
    cfg: &MainCalculationConfig,
) -> Result<MainCalculationReport> {
    let s = translator_sweep(sigma, a, v, &cfg.grid)?;
    let phi_s = gaussian::phi_area(&s, &cfg.quad)?;
    let entropy = gaussian::entropy(sigma, &cfg.optimizer)?;
    let cone = gaussian::cone_density(sigma, &vec![0.0; sigma.ambient_dim()], &cfg.quad)?;
    let mcd = gaussian::mcd(sigma, &cfg.optimizer)?;
    let projected = s.project_horizontal()?;
    let proj = gaussian::phi_area(&projected.manifold, &cfg.quad)?;
    let m = sigma.intrinsic_dim() + 1;
    let slice = slicing::slicing_terms(
        &s,
        &|x: &[f64]| phi(m - 1, linalg::norm_sq(x)),
        &|y: f64| phi(1, y * y),
        &SlicingConfig {
            quad: cfg.quad,
            y_range: Some((-slicing::GAUSSIAN_HEIGHT_CUTOFF, slicing::GAUSSIAN_HEIGHT_CUTOFF)),
        },
    )?
    .slice_term;
    let roots = root_count_integral(a, v)?;
    let surface_roots = root_count_integral(-a, v)?;
    let slice_bound = entropy.value * surface_roots.closed_form;
    let tight_bound = cone.value + slice_bound;
    let bound_cone = entropy.value + cone.value;
    let bound_mcd = entropy.value + mcd.value;
    Ok(MainCalculationReport {
        phi_s,
        entropy_sigma: entropy.value,
        entropy_flag: entropy.boundary_supremum_flag,
        cone_density: cone.value,
        mcd: mcd.value,
        bound_cone,
        bound_mcd,
        proj_term: proj.value,
        slice_term: slice.value,
        root_integral: roots,
        surface_root_integral: surface_roots,
        slice_bound,
        tight_bound,
        margin_cone: bound_cone - phi_s.value,
        margin_mcd: bound_mcd - phi_s.value,
        margin_tight: tight_bound - phi_s.value,
        margin_slicing: proj.value + slice.value - phi_s.value,
        margin_slice_bound: slice_bound - slice.value,
        projection_gap: (proj.value - cone.value).abs(),
        tol: cfg.tol,
    })
}
