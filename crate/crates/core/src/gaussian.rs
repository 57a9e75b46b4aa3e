//! Gaussian kernels, Φ-area, and the optimized densities built on them:
//! entropy, cone density, maximal cone density and maximal density ratio.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::optimize::{multistart, PatternSearch};
use crate::quadrature::{integrate_cells, integrate_manifold, Estimate, QuadConfig};
use crate::simplicial::{SimplicialManifold, DEFAULT_VERTEX_EPS};

/// Ratio of the smallest and largest window times to the squared diameter.
const TIME_RANGE: (f64, f64) = (1e-4, 1e4);
/// Candidate ball radii as fractions of the diameter.
const RADIUS_RANGE: (f64, f64) = (1e-3, 2.0);
/// Distance (in log-parameter units) to a domain edge that counts as "at the edge".
const EDGE_MARGIN: f64 = 0.05;

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    // ω_d = 2π ω_(d-2) / d, exact in the low dimensions
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI * unit_ball_volume(d - 2) / d as f64,
    }
}

/// Φ_m as a function of |x|^2.
#[inline]
pub fn phi(m: usize, r_sq: f64) -> f64 {
    (4.0 * PI).powf(-(m as f64) / 2.0) * (-r_sq / 4.0).exp()
}

/// ρ_m(x, t) as a function of |x|^2 and |t|.
#[inline]
pub fn rho(m: usize, r_sq: f64, tau: f64) -> f64 {
    (4.0 * PI * tau).powf(-(m as f64) / 2.0) * (-r_sq / (4.0 * tau)).exp()
}

/// Backward heat kernel ρ_m(x, t) for `Some(t)` with t < 0, and
/// Φ_m(x) = ρ_m(x, -1) for `None`.
pub fn gaussian_kernel(m: usize, x: &[f64], t: Option<f64>) -> Result<f64> {
    let r_sq = linalg::norm_sq(x);
    match t {
        None => Ok(phi(m, r_sq)),
        Some(t) if t < 0.0 && t.is_finite() => Ok(rho(m, r_sq, -t)),
        Some(t) => Err(Error::invalid(format!("kernel time must be negative, got {t}"))),
    }
}

/// Center and time scale t0 of a translated and dilated Gaussian.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianWindow {
    pub center: Vec<f64>,
    pub scale_time: f64,
}

impl GaussianWindow {
    pub fn new(center: Vec<f64>, scale_time: f64) -> Result<Self> {
        if !(scale_time > 0.0 && scale_time.is_finite()) {
            return Err(Error::invalid("window time scale must be positive and finite"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("window center must be finite"));
        }
        Ok(GaussianWindow { center, scale_time })
    }

    pub fn standard(n: usize) -> Self {
        GaussianWindow { center: vec![0.0; n], scale_time: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    Window(GaussianWindow),
    Shift { shift: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub value: f64,
    pub witness: Witness,
    pub quad_error: f64,
    /// Set when the supremum is only approached in a parameter limit.
    pub boundary_supremum_flag: bool,
    pub evaluations: usize,
}

impl DensityReport {
    fn empty() -> Self {
        DensityReport {
            value: 0.0,
            witness: Witness::None,
            quad_error: 0.0,
            boundary_supremum_flag: false,
            evaluations: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Pattern search stops when its step multiplier drops below this.
    pub step_tol: f64,
    pub quad: QuadConfig,
    pub max_center_starts: usize,
    pub time_grid: usize,
    pub radius_grid: usize,
    /// Grid points per axis for shift starts.
    pub shift_grid: usize,
    pub random_starts: usize,
    /// Number of best scan points refined by local search.
    pub refine_top: usize,
    pub seed: u64,
    pub max_evals: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            step_tol: 1e-4,
            quad: QuadConfig::with_tol(1e-7),
            max_center_starts: 48,
            time_grid: 17,
            radius_grid: 24,
            shift_grid: 5,
            random_starts: 8,
            refine_top: 6,
            seed: 0,
            max_evals: 4_000,
        }
    }
}

fn check_tol(cfg: &QuadConfig) -> Result<()> {
    if cfg.tol > 0.0 && cfg.tol.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("quadrature tolerance must be positive, got {}", cfg.tol)))
    }
}

/// Φ_d-area of `m` counting multiplicity, d = intrinsic dimension.
pub fn phi_area(m: &SimplicialManifold, cfg: &QuadConfig) -> Result<Estimate> {
    check_tol(cfg)?;
    let d = m.intrinsic_dim();
    Ok(integrate_manifold(m, &|_, x: &[f64]| phi(d, linalg::norm_sq(x)), cfg))
}

/// ∫_M ρ_d(x - center, -t0): the Φ-area of the translated and dilated copy
/// of `m` described by `w`.
pub fn f_functional(m: &SimplicialManifold, w: &GaussianWindow, cfg: &QuadConfig) -> Result<Estimate> {
    check_tol(cfg)?;
    if w.center.len() != m.ambient_dim() {
        return Err(Error::invalid("window center dimension does not match ambient dimension"));
    }
    Ok(window_integral(m, &w.center, w.scale_time, cfg))
}

/// Simplices farther than this many √t0 from the center carry a kernel
/// factor below e^(-27).
const WINDOW_REACH: f64 = 10.5;

fn window_integral(m: &SimplicialManifold, center: &[f64], t0: f64, cfg: &QuadConfig) -> Estimate {
    let d = m.intrinsic_dim();
    let reach = WINDOW_REACH * t0.sqrt();
    let integrand = |_, x: &[f64]| rho(d, linalg::dist_sq(x, center), t0);
    let cells: Vec<(Vec<Vec<f64>>, f64, usize)> = (0..m.num_simplices())
        .filter_map(|s| {
            let pts = m.simplex_points(s);
            let k = pts.len() as f64;
            let bary: Vec<f64> = (0..center.len()).map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / k).collect();
            let radius = pts.iter().map(|p| linalg::dist(p, &bary)).fold(0.0, f64::max);
            (linalg::dist(&bary, center) - radius <= reach)
                .then(|| (pts.into_iter().map(|p| p.to_vec()).collect(), m.multiplicity(s), s))
        })
        .collect();
    if cells.len() == m.num_simplices() {
        return integrate_manifold(m, &integrand, cfg);
    }
    integrate_cells(cells, &integrand, cfg)
}

/// Density of the tangent cone of `m` at `p`: the t0 -> 0 limit of the
/// window integral centered at `p`. `None` when `p` lies on a face of
/// dimension below d - 1 of a simplex with d >= 3.
pub fn local_density(m: &SimplicialManifold, p: &[f64]) -> Option<f64> {
    let d = m.intrinsic_dim();
    let tol = 1e-9 * m.diameter().max(1e-300);
    let mut total = 0.0;
    for s in 0..m.num_simplices() {
        let pts = m.simplex_points(s);
        let q = linalg::closest_point_on_simplex(&pts, p);
        if linalg::dist(&q, p) > tol {
            continue;
        }
        let mult = m.multiplicity(s);
        if d == 0 {
            total += mult;
            continue;
        }
        let lambda = linalg::affine_coordinates(&pts, p)?;
        let on_face: Vec<usize> = (0..=d).filter(|&i| lambda[i].abs() < 1e-9).collect();
        total += mult
            * match (d, on_face.len()) {
                (_, 0) => 1.0,
                (_, 1) => 0.5,
                (2, 2) => {
                    let corner = (0..3).find(|i| !on_face.contains(i))?;
                    let a = linalg::sub(pts[(corner + 1) % 3], pts[corner]);
                    let b = linalg::sub(pts[(corner + 2) % 3], pts[corner]);
                    let cos = linalg::dot(&a, &b) / (linalg::norm(&a) * linalg::norm(&b));
                    cos.clamp(-1.0, 1.0).acos() / (2.0 * PI)
                }
                _ => return None,
            };
    }
    Some(total)
}

fn nearest_point(m: &SimplicialManifold, p: &[f64]) -> Option<Vec<f64>> {
    (0..m.num_simplices())
        .map(|s| linalg::closest_point_on_simplex(&m.simplex_points(s), p))
        .min_by(|a, b| linalg::dist_sq(a, p).total_cmp(&linalg::dist_sq(b, p)))
}

fn distance_to(m: &SimplicialManifold, p: &[f64]) -> f64 {
    nearest_point(m, p).map_or(f64::INFINITY, |q| linalg::dist(&q, p))
}

/// Normalization frame: points are written as `origin + scale * x`.
struct Frame {
    origin: Vec<f64>,
    scale: f64,
}

impl Frame {
    fn of(m: &SimplicialManifold) -> Self {
        let scale = m.diameter();
        Frame { origin: m.centroid(), scale: if scale > 0.0 { scale } else { 1.0 } }
    }

    fn to_world(&self, x: &[f64]) -> Vec<f64> {
        self.origin.iter().zip(x).map(|(o, xi)| o + self.scale * xi).collect()
    }

    fn to_local(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(&self.origin).map(|(pi, o)| (pi - o) / self.scale).collect()
    }

    /// Vertex subsample (every k-th), centroid and seeded random points in
    /// the bounding box, all in local coordinates.
    fn anchor_points(&self, m: &SimplicialManifold, max_vertices: usize, random: usize, seed: u64) -> Vec<Vec<f64>> {
        let nv = m.num_vertices();
        let step = nv.div_ceil(max_vertices.max(1)).max(1);
        let mut out: Vec<Vec<f64>> = (0..nv).step_by(step).map(|v| self.to_local(m.vertex(v))).collect();
        out.push(vec![0.0; m.ambient_dim()]);
        if let Some((lo, hi)) = m.bounding_box() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..random {
                let p: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a + (b - a) * rng.gen::<f64>()).collect();
                out.push(self.to_local(&p));
            }
        }
        out
    }
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

/// Supremum of the window integral over all centers and time scales.
///
/// Multistart compass search over (center, ln t0) with ln t0 confined to
/// `[1e-4, 1e4] * diameter^2`. When the best point sits on that range's
/// edge the flag is set and the analytic limit is reported: the tangent
/// cone density at the nearest point of `m` for t0 -> 0, and the total
/// multiplicity of a point set for t0 -> infinity.
pub fn entropy(m: &SimplicialManifold, cfg: &OptimizerConfig) -> Result<DensityReport> {
    check_tol(&cfg.quad)?;
    if m.is_empty() {
        return Ok(DensityReport::empty());
    }
    let n = m.ambient_dim();
    let frame = Frame::of(m);
    let (s_lo, s_hi) = (
        (TIME_RANGE.0 * frame.scale * frame.scale).ln(),
        (TIME_RANGE.1 * frame.scale * frame.scale).ln(),
    );
    let objective = |x: &[f64]| window_integral(m, &frame.to_world(&x[..n]), x[n].exp(), &cfg.quad).value;

    let anchors = frame.anchor_points(m, cfg.max_center_starts, cfg.random_starts, cfg.seed);
    let times = log_grid(s_lo, s_hi, cfg.time_grid);
    let starts: Vec<Vec<f64>> = anchors
        .iter()
        .flat_map(|a| {
            times.iter().map(move |&s| {
                let mut x = a.clone();
                x.push(s);
                x
            })
        })
        .collect();
    let mut steps = vec![0.25; n];
    steps.push(0.5);
    let mut search = PatternSearch::new(steps, cfg.step_tol).with_bound(n, s_lo, s_hi);
    search.max_evals = cfg.max_evals;
    let best = multistart(&objective, &starts, cfg.refine_top, &search)
        .ok_or_else(|| Error::Numeric("entropy search had no starts".into()))?;

    let mut center = frame.to_world(&best.x[..n]);
    let s = best.x[n];
    let mut t0 = s.exp();
    let est = window_integral(m, &center, t0, &cfg.quad);
    let mut value = est.value;
    // The supremum lies in a limit when the value does not drop on the
    // way to an edge of the time range.
    let slack = 10.0 * cfg.quad.tol;
    let reaches = |edge: f64| {
        (s - edge).abs() < EDGE_MARGIN || window_integral(m, &center, edge.exp(), &cfg.quad).value >= value - slack
    };
    let mut flag = false;
    if reaches(s_lo) {
        flag = true;
        if let Some(p) = nearest_point(m, &center) {
            if let Some(limit) = local_density(m, &p) {
                if limit >= value - slack {
                    value = limit;
                    center = p;
                    t0 = s_lo.exp();
                }
            }
        }
    } else if reaches(s_hi) {
        flag = true;
        if m.intrinsic_dim() == 0 {
            value = value.max(m.multiplicities().iter().sum());
            t0 = s_hi.exp();
        }
    }
    Ok(DensityReport {
        value,
        witness: Witness::Window(GaussianWindow { center, scale_time: t0 }),
        quad_error: est.error,
        boundary_supremum_flag: flag,
        evaluations: best.evals,
    })
}

/// Density of the cone over `sigma + shift` with vertex at the origin, via
/// Θ = (1 / (m ω_m)) ∫ |p^⊥| / |p|^m over the shifted Σ, m = dim Σ + 1,
/// where p^⊥ is the part of p orthogonal to the simplex's tangent plane.
pub fn cone_density(sigma: &SimplicialManifold, shift: &[f64], cfg: &QuadConfig) -> Result<Estimate> {
    check_tol(cfg)?;
    if shift.len() != sigma.ambient_dim() {
        return Err(Error::invalid("shift dimension does not match ambient dimension"));
    }
    let d = sigma.intrinsic_dim();
    let m = d + 1;
    if m > sigma.ambient_dim() {
        return Err(Error::invalid("cone over a manifold of full ambient dimension"));
    }
    let neg: Vec<f64> = shift.iter().map(|s| -s).collect();
    let moved = sigma.transform(&neg, 1.0)?;
    for (i, p) in moved.vertices().enumerate() {
        let r = linalg::norm(p);
        if r <= DEFAULT_VERTEX_EPS {
            return Err(Error::SingularCone { vertex: i, distance: r });
        }
    }
    let bases: Vec<Vec<Vec<f64>>> = (0..moved.num_simplices())
        .map(|s| {
            let pts = moved.simplex_points(s);
            let edges: Vec<Vec<f64>> = pts[1..].iter().map(|p| linalg::sub(p, pts[0])).collect();
            linalg::gram_schmidt(&edges).0
        })
        .collect();
    let integrand = |s: usize, p: &[f64]| {
        let r = linalg::norm(p);
        if r == 0.0 {
            return 0.0;
        }
        linalg::norm(&linalg::reject(p, &bases[s])) / r.powi(m as i32)
    };
    let cells = (0..moved.num_simplices())
        .map(|s| (moved.simplex_points(s).into_iter().map(|p| p.to_vec()).collect(), moved.multiplicity(s), s))
        .collect();
    let raw = integrate_cells(cells, &integrand, cfg);
    let norm = m as f64 * unit_ball_volume(m);
    Ok(Estimate { value: raw.value / norm, error: raw.error / norm })
}

/// Pushes the cone vertex `q` at least `guard` away from every vertex.
fn guard_vertex(sigma: &SimplicialManifold, q: &mut [f64], guard: f64) {
    for _ in 0..3 {
        let mut moved = false;
        for p in sigma.vertices() {
            let diff = linalg::sub(q, p);
            let r = linalg::norm(&diff);
            if r < guard {
                let dir: Vec<f64> = if r > 0.0 {
                    diff.iter().map(|c| c / r).collect()
                } else {
                    let mut e = vec![0.0; q.len()];
                    e[0] = 1.0;
                    e
                };
                for (qi, di) in q.iter_mut().zip(&dir) {
                    *qi += (guard - r) * di;
                }
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Supremum of the cone density over translates of `sigma`.
pub fn mcd(sigma: &SimplicialManifold, cfg: &OptimizerConfig) -> Result<DensityReport> {
    check_tol(&cfg.quad)?;
    if sigma.is_empty() {
        return Ok(DensityReport::empty());
    }
    let n = sigma.ambient_dim();
    let frame = Frame::of(sigma);
    let guard = (DEFAULT_VERTEX_EPS * 10.0).max(1e-6 * frame.scale);
    // x is the cone vertex in local coordinates; the shift is its negative.
    let vertex_of = |x: &[f64]| {
        let mut q = frame.to_world(x);
        guard_vertex(sigma, &mut q, guard);
        q
    };
    let objective = |x: &[f64]| {
        let q = vertex_of(x);
        let shift: Vec<f64> = q.iter().map(|c| -c).collect();
        cone_density(sigma, &shift, &cfg.quad).map_or(f64::NEG_INFINITY, |e| e.value)
    };

    let mut starts = frame.anchor_points(sigma, cfg.max_center_starts, cfg.random_starts, cfg.seed);
    if let Some((lo, hi)) = sigma.bounding_box() {
        let g = cfg.shift_grid.max(1);
        let total = g.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let p: Vec<f64> = (0..n)
                .map(|k| {
                    let i = rem % g;
                    rem /= g;
                    let mid = 0.5 * (lo[k] + hi[k]);
                    let half = (hi[k] - lo[k]).max(frame.scale * 1e-3);
                    let f = if g == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (g - 1) as f64 };
                    mid + half * f
                })
                .collect();
            starts.push(frame.to_local(&p));
        }
    }
    let mut search = PatternSearch::new(vec![0.1; n], cfg.step_tol);
    search.max_evals = cfg.max_evals;
    let best = multistart(&objective, &starts, cfg.refine_top, &search)
        .ok_or_else(|| Error::Numeric("cone density search had no starts".into()))?;
    let q = vertex_of(&best.x);
    let shift: Vec<f64> = q.iter().map(|c| -c).collect();
    let est = cone_density(sigma, &shift, &cfg.quad)?;
    let flag = distance_to(sigma, &q) < 1e-3 * frame.scale;
    Ok(DensityReport {
        value: est.value,
        witness: Witness::Shift { shift },
        quad_error: est.error,
        boundary_supremum_flag: flag,
        evaluations: best.evals,
    })
}

/// Signed area of the triangle (0, a, b) intersected with the disc of
/// radius r about the origin.
fn wedge_disc_area(a: [f64; 2], b: [f64; 2], r: f64) -> f64 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let qa = e[0] * e[0] + e[1] * e[1];
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * (a[0] * e[0] + a[1] * e[1]);
    let qc = a[0] * a[0] + a[1] * a[1] - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    let mut cuts = vec![0.0];
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    cuts.push(1.0);
    let at = |t: f64| [a[0] + t * e[0], a[1] + t * e[1]];
    cuts.windows(2)
        .map(|w| {
            let (p, q) = (at(w[0]), at(w[1]));
            let cross = p[0] * q[1] - p[1] * q[0];
            let m = at(0.5 * (w[0] + w[1]));
            if m[0] * m[0] + m[1] * m[1] <= r * r {
                0.5 * cross
            } else {
                0.5 * r * r * cross.atan2(p[0] * q[0] + p[1] * q[1])
            }
        })
        .sum()
}

/// Area of a triangle in R^n inside the closed ball: the ball meets the
/// triangle's plane in a disc, and the triangle-disc area is exact.
fn triangle_in_ball(pts: &[&[f64]], center: &[f64], r: f64) -> f64 {
    let e1 = linalg::sub(pts[1], pts[0]);
    let e2 = linalg::sub(pts[2], pts[0]);
    let (basis, _) = linalg::gram_schmidt(&[e1, e2]);
    if basis.len() < 2 {
        return 0.0;
    }
    let w = linalg::sub(center, pts[0]);
    let off = linalg::norm_sq(&linalg::reject(&w, &basis));
    let rr = r * r - off;
    if rr <= 0.0 {
        return 0.0;
    }
    let c = [linalg::dot(&w, &basis[0]), linalg::dot(&w, &basis[1])];
    let local: Vec<[f64; 2]> = pts
        .iter()
        .map(|p| {
            let v = linalg::sub(p, pts[0]);
            [linalg::dot(&v, &basis[0]) - c[0], linalg::dot(&v, &basis[1]) - c[1]]
        })
        .collect();
    let rd = rr.sqrt();
    (0..3).map(|i| wedge_disc_area(local[i], local[(i + 1) % 3], rd)).sum::<f64>().abs()
}

/// Measure of the part of a simplex inside the closed ball, for d >= 3:
/// bisection until pieces are wholly inside or outside, or smaller than
/// `1e-3 * r`, in which case the barycenter decides.
fn clipped_volume(pts: Vec<Vec<f64>>, center: &[f64], r: f64, depth: usize) -> f64 {
    let r_sq = r * r;
    let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
    let volume = linalg::simplex_volume(&refs);
    if pts.iter().all(|p| linalg::dist_sq(p, center) <= r_sq) {
        return volume;
    }
    let k = pts.len() as f64;
    let bary: Vec<f64> = (0..center.len()).map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / k).collect();
    let spread = pts.iter().map(|p| linalg::dist(p, &bary)).fold(0.0, f64::max);
    let dc = linalg::dist(&bary, center);
    if dc - spread > r {
        return 0.0;
    }
    if depth == 0 || spread < 5e-4 * r {
        return if dc <= r { volume } else { 0.0 };
    }
    let mut best = (0, 1, -1.0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let l = linalg::dist_sq(&pts[i], &pts[j]);
            if l > best.2 {
                best = (i, j, l);
            }
        }
    }
    let mid = linalg::lerp(&pts[best.0], &pts[best.1], 0.5);
    let mut a = pts.clone();
    let mut b = pts;
    a[best.1] = mid.clone();
    b[best.0] = mid;
    clipped_volume(a, center, r, depth - 1) + clipped_volume(b, center, r, depth - 1)
}

/// Weighted measure of `m` inside the closed ball B(center, r).
pub fn measure_in_ball(m: &SimplicialManifold, center: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("ball radius must be positive, got {r}")));
    }
    if center.len() != m.ambient_dim() {
        return Err(Error::invalid("ball center dimension does not match ambient dimension"));
    }
    let d = m.intrinsic_dim();
    let r_sq = r * r;
    let mut total = 0.0;
    for s in 0..m.num_simplices() {
        let pts = m.simplex_points(s);
        let mult = m.multiplicity(s);
        total += mult
            * match d {
                0 => f64::from(u8::from(linalg::dist_sq(pts[0], center) <= r_sq)),
                1 => {
                    let e = linalg::sub(pts[1], pts[0]);
                    let w = linalg::sub(pts[0], center);
                    let a = linalg::norm_sq(&e);
                    let b = 2.0 * linalg::dot(&e, &w);
                    let c = linalg::norm_sq(&w) - r_sq;
                    let disc = b * b - 4.0 * a * c;
                    if disc <= 0.0 {
                        0.0
                    } else {
                        let sq = disc.sqrt();
                        let lo = ((-b - sq) / (2.0 * a)).max(0.0);
                        let hi = ((-b + sq) / (2.0 * a)).min(1.0);
                        (hi - lo).max(0.0) * a.sqrt()
                    }
                }
                2 => triangle_in_ball(&pts, center, r),
                _ => clipped_volume(pts.iter().map(|p| p.to_vec()).collect(), center, r, 48),
            };
    }
    Ok(total)
}

/// Measure inside B(center, r) divided by ω_d r^d.
pub fn ball_density_ratio(m: &SimplicialManifold, center: &[f64], r: f64) -> Result<f64> {
    let d = m.intrinsic_dim();
    Ok(measure_in_ball(m, center, r)? / (unit_ball_volume(d) * r.powi(d as i32)))
}

/// Supremum of the ball density ratio over centers and radii in
/// `[1e-3, 2] * diameter`.
pub fn mdr(m: &SimplicialManifold, cfg: &OptimizerConfig) -> Result<DensityReport> {
    if m.is_empty() {
        return Ok(DensityReport::empty());
    }
    let n = m.ambient_dim();
    let frame = Frame::of(m);
    let (l_lo, l_hi) = ((RADIUS_RANGE.0 * frame.scale).ln(), (RADIUS_RANGE.1 * frame.scale).ln());
    let objective = |x: &[f64]| {
        ball_density_ratio(m, &frame.to_world(&x[..n]), x[n].exp()).unwrap_or(f64::NEG_INFINITY)
    };
    let mut centers = frame.anchor_points(m, cfg.max_center_starts * 4, cfg.random_starts, cfg.seed);
    let ns = m.num_simplices();
    let step = ns.div_ceil(cfg.max_center_starts * 4).max(1);
    if m.intrinsic_dim() > 0 {
        centers.extend((0..ns).step_by(step).map(|s| frame.to_local(&m.barycenter(s))));
    }
    let radii = log_grid(l_lo, l_hi, cfg.radius_grid);
    let starts: Vec<Vec<f64>> = centers
        .iter()
        .flat_map(|c| {
            radii.iter().map(move |&l| {
                let mut x = c.clone();
                x.push(l);
                x
            })
        })
        .collect();
    let mut steps = vec![0.05; n];
    steps.push(0.25);
    let mut search = PatternSearch::new(steps, cfg.step_tol).with_bound(n, l_lo, l_hi);
    search.max_evals = cfg.max_evals;
    let best = multistart(&objective, &starts, cfg.refine_top, &search)
        .ok_or_else(|| Error::Numeric("density ratio search had no starts".into()))?;
    let l = best.x[n];
    Ok(DensityReport {
        value: best.value,
        witness: Witness::Ball { center: frame.to_world(&best.x[..n]), radius: l.exp() },
        quad_error: 0.0,
        boundary_supremum_flag: l - l_lo < EDGE_MARGIN || l_hi - l < EDGE_MARGIN,
        evaluations: best.evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::tests::circle;

    fn quick() -> OptimizerConfig {
        OptimizerConfig { quad: QuadConfig::with_tol(1e-8), ..OptimizerConfig::default() }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(0) - 1.0).abs() < 1e-14);
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn kernel_values() {
        let k = gaussian_kernel(1, &[0.0], None).unwrap();
        assert!((k - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        let k = gaussian_kernel(2, &[1.0, 1.0], Some(-0.5)).unwrap();
        assert!((k - (-1.0f64).exp() / (2.0 * PI)).abs() < 1e-15);
        assert!(gaussian_kernel(1, &[0.0], Some(0.0)).is_err());
    }

    #[test]
    fn phi_area_of_line_and_plane() {
        let line = SimplicialManifold::polyline(&[vec![-40.0, 0.0], vec![40.0, 0.0]], false).unwrap();
        let v = phi_area(&line, &QuadConfig::with_tol(1e-10)).unwrap().value;
        assert!((v - 1.0).abs() < 1e-8, "{v}");
        let p = SimplicialManifold::point_set(2, vec![0.0, 0.0, 2.0, 0.0], Some(vec![1.0, 3.0])).unwrap();
        let v = phi_area(&p, &QuadConfig::default()).unwrap().value;
        let expect = (1.0 + 3.0 * (-1.0f64).exp()) / (4.0 * PI).powi(0);
        assert!((v - expect).abs() < 1e-14);
        assert!(phi_area(&p, &QuadConfig::with_tol(0.0)).is_err());
    }

    #[test]
    fn circle_entropy() {
        let c = circle(1.0, 2000);
        let r = entropy(&c, &quick()).unwrap();
        let expect = (2.0 * PI / std::f64::consts::E).sqrt();
        assert!((r.value - expect).abs() < 1e-4, "{}", r.value);
        let Witness::Window(w) = r.witness else { panic!() };
        assert!((w.scale_time - 0.5).abs() < 1e-2, "{}", w.scale_time);
        assert!(linalg::norm(&w.center) < 1e-2);
        assert!(!r.boundary_supremum_flag);
    }

    #[test]
    fn segment_and_point_entropy_are_limits() {
        let s = SimplicialManifold::polyline(&[vec![0.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        let r = entropy(&s, &quick()).unwrap();
        assert!(r.boundary_supremum_flag);
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        let p = SimplicialManifold::point_set(2, vec![0.0, 0.0, 1.0, 0.0], None).unwrap();
        let r = entropy(&p, &quick()).unwrap();
        assert!(r.boundary_supremum_flag);
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn local_density_at_corner() {
        let sq = SimplicialManifold::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2], None).unwrap();
        assert!((local_density(&sq, &[0.0, 0.0]).unwrap() - 0.25).abs() < 1e-12);
        assert!((local_density(&sq, &[0.5, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((local_density(&sq, &[0.2, 0.2]).unwrap() - 1.0).abs() < 1e-12);
    }

    /// Independent oracle for curves in the plane: total multiplicity
    /// times subtended angle over 2π.
    fn subtended(sigma: &SimplicialManifold, shift: &[f64]) -> f64 {
        (0..sigma.num_simplices())
            .map(|s| {
                let p = sigma.simplex_points(s);
                let a: Vec<f64> = p[0].iter().zip(shift).map(|(x, s)| x + s).collect();
                let b: Vec<f64> = p[1].iter().zip(shift).map(|(x, s)| x + s).collect();
                let ang = (a[0] * b[1] - a[1] * b[0]).atan2(linalg::dot(&a, &b)).abs();
                sigma.multiplicity(s) * ang / (2.0 * PI)
            })
            .sum()
    }

    #[test]
    fn cone_density_matches_angle_sum() {
        let cfg = QuadConfig::with_tol(1e-10);
        let c = circle(1.0, 64);
        let v = cone_density(&c, &[0.0, 0.0], &cfg).unwrap().value;
        assert!((v - 1.0).abs() < 1e-8, "{v}");
        let v = cone_density(&c, &[0.3, -0.2], &cfg).unwrap().value;
        assert!((v - 1.0).abs() < 1e-8, "{v}");
        let seg = SimplicialManifold::polyline(&[vec![1.0, -1.0], vec![1.0, 1.0]], false).unwrap();
        let v = cone_density(&seg, &[0.0, 0.0], &cfg).unwrap().value;
        assert!((v - subtended(&seg, &[0.0, 0.0])).abs() < 1e-8);
        assert!((v - 0.25).abs() < 1e-8);
        let two = SimplicialManifold::point_set(1, vec![-1.0, 1.0], None).unwrap();
        assert!((cone_density(&two, &[0.0], &cfg).unwrap().value - 1.0).abs() < 1e-14);
        // both points on one side: a doubled ray
        assert!((cone_density(&two, &[3.0], &cfg).unwrap().value - 1.0).abs() < 1e-14);
        assert!(matches!(cone_density(&two, &[1.0], &cfg), Err(Error::SingularCone { .. })));
    }

    #[test]
    fn cone_density_of_sphere_slice() {
        // a horizontal circle of radius 1 at height 1 in R^3: the cone is a
        // right circular cone of half-angle π/4, density sin(π/4)
        let mut pts = Vec::new();
        let k = 256;
        for i in 0..k {
            let t = 2.0 * PI * i as f64 / k as f64;
            pts.push(vec![t.cos(), t.sin(), 1.0]);
        }
        let c = SimplicialManifold::polyline(&pts, true).unwrap();
        let v = cone_density(&c, &[0.0, 0.0, 0.0], &QuadConfig::with_tol(1e-10)).unwrap().value;
        let chord = (k as f64 * (PI / k as f64).sin()) / PI;
        assert!((v - chord * 0.5f64.sqrt()).abs() < 1e-3, "{v}");
    }

    #[test]
    fn mcd_examples() {
        let cfg = quick();
        let c = circle(1.0, 64);
        let r = mcd(&c, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        let two = SimplicialManifold::point_set(1, vec![-1.0, 1.0], None).unwrap();
        let r = mcd(&two, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{}", r.value);

        // two unit circles tangent at the origin, traversed as one closed
        // curve of total curvature 4π; the supremum sits at the tangency
        let k = 128;
        let mut coords = vec![0.0, 0.0];
        for side in [-1.0, 1.0] {
            for i in 1..k {
                let t = 2.0 * PI * i as f64 / k as f64;
                coords.extend([side * (1.0 - t.cos()), t.sin()]);
            }
        }
        let ring = |j: usize, i: usize| if i % k == 0 { 0 } else { 1 + j * (k - 1) + i - 1 };
        let simplices: Vec<usize> = (0..2).flat_map(|j| (0..k).flat_map(move |i| [ring(j, i), ring(j, i + 1)])).collect();
        let eight = SimplicialManifold::new(2, 1, coords, simplices, None).unwrap();
        let r = mcd(&eight, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 5e-2, "{}", r.value);
    }

    #[test]
    fn ball_ratio_examples() {
        let c = circle(1.0, 4000);
        let v = ball_density_ratio(&c, &[0.0, 0.0], 1.0).unwrap();
        assert!((v - PI).abs() < 1e-5, "{v}");
        let s = SimplicialManifold::polyline(&[vec![-1.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        assert!((ball_density_ratio(&s, &[0.0, 0.5], 1.0).unwrap() - 0.75f64.sqrt()).abs() < 1e-12);
        let tri = SimplicialManifold::new(2, 2, vec![-5.0, -5.0, 5.0, -5.0, 0.0, 5.0], vec![0, 1, 2], None).unwrap();
        let v = ball_density_ratio(&tri, &[0.0, 0.0], 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        assert!(ball_density_ratio(&s, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn triangle_ball_areas() {
        let quarter = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 0.0]];
        let refs: Vec<&[f64]> = quarter.iter().map(|p| p.as_slice()).collect();
        assert!((triangle_in_ball(&refs, &[0.0, 0.0, 0.0], 1.0) - PI / 4.0).abs() < 1e-14);
        // plane at distance 0.6: a disc of radius 0.8
        let big = [[-9.0, -9.0, 0.6], [9.0, -9.0, 0.6], [0.0, 9.0, 0.6]];
        let refs: Vec<&[f64]> = big.iter().map(|p| p.as_slice()).collect();
        assert!((triangle_in_ball(&refs, &[0.0, 0.0, 0.0], 1.0) - PI * 0.64).abs() < 1e-14);
        let odd = [[0.3, -0.2, 0.1], [1.4, 0.5, -0.3], [-0.2, 0.9, 0.4]];
        let refs: Vec<&[f64]> = odd.iter().map(|p| p.as_slice()).collect();
        let exact = triangle_in_ball(&refs, &[0.2, 0.1, 0.0], 0.7);
        let bisected = clipped_volume(odd.iter().map(|p| p.to_vec()).collect(), &[0.2, 0.1, 0.0], 0.7, 48);
        assert!((exact - bisected).abs() < 1e-3 * exact, "{exact} {bisected}");
    }

    #[test]
    fn mdr_examples() {
        let cfg = quick();
        let c = circle(1.0, 512);
        let r = mdr(&c, &cfg).unwrap();
        assert!((r.value - PI).abs() < 1e-2, "{}", r.value);
        let s = SimplicialManifold::polyline(&[vec![0.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        let r = mdr(&s, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
    }
}
