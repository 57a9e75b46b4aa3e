//! Translating solutions with planar boundary: the grim reaper, caps of
//! the bowl soliton, boundary extraction, and the entropy bounds
//!
//! entropy(M) ≤ Σ_k (entropy(Σ_k) + mcd(Σ_k)) ≤ Σ_k (mdr(Σ_k) + mcd(Σ_k))
//!
//! for a translator M whose boundary components Σ_k lie in horizontal
//! hyperplanes.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{self, unit_ball_volume, OptimizerConfig};
use crate::linalg;
use crate::ode::{dormand_prince, OdeConfig};
use crate::simplicial::SimplicialManifold;

/// Largest v * y_cut accepted; keeps e^(v y_cut) finite with room to spare.
const MAX_GRIM_REAPER_DEPTH: f64 = 300.0;
const MIN_RESOLUTION: usize = 8;

/// Samples y = -(1/v) ln cos(v x) for y ≤ `y_cut` with `res` vertices,
/// uniformly in arc length. The endpoints are (±x_c, y_cut) exactly.
pub fn grim_reaper(v: f64, y_cut: f64, res: usize) -> Result<SimplicialManifold> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid("grim reaper speed must be positive"));
    }
    if !(y_cut > 0.0 && v * y_cut <= MAX_GRIM_REAPER_DEPTH) {
        return Err(Error::invalid(format!(
            "grim reaper cut height must satisfy 0 < v y_cut <= {MAX_GRIM_REAPER_DEPTH}"
        )));
    }
    if res < MIN_RESOLUTION {
        return Err(Error::invalid(format!("resolution must be at least {MIN_RESOLUTION}")));
    }
    // arc length s from the apex: v x = gd(v s), v y = ln cosh(v s)
    let half = (v * y_cut).exp().acosh();
    let x_cut = (-v * y_cut).exp().acos() / v;
    let pts: Vec<Vec<f64>> = (0..res)
        .map(|i| {
            if i == 0 {
                return vec![-x_cut, y_cut];
            }
            if i == res - 1 {
                return vec![x_cut, y_cut];
            }
            let u = -half + 2.0 * half * i as f64 / (res - 1) as f64;
            vec![u.sinh().atan() / v, u.cosh().ln() / v]
        })
        .collect();
    SimplicialManifold::polyline(&pts, false)
}

/// Radial profile u(r) of the rotationally symmetric m-dimensional
/// translator with speed v: u''/(1 + u'^2) + (m - 1) u'/r = v, u(0) = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct BowlProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Largest local error estimate over accepted ODE steps.
    pub max_local_error: f64,
}

/// Radius where the ODE takes over from the series u ≈ c r² + e r⁴.
const SERIES_RADIUS: f64 = 1e-3;

/// Evaluates the profile at the increasing radii `radii` (≥ 0).
pub fn bowl_profile(m: usize, v: f64, radii: &[f64], cfg: &OdeConfig) -> Result<BowlProfile> {
    if m < 1 {
        return Err(Error::invalid("bowl dimension must be at least 1"));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid("bowl speed must be positive"));
    }
    if radii.iter().any(|&r| !(r >= 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("profile radii must be finite, non-negative and increasing"));
    }
    let mf = m as f64;
    let c = v / (2.0 * mf);
    let e = 2.0 * c * c * c / (mf + 2.0);
    let series = |r: f64| (c * r * r + e * r.powi(4), 2.0 * c * r + 4.0 * e * r.powi(3));
    let r0 = radii.last().map_or(SERIES_RADIUS, |&r| SERIES_RADIUS.min(r * 1e-3));
    let split = radii.partition_point(|&r| r <= r0);
    let mut out = BowlProfile { r: radii.to_vec(), u: Vec::new(), du: Vec::new(), max_local_error: 0.0 };
    for &r in &radii[..split] {
        let (u, du) = series(r);
        out.u.push(u);
        out.du.push(du);
    }
    if split < radii.len() {
        let (u0, p0) = series(r0);
        let rhs = |r: f64, y: &[f64]| vec![y[1], (1.0 + y[1] * y[1]) * (v - (mf - 1.0) * y[1] / r)];
        let sol = dormand_prince(rhs, r0, &[u0, p0], &radii[split..], cfg)?;
        out.max_local_error = sol.max_local_error;
        for y in sol.y {
            out.u.push(y[0]);
            out.du.push(y[1]);
        }
    }
    Ok(out)
}

/// Triangle mesh of the 2-dimensional bowl soliton over the disc of
/// radius `r_max`: an apex fan and `res / 4` uniform rings of `res` points.
/// The boundary ring lies at the single height u(r_max).
pub fn bowl_cap(m: usize, v: f64, r_max: f64, res: usize) -> Result<SimplicialManifold> {
    if m != 2 {
        return Err(Error::invalid("bowl caps can only be meshed for m = 2"));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::invalid("bowl radius must be positive"));
    }
    if res < MIN_RESOLUTION {
        return Err(Error::invalid(format!("resolution must be at least {MIN_RESOLUTION}")));
    }
    let rings = (res / 4).max(2);
    let radii: Vec<f64> = (1..=rings).map(|k| r_max * k as f64 / rings as f64).collect();
    let profile = bowl_profile(m, v, &radii, &OdeConfig::default())?;
    let mut coords = vec![0.0, 0.0, 0.0];
    for (k, &r) in radii.iter().enumerate() {
        for j in 0..res {
            let th = 2.0 * PI * j as f64 / res as f64;
            coords.extend([r * th.cos(), r * th.sin(), profile.u[k]]);
        }
    }
    let at = |k: usize, j: usize| 1 + k * res + j % res;
    let mut tris = Vec::new();
    for j in 0..res {
        tris.extend([0, at(0, j), at(0, j + 1)]);
    }
    for k in 0..rings - 1 {
        for j in 0..res {
            tris.extend([at(k, j), at(k + 1, j), at(k + 1, j + 1)]);
            tris.extend([at(k, j), at(k + 1, j + 1), at(k, j + 1)]);
        }
    }
    SimplicialManifold::new(3, 2, coords, tris, None)
}

#[derive(Clone, Debug, PartialEq)]
pub enum TranslatorKind {
    GrimReaper { v: f64, y_cut: f64 },
    BowlCap { m: usize, v: f64, r_max: f64 },
    UserMesh { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslatorSpec {
    pub kind: TranslatorKind,
    pub resolution: usize,
}

impl TranslatorSpec {
    pub fn generate(&self) -> Result<SimplicialManifold> {
        match &self.kind {
            TranslatorKind::GrimReaper { v, y_cut } => grim_reaper(*v, *y_cut, self.resolution),
            TranslatorKind::BowlCap { m, v, r_max } => bowl_cap(*m, *v, *r_max, self.resolution),
            TranslatorKind::UserMesh { path } => crate::smf::load_smf(path),
        }
    }

    /// Translation speed along the last axis, when known.
    pub fn speed(&self) -> Option<f64> {
        match self.kind {
            TranslatorKind::GrimReaper { v, .. } | TranslatorKind::BowlCap { v, .. } => Some(v),
            TranslatorKind::UserMesh { .. } => None,
        }
    }
}

/// Boundary components sharing one horizontal hyperplane.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryGroup {
    /// The components in R^(n-1), last coordinate dropped.
    pub sigma: SimplicialManifold,
    pub height: f64,
    pub components: usize,
}

pub fn default_plane_tol(m: &SimplicialManifold) -> f64 {
    1e-8 * m.diameter().max(f64::MIN_POSITIVE)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Splits the boundary (free (d-1)-faces) of `m` into connected components
/// and groups them by height. Errors if a component is not horizontal
/// within `plane_tol`.
pub fn boundary_components(m: &SimplicialManifold, plane_tol: f64) -> Result<Vec<BoundaryGroup>> {
    let n = m.ambient_dim();
    let d = m.intrinsic_dim();
    if d == 0 {
        return Err(Error::UnsupportedBoundary("a point set has no boundary".into()));
    }
    if !(plane_tol >= 0.0) {
        return Err(Error::invalid("plane tolerance must be non-negative"));
    }
    let faces = m.boundary_faces();
    if faces.is_empty() {
        return Err(Error::UnsupportedBoundary("the manifold has no boundary".into()));
    }
    let mut parent: Vec<usize> = (0..m.num_vertices()).collect();
    for (face, _) in &faces {
        for w in face.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut roots = Vec::new();
    for (i, (face, _)) in faces.iter().enumerate() {
        let r = find(&mut parent, face[0]);
        by_root.entry(r).or_insert_with(|| {
            roots.push(r);
            Vec::new()
        });
        by_root.get_mut(&r).unwrap().push(i);
    }
    let mut components: Vec<(f64, Vec<usize>)> = Vec::new();
    for r in roots {
        let members = &by_root[&r];
        let heights: Vec<f64> =
            members.iter().flat_map(|&f| faces[f].0.iter().map(|&v| m.vertex(v)[n - 1])).collect();
        let lo = heights.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > plane_tol {
            return Err(Error::UnsupportedBoundary(format!(
                "a boundary component spans heights {lo} to {hi}, not one horizontal hyperplane"
            )));
        }
        components.push((heights.iter().sum::<f64>() / heights.len() as f64, members.clone()));
    }
    components.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, Vec<Vec<usize>>)> = Vec::new();
    for (h, members) in components {
        match groups.last_mut() {
            Some((gh, list)) if (h - *gh).abs() <= plane_tol => list.push(members),
            _ => groups.push((h, vec![members])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(height, comps)| {
            let mut index: HashMap<usize, usize> = HashMap::new();
            let mut coords = Vec::new();
            let mut simplices = Vec::new();
            let mut mult = Vec::new();
            for &f in comps.iter().flatten() {
                let (face, mu) = &faces[f];
                for &v in face {
                    let id = *index.entry(v).or_insert_with(|| {
                        coords.extend_from_slice(&m.vertex(v)[..n - 1]);
                        coords.len() / (n - 1) - 1
                    });
                    simplices.push(id);
                }
                mult.push(*mu);
            }
            BoundaryGroup {
                sigma: SimplicialManifold::from_raw(n - 1, d - 1, coords, simplices, mult),
                height,
                components: comps.len(),
            }
        })
        .collect())
}

/// Whether Σ bounds a convex region of its hyperplane: two unit points for
/// m = 1, a single convex closed polygon of unit multiplicity for m = 2.
/// `None` when undecided (m ≥ 3).
pub fn bounds_convex_region(sigma: &SimplicialManifold) -> Option<bool> {
    let unit = sigma.multiplicities().iter().all(|&m| m == 1.0);
    match (sigma.intrinsic_dim(), sigma.ambient_dim()) {
        (0, 1) => Some(unit && sigma.num_simplices() == 2 && sigma.vertex(0) != sigma.vertex(1)),
        (1, 2) => Some(unit && convex_polygon(sigma)),
        _ => None,
    }
}

fn convex_polygon(sigma: &SimplicialManifold) -> bool {
    let nv = sigma.num_vertices();
    let mut next = vec![usize::MAX; nv];
    let mut degree = vec![0usize; nv];
    for s in sigma.simplices() {
        degree[s[0]] += 1;
        degree[s[1]] += 1;
        next[s[0]] = s[1];
    }
    if nv < 3 || degree.iter().any(|&k| k != 2) || next.contains(&usize::MAX) {
        return false;
    }
    let mut order = vec![0];
    while order.len() < nv {
        let v = next[*order.last().unwrap()];
        if v == 0 {
            return false;
        }
        order.push(v);
    }
    if next[order[nv - 1]] != 0 {
        return false;
    }
    let mut sign = 0.0;
    let mut turning = 0.0;
    for i in 0..nv {
        let (a, b, c) = (sigma.vertex(order[i]), sigma.vertex(order[(i + 1) % nv]), sigma.vertex(order[(i + 2) % nv]));
        let (e1, e2) = (linalg::sub(b, a), linalg::sub(c, b));
        let cross = e1[0] * e2[1] - e1[1] * e2[0];
        if cross != 0.0 {
            if sign * cross < 0.0 {
                return false;
            }
            sign = cross.signum();
        }
        turning += cross.atan2(linalg::dot(&e1, &e2));
    }
    (turning.abs() - 2.0 * PI).abs() < 1e-6
}

/// k (1 + m ω_m / ω_(m-1)): the entropy bound for k convex boundary
/// components of an m-dimensional translator.
pub fn convex_bound(m: usize, k: usize) -> f64 {
    let mf = m as f64;
    k as f64 * (1.0 + mf * unit_ball_volume(m) / unit_ball_volume(m - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    pub height: f64,
    pub components: usize,
    pub entropy: f64,
    pub entropy_flag: bool,
    pub mcd: f64,
    pub mcd_flag: bool,
    pub mdr: f64,
    pub convex: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyBoundReport {
    pub entropy_m: f64,
    pub entropy_m_flag: bool,
    pub mdr_m: f64,
    pub groups: Vec<ComponentReport>,
    /// Σ (entropy + mcd).
    pub bound: f64,
    /// Σ (2 entropy + mcd), the weaker form with coefficient 2.
    pub bound_doubled: f64,
    /// Σ (mdr + mcd).
    pub mdr_bound: f64,
    /// k (1 + m ω_m / ω_(m-1)) when every component is convex.
    pub convex_bound: Option<f64>,
    pub margin: f64,
    pub mdr_margin: f64,
    pub convex_margin: Option<f64>,
    pub tol: f64,
}

impl EntropyBoundReport {
    pub fn holds(&self) -> bool {
        self.margin >= -self.tol
            && self.mdr_margin >= -self.tol
            && self.convex_margin.is_none_or(|c| c >= -self.tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyBoundConfig {
    pub optimizer: OptimizerConfig,
    /// Absolute plane tolerance; `None` uses 1e-8 times the diameter.
    pub plane_tol: Option<f64>,
    pub tol: f64,
}

impl Default for EntropyBoundConfig {
    fn default() -> Self {
        EntropyBoundConfig { optimizer: OptimizerConfig::default(), plane_tol: None, tol: 1e-2 }
    }
}

pub fn verify_entropy_bound(m: &SimplicialManifold, cfg: &EntropyBoundConfig) -> Result<EntropyBoundReport> {
    let plane_tol = cfg.plane_tol.unwrap_or_else(|| default_plane_tol(m));
    let groups = boundary_components(m, plane_tol)?;
    let entropy_m = gaussian::entropy(m, &cfg.optimizer)?;
    let mdr_m = gaussian::mdr(m, &cfg.optimizer)?;
    let mut reports = Vec::with_capacity(groups.len());
    for g in &groups {
        let e = gaussian::entropy(&g.sigma, &cfg.optimizer)?;
        let c = gaussian::mcd(&g.sigma, &cfg.optimizer)?;
        let r = gaussian::mdr(&g.sigma, &cfg.optimizer)?;
        reports.push(ComponentReport {
            height: g.height,
            components: g.components,
            entropy: e.value,
            entropy_flag: e.boundary_supremum_flag,
            mcd: c.value,
            mcd_flag: c.boundary_supremum_flag,
            mdr: r.value,
            // a pair of points is the boundary of one interval
            convex: if g.components == 1 || g.sigma.intrinsic_dim() == 0 {
                bounds_convex_region(&g.sigma)
            } else {
                Some(false)
            },
        });
    }
    let bound: f64 = reports.iter().map(|r| r.entropy + r.mcd).sum();
    let bound_doubled: f64 = reports.iter().map(|r| 2.0 * r.entropy + r.mcd).sum();
    let mdr_bound: f64 = reports.iter().map(|r| r.mdr + r.mcd).sum();
    // each group that passes the convexity test is one convex boundary
    let k = groups.len();
    let convex_bound =
        reports.iter().all(|r| r.convex == Some(true)).then(|| convex_bound(m.intrinsic_dim(), k));
    Ok(EntropyBoundReport {
        entropy_m: entropy_m.value,
        entropy_m_flag: entropy_m.boundary_supremum_flag,
        mdr_m: mdr_m.value,
        groups: reports,
        bound,
        bound_doubled,
        mdr_bound,
        convex_bound,
        margin: bound - entropy_m.value,
        mdr_margin: mdr_bound - entropy_m.value,
        convex_margin: convex_bound.map(|b| b - entropy_m.value),
        tol: cfg.tol,
    })
}
