//! Discretized manifolds with multiplicity and the purely geometric
//! operations on them (measure, similarity transforms, slicing by height,
//! horizontal projection, cones, refinement).

use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative volume threshold below which a simplex counts as degenerate.
pub const DEFAULT_DEGENERACY_EPS: f64 = 1e-12;

/// Distance from the cone vertex below which a vertex makes a cone singular.
pub const DEFAULT_VERTEX_EPS: f64 = 1e-9;

/// Fraction of `r_max` at which `cone_over` places its innermost ring.
pub const CONE_INNER_FRACTION: f64 = 1e-3;

/// Largest angle, seen from the cone vertex, that one edge of Σ may span
/// before `cone_over` subdivides it. Rings join directions by chords.
pub const CONE_MAX_ANGLE: f64 = 0.05;

/// A d-dimensional simplicial complex in R^n with a positive weight per
/// simplex. Vertices and simplices are stored flat (strides n and d + 1).
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialManifold {
    ambient_dim: usize,
    intrinsic_dim: usize,
    coords: Vec<f64>,
    simplices: Vec<usize>,
    multiplicities: Vec<f64>,
}

/// Output of [`SimplicialManifold::project_horizontal`].
#[derive(Clone, Debug)]
pub struct Projection {
    pub manifold: SimplicialManifold,
    /// Weighted measure of the simplices whose projection was degenerate.
    pub dropped_measure: f64,
    pub dropped_count: usize,
}

impl SimplicialManifold {
    /// Builds and validates a manifold. `multiplicities` defaults to all ones.
    pub fn new(
        ambient_dim: usize,
        intrinsic_dim: usize,
        coords: Vec<f64>,
        simplices: Vec<usize>,
        multiplicities: Option<Vec<f64>>,
    ) -> Result<Self> {
        Self::with_degeneracy_eps(
            ambient_dim,
            intrinsic_dim,
            coords,
            simplices,
            multiplicities,
            DEFAULT_DEGENERACY_EPS,
        )
    }

    pub fn with_degeneracy_eps(
        ambient_dim: usize,
        intrinsic_dim: usize,
        coords: Vec<f64>,
        simplices: Vec<usize>,
        multiplicities: Option<Vec<f64>>,
        eps_degen: f64,
    ) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        if intrinsic_dim > ambient_dim {
            return Err(Error::invalid(format!(
                "intrinsic dimension {intrinsic_dim} exceeds ambient dimension {ambient_dim}"
            )));
        }
        if coords.len() % ambient_dim != 0 {
            return Err(Error::invalid("coordinate count is not a multiple of the ambient dimension"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite vertex coordinate"));
        }
        let stride = intrinsic_dim + 1;
        if simplices.len() % stride != 0 {
            return Err(Error::invalid("simplex index count is not a multiple of d + 1"));
        }
        let count = simplices.len() / stride;
        let multiplicities = multiplicities.unwrap_or_else(|| vec![1.0; count]);
        if multiplicities.len() != count {
            return Err(Error::invalid(format!(
                "{} multiplicities for {count} simplices",
                multiplicities.len()
            )));
        }
        if let Some(m) = multiplicities.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::invalid(format!("multiplicity {m} is not strictly positive")));
        }
        let nv = coords.len() / ambient_dim;
        for (s, simplex) in simplices.chunks(stride).enumerate() {
            if let Some(&v) = simplex.iter().find(|&&v| v >= nv) {
                return Err(Error::IndexOutOfRange { simplex: s, vertex: v, count: nv });
            }
        }
        let m = Self::from_raw(ambient_dim, intrinsic_dim, coords, simplices, multiplicities);
        if intrinsic_dim > 0 {
            for s in 0..m.num_simplices() {
                let volume = m.simplex_volume(s);
                let longest_edge = m.longest_edge(s);
                if volume <= eps_degen * longest_edge.powi(intrinsic_dim as i32) {
                    return Err(Error::DegenerateSimplex { simplex: s, volume, longest_edge });
                }
            }
        }
        Ok(m)
    }

    /// Unvalidated constructor for meshes derived inside the crate, where
    /// zero-volume pieces (e.g. swept tangential motion) are legitimate.
    pub(crate) fn from_raw(
        ambient_dim: usize,
        intrinsic_dim: usize,
        coords: Vec<f64>,
        simplices: Vec<usize>,
        multiplicities: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(simplices.len(), multiplicities.len() * (intrinsic_dim + 1));
        SimplicialManifold { ambient_dim, intrinsic_dim, coords, simplices, multiplicities }
    }

    pub fn empty(ambient_dim: usize, intrinsic_dim: usize) -> Self {
        Self::from_raw(ambient_dim, intrinsic_dim, Vec::new(), Vec::new(), Vec::new())
    }

    /// Weighted point set (d = 0); every vertex is its own simplex.
    pub fn point_set(ambient_dim: usize, coords: Vec<f64>, multiplicities: Option<Vec<f64>>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        let n = coords.len() / ambient_dim;
        Self::new(ambient_dim, 0, coords, (0..n).collect(), multiplicities)
    }

    /// Polyline through `points` (all of the same dimension), closed if asked.
    pub fn polyline(points: &[Vec<f64>], closed: bool) -> Result<Self> {
        let n = points.first().map_or(2, |p| p.len());
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::invalid("polyline points differ in dimension"));
        }
        let k = points.len();
        let coords = points.concat();
        let mut simplices = Vec::new();
        let segs = if closed { k } else { k.saturating_sub(1) };
        for i in 0..segs {
            simplices.push(i);
            simplices.push((i + 1) % k);
        }
        Self::new(n, 1, coords, simplices, None)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.ambient_dim
    }

    pub fn num_simplices(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicities.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.ambient_dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn simplex(&self, s: usize) -> &[usize] {
        let k = self.intrinsic_dim + 1;
        &self.simplices[s * k..(s + 1) * k]
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> {
        self.simplices.chunks(self.intrinsic_dim + 1)
    }

    pub fn multiplicity(&self, s: usize) -> f64 {
        self.multiplicities[s]
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.multiplicities
    }

    pub fn simplex_points(&self, s: usize) -> Vec<&[f64]> {
        self.simplex(s).iter().map(|&v| self.vertex(v)).collect()
    }

    /// Unweighted d-volume of simplex `s` (1 for d = 0).
    pub fn simplex_volume(&self, s: usize) -> f64 {
        linalg::simplex_volume(&self.simplex_points(s))
    }

    pub fn longest_edge(&self, s: usize) -> f64 {
        let pts = self.simplex_points(s);
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.max(linalg::dist(pts[i], pts[j]));
            }
        }
        best
    }

    /// Sum over simplices of multiplicity times d-volume.
    pub fn measure(&self) -> f64 {
        (0..self.num_simplices())
            .map(|s| self.multiplicities[s] * self.simplex_volume(s))
            .sum()
    }

    /// Axis-aligned bounding box of the vertices referenced by simplices.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut lo = vec![f64::INFINITY; self.ambient_dim];
        let mut hi = vec![f64::NEG_INFINITY; self.ambient_dim];
        let mut any = false;
        for &v in &self.simplices {
            any = true;
            for (k, &c) in self.vertex(v).iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        any.then_some((lo, hi))
    }

    /// Length of the bounding-box diagonal (0 for empty or single points).
    pub fn diameter(&self) -> f64 {
        self.bounding_box().map_or(0.0, |(lo, hi)| linalg::dist(&lo, &hi))
    }

    /// Measure-weighted centroid of the simplex barycenters.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.ambient_dim];
        let mut total = 0.0;
        for s in 0..self.num_simplices() {
            let w = self.multiplicities[s] * self.simplex_volume(s);
            let b = self.barycenter(s);
            for (ci, bi) in c.iter_mut().zip(&b) {
                *ci += w * bi;
            }
            total += w;
        }
        if total > 0.0 {
            c.iter_mut().for_each(|ci| *ci /= total);
        }
        c
    }

    pub fn barycenter(&self, s: usize) -> Vec<f64> {
        let pts = self.simplex_points(s);
        let k = pts.len() as f64;
        (0..self.ambient_dim)
            .map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / k)
            .collect()
    }

    /// Maps every vertex x to `scale * (x - shift)`.
    pub fn transform(&self, shift: &[f64], scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("scale must be positive, got {scale}")));
        }
        if shift.len() != self.ambient_dim {
            return Err(Error::invalid("shift dimension does not match ambient dimension"));
        }
        let coords = self
            .coords
            .chunks(self.ambient_dim)
            .flat_map(|p| p.iter().zip(shift).map(move |(x, s)| scale * (x - s)))
            .collect();
        Ok(Self::from_raw(
            self.ambient_dim,
            self.intrinsic_dim,
            coords,
            self.simplices.clone(),
            self.multiplicities.clone(),
        ))
    }

    /// Returns a copy with every multiplicity multiplied by `factor`.
    pub fn scale_multiplicities(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid("multiplicity factor must be positive"));
        }
        let mut out = self.clone();
        out.multiplicities.iter_mut().for_each(|m| *m *= factor);
        Ok(out)
    }

    /// Disjoint union of two manifolds of equal dimensions.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.ambient_dim != other.ambient_dim || self.intrinsic_dim != other.intrinsic_dim {
            return Err(Error::invalid("union of manifolds with different dimensions"));
        }
        let offset = self.num_vertices();
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut simplices = self.simplices.clone();
        simplices.extend(other.simplices.iter().map(|v| v + offset));
        let mut mult = self.multiplicities.clone();
        mult.extend_from_slice(&other.multiplicities);
        Ok(Self::from_raw(self.ambient_dim, self.intrinsic_dim, coords, simplices, mult))
    }

    /// Intersection with the hyperplane {last coordinate = y}, as a
    /// (d-1)-manifold in R^(n-1). Vertices at height exactly `y` count as
    /// lying above the plane.
    pub fn slice_by_height(&self, y: f64) -> Result<Self> {
        let d = self.intrinsic_dim;
        let n = self.ambient_dim;
        if d == 0 {
            return Err(Error::invalid("cannot slice a 0-dimensional manifold"));
        }
        if n < 2 {
            return Err(Error::invalid("slicing needs ambient dimension at least 2"));
        }
        let mut coords = Vec::new();
        let mut simplices = Vec::new();
        let mut mult = Vec::new();
        let mut crossing: HashMap<(usize, usize), usize> = HashMap::new();
        let height = |v: usize| self.coords[v * n + n - 1];

        let mut below = Vec::with_capacity(d + 1);
        let mut above = Vec::with_capacity(d + 1);
        for s in 0..self.num_simplices() {
            let simplex = self.simplex(s);
            below.clear();
            above.clear();
            for &v in simplex {
                if height(v) < y {
                    below.push(v);
                } else {
                    above.push(v);
                }
            }
            if below.is_empty() || above.is_empty() {
                continue;
            }
            let mut node = |i: usize, j: usize, coords: &mut Vec<f64>| -> usize {
                *crossing.entry((i, j)).or_insert_with(|| {
                    let (pi, pj) = (self.vertex(i), self.vertex(j));
                    let t = (y - pi[n - 1]) / (pj[n - 1] - pi[n - 1]);
                    let idx = coords.len() / (n - 1);
                    coords.extend((0..n - 1).map(|k| pi[k] + t * (pj[k] - pi[k])));
                    idx
                })
            };
            // Staircase triangulation of the product of the two faces: every
            // monotone lattice path through the (below x above) grid is one
            // (d-1)-simplex of the cross-section.
            let (nb, na) = (below.len(), above.len());
            let steps = nb + na - 2;
            for mask in 0u64..(1u64 << steps) {
                if mask.count_ones() as usize != nb - 1 {
                    continue;
                }
                let (mut i, mut j) = (0, 0);
                let start = simplices.len();
                simplices.push(node(below[i], above[j], &mut coords));
                for bit in 0..steps {
                    if mask >> bit & 1 == 1 {
                        i += 1;
                    } else {
                        j += 1;
                    }
                    simplices.push(node(below[i], above[j], &mut coords));
                }
                let pts: Vec<&[f64]> =
                    simplices[start..].iter().map(|&v| &coords[v * (n - 1)..(v + 1) * (n - 1)]).collect();
                if d > 1 && linalg::simplex_volume(&pts) <= 0.0 {
                    simplices.truncate(start);
                    continue;
                }
                mult.push(self.multiplicities[s]);
            }
        }
        Ok(Self::from_raw(n - 1, d - 1, coords, simplices, mult))
    }

    /// Drops the last coordinate of every simplex. Overlapping images are
    /// kept as separate simplices, so the result counts projection
    /// multiplicity. Simplices with degenerate images are dropped.
    pub fn project_horizontal(&self) -> Result<Projection> {
        let d = self.intrinsic_dim;
        let n = self.ambient_dim;
        if d == 0 {
            return Err(Error::invalid("cannot project a 0-dimensional manifold"));
        }
        if d >= n {
            return Err(Error::invalid("projection needs intrinsic dimension below ambient dimension"));
        }
        let coords: Vec<f64> = self.coords.chunks(n).flat_map(|p| p[..n - 1].iter().copied()).collect();
        let mut simplices = Vec::new();
        let mut mult = Vec::new();
        let mut dropped_measure = 0.0;
        let mut dropped_count = 0;
        for s in 0..self.num_simplices() {
            let simplex = self.simplex(s);
            let pts: Vec<&[f64]> = simplex.iter().map(|&v| &coords[v * (n - 1)..(v + 1) * (n - 1)]).collect();
            let vol = linalg::simplex_volume(&pts);
            let scale = self.longest_edge(s).powi(d as i32);
            if vol <= DEFAULT_DEGENERACY_EPS * scale {
                dropped_measure += self.multiplicities[s] * self.simplex_volume(s);
                dropped_count += 1;
            } else {
                simplices.extend_from_slice(simplex);
                mult.push(self.multiplicities[s]);
            }
        }
        Ok(Projection {
            manifold: Self::from_raw(n - 1, d, coords, simplices, mult),
            dropped_measure,
            dropped_count,
        })
    }

    /// Mesh of the cone over `self` with vertex at the origin, truncated to
    /// the closed ball of radius `r_max`. Rings sit at geometrically spaced
    /// radii from `CONE_INNER_FRACTION * r_max` to `r_max`, and the innermost
    /// ring is closed off by simplices through the origin.
    pub fn cone_over(&self, r_max: f64, levels: usize) -> Result<Self> {
        self.cone_over_with_eps(r_max, levels, DEFAULT_VERTEX_EPS)
    }

    pub fn cone_over_with_eps(&self, r_max: f64, levels: usize, eps_vertex: f64) -> Result<Self> {
        let d = self.intrinsic_dim;
        let n = self.ambient_dim;
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::invalid("cone radius must be positive"));
        }
        if levels == 0 {
            return Err(Error::invalid("cone needs at least one level"));
        }
        if d + 1 > n {
            return Err(Error::invalid("cone dimension would exceed ambient dimension"));
        }
        for (i, p) in self.vertices().enumerate() {
            let r = linalg::norm(p);
            if r <= eps_vertex {
                return Err(Error::SingularCone { vertex: i, distance: r });
            }
        }
        let fine;
        let src = match self.angular_edge_limit() {
            Some(h) => {
                fine = self.refine(h)?;
                &fine
            }
            None => self,
        };
        let nv = src.num_vertices();
        let mut dirs = Vec::with_capacity(nv * n);
        for p in src.vertices() {
            let r = linalg::norm(p);
            dirs.extend(p.iter().map(|c| c / r));
        }
        let q = CONE_INNER_FRACTION.powf(1.0 / levels as f64);
        let radii: Vec<f64> = (0..=levels).map(|k| r_max * q.powi((levels - k) as i32)).collect();
        let mut coords = vec![0.0; n];
        for &rho in &radii {
            coords.extend(dirs.iter().map(|c| rho * c));
        }
        let ring = |k: usize, v: usize| 1 + k * nv + v;
        let mut simplices = Vec::new();
        let mut mult = Vec::new();
        for s in 0..src.num_simplices() {
            let simplex = src.simplex(s);
            let m = src.multiplicities[s];
            simplices.push(0);
            simplices.extend(simplex.iter().map(|&v| ring(0, v)));
            mult.push(m);
            for k in 0..levels {
                for j in 0..=d {
                    simplices.extend(simplex[..=j].iter().map(|&v| ring(k, v)));
                    simplices.extend(simplex[j..].iter().map(|&v| ring(k + 1, v)));
                    mult.push(m);
                }
            }
        }
        Ok(Self::from_raw(n, d + 1, coords, simplices, mult))
    }

    /// Edge length that keeps every edge within `CONE_MAX_ANGLE` of arc as
    /// seen from the origin, or `None` when no edge is longer. Very close
    /// passes are floored at a thousandth of the diameter.
    fn angular_edge_limit(&self) -> Option<f64> {
        if self.intrinsic_dim == 0 || self.is_empty() {
            return None;
        }
        let origin = vec![0.0; self.ambient_dim];
        let near = (0..self.num_simplices())
            .map(|s| linalg::norm(&linalg::closest_point_on_simplex(&self.simplex_points(s), &origin)))
            .fold(f64::INFINITY, f64::min);
        let h = (CONE_MAX_ANGLE * near).max(1e-3 * self.diameter());
        let longest = (0..self.num_simplices()).map(|s| self.longest_edge(s)).fold(0.0, f64::max);
        (longest > h).then_some(h)
    }

    /// Conforming longest-edge bisection until every edge is at most
    /// `max_edge`. Splitting an edge splits every simplex that contains it.
    pub fn refine(&self, max_edge: f64) -> Result<Self> {
        if !(max_edge > 0.0) {
            return Err(Error::invalid("max_edge must be positive"));
        }
        let d = self.intrinsic_dim;
        if d == 0 {
            return Ok(self.clone());
        }
        let n = self.ambient_dim;
        let mut coords = self.coords.clone();
        let mut cells: Vec<Option<(Vec<usize>, f64)>> = self
            .simplices()
            .zip(&self.multiplicities)
            .map(|(s, &m)| Some((s.to_vec(), m)))
            .collect();
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let register = |edges: &mut HashMap<(usize, usize), Vec<usize>>, verts: &[usize], id: usize| {
            for i in 0..verts.len() {
                for j in i + 1..verts.len() {
                    edges.entry(key(verts[i], verts[j])).or_default().push(id);
                }
            }
        };
        for (id, cell) in cells.iter().enumerate() {
            register(&mut edges, &cell.as_ref().unwrap().0, id);
        }
        let edge_len = |coords: &[f64], (a, b): (usize, usize)| {
            linalg::dist(&coords[a * n..(a + 1) * n], &coords[b * n..(b + 1) * n])
        };
        // Always splitting the globally longest edge makes it the longest
        // edge of every simplex containing it, so each split is a
        // longest-edge bisection.
        let mut heap: BinaryHeap<(OrdF64, (usize, usize))> = edges
            .keys()
            .map(|&e| (OrdF64(edge_len(&coords, e)), e))
            .collect();
        while let Some((OrdF64(len), (a, b))) = heap.pop() {
            if len <= max_edge {
                break;
            }
            let Some(incident) = edges.remove(&(a, b)) else { continue };
            let mid = coords.len() / n;
            let midpoint = linalg::lerp(&coords[a * n..(a + 1) * n], &coords[b * n..(b + 1) * n], 0.5);
            coords.extend(midpoint);
            for t in incident {
                let Some((tv, m)) = cells[t].take() else { continue };
                for i in 0..tv.len() {
                    for j in i + 1..tv.len() {
                        if let Some(list) = edges.get_mut(&key(tv[i], tv[j])) {
                            list.retain(|&x| x != t);
                        }
                    }
                }
                for (from, to) in [(b, mid), (a, mid)] {
                    let child: Vec<usize> = tv.iter().map(|&v| if v == from { to } else { v }).collect();
                    let cid = cells.len();
                    for i in 0..child.len() {
                        for j in i + 1..child.len() {
                            let e = key(child[i], child[j]);
                            if !edges.contains_key(&e) {
                                heap.push((OrdF64(edge_len(&coords, e)), e));
                            }
                        }
                    }
                    register(&mut edges, &child, cid);
                    cells.push(Some((child, m)));
                }
            }
        }
        let mut simplices = Vec::new();
        let mut mult = Vec::new();
        for (verts, m) in cells.into_iter().flatten() {
            simplices.extend(verts);
            mult.push(m);
        }
        Ok(Self::from_raw(n, d, coords, simplices, mult))
    }

    /// Free (d-1)-faces: faces that belong to exactly one simplex, each
    /// carrying the multiplicity of its simplex. Vertex indices refer to
    /// `self`.
    pub fn boundary_faces(&self) -> Vec<(Vec<usize>, f64)> {
        let d = self.intrinsic_dim;
        if d == 0 {
            return Vec::new();
        }
        let mut count: HashMap<Vec<usize>, (usize, f64, Vec<usize>)> = HashMap::new();
        let mut order = Vec::new();
        for s in 0..self.num_simplices() {
            let simplex = self.simplex(s);
            for skip in 0..=d {
                let face: Vec<usize> =
                    simplex.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                let mut sorted = face.clone();
                sorted.sort_unstable();
                let entry = count.entry(sorted.clone()).or_insert_with(|| {
                    order.push(sorted);
                    (0, self.multiplicities[s], face)
                });
                entry.0 += 1;
            }
        }
        order
            .into_iter()
            .filter_map(|k| {
                let (c, m, face) = count.remove(&k).unwrap();
                (c == 1).then_some((face, m))
            })
            .collect()
    }
}

#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn segment(a: [f64; 2], b: [f64; 2]) -> SimplicialManifold {
        SimplicialManifold::polyline(&[a.to_vec(), b.to_vec()], false).unwrap()
    }

    pub(crate) fn circle(r: f64, k: usize) -> SimplicialManifold {
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        SimplicialManifold::polyline(&pts, true).unwrap()
    }

    #[test]
    fn measure_examples() {
        let s = segment([0.0, 0.0], [1.0, 0.0]);
        assert_eq!(s.measure(), 1.0);
        let s3 = s.scale_multiplicities(3.0).unwrap();
        assert_eq!(s3.measure(), 3.0);
        let c = circle(1.0, 1000);
        let oracle = 2000.0 * (PI / 1000.0).sin();
        assert!((c.measure() - oracle).abs() < 1e-12);
        assert!((c.measure() - 2.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn point_set_measure_counts_multiplicity() {
        let p = SimplicialManifold::point_set(1, vec![-1.0, 1.0], Some(vec![1.0, 2.5])).unwrap();
        assert_eq!(p.measure(), 3.5);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            SimplicialManifold::new(2, 1, vec![0.0, 0.0, 1.0, 0.0], vec![0, 2], None),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            SimplicialManifold::new(2, 1, vec![0.0, 0.0, 0.0, 0.0], vec![0, 1], None),
            Err(Error::DegenerateSimplex { .. })
        ));
        assert!(matches!(
            SimplicialManifold::new(2, 1, vec![0.0, 0.0, 1.0, 0.0], vec![0, 1], Some(vec![0.0])),
            Err(Error::InvalidArgument(_))
        ));
        // collinear triangle
        assert!(matches!(
            SimplicialManifold::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0], vec![0, 1, 2], None),
            Err(Error::DegenerateSimplex { .. })
        ));
    }

    #[test]
    fn transform_examples() {
        let s = segment([0.0, 0.0], [1.0, 0.0]);
        assert_eq!(s.transform(&[0.0, 0.0], 1.0).unwrap(), s);
        assert!((s.transform(&[0.0, 0.0], 2.0).unwrap().measure() - 2.0).abs() < 1e-15);
        let c = circle(1.0, 64);
        let moved = c.transform(&[1.0, 0.0], 1.0).unwrap();
        assert!((moved.measure() - c.measure()).abs() < 1e-12);
        let center = moved.centroid();
        assert!((center[0] + 1.0).abs() < 1e-12 && center[1].abs() < 1e-12);
        assert!(c.transform(&[0.0, 0.0], 0.0).is_err());
        assert!(c.transform(&[0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn slice_examples() {
        let s = segment([0.0, -1.0], [0.0, 1.0]);
        let sl = s.slice_by_height(0.0).unwrap();
        assert_eq!(sl.ambient_dim(), 1);
        assert_eq!(sl.intrinsic_dim(), 0);
        assert_eq!(sl.num_simplices(), 1);
        assert_eq!(sl.vertex(0), &[0.0]);
        assert_eq!(sl.measure(), 1.0);

        let flat = SimplicialManifold::new(
            3,
            2,
            vec![0.0, 0.0, 0.5, 1.0, 0.0, 0.5, 0.0, 1.0, 0.5],
            vec![0, 1, 2],
            None,
        )
        .unwrap();
        assert!(flat.slice_by_height(0.0).unwrap().is_empty());
        // the same triangle sliced at its own height is empty by the tie rule
        assert!(flat.slice_by_height(0.5).unwrap().is_empty());

        let p = SimplicialManifold::point_set(2, vec![0.0, 0.0], None).unwrap();
        assert!(p.slice_by_height(0.0).is_err());
    }

    #[test]
    fn slice_tetrahedron_quad_section() {
        // Unit tetrahedron cut through the middle of two opposite edges.
        let tet = SimplicialManifold::new(
            3,
            3,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0],
            vec![0, 1, 2, 3],
            None,
        )
        .unwrap();
        let sl = tet.slice_by_height(0.5).unwrap();
        assert_eq!(sl.intrinsic_dim(), 2);
        assert_eq!(sl.num_simplices(), 2);
        // the cross-section is the square [0, 0.5]^2
        assert!((sl.measure() - 0.25).abs() < 1e-14, "{}", sl.measure());
    }

    #[test]
    fn projection_examples() {
        let h = segment([0.0, 3.0], [1.0, 3.0]);
        let p = h.project_horizontal().unwrap();
        assert_eq!(p.manifold.measure(), 1.0);
        assert_eq!(p.dropped_count, 0);

        let v = segment([0.0, 0.0], [0.0, 1.0]);
        let p = v.project_horizontal().unwrap();
        assert!(p.manifold.is_empty());
        assert_eq!(p.dropped_measure, 1.0);
        assert_eq!(p.dropped_count, 1);
    }

    #[test]
    fn cone_examples() {
        let two = SimplicialManifold::point_set(1, vec![-1.0, 1.0], None).unwrap();
        let c = two.cone_over(5.0, 64).unwrap();
        assert_eq!(c.intrinsic_dim(), 1);
        assert!((c.measure() - 10.0).abs() < 1e-12);

        let one = SimplicialManifold::point_set(1, vec![2.0], None).unwrap();
        assert!((one.cone_over(4.0, 16).unwrap().measure() - 4.0).abs() < 1e-12);

        let circ = circle(1.0, 512);
        let disc = circ.cone_over(3.0, 32).unwrap();
        let polygon_area = 9.0 * 0.5 * 512.0 * (2.0 * PI / 512.0).sin();
        assert!((disc.measure() - polygon_area).abs() < 1e-9);
        assert!((disc.measure() - 9.0 * PI).abs() / (9.0 * PI) < 1e-4);

        let bad = SimplicialManifold::point_set(1, vec![0.0, 1.0], None).unwrap();
        assert!(matches!(bad.cone_over(1.0, 4), Err(Error::SingularCone { vertex: 0, .. })));
    }

    #[test]
    fn cone_over_a_wide_segment_is_a_sector() {
        // the segment spans an angle near π as seen from the origin
        let s = segment([1.0, 0.1], [-1.0, 0.1]);
        let theta = PI - 2.0 * 0.1f64.atan();
        let cone = s.cone_over(2.0, 64).unwrap();
        let sector = 0.5 * 4.0 * theta;
        assert!((cone.measure() - sector).abs() / sector < 2e-3, "{} {sector}", cone.measure());
    }

    #[test]
    fn cone_every_point_within_radius() {
        let c = circle(0.3, 40).transform(&[-0.2, 0.1], 1.0).unwrap();
        let cone = c.cone_over(2.0, 20).unwrap();
        assert!(cone.vertices().all(|p| linalg::norm(p) <= 2.0 + 1e-12));
    }

    #[test]
    fn refine_examples() {
        let s = segment([0.0, 0.0], [1.0, 0.0]);
        let r = s.refine(0.25).unwrap();
        assert_eq!(r.num_simplices(), 4);
        assert!((r.measure() - 1.0).abs() < 1e-15);
        assert_eq!(s.refine(2.0).unwrap(), s);

        let oct = circle(1.0, 8);
        let fine = oct.refine(1e-3).unwrap();
        let oracle = 16.0 * (PI / 8.0).sin();
        assert!((oracle - 6.1229).abs() < 1e-4);
        assert!((fine.measure() - oracle).abs() < 1e-12 * oracle);
        for sx in 0..fine.num_simplices() {
            assert!(fine.longest_edge(sx) <= 1e-3);
        }
    }

    #[test]
    fn refine_triangle_mesh_is_conforming() {
        let square = SimplicialManifold::new(
            2,
            2,
            vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            vec![0, 1, 2, 0, 2, 3],
            None,
        )
        .unwrap();
        let fine = square.refine(0.1).unwrap();
        assert!((fine.measure() - 1.0).abs() < 1e-12);
        // a conforming mesh of a square has exactly the 4 sides as boundary
        let len: f64 = fine
            .boundary_faces()
            .iter()
            .map(|(f, _)| linalg::dist(fine.vertex(f[0]), fine.vertex(f[1])))
            .sum();
        assert!((len - 4.0).abs() < 1e-12, "boundary length {len}");
    }

    #[test]
    fn boundary_of_open_polyline() {
        let p = SimplicialManifold::polyline(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 1.0]], false).unwrap();
        let b = p.boundary_faces();
        assert_eq!(b.len(), 2);
        assert!(circle(1.0, 10).boundary_faces().is_empty());
    }
}
