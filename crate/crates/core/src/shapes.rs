//! Elementary test objects: circles, polygons, point pairs, spheres, tori.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::simplicial::SimplicialManifold;

/// Closed regular k-gon inscribed in the circle of radius r about the origin.
pub fn circle(r: f64, k: usize) -> Result<SimplicialManifold> {
    if !(r > 0.0 && r.is_finite()) || k < 3 {
        return Err(Error::invalid("circle needs r > 0 and at least 3 segments"));
    }
    let pts: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let th = TAU * i as f64 / k as f64;
            vec![r * th.cos(), r * th.sin()]
        })
        .collect();
    SimplicialManifold::polyline(&pts, true)
}

/// Closed polygon through the given planar points, in order.
pub fn polygon(points: &[[f64; 2]]) -> Result<SimplicialManifold> {
    if points.len() < 3 {
        return Err(Error::invalid("a polygon needs at least 3 vertices"));
    }
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
    SimplicialManifold::polyline(&pts, true)
}

/// Boundary of the axis-aligned square [-s/2, s/2]², with each side split
/// into `per_side` segments.
pub fn square(side: f64, per_side: usize) -> Result<SimplicialManifold> {
    if !(side > 0.0) || per_side == 0 {
        return Err(Error::invalid("square needs a positive side and subdivision"));
    }
    let h = side / 2.0;
    let corners = [[-h, -h], [h, -h], [h, h], [-h, h]];
    let mut pts = Vec::with_capacity(4 * per_side);
    for c in 0..4 {
        let (p, q) = (corners[c], corners[(c + 1) % 4]);
        for j in 0..per_side {
            let u = j as f64 / per_side as f64;
            pts.push(vec![p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1])]);
        }
    }
    SimplicialManifold::polyline(&pts, true)
}

/// Two points at ±sep/2 on the first axis of ℝⁿ.
pub fn two_points(sep: f64, ambient_dim: usize) -> Result<SimplicialManifold> {
    if !(sep > 0.0 && sep.is_finite()) || ambient_dim == 0 {
        return Err(Error::invalid("two points need a positive separation"));
    }
    let mut coords = vec![0.0; 2 * ambient_dim];
    coords[0] = -sep / 2.0;
    coords[ambient_dim] = sep / 2.0;
    SimplicialManifold::point_set(ambient_dim, coords, None)
}

/// Round sphere of radius r in ℝ³: the octahedron with each face split
/// into level² triangles, pushed out to the sphere.
pub fn sphere(r: f64, level: usize) -> Result<SimplicialManifold> {
    if !(r > 0.0 && r.is_finite()) || level == 0 {
        return Err(Error::invalid("sphere needs r > 0 and level >= 1"));
    }
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut coords: Vec<f64> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut tris = Vec::new();
    let mut vertex = |p: [f64; 3], coords: &mut Vec<f64>| -> usize {
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let q = p.map(|c| r * c / norm);
        let key = q.map(|c| (c * 1e9).round() as i64);
        *index.entry(key).or_insert_with(|| {
            coords.extend_from_slice(&q);
            coords.len() / 3 - 1
        })
    };
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                let a = axes[0].map(|c| c * sx);
                let b = axes[1].map(|c| c * sy);
                let c = axes[2].map(|c| c * sz);
                let at = |i: usize, j: usize| -> [f64; 3] {
                    let (u, v) = (i as f64 / level as f64, j as f64 / level as f64);
                    [0, 1, 2].map(|k| a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k]))
                };
                let flip = sx * sy * sz < 0.0;
                for i in 0..level {
                    for j in 0..level - i {
                        let mut t = [vertex(at(i, j), &mut coords), vertex(at(i + 1, j), &mut coords), vertex(at(i, j + 1), &mut coords)];
                        if flip {
                            t.swap(1, 2);
                        }
                        tris.extend(t);
                        if i + j + 1 < level {
                            let mut t = [vertex(at(i + 1, j), &mut coords), vertex(at(i + 1, j + 1), &mut coords), vertex(at(i, j + 1), &mut coords)];
                            if flip {
                                t.swap(1, 2);
                            }
                            tris.extend(t);
                        }
                    }
                }
            }
        }
    }
    SimplicialManifold::new(3, 2, coords, tris, None)
}

/// Torus of revolution about the last axis with radii big > small, on a
/// `major` × `minor` grid.
pub fn torus(big: f64, small: f64, major: usize, minor: usize) -> Result<SimplicialManifold> {
    if !(small > 0.0 && big > small) || major < 3 || minor < 3 {
        return Err(Error::invalid("torus needs 0 < small < big and grids of at least 3"));
    }
    let mut coords = Vec::with_capacity(3 * major * minor);
    for i in 0..major {
        let u = TAU * i as f64 / major as f64;
        for j in 0..minor {
            let w = TAU * j as f64 / minor as f64;
            let rr = big + small * w.cos();
            coords.extend([rr * u.cos(), rr * u.sin(), small * w.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % major) * minor + j % minor;
    let mut tris = Vec::with_capacity(6 * major * minor);
    for i in 0..major {
        for j in 0..minor {
            tris.extend([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.extend([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    SimplicialManifold::new(3, 2, coords, tris, None)
}
