//! Small dense helpers on `&[f64]` points. Dimensions here are tiny (n <= 4),
//! so nothing is worth a matrix library.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// `a + s * (b - a)`
pub fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Orthonormal basis of the span of `vectors` by modified Gram-Schmidt,
/// together with the product of the pre-normalization lengths (the
/// parallelotope volume). Vectors that collapse below `1e-300` are skipped.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    let mut volume = 1.0;
    for v in vectors {
        let mut w = v.clone();
        for u in &basis {
            let c = dot(&w, u);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= c * ui;
            }
        }
        let len = norm(&w);
        volume *= len;
        if len > 1e-300 {
            for wi in &mut w {
                *wi /= len;
            }
            basis.push(w);
        }
    }
    (basis, volume)
}

/// d-dimensional volume of the simplex with the given vertices.
pub fn simplex_volume(points: &[&[f64]]) -> f64 {
    let d = points.len() - 1;
    if d == 0 {
        return 1.0;
    }
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    let (_, vol) = gram_schmidt(&edges);
    vol / factorial(d)
}

/// Component of `p` orthogonal to the span of the orthonormal `basis`.
pub fn reject(p: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut w = p.to_vec();
    for u in basis {
        let c = dot(&w, u);
        for (wi, ui) in w.iter_mut().zip(u) {
            *wi -= c * ui;
        }
    }
    w
}

/// Solve the square system `a x = b` (row-major, size k) by Gaussian
/// elimination with partial pivoting. Returns `None` when singular.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))?;
        if a[pivot * k + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..k {
                a.swap(col * k + c, pivot * k + c);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..k {
            let f = a[row * k + col] / a[col * k + col];
            for c in col..k {
                a[row * k + c] -= f * a[col * k + c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut s = b[row];
        for c in row + 1..k {
            s -= a[row * k + c] * x[c];
        }
        x[row] = s / a[row * k + row];
    }
    Some(x)
}


/// Barycentric coordinates of the orthogonal projection of `p` onto the
/// affine hull of `pts`. `None` if the simplex is degenerate.
pub fn affine_coordinates(pts: &[&[f64]], p: &[f64]) -> Option<Vec<f64>> {
    let k = pts.len() - 1;
    if k == 0 {
        return Some(vec![1.0]);
    }
    let edges: Vec<Vec<f64>> = pts[1..].iter().map(|q| sub(q, pts[0])).collect();
    let rhs: Vec<f64> = edges.iter().map(|e| dot(e, &sub(p, pts[0]))).collect();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = dot(&edges[i], &edges[j]);
        }
    }
    let tail = solve(gram, rhs, k)?;
    let mut lambda = Vec::with_capacity(k + 1);
    lambda.push(1.0 - tail.iter().sum::<f64>());
    lambda.extend(tail);
    Some(lambda)
}

/// Closest point of the simplex `pts` to `p`, by projecting onto the
/// affine hull and recursing into faces when the projection falls outside.
pub fn closest_point_on_simplex(pts: &[&[f64]], p: &[f64]) -> Vec<f64> {
    if pts.len() == 1 {
        return pts[0].to_vec();
    }
    if let Some(lambda) = affine_coordinates(pts, p) {
        if lambda.iter().all(|&l| l >= 0.0) {
            let mut q = vec![0.0; p.len()];
            for (l, v) in lambda.iter().zip(pts) {
                for (qi, vi) in q.iter_mut().zip(v.iter()) {
                    *qi += l * vi;
                }
            }
            return q;
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for skip in 0..pts.len() {
        let face: Vec<&[f64]> = pts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, v)| *v).collect();
        let q = closest_point_on_simplex(&face, p);
        let dq = dist_sq(&q, p);
        if best.as_ref().is_none_or(|(b, _)| dq < *b) {
            best = Some((dq, q));
        }
    }
    best.unwrap().1
}
