//! Simplex quadrature with global adaptive longest-edge bisection, and
//! adaptive Gauss-Kronrod quadrature on intervals.
//!
//! Each cell carries the estimate of its two bisection children and the
//! Richardson-style error `|Q_children - Q_parent| / 15`; the cell with the
//! largest error is split until the summed error drops below tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg;
use crate::simplicial::SimplicialManifold;

const RICHARDSON_DIVISOR: f64 = 15.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    /// Target for the summed error estimate.
    pub tol: f64,
    /// Upper bound on the number of cell bisections after the initial pass.
    pub max_splits: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { tol: 1e-4, max_splits: 200_000 }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadConfig { tol, ..Default::default() }
    }
}

/// A value with a non-negative error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value + rhs.value, error: self.error + rhs.error }
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::default(), |a, b| a + b)
    }
}

/// Barycentric nodes and volume-normalized weights (summing to one).
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Rule used by the adaptive integrator for dimension `d`: 3-point
    /// Gauss-Legendre on segments, the 6-point degree-4 rule on triangles,
    /// Grundmann-Moeller of degree 5 above that.
    pub fn for_dim(d: usize) -> &'static SimplexRule {
        static RULES: OnceLock<Vec<SimplexRule>> = OnceLock::new();
        let rules = RULES.get_or_init(|| (0..=6).map(Self::build).collect());
        &rules[d.min(6)]
    }

    fn build(d: usize) -> SimplexRule {
        match d {
            0 => SimplexRule { dim: 0, nodes: vec![vec![1.0]], weights: vec![1.0] },
            1 => {
                let g = 0.5 * (0.6f64).sqrt();
                SimplexRule {
                    dim: 1,
                    nodes: vec![vec![0.5 + g, 0.5 - g], vec![0.5, 0.5], vec![0.5 - g, 0.5 + g]],
                    weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
                }
            }
            2 => {
                let a = 0.445_948_490_915_965;
                let wa = 0.223_381_589_678_011;
                let b = 0.091_576_213_509_771;
                let wb = 0.109_951_743_655_322;
                let mut nodes = Vec::new();
                let mut weights = Vec::new();
                for (p, w) in [(a, wa), (b, wb)] {
                    let q = 1.0 - 2.0 * p;
                    nodes.push(vec![q, p, p]);
                    nodes.push(vec![p, q, p]);
                    nodes.push(vec![p, p, q]);
                    weights.extend([w; 3]);
                }
                SimplexRule { dim: 2, nodes, weights }
            }
            _ => Self::grundmann_moeller(d, 2),
        }
    }

    /// Grundmann-Moeller rule of degree `2s + 1` on the d-simplex.
    pub fn grundmann_moeller(d: usize, s: usize) -> SimplexRule {
        let degree = 2 * s + 1;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for i in 0..=s {
            let denom = (degree + d - 2 * i) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * 2f64.powi(-(2 * s as i32)) * denom.powi(degree as i32)
                / (linalg::factorial(i) * linalg::factorial(degree + d - i))
                * linalg::factorial(d);
            for beta in compositions(s - i, d + 1) {
                nodes.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
                weights.push(w);
            }
        }
        SimplexRule { dim: d, nodes, weights }
    }

    /// Rule value on the simplex with the given vertices (already weighted
    /// by its d-volume `volume`).
    pub fn apply<F: Fn(&[f64]) -> f64>(&self, pts: &[Vec<f64>], volume: f64, f: &F, buf: &mut Vec<f64>) -> f64 {
        let n = pts[0].len();
        let mut acc = 0.0;
        for (lambda, w) in self.nodes.iter().zip(&self.weights) {
            buf.clear();
            buf.resize(n, 0.0);
            for (l, p) in lambda.iter().zip(pts) {
                for k in 0..n {
                    buf[k] += l * p[k];
                }
            }
            acc += w * f(buf);
        }
        acc * volume
    }
}

/// All vectors of `parts` non-negative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct Cell {
    pts: Vec<Vec<f64>>,
    tag: usize,
    weight: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.tag.cmp(&self.tag))
    }
}

fn bisect(pts: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut best = (0, 1, -1.0);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let l = linalg::dist_sq(&pts[i], &pts[j]);
            if l > best.2 {
                best = (i, j, l);
            }
        }
    }
    let (i, j, _) = best;
    let mid = linalg::lerp(&pts[i], &pts[j], 0.5);
    let mut a = pts.to_vec();
    let mut b = pts.to_vec();
    a[j] = mid.clone();
    b[i] = mid;
    (a, b)
}

fn evaluate_cell<F: Fn(usize, &[f64]) -> f64>(
    pts: Vec<Vec<f64>>,
    tag: usize,
    weight: f64,
    parent: Option<f64>,
    f: &F,
) -> Cell {
    let d = pts.len() - 1;
    let rule = SimplexRule::for_dim(d);
    let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
    let volume = linalg::simplex_volume(&refs);
    let mut buf = Vec::new();
    let g = |x: &[f64]| f(tag, x);
    if d == 0 {
        let value = weight * f(tag, &pts[0]);
        return Cell { pts, tag, weight, value, error: 0.0 };
    }
    if volume <= 0.0 {
        return Cell { pts, tag, weight, value: 0.0, error: 0.0 };
    }
    let coarse = parent.unwrap_or_else(|| rule.apply(&pts, volume, &g, &mut buf));
    let (a, b) = bisect(&pts);
    let fine = rule.apply(&a, volume / 2.0, &g, &mut buf) + rule.apply(&b, volume / 2.0, &g, &mut buf);
    Cell {
        pts,
        tag,
        weight,
        value: weight * fine,
        error: weight * (fine - coarse).abs() / RICHARDSON_DIVISOR,
    }
}

/// Integrates `f(tag, x)` over a list of weighted simplices `(vertices,
/// weight, tag)`. Zero-volume simplices contribute nothing.
pub fn integrate_cells<F>(cells: Vec<(Vec<Vec<f64>>, f64, usize)>, f: &F, cfg: &QuadConfig) -> Estimate
where
    F: Fn(usize, &[f64]) -> f64 + Sync,
{
    let initial: Vec<Cell> = if cells.len() > 256 {
        cells.into_par_iter().map(|(p, w, t)| evaluate_cell(p, t, w, None, f)).collect()
    } else {
        cells.into_iter().map(|(p, w, t)| evaluate_cell(p, t, w, None, f)).collect()
    };
    let mut total_err: f64 = initial.iter().map(|c| c.error).sum();
    let mut heap = BinaryHeap::from(initial);
    let mut splits = 0;
    while total_err > cfg.tol && splits < cfg.max_splits {
        let Some(cell) = heap.pop() else { break };
        if cell.error <= 0.0 {
            heap.push(cell);
            break;
        }
        total_err -= cell.error;
        let refs: Vec<&[f64]> = cell.pts.iter().map(|p| p.as_slice()).collect();
        let volume = linalg::simplex_volume(&refs);
        let rule = SimplexRule::for_dim(cell.pts.len() - 1);
        let mut buf = Vec::new();
        let g = |x: &[f64]| f(cell.tag, x);
        let (a, b) = bisect(&cell.pts);
        for child in [a, b] {
            let coarse = rule.apply(&child, volume / 2.0, &g, &mut buf);
            let c = evaluate_cell(child, cell.tag, cell.weight, Some(coarse), f);
            total_err += c.error;
            heap.push(c);
        }
        splits += 1;
    }
    let mut cells = heap.into_vec();
    cells.sort_by(|a, b| a.tag.cmp(&b.tag));
    let value = cells.iter().fold(0.0, |acc, c| acc + c.value);
    let error = cells.iter().map(|c| c.error).sum::<f64>().max(0.0);
    Estimate { value, error }
}

/// Integrates `f(simplex_index, x)` over `m`, counting multiplicity.
pub fn integrate_manifold<F>(m: &SimplicialManifold, f: &F, cfg: &QuadConfig) -> Estimate
where
    F: Fn(usize, &[f64]) -> f64 + Sync,
{
    let cells = (0..m.num_simplices())
        .map(|s| {
            let pts = m.simplex_points(s).into_iter().map(|p| p.to_vec()).collect();
            (pts, m.multiplicity(s), s)
        })
        .collect();
    integrate_cells(cells, f, cfg)
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const G_W: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Interval {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_W[7] * fc;
    let mut g = G_W[3] * fc;
    for i in 0..7 {
        let x = h * GK_X[i];
        let s = f(c - x) + f(c + x);
        k += GK_W[i] * s;
        if i % 2 == 1 {
            g += G_W[i / 2] * s;
        }
    }
    Interval { a, b, value: k * h, error: ((k - g) * h).abs() }
}

/// Globally adaptive 15-point Gauss-Kronrod quadrature of `f` over each of
/// the consecutive intervals defined by `breaks` (sorted).
pub fn integrate_interval<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64, max_splits: usize) -> Estimate {
    let mut heap: BinaryHeap<Interval> =
        breaks.windows(2).filter(|w| w[1] > w[0]).map(|w| gk15(f, w[0], w[1])).collect();
    let mut total: f64 = heap.iter().map(|i| i.error).sum();
    let mut splits = 0;
    while total > tol && splits < max_splits {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        total -= worst.error;
        for part in [gk15(f, worst.a, mid), gk15(f, mid, worst.b)] {
            total += part.error;
            heap.push(part);
        }
        splits += 1;
    }
    let mut parts = heap.into_vec();
    parts.sort_by(|x, y| x.a.total_cmp(&y.a));
    Estimate {
        value: parts.iter().map(|i| i.value).sum(),
        error: parts.iter().map(|i| i.error).sum(),
    }
}
