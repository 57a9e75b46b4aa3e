//! Derivative-free maximization: compass (pattern) search from a set of
//! starts, with optional box bounds on each coordinate.

use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct PatternSearch {
    /// Initial step per coordinate.
    pub steps: Vec<f64>,
    /// Search stops once the step multiplier falls below this.
    pub min_scale: f64,
    pub max_evals: usize,
    /// Optional inclusive bounds per coordinate.
    pub bounds: Vec<Option<(f64, f64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl PatternSearch {
    pub fn new(steps: Vec<f64>, min_scale: f64) -> Self {
        let n = steps.len();
        PatternSearch { steps, min_scale, max_evals: 5_000, bounds: vec![None; n] }
    }

    pub fn with_bound(mut self, coord: usize, lo: f64, hi: f64) -> Self {
        self.bounds[coord] = Some((lo, hi));
        self
    }

    fn clamp(&self, x: &mut [f64]) {
        for (xi, b) in x.iter_mut().zip(&self.bounds) {
            if let Some((lo, hi)) = b {
                *xi = xi.clamp(*lo, *hi);
            }
        }
    }

    /// Maximizes `f` from `x0`. Successful polls double the step (capped at
    /// the initial one), failed polls halve it.
    pub fn maximize<F: Fn(&[f64]) -> f64>(&self, f: &F, x0: &[f64], f0: Option<f64>) -> SearchResult {
        let mut x = x0.to_vec();
        self.clamp(&mut x);
        let mut evals = 0;
        let mut fx = match f0 {
            Some(v) if x == x0 => v,
            _ => {
                evals += 1;
                f(&x)
            }
        };
        let mut scale: f64 = 1.0;
        let mut trial = x.clone();
        while scale >= self.min_scale && evals < self.max_evals {
            let mut improved = false;
            'poll: for i in 0..x.len() {
                for sign in [1.0, -1.0] {
                    trial.copy_from_slice(&x);
                    trial[i] += sign * scale * self.steps[i];
                    self.clamp(&mut trial);
                    if trial[i] == x[i] {
                        continue;
                    }
                    let ft = f(&trial);
                    evals += 1;
                    if ft > fx {
                        fx = ft;
                        x.copy_from_slice(&trial);
                        improved = true;
                        break 'poll;
                    }
                }
            }
            scale = if improved { (scale * 2.0).min(1.0) } else { scale * 0.5 };
        }
        SearchResult { x, value: fx, evals }
    }
}

/// Evaluates `f` at every start in parallel, keeps the `keep` best distinct
/// ones and runs `search` from each; returns the overall best together
/// with the total evaluation count. Ties resolve to the earlier start.
pub fn multistart<F>(f: &F, starts: &[Vec<f64>], keep: usize, search: &PatternSearch) -> Option<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if starts.is_empty() {
        return None;
    }
    let values: Vec<f64> = starts.par_iter().map(|x| f(x)).collect();
    let mut order: Vec<usize> = (0..starts.len()).filter(|&i| values[i].is_finite()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::new();
    for i in order {
        if chosen.len() >= keep {
            break;
        }
        if chosen.iter().all(|&j| starts[j] != starts[i]) {
            chosen.push(i);
        }
    }
    let results: Vec<SearchResult> =
        chosen.par_iter().map(|&i| search.maximize(f, &starts[i], Some(values[i]))).collect();
    let scan = starts.len();
    results
        .into_iter()
        .reduce(|best, r| if r.value > best.value { r } else { best })
        .map(|mut best| {
            best.evals += scan;
            best
        })
}
