//! Curve shortening flow of a planar polyline with prescribed moving
//! endpoints, and the difference form of the monotonicity inequality
//!
//! Φ[M̃(t₂)] - Φ[M̃(t₁)] ≤ A(F̃, t₁, t₂)
//!
//! checked along the run.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian;
use crate::quadrature::QuadConfig;
use crate::simplicial::SimplicialManifold;
use crate::sweep::{self, BoundaryMotion, SweepConfig};

pub const CSV_SCHEMA_VERSION: u32 = 1;
/// Default calibration constant of the discretization error model.
pub const DEFAULT_MODEL_CONSTANT: f64 = 10.0;

type P2 = [f64; 2];

#[derive(Clone, Debug)]
pub struct FlowState {
    pub time: f64,
    points: Vec<P2>,
    motion: BoundaryMotion,
    /// Motion vertex index pinned to the first and last curve point.
    ends: [usize; 2],
    /// (time, endpoint positions in motion vertex order).
    pub history: Vec<(f64, Vec<f64>)>,
    pub h_target: f64,
    pub max_endpoint_deviation: f64,
}

/// Vertices of an open polyline in chain order.
fn chain(curve: &SimplicialManifold) -> Result<Vec<P2>> {
    if curve.ambient_dim() != 2 || curve.intrinsic_dim() != 1 {
        return Err(Error::invalid("the flow needs a polyline in the plane"));
    }
    let nv = curve.num_vertices();
    let mut next = vec![usize::MAX; nv];
    let mut has_prev = vec![false; nv];
    for s in curve.simplices() {
        if next[s[0]] != usize::MAX || has_prev[s[1]] {
            return Err(Error::invalid("the curve is not a simple chain"));
        }
        next[s[0]] = s[1];
        has_prev[s[1]] = true;
    }
    let starts: Vec<usize> = (0..nv).filter(|&v| !has_prev[v] && next[v] != usize::MAX).collect();
    let [start] = starts[..] else {
        return Err(Error::invalid("the curve must be a single open chain"));
    };
    let mut out = vec![start];
    while let Some(&v) = out.last() {
        if next[v] == usize::MAX {
            break;
        }
        out.push(next[v]);
    }
    if out.len() != curve.num_simplices() + 1 {
        return Err(Error::invalid("the curve must be a single open chain"));
    }
    Ok(out.into_iter().map(|v| [curve.vertex(v)[0], curve.vertex(v)[1]]).collect())
}

fn edge_len(a: &P2, b: &P2) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Resamples uniformly in arc length with spacing at most `h`, using a
/// cubic Hermite interpolant with finite-difference tangents. Endpoints
/// are kept exactly.
fn resample(points: &[P2], h: f64) -> Vec<P2> {
    let n = points.len();
    let mut s = vec![0.0; n];
    for i in 1..n {
        s[i] = s[i - 1] + edge_len(&points[i - 1], &points[i]);
    }
    let total = s[n - 1];
    let segments = ((total / h).ceil() as usize).max(1);
    let tangent = |i: usize| -> P2 {
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        let ds = s[b] - s[a];
        if ds <= 0.0 {
            return [0.0, 0.0];
        }
        [(points[b][0] - points[a][0]) / ds, (points[b][1] - points[a][1]) / ds]
    };
    let mut out = Vec::with_capacity(segments + 1);
    out.push(points[0]);
    let mut i = 0;
    for j in 1..segments {
        let target = total * j as f64 / segments as f64;
        while i + 2 < n && s[i + 1] < target {
            i += 1;
        }
        let hi = s[i + 1] - s[i];
        let u = if hi > 0.0 { ((target - s[i]) / hi).clamp(0.0, 1.0) } else { 0.0 };
        let (m0, m1) = (tangent(i), tangent(i + 1));
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        out.push([0, 1].map(|k| {
            h00 * points[i][k] + h10 * hi * m0[k] + h01 * points[i + 1][k] + h11 * hi * m1[k]
        }));
    }
    out.push(points[n - 1]);
    out
}

impl FlowState {
    /// The state at `t_start`, resampled to spacing `h_target`. The curve's
    /// endpoints must match the motion's two boundary points at `t_start`.
    pub fn new(initial: &SimplicialManifold, motion: BoundaryMotion, t_start: f64, h_target: f64) -> Result<Self> {
        if !(h_target > 0.0 && h_target.is_finite()) {
            return Err(Error::invalid("h_target must be positive"));
        }
        if motion.ambient_dim() != 2 || motion.sigma().intrinsic_dim() != 0 || motion.sigma().num_vertices() != 2 {
            return Err(Error::invalid("the boundary motion must move exactly two points in the plane"));
        }
        let (lo, hi) = motion.time_range();
        if !(t_start < 0.0 && t_start >= lo && t_start < hi) {
            return Err(Error::invalid(format!("start time {t_start} is outside the motion's range")));
        }
        let points = chain(initial)?;
        let bnd = motion.positions(t_start);
        let first = points[0];
        let last = points[points.len() - 1];
        let scale = initial.diameter().max(1.0);
        let dev = |p: &P2, k: usize| (p[0] - bnd[2 * k]).hypot(p[1] - bnd[2 * k + 1]);
        let forward = dev(&first, 0).max(dev(&last, 1));
        let backward = dev(&first, 1).max(dev(&last, 0));
        let (ends, mismatch) = if forward <= backward { ([0, 1], forward) } else { ([1, 0], backward) };
        if mismatch > 1e-8 * scale {
            return Err(Error::invalid(format!("curve endpoints are {mismatch:e} away from the boundary motion")));
        }
        let mut state = FlowState {
            time: t_start,
            points,
            motion,
            ends,
            history: Vec::new(),
            h_target,
            max_endpoint_deviation: 0.0,
        };
        state.pin_endpoints(&bnd);
        state.points = resample(&state.points, h_target);
        state.history.push((t_start, bnd));
        Ok(state)
    }

    fn pin_endpoints(&mut self, bnd: &[f64]) {
        let last = self.points.len() - 1;
        for (slot, idx) in [(0, self.ends[0]), (last, self.ends[1])] {
            self.points[slot] = [bnd[2 * idx], bnd[2 * idx + 1]];
        }
    }

    pub fn points(&self) -> &[P2] {
        &self.points
    }

    pub fn motion(&self) -> &BoundaryMotion {
        &self.motion
    }

    pub fn curve(&self) -> SimplicialManifold {
        let coords = self.points.iter().flatten().copied().collect();
        let n = self.points.len();
        let simplices = (0..n - 1).flat_map(|i| [i, i + 1]).collect();
        SimplicialManifold::from_raw(2, 1, coords, simplices, vec![1.0; n - 1])
    }

    /// Curve divided by |t|^(1/2).
    pub fn rescaled_curve(&self) -> SimplicialManifold {
        let s = self.time.abs().sqrt();
        let c = self.curve();
        c.transform(&[0.0, 0.0], 1.0 / s).unwrap_or(c)
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| edge_len(&w[0], &w[1])).sum()
    }

    pub fn min_edge(&self) -> f64 {
        self.points.windows(2).map(|w| edge_len(&w[0], &w[1])).fold(f64::INFINITY, f64::min)
    }

    /// Largest stable explicit step for the current edges.
    pub fn stable_dt(&self) -> f64 {
        0.5 * self.min_edge().powi(2)
    }

    /// One explicit step: interior vertices move by the discrete curvature
    /// vector 2 (T_(i+1) - T_i) / (|e_i| + |e_(i+1)|), endpoints follow the
    /// motion exactly, and the curve is resampled when an edge leaves
    /// [max(h/4, 1.05 √(2 dt)), 2h].
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("time step must be positive"));
        }
        let t_new = self.time + dt;
        if !(t_new < 0.0) || t_new > self.motion.time_range().1 {
            return Err(Error::invalid(format!("step to t = {t_new} leaves the allowed time range")));
        }
        let cap = self.stable_dt();
        if dt > cap * (1.0 + 1e-12) {
            return Err(Error::StabilityCap { dt, suggested: cap });
        }
        let n = self.points.len();
        let mut next = self.points.clone();
        for i in 1..n - 1 {
            let (a, b, c) = (self.points[i - 1], self.points[i], self.points[i + 1]);
            let (l0, l1) = (edge_len(&a, &b), edge_len(&b, &c));
            for k in 0..2 {
                let kappa = 2.0 * ((c[k] - b[k]) / l1 - (b[k] - a[k]) / l0) / (l0 + l1);
                next[i][k] = b[k] + dt * kappa;
            }
        }
        self.points = next;
        self.time = t_new;
        let bnd = self.motion.positions(t_new);
        self.pin_endpoints(&bnd);
        let h = self.h_target;
        let lo = (h / 4.0).max(1.05 * (2.0 * dt).sqrt());
        if self.points.windows(2).any(|w| {
            let l = edge_len(&w[0], &w[1]);
            l < lo || l > 2.0 * h
        }) {
            self.points = resample(&self.points, h);
        }
        let dev = [0, self.points.len() - 1]
            .iter()
            .zip(self.ends)
            .map(|(&slot, idx)| (self.points[slot][0] - bnd[2 * idx]).hypot(self.points[slot][1] - bnd[2 * idx + 1]))
            .fold(0.0, f64::max);
        self.max_endpoint_deviation = self.max_endpoint_deviation.max(dev);
        self.history.push((t_new, bnd));
        Ok(())
    }

    /// The recorded boundary as a sampled motion.
    pub fn recorded_motion(&self) -> Result<BoundaryMotion> {
        let sigma = self.motion.sigma();
        let embedded = SimplicialManifold::point_set(
            2,
            self.history[0].1.clone(),
            Some(sigma.multiplicities().to_vec()),
        )?;
        BoundaryMotion::general(embedded, self.history.clone())
    }
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub initial: SimplicialManifold,
    pub motion: BoundaryMotion,
    pub a: f64,
    pub b: f64,
    pub dt: f64,
    pub h: f64,
    pub report_interval: f64,
    pub model_constant: f64,
    pub quad: QuadConfig,
}

impl FlowConfig {
    pub fn new(initial: SimplicialManifold, motion: BoundaryMotion, a: f64, b: f64, dt: f64, h: f64) -> Self {
        FlowConfig {
            initial,
            motion,
            a,
            b,
            dt,
            h,
            report_interval: (b - a) / 30.0,
            model_constant: DEFAULT_MODEL_CONSTANT,
            quad: QuadConfig::with_tol(1e-9),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowRow {
    pub t: f64,
    pub phi_rescaled: f64,
    /// A(F̃, a, t) from the recorded boundary.
    pub swept_cumulative: f64,
    /// A(F̃, a, t) - (Φ[M̃(t)] - Φ[M̃(a)]).
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowReport {
    pub rows: Vec<FlowRow>,
    pub tol_model: f64,
    pub model_constant: f64,
    pub min_margin: f64,
    /// Smallest A(t1, t2) - (Φ(t2) - Φ(t1)) over report-time pairs.
    pub min_pair_margin: f64,
    pub max_endpoint_deviation: f64,
    pub steps: usize,
    pub remeshed_vertices: usize,
}

impl FlowReport {
    pub fn holds(&self) -> bool {
        self.min_pair_margin >= -self.tol_model
    }

    /// Largest violation beyond zero, or 0.
    pub fn worst_violation(&self) -> f64 {
        (-self.min_pair_margin).max(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# gaussflow flow series, schema {CSV_SCHEMA_VERSION}, tol_model {:e}\n", self.tol_model);
        out.push_str("t,phi_rescaled,swept_cumulative,margin\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.t, r.phi_rescaled, r.swept_cumulative, r.margin);
        }
        out
    }
}

/// Runs the flow from a to b with fixed steps, reporting at every
/// `report_interval`. The margins must stay above
/// -C (h² + dt) (b - a).
pub fn run_and_verify(cfg: &FlowConfig) -> Result<FlowReport> {
    if !(cfg.a < cfg.b && cfg.b < 0.0) {
        return Err(Error::invalid("need a < b < 0"));
    }
    if !(cfg.report_interval > 0.0) {
        return Err(Error::invalid("report interval must be positive"));
    }
    let mut state = FlowState::new(&cfg.initial, cfg.motion.clone(), cfg.a, cfg.h)?;
    let steps = ((cfg.b - cfg.a) / cfg.dt).round().max(1.0) as usize;
    let dt = (cfg.b - cfg.a) / steps as f64;
    let every = ((cfg.report_interval / dt).round() as usize).clamp(1, steps);
    let phi = |s: &FlowState| gaussian::phi_area(&s.rescaled_curve(), &cfg.quad).map(|e| e.value);
    let mut samples = vec![(state.time, phi(&state)?)];
    let mut remeshed = 0;
    for k in 1..=steps {
        let before = state.points.len();
        let target = if k == steps { cfg.b } else { cfg.a + k as f64 * dt };
        state.step(target - state.time)?;
        if state.points.len() != before {
            remeshed += 1;
        }
        if k % every == 0 || k == steps {
            samples.push((state.time, phi(&state)?));
        }
    }
    let motion = state.recorded_motion()?;
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let swept = sweep::swept_phi_area_cumulative(&motion, cfg.a, &times, 64, &cfg.quad)?;
    let phi_a = samples[0].1;
    let rows: Vec<FlowRow> = samples
        .iter()
        .zip(&swept)
        .map(|(&(t, p), a)| FlowRow { t, phi_rescaled: p, swept_cumulative: a.value, margin: a.value - (p - phi_a) })
        .collect();
    let mut min_pair = f64::INFINITY;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let a = rows[j].swept_cumulative - rows[i].swept_cumulative;
            min_pair = min_pair.min(a - (rows[j].phi_rescaled - rows[i].phi_rescaled));
        }
    }
    let tol_model = cfg.model_constant * (cfg.h * cfg.h + cfg.dt) * (cfg.b - cfg.a);
    Ok(FlowReport {
        min_margin: rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        min_pair_margin: if min_pair.is_finite() { min_pair } else { 0.0 },
        rows,
        tol_model,
        model_constant: cfg.model_constant,
        max_endpoint_deviation: state.max_endpoint_deviation,
        steps,
        remeshed_vertices: remeshed,
    })
}

/// Grim reaper flow M(t) = M + (t + 1) v e_2 with its exact translating
/// boundary: the boundary motion and the curve at `t_start`.
pub fn grim_reaper_flow(v: f64, y_cut: f64, res: usize, t_start: f64) -> Result<(SimplicialManifold, BoundaryMotion)> {
    let m = crate::zoo::grim_reaper(v, y_cut, res)?;
    let n = m.num_vertices();
    let ends = SimplicialManifold::point_set(1, vec![m.vertex(0)[0], m.vertex(n - 1)[0]], None)?;
    let motion = BoundaryMotion::translator(ends, y_cut / v + 1.0, v)?;
    let curve = m.transform(&[0.0, -(t_start + 1.0) * v], 1.0)?;
    Ok((curve, motion))
}

/// A circle of the given radius through the origin, opened there and
/// pinned at both ends. The boundary sits at the origin, so it sweeps
/// nothing and the rescaled Gaussian area must not increase.
pub fn pinned_loop_flow(radius: f64, res: usize, a: f64, b: f64) -> Result<(SimplicialManifold, BoundaryMotion)> {
    if !(radius > 0.0) || res < 3 {
        return Err(Error::invalid("pinned loop needs a positive radius and at least 3 segments"));
    }
    let mut pts: Vec<Vec<f64>> = (0..=res)
        .map(|i| {
            let th = -std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * i as f64 / res as f64;
            vec![radius * th.cos(), radius + radius * th.sin()]
        })
        .collect();
    pts[0] = vec![0.0, 0.0];
    pts[res] = vec![0.0, 0.0];
    let curve = SimplicialManifold::polyline(&pts, false)?;
    let ends = SimplicialManifold::point_set(2, vec![0.0; 4], None)?;
    let motion = BoundaryMotion::stationary(ends, &[a, b])?;
    Ok((curve, motion))
}

/// Upper bound check: Φ[M̃(t)] ≤ A(F̃, -∞, t) for a translating boundary,
/// with -∞ replaced by a time where the remaining swept mass is negligible.
pub fn swept_to_time(motion: &BoundaryMotion, t: f64, cfg: &SweepConfig) -> Result<sweep::SweepEstimate> {
    let far = -1e8 * t.abs().max(1.0);
    sweep::swept_phi_area(motion, far, t, cfg)
}
