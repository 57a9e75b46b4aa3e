//! Dormand-Prince 5(4) explicit Runge-Kutta with adaptive steps.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeConfig {
    pub atol: f64,
    pub rtol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig { atol: 1e-10, rtol: 1e-10, initial_step: 1e-4, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    /// The requested output times, in order.
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    /// Largest local error estimate over accepted steps.
    pub max_local_error: f64,
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y' = f(t, y) from `t0` and reports y at each of the
/// increasing times `outputs` (all ≥ t0); steps are shortened to land on
/// them exactly.
pub fn dormand_prince<F>(f: F, t0: f64, y0: &[f64], outputs: &[f64], cfg: &OdeConfig) -> Result<OdeSolution>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::invalid("output times must be increasing and not before the start"));
    }
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = cfg.initial_step;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    k[0] = f(t, &y);
    let mut sol = OdeSolution { t: Vec::new(), y: Vec::new(), max_local_error: 0.0, accepted: 0, rejected: 0 };
    let mut stage = vec![0.0; dim];
    for &target in outputs {
        while t < target {
            if sol.accepted + sol.rejected >= cfg.max_steps {
                return Err(Error::Numeric(format!("step limit reached at t = {t} (target {target})")));
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..dim {
                    stage[i] = y[i] + step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                k[s] = f(t + C[s] * step, &stage);
            }
            // stage now holds the fifth-order solution (row 6 of A)
            let mut err: f64 = 0.0;
            let mut err_abs: f64 = 0.0;
            for i in 0..dim {
                let e = step * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let scale = cfg.atol + cfg.rtol * y[i].abs().max(stage[i].abs());
                err = err.max((e / scale).abs());
                err_abs = err_abs.max(e.abs());
            }
            if !err.is_finite() || stage.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite state at t = {t}, step {step}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&stage);
                k[0] = k[6].clone();
                sol.accepted += 1;
                sol.max_local_error = sol.max_local_error.max(err_abs);
            } else {
                sol.rejected += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let proposed = step * factor;
            if err <= 1.0 && last {
                // keep the step size the controller would have used
                h = h.max(proposed);
            } else {
                h = proposed;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Numeric(format!("step size underflow at t = {t}")));
            }
        }
        sol.t.push(target);
        sol.y.push(y.clone());
    }
    Ok(sol)
}
