//! Grid search plus Nelder–Mead refinement over (θ, χ, φ) ∈ [0, π]³.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::AdaptiveUnitary;
use crate::error::{Error, Result};
use crate::protocols::{prepare, ChannelConfig, Protocol};

pub const TOP_STARTS: usize = 5;
pub const CO_MAX_TOL: f64 = 1e-6;
const MAX_SIMPLEX_ITERS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub grid_n: usize,
    pub refine_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { grid_n: 25, refine_tol: 1e-7 }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 {
            return Err(Error::BadParams(format!("grid_n = {} < 2", self.grid_n)));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::BadParams(format!("refine_tol = {} must be positive", self.refine_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_params: [f64; 3],
    pub best_value: f64,
    pub grid_points: usize,
    pub refinement_iterations: usize,
    pub co_maximizers: Vec<[f64; 3]>,
}

fn lex(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

fn clamp_box(x: [f64; 3]) -> [f64; 3] {
    x.map(|v| v.clamp(0.0, PI))
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Nelder–Mead on −f inside the box; returns (point, value, iterations).
fn simplex_ascent<F: Fn([f64; 3]) -> f64>(f: &F, start: [f64; 3], step: f64, tol: f64) -> ([f64; 3], f64, usize) {
    let eval = |x: [f64; 3]| -sanitize(f(clamp_box(x)));
    let mut pts: Vec<[f64; 3]> = vec![start];
    for d in 0..3 {
        let mut x = start;
        x[d] = if x[d] + step <= PI { x[d] + step } else { x[d] - step };
        pts.push(x);
    }
    let mut vals: Vec<f64> = pts.iter().map(|&x| eval(x)).collect();
    let mut iters = 0;
    while iters < MAX_SIMPLEX_ITERS {
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(lex(&pts[a], &pts[b])));
        pts = order.iter().map(|&i| pts[i]).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let size = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size < tol {
            break;
        }
        iters += 1;
        let mut c = [0.0; 3];
        for p in &pts[..3] {
            for d in 0..3 {
                c[d] += p[d] / 3.0;
            }
        }
        let along = |t: f64| clamp_box([0, 1, 2].map(|d| c[d] + t * (pts[3][d] - c[d])));
        let xr = along(-1.0);
        let fr = eval(xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(xe);
            if fe < fr {
                pts[3] = xe;
                vals[3] = fe;
            } else {
                pts[3] = xr;
                vals[3] = fr;
            }
        } else if fr < vals[2] {
            pts[3] = xr;
            vals[3] = fr;
        } else {
            let (xc, fc) = if fr < vals[3] {
                let x = along(-0.5);
                (x, eval(x))
            } else {
                let x = along(0.5);
                (x, eval(x))
            };
            if fc < vals[3].min(fr) {
                pts[3] = xc;
                vals[3] = fc;
            } else {
                for i in 1..4 {
                    pts[i] = clamp_box([0, 1, 2].map(|d| pts[0][d] + 0.5 * (pts[i][d] - pts[0][d])));
                    vals[i] = eval(pts[i]);
                }
            }
        }
    }
    let best = (0..4).min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(lex(&pts[a], &pts[b]))).unwrap();
    (clamp_box(pts[best]), -vals[best], iters)
}

/// Maximize `objective` over [0, π]³: full grid, then simplex refinement from the
/// best grid points. Ties resolve to the lexicographically smallest triple.
pub fn maximize_over_unitary<F>(objective: F, grid_n: usize, refine_tol: f64) -> OptimizationResult
where
    F: Fn([f64; 3]) -> f64 + Sync,
{
    let n = grid_n.max(2);
    let axis: Vec<f64> = (0..n).map(|k| PI * k as f64 / (n - 1) as f64).collect();
    let total = n * n * n;
    let point = |idx: usize| [axis[idx / (n * n)], axis[(idx / n) % n], axis[idx % n]];
    let values: Vec<f64> = (0..total).into_par_iter().map(|i| sanitize(objective(point(i)))).collect();

    let mut ranked: Vec<usize> = (0..total).collect();
    // grid index order is lexicographic in (θ, χ, φ)
    ranked.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let step = PI / (n - 1) as f64;
    let refined: Vec<([f64; 3], f64, usize)> = ranked[..TOP_STARTS.min(total)]
        .par_iter()
        .map(|&i| simplex_ascent(&objective, point(i), step, refine_tol))
        .collect();

    let grid_best = values[ranked[0]];
    let best_value = refined.iter().map(|r| r.1).fold(grid_best, f64::max);
    let mut co: Vec<[f64; 3]> = (0..total)
        .filter(|&i| values[i] >= best_value - CO_MAX_TOL)
        .map(point)
        .chain(refined.iter().filter(|r| r.1 >= best_value - CO_MAX_TOL).map(|r| r.0))
        .collect();
    co.sort_by(lex);
    co.dedup();
    OptimizationResult {
        best_params: co[0],
        best_value,
        grid_points: total,
        refinement_iterations: refined.iter().map(|r| r.2).sum(),
        co_maximizers: co,
    }
}

pub fn adaptive_rate(
    protocol: Protocol,
    cfg: &ChannelConfig,
    opts: &OptimizerSettings,
) -> Result<(f64, OptimizationResult)> {
    opts.validate()?;
    let ev = prepare(protocol, cfg)?;
    let res = maximize_over_unitary(
        |[t, c, f]| ev.raw_rate(&AdaptiveUnitary::clamped(t, c, f)),
        opts.grid_n,
        opts.refine_tol,
    );
    Ok((res.best_value.max(0.0), res))
}

pub fn conventional_rate(protocol: Protocol, cfg: &ChannelConfig) -> Result<f64> {
    Ok(prepare(protocol, cfg)?.raw_rate(&AdaptiveUnitary::identity()).max(0.0))
}

pub fn delta_r(protocol: Protocol, cfg: &ChannelConfig, opts: &OptimizerSettings) -> Result<f64> {
    Ok(adaptive_rate(protocol, cfg, opts)?.0 - conventional_rate(protocol, cfg)?)
}

/// Smallest noise strength in [lo, hi] at which `rate` reaches zero, assuming the
/// rate is non-increasing. Returns `hi` if the rate stays positive.
pub fn critical_noise<F: FnMut(f64) -> f64>(mut rate: F, lo: f64, hi: f64, tol: f64) -> f64 {
    if rate(lo) <= 0.0 {
        return lo;
    }
    if rate(hi) > 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if rate(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
