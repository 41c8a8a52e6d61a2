//! Parameter sweeps, figure presets, CSV output and the self-check suite.

mod csv;
mod presets;
mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{NoiseConfig, NoiseKind};
use crate::densecoding::{dc_capacity, dc_capacity_fixed, CLASSICAL_LIMIT};
use crate::encoding::adaptive_unitary;
use crate::error::{Error, Result};
use crate::optimize::{adaptive_rate, conventional_rate, OptimizerSettings};
use crate::protocols::{ChannelConfig, Protocol};

pub use self::csv::{format_float, write_rows, CSV_HEADER};
pub use presets::{figure_preset, PRESET_NAMES};
pub use verify::{verify_suite, CheckResult, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "p")]
    P,
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "pY_pZ_grid")]
    PyPzGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Adaptive,
    Conventional,
    Delta,
    DcCapacity,
    DcCapacityFixed,
}

fn default_grid_n() -> usize {
    OptimizerSettings::default().grid_n
}

fn default_refine_tol() -> f64 {
    OptimizerSettings::default().refine_tol
}

/// Flat sweep description; also the JSON config format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub protocol: Protocol,
    pub kind: NoiseKind,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Fixed p_X for the (p_Y, p_Z) grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_x: Option<f64>,
    /// Full (I, X, Y, Z) weights for a general Pauli channel off the grid axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli_probs: Option<[f64; 4]>,
    pub axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub modes: Vec<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_unitary: Option<[f64; 3]>,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub protocol: Protocol,
    pub kind: NoiseKind,
    pub p: Option<f64>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub p_x: Option<f64>,
    pub p_y: Option<f64>,
    pub p_z: Option<f64>,
    pub r_conventional: Option<f64>,
    pub r_adaptive: Option<f64>,
    pub delta_r: Option<f64>,
    pub theta_opt: Option<f64>,
    pub chi_opt: Option<f64>,
    pub phi_opt: Option<f64>,
    pub capacity: Option<f64>,
    pub capacity_fixed: Option<f64>,
    pub capacity_single_use: Option<f64>,
    pub classical_limit: Option<f64>,
}

fn cfg_err(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigError { field: field.to_string(), message: message.into() }
}

/// Point of a sweep: the swept values substituted into the base parameters.
#[derive(Debug, Clone, Copy)]
struct Point {
    p: f64,
    mu: f64,
    alpha: Option<f64>,
    probs: Option<[f64; 4]>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| {
            cfg_err(&format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn settings(&self) -> OptimizerSettings {
        OptimizerSettings { grid_n: self.grid_n, refine_tol: self.refine_tol }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.from < self.to) {
            return Err(cfg_err("from", format!("from = {} must be below to = {}", self.from, self.to)));
        }
        if self.steps < 2 {
            return Err(cfg_err("steps", format!("steps = {} < 2", self.steps)));
        }
        if self.modes.is_empty() {
            return Err(cfg_err("modes", "no modes requested"));
        }
        self.settings().validate().map_err(|e| cfg_err("grid_n", e.to_string()))?;
        match self.axis {
            SweepAxis::Mu if !self.kind.is_pauli() => {
                return Err(cfg_err("axis", format!("mu axis needs a Pauli kind, got {}", self.kind)));
            }
            SweepAxis::Alpha if !self.kind.is_non_markovian() => {
                return Err(cfg_err("axis", format!("alpha axis needs a non-Markovian kind, got {}", self.kind)));
            }
            SweepAxis::PyPzGrid if self.kind != NoiseKind::GeneralPauli => {
                return Err(cfg_err("axis", "pY_pZ_grid needs kind general_pauli"));
            }
            SweepAxis::PyPzGrid => {
                let px = self.p_x.ok_or_else(|| cfg_err("p_x", "pY_pZ_grid needs p_x"))?;
                if px < 0.0 || px + 2.0 * self.to > 1.0 || self.from < 0.0 {
                    return Err(cfg_err("to", "grid leaves the probability simplex"));
                }
            }
            _ => {}
        }
        if let Some(u) = self.fixed_unitary {
            adaptive_unitary(u[0], u[1], u[2]).map_err(|e| cfg_err("fixed_unitary", e.to_string()))?;
        }
        let dc = self.modes.iter().any(|m| matches!(m, Mode::DcCapacity | Mode::DcCapacityFixed));
        for pt in self.points() {
            let cfg = self.channel(&pt).map_err(|e| cfg_err("kind", e.to_string()))?;
            if dc && cfg.correlation_mu != 0.0 {
                return Err(cfg_err("mu", "capacity modes need independent legs (mu = 0)"));
            }
            if self.protocol == Protocol::Bb84TwoWay && cfg.correlation_mu != 0.0 {
                return Err(cfg_err("mu", "two-way BB84 needs independent legs (mu = 0)"));
            }
        }
        Ok(())
    }

    fn axis_values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n).map(|k| self.from + (self.to - self.from) * k as f64 / (n - 1) as f64).collect()
    }

    fn points(&self) -> Vec<Point> {
        let base = Point { p: self.p, mu: self.mu, alpha: self.alpha, probs: self.pauli_probs };
        let vals = self.axis_values();
        match self.axis {
            SweepAxis::P => vals.iter().map(|&p| Point { p, ..base }).collect(),
            SweepAxis::Mu => vals.iter().map(|&mu| Point { mu, ..base }).collect(),
            SweepAxis::Alpha => vals.iter().map(|&a| Point { alpha: Some(a), ..base }).collect(),
            SweepAxis::PyPzGrid => {
                let px = self.p_x.unwrap_or(0.0);
                let mut out = Vec::with_capacity(vals.len() * vals.len());
                for &py in &vals {
                    for &pz in &vals {
                        out.push(Point { probs: Some([1.0 - px - py - pz, px, py, pz]), ..base });
                    }
                }
                out
            }
        }
    }

    fn channel(&self, pt: &Point) -> Result<ChannelConfig> {
        let mut noise = NoiseConfig::new(self.kind, pt.p).with_mu(pt.mu);
        if self.kind.is_non_markovian() {
            noise.alpha = Some(pt.alpha.unwrap_or(0.0));
        }
        if self.kind == NoiseKind::GeneralPauli {
            noise.p = 0.0;
            noise.pauli_probs = pt.probs;
        }
        noise.validate()?;
        let cfg = ChannelConfig::symmetric(noise);
        cfg.validate()?;
        Ok(cfg)
    }

    fn row(&self, pt: &Point) -> Result<SweepRow> {
        let cfg = self.channel(pt)?;
        let has = |m: Mode| self.modes.contains(&m);
        let gp = self.kind == NoiseKind::GeneralPauli;
        let probs = if gp { pt.probs } else { None };
        let mut row = SweepRow {
            protocol: self.protocol,
            kind: self.kind,
            p: (!gp).then_some(pt.p),
            mu: self.kind.is_pauli().then_some(pt.mu),
            alpha: if self.kind.is_non_markovian() { Some(pt.alpha.unwrap_or(0.0)) } else { None },
            p_x: probs.map(|w| w[1]),
            p_y: probs.map(|w| w[2]),
            p_z: probs.map(|w| w[3]),
            r_conventional: None,
            r_adaptive: None,
            delta_r: None,
            theta_opt: None,
            chi_opt: None,
            phi_opt: None,
            capacity: None,
            capacity_fixed: None,
            capacity_single_use: None,
            classical_limit: None,
        };
        let opts = self.settings();
        if has(Mode::Conventional) || has(Mode::Delta) {
            row.r_conventional = Some(conventional_rate(self.protocol, &cfg)?);
        }
        if has(Mode::Adaptive) || has(Mode::Delta) {
            let (r, res) = adaptive_rate(self.protocol, &cfg, &opts)?;
            row.r_adaptive = Some(r);
            let [t, c, f] = res.best_params;
            (row.theta_opt, row.chi_opt, row.phi_opt) = (Some(t), Some(c), Some(f));
        }
        if let (Some(a), Some(c)) = (row.r_adaptive, row.r_conventional) {
            row.delta_r = Some(a - c);
        }
        if has(Mode::DcCapacity) {
            row.capacity = Some(dc_capacity(&cfg, &opts)?.capacity);
            let single = ChannelConfig::backward_only(cfg.forward.clone());
            row.capacity_single_use = Some(dc_capacity(&single, &opts)?.capacity);
        }
        if has(Mode::DcCapacityFixed) {
            let [t, c, f] = self.fixed_unitary.unwrap_or([0.0; 3]);
            row.capacity_fixed = Some(dc_capacity_fixed(&cfg, &adaptive_unitary(t, c, f)?)?);
        }
        if has(Mode::DcCapacity) || has(Mode::DcCapacityFixed) {
            row.classical_limit = Some(CLASSICAL_LIMIT);
        }
        Ok(row)
    }
}

/// Evaluate every point of `spec`, in axis order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.points().par_iter().map(|pt| spec.row(pt)).collect()
}
