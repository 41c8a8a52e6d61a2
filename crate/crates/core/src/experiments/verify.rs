use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{apply_channel, make_channel, validate_cptp, NoiseConfig, NoiseKind};
use crate::encoding::{purification_residual, test_purification_residual, AdaptiveUnitary};
use crate::error::Result;
use crate::numkernel::{ComplexMatrix, DensityMatrix};
use crate::optimize::{adaptive_rate, conventional_rate, OptimizerSettings};
use crate::oracle::sample_tables;
use crate::protocols::{
    bb84_measurements, gamma_overlap, lm05_measurements, prepare, sdc_measurements, ChannelConfig,
    GammaConstants, Protocol,
};
use crate::qstates::{bell_state, rotated_bell, Party};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &str, value: Result<f64>, tolerance: f64) -> CheckResult {
    let value = value.unwrap_or(f64::INFINITY);
    CheckResult { name: name.into(), passed: value <= tolerance, value, tolerance }
}

fn random_unitary(rng: &mut ChaCha8Rng) -> AdaptiveUnitary {
    AdaptiveUnitary::clamped(rng.gen_range(0.0..PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..PI))
}

fn random_noise(rng: &mut ChaCha8Rng) -> NoiseConfig {
    let kind = NoiseKind::ALL[rng.gen_range(0..NoiseKind::ALL.len())];
    let p = rng.gen_range(0.0..1.0);
    match kind {
        NoiseKind::GeneralPauli => {
            let mut w = [0.0; 4].map(|_: f64| rng.gen_range(0.0..1.0));
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            w[0] = 1.0 - w[1] - w[2] - w[3];
            NoiseConfig::general_pauli(w)
        }
        k if k.is_non_markovian() => NoiseConfig::non_markovian(k, p, rng.gen_range(0.0..1.0)),
        k => NoiseConfig::new(k, p),
    }
}

/// φ+ with random channels on both halves.
fn random_bell_like(rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let mut rho = bell_state(0, 0).density();
    for q in 0..2 {
        rho = apply_channel(&rho, &make_channel(&random_noise(rng))?, q)?;
    }
    Ok(rho)
}

fn gamma_deviation(g: &GammaConstants, rng: &mut ChaCha8Rng) -> Result<[f64; 3]> {
    let mut worst = [0.0f64; 3];
    let mut ws = vec![AdaptiveUnitary::identity()];
    ws.extend((0..4).map(|_| random_unitary(rng)));
    for w in &ws {
        let (k, t) = sdc_measurements(w);
        worst[0] = worst[0].max((gamma_overlap(&k, &t)? - g.sdc).abs());
        for theta in 0..2 {
            let (k, t) = lm05_measurements(w, theta);
            worst[1] = worst[1].max((gamma_overlap(&k, &t)? - g.lm05).abs());
        }
        let (k, t) = bb84_measurements(w);
        worst[2] = worst[2].max((gamma_overlap(&k, &t)? - g.bb84).abs());
    }
    Ok(worst)
}

fn noiseless_rates() -> Result<f64> {
    let opts = OptimizerSettings { grid_n: 5, refine_tol: 1e-7 };
    let cfg = ChannelConfig::noiseless();
    let mut worst: f64 = 0.0;
    for (pr, want) in [(Protocol::Sdc, 2.0), (Protocol::Lm05, 1.0), (Protocol::Bb84TwoWay, 2.0)] {
        worst = worst.max((conventional_rate(pr, &cfg)? - want).abs());
        worst = worst.max((adaptive_rate(pr, &cfg, &opts)?.0 - want).abs());
    }
    Ok(worst)
}

fn purification(rng: &mut ChaCha8Rng, draws: usize) -> Result<(f64, f64)> {
    let (mut a, mut b): (f64, f64) = (0.0, 0.0);
    for _ in 0..draws {
        let rho = random_bell_like(rng)?;
        let w = random_unitary(rng);
        let (x, y) = (rng.gen_range(0..2u8), rng.gen_range(0..2u8));
        a = a.max(purification_residual(&rho, &w, x, y)?);
        b = b.max(test_purification_residual(&rho, &w)?);
    }
    Ok((a, b))
}

fn completeness(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w = random_unitary(rng);
        for side in [Party::Alice, Party::Bob] {
            let mut sum = ComplexMatrix::zeros(4, 4);
            for k in 0..4u8 {
                sum = &sum + &rotated_bell(&w, k >> 1, k & 1, side).projector();
            }
            worst = worst.max(sum.max_abs_diff(&ComplexMatrix::identity(4)));
        }
    }
    worst
}

fn delta_correlation(rng: &mut ChaCha8Rng) -> Result<f64> {
    let cfg = ChannelConfig::noiseless();
    let sdc = prepare(Protocol::Sdc, &cfg)?;
    let lm = prepare(Protocol::Lm05, &cfg)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w = random_unitary(rng);
        let t = &sdc.evaluate(&w).kappa[0];
        for a in 0..4 {
            for b in 0..4 {
                let want = if a == b { 0.25 } else { 0.0 };
                worst = worst.max((t.weight(a, b) - want).abs());
            }
        }
        for t in &lm.evaluate(&w).kappa {
            for a in 0..2 {
                for b in 0..2 {
                    let want = if a == b { 0.5 } else { 0.0 };
                    worst = worst.max((t.weight(a, b) - want).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn cptp_grid() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for kind in NoiseKind::ALL {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let cfgs: Vec<NoiseConfig> = match kind {
                NoiseKind::GeneralPauli => vec![NoiseConfig::general_pauli([1.0 - p, p / 2.0, p / 4.0, p / 4.0])],
                k if k.is_non_markovian() => {
                    [0.0, 0.5, 1.0].iter().map(|&a| NoiseConfig::non_markovian(k, p, a)).collect()
                }
                k => vec![NoiseConfig::new(k, p)],
            };
            for c in cfgs {
                worst = worst.max(validate_cptp(&make_channel(&c)?));
            }
        }
    }
    Ok(worst)
}

fn depolarizing_covariance() -> Result<f64> {
    let cfg = ChannelConfig::symmetric(NoiseConfig::new(NoiseKind::Depolarizing, 0.3));
    let mut worst: f64 = 0.0;
    for pr in Protocol::ALL {
        let ev = prepare(pr, &cfg)?;
        let base = ev.evaluate(&AdaptiveUnitary::identity());
        for i in 0..125 {
            let ang = [i / 25, (i / 5) % 5, i % 5].map(|k| PI * k as f64 / 4.0);
            let r = ev.evaluate(&AdaptiveUnitary::clamped(ang[0], ang[1], ang[2]));
            for (a, b) in r.kappa.iter().zip(&base.kappa).chain(r.tau.iter().zip(&base.tau)) {
                worst = worst.max(a.max_abs_diff(b));
            }
        }
    }
    Ok(worst)
}

fn monte_carlo(seed: u64) -> Result<f64> {
    let cases = [
        (Protocol::Sdc, ChannelConfig::symmetric(NoiseConfig::new(NoiseKind::PhaseFlip, 0.2).with_mu(0.5))),
        (Protocol::Lm05, ChannelConfig::symmetric(NoiseConfig::new(NoiseKind::AmplitudeDamping, 0.3))),
        (
            Protocol::Bb84TwoWay,
            ChannelConfig::symmetric(NoiseConfig::non_markovian(NoiseKind::NmBitPhaseFlip, 0.2, 0.7)),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (k, (pr, cfg)) in cases.iter().enumerate() {
        let ang = [0.9, 0.4, 2.1];
        let run = sample_tables(*pr, cfg, ang, 50_000, seed.wrapping_add(k as u64))?;
        let analytic = prepare(*pr, cfg)?.evaluate(&AdaptiveUnitary::clamped(ang[0], ang[1], ang[2]));
        worst = worst.max(run.max_z(&analytic));
    }
    Ok(worst)
}

/// Identity, theorem and oracle checks. `gammas` are the overlap constants the
/// rate bounds assume.
pub fn verify_suite(gammas: &GammaConstants, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    match gamma_deviation(gammas, &mut rng) {
        Ok(g) => {
            for (name, v) in ["gamma_sdc", "gamma_lm05", "gamma_bb84"].iter().zip(g) {
                checks.push(check(name, Ok(v), 1e-12));
            }
        }
        Err(e) => checks.push(check("gamma", Err(e), 1e-12)),
    }
    checks.push(check("noiseless_rates", noiseless_rates(), 1e-9));
    match purification(&mut rng, 100) {
        Ok((a, b)) => {
            checks.push(check("purification_residual", Ok(a), 1e-10));
            checks.push(check("test_purification_residual", Ok(b), 1e-10));
        }
        Err(e) => checks.push(check("purification_residual", Err(e), 1e-10)),
    }
    checks.push(check("rotated_bell_completeness", Ok(completeness(&mut rng)), 1e-12));
    checks.push(check("noiseless_delta_correlation", delta_correlation(&mut rng), 1e-12));
    checks.push(check("cptp_grid", cptp_grid(), 1e-12));
    checks.push(check("depolarizing_w_independence", depolarizing_covariance(), 1e-10));
    checks.push(check("monte_carlo_max_z", monte_carlo(seed), 5.0));
    VerifyReport { passed: checks.iter().all(|c| c.passed), checks }
}
