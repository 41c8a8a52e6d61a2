//! Monte-Carlo trajectory sampler for the κ and τ tables.
//!
//! Deliberately shares no code with the analytic evaluators: it builds its own
//! rotation, Pauli and Kraus matrices and simulates each run shot by shot on
//! state vectors, sampling Kraus branches and measurement outcomes.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{NoiseConfig, NoiseKind};
use crate::error::{Error, Result};
use crate::protocols::{ChannelConfig, KeyRateResult, Protocol};
use crate::qstates::ProbabilityTable;

type M = [[C; 2]; 2];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn rotation(t: f64, ch: f64, ph: f64) -> M {
    let (s, co) = ((t / 2.0).sin(), (t / 2.0).cos());
    [
        [c(co * ch.cos(), co * ch.sin()), c(s * ph.cos(), s * ph.sin())],
        [c(-s * ph.cos(), s * ph.sin()), c(co * ch.cos(), -co * ch.sin())],
    ]
}

fn mul(a: &M, b: &M) -> M {
    let mut o = [[c(0., 0.); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    o
}

fn pauli(k: usize) -> M {
    let (z, o) = (c(0., 0.), c(1., 0.));
    match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, c(0., -1.)], [c(0., 1.), z]],
        _ => [[o, z], [z, -o]],
    }
}

// encoding Paulis: I, Z, X, ZX
fn encoding(xy: usize) -> M {
    match xy {
        0 => pauli(0),
        1 => pauli(3),
        2 => pauli(1),
        _ => mul(&pauli(3), &pauli(1)),
    }
}

#[derive(Clone)]
enum Leg {
    Pauli([f64; 4]),
    Kraus(Vec<M>),
}

fn leg(cfg: &NoiseConfig) -> Leg {
    let p = cfg.p;
    let a = cfg.alpha.unwrap_or(0.0);
    let two = |k: usize, q: f64| {
        let mut w = [0.0; 4];
        w[0] = 1.0 - q;
        w[k] = q;
        w
    };
    match cfg.kind {
        NoiseKind::BitFlip => Leg::Pauli(two(1, p)),
        NoiseKind::BitPhaseFlip => Leg::Pauli(two(2, p)),
        NoiseKind::PhaseFlip => Leg::Pauli(two(3, p)),
        NoiseKind::Depolarizing => Leg::Pauli([1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p]),
        NoiseKind::GeneralPauli => Leg::Pauli(cfg.pauli_probs.unwrap_or([1.0, 0.0, 0.0, 0.0])),
        NoiseKind::NmBitFlip | NoiseKind::NmPhaseFlip | NoiseKind::NmBitPhaseFlip => {
            let k = match cfg.kind {
                NoiseKind::NmBitFlip => 1,
                NoiseKind::NmBitPhaseFlip => 2,
                _ => 3,
            };
            // flip probability (1 + α(1−p)) p
            Leg::Pauli(two(k, p + a * p * (1.0 - p)))
        }
        NoiseKind::AmplitudeDamping => {
            let (z, o) = (c(0., 0.), c(1., 0.));
            Leg::Kraus(vec![[[o, z], [z, c((1.0 - p).sqrt(), 0.)]], [[z, c(p.sqrt(), 0.)], [z, z]]])
        }
    }
}

#[derive(Clone)]
enum Action {
    Unitary(M),
    Kraus(Vec<M>),
}

struct Noise {
    fwd: Leg,
    bwd: Leg,
    mu: f64,
}

fn pick(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

impl Noise {
    fn sample(&self, rng: &mut ChaCha8Rng) -> (Action, Action) {
        let f_idx;
        let f = match &self.fwd {
            Leg::Pauli(w) => {
                f_idx = Some(pick(w, rng));
                Action::Unitary(pauli(f_idx.unwrap()))
            }
            Leg::Kraus(k) => {
                f_idx = None;
                Action::Kraus(k.clone())
            }
        };
        let b = match (&self.bwd, f_idx) {
            (Leg::Pauli(_), Some(i)) if self.mu > 0.0 && rng.gen::<f64>() < self.mu => Action::Unitary(pauli(i)),
            (Leg::Pauli(w), _) => Action::Unitary(pauli(pick(w, rng))),
            (Leg::Kraus(k), _) => Action::Kraus(k.clone()),
        };
        (f, b)
    }
}

fn apply_op(psi: &[C], m: &M, q: usize, n: usize) -> Vec<C> {
    let stride = 1 << (n - 1 - q);
    let mut out = psi.to_vec();
    for base in 0..psi.len() {
        if base & stride == 0 {
            let (a, b) = (psi[base], psi[base | stride]);
            out[base] = m[0][0] * a + m[0][1] * b;
            out[base | stride] = m[1][0] * a + m[1][1] * b;
        }
    }
    out
}

fn norm2(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn act(psi: Vec<C>, a: &Action, q: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<C> {
    match a {
        Action::Unitary(m) => apply_op(&psi, m, q, n),
        Action::Kraus(ks) => {
            let branches: Vec<Vec<C>> = ks.iter().map(|k| apply_op(&psi, k, q, n)).collect();
            let w: Vec<f64> = branches.iter().map(|b| norm2(b)).collect();
            let k = pick(&w, rng);
            let s = w[k].sqrt();
            branches[k].iter().map(|z| z / s).collect()
        }
    }
}

fn measure(psi: &[C], basis: &[Vec<C>], rng: &mut ChaCha8Rng) -> usize {
    let w: Vec<f64> = basis
        .iter()
        .map(|b| b.iter().zip(psi).map(|(x, y)| x.conj() * y).sum::<C>().norm_sqr())
        .collect();
    pick(&w, rng)
}

fn vec2(m: &M, v: [C; 2]) -> Vec<C> {
    vec![m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn comp(k: usize) -> [C; 2] {
    if k == 0 {
        [c(1., 0.), c(0., 0.)]
    } else {
        [c(0., 0.), c(1., 0.)]
    }
}

fn fourier(k: usize) -> [C; 2] {
    let s = FRAC_1_SQRT_2;
    [c(s, 0.), c(if k == 0 { s } else { -s }, 0.)]
}

fn phi_plus() -> Vec<C> {
    let s = FRAC_1_SQRT_2;
    vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    pub alice_arity: usize,
    pub bob_arity: usize,
    pub counts: Vec<u64>,
    pub shots: u64,
}

impl SampledTable {
    /// Largest |frequency − p| in units of the binomial standard error.
    pub fn max_z(&self, analytic: &ProbabilityTable) -> f64 {
        let n = self.shots as f64;
        let mut worst: f64 = 0.0;
        for (k, &cnt) in self.counts.iter().enumerate() {
            let p = analytic.weights()[k];
            let f = cnt as f64 / n;
            let se = (p * (1.0 - p) / n).sqrt();
            let z = if se > 0.0 {
                (f - p).abs() / se
            } else if (f - p).abs() < 1e-15 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledRun {
    pub kappa: Vec<SampledTable>,
    pub tau: Vec<SampledTable>,
}

impl SampledRun {
    /// Worst z-score over every table entry against the analytic result.
    pub fn max_z(&self, analytic: &KeyRateResult) -> f64 {
        let k = self.kappa.iter().zip(&analytic.kappa).map(|(s, a)| s.max_z(a));
        let t = self.tau.iter().zip(&analytic.tau).map(|(s, a)| s.max_z(a));
        k.chain(t).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy)]
enum Job {
    SdcKey,
    SdcTest,
    Lm05Key(usize),
    Lm05Test(usize),
    Bb84Key(bool),
    Bb84Test(bool),
}

fn run_job(job: Job, noise: &Noise, w: &M, shots: u64, seed: u64) -> SampledTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (aa, ba) = match job {
        Job::SdcKey | Job::SdcTest => (4, 4),
        _ => (2, 2),
    };
    let mut counts = vec![0u64; aa * ba];
    let rot = |v: [C; 2]| vec2(w, v);
    let chi: Vec<Vec<C>> = (0..4)
        .map(|ij| {
            let (i, j) = (ij >> 1, ij & 1);
            let mut b = vec![c(0., 0.); 4];
            for l in 0..2usize {
                let sgn = if l == 1 && j == 1 { -1.0 } else { 1.0 };
                b[2 * l + (l ^ i)] = c(sgn * FRAC_1_SQRT_2, 0.);
            }
            apply_op(&b, w, 1, 2)
        })
        .collect();
    let prep = |theta: usize, k: usize| if theta == 0 { comp(k) } else { fourier(k) };
    for _ in 0..shots {
        let (f, b) = noise.sample(&mut rng);
        match job {
            Job::SdcKey => {
                let xy = rng.gen_range(0..4);
                let mut psi = act(phi_plus(), &f, 1, 2, &mut rng);
                psi = apply_op(&psi, &mul(w, &encoding(xy)), 1, 2);
                psi = act(psi, &b, 1, 2, &mut rng);
                let ij = measure(&psi, &chi, &mut rng);
                counts[ij * 4 + xy] += 1;
            }
            Job::SdcTest => {
                let psi = act(phi_plus(), &f, 1, 2, &mut rng);
                let w2: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
                let ix = pick(&w2, &mut rng);
                let (i, x) = (ix >> 1, ix & 1);
                let y = rng.gen_range(0..2);
                let s = act(rot(fourier(y)), &b, 0, 1, &mut rng);
                let j = measure(&s, &[rot(fourier(0)), rot(fourier(1))], &mut rng);
                counts[(2 * i + j) * 4 + 2 * x + y] += 1;
            }
            Job::Lm05Key(theta) => {
                let i = rng.gen_range(0..2);
                let xy = rng.gen_range(0..4);
                let mut s = act(prep(theta, i).to_vec(), &f, 0, 1, &mut rng);
                s = apply_op(&s, &mul(w, &encoding(xy)), 0, 1);
                s = act(s, &b, 0, 1, &mut rng);
                let o = measure(&s, &[rot(prep(theta, 0)), rot(prep(theta, 1))], &mut rng);
                let bob = if theta == 0 { xy >> 1 } else { xy & 1 };
                counts[(i ^ o) * 2 + bob] += 1;
            }
            Job::Lm05Test(theta) => {
                let x = rng.gen_range(0..2);
                let s = act(rot(prep(1 - theta, x)), &b, 0, 1, &mut rng);
                let j = measure(&s, &[rot(prep(1 - theta, 0)), rot(prep(1 - theta, 1))], &mut rng);
                counts[j * 2 + x] += 1;
            }
            Job::Bb84Key(forward) | Job::Bb84Test(forward) => {
                let basis = if matches!(job, Job::Bb84Key(_)) { 0 } else { 1 };
                let i = rng.gen_range(0..2);
                let a = if forward { &f } else { &b };
                let s = act(rot(prep(basis, i)), a, 0, 1, &mut rng);
                let x = measure(&s, &[rot(prep(basis, 0)), rot(prep(basis, 1))], &mut rng);
                counts[2 * i + x] += 1;
            }
        }
    }
    SampledTable { alice_arity: aa, bob_arity: ba, counts, shots }
}

/// Sample every κ and τ table of `protocol` at W(θ, χ, φ); `shots` per table.
pub fn sample_tables(
    protocol: Protocol,
    cfg: &ChannelConfig,
    angles: [f64; 3],
    shots: u64,
    seed: u64,
) -> Result<SampledRun> {
    cfg.validate()?;
    if cfg.correlation_mu > 0.0 && protocol == Protocol::Bb84TwoWay {
        return Err(Error::UnsupportedCorrelation("two-way BB84 with correlated legs".into()));
    }
    let noise = Noise { fwd: leg(&cfg.forward), bwd: leg(&cfg.backward), mu: cfg.correlation_mu };
    let w = rotation(angles[0], angles[1], angles[2]);
    let (kjobs, tjobs): (Vec<Job>, Vec<Job>) = match protocol {
        Protocol::Sdc => (vec![Job::SdcKey], vec![Job::SdcTest]),
        Protocol::Lm05 => (vec![Job::Lm05Key(0), Job::Lm05Key(1)], vec![Job::Lm05Test(0), Job::Lm05Test(1)]),
        Protocol::Bb84TwoWay => {
            (vec![Job::Bb84Key(true), Job::Bb84Key(false)], vec![Job::Bb84Test(true), Job::Bb84Test(false)])
        }
    };
    let nk = kjobs.len();
    let all: Vec<Job> = kjobs.into_iter().chain(tjobs).collect();
    let mut tables: Vec<SampledTable> = all
        .par_iter()
        .enumerate()
        .map(|(k, &job)| run_job(job, &noise, &w, shots, seed.wrapping_mul(0x9E37_79B9).wrapping_add(k as u64)))
        .collect();
    let tau = tables.split_off(nk);
    Ok(SampledRun { kappa: tables, tau })
}
