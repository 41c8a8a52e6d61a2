use std::f64::consts::FRAC_1_SQRT_2;

use super::{cond_entropy_flat, table, ChannelConfig, KeyRateResult, RateEvaluator, SDC_GAMMA};
use crate::channels::{apply_channel, make_channel};
use crate::encoding::{sigma_m2, AdaptiveUnitary};
use crate::error::{Error, Result};
use crate::numkernel::{m2_dagger, m2_mul, project_out, C64, M2, ZERO};
use crate::qstates::{bell_state, rotated_bell, Party, ProbabilityTable};

struct Branch {
    weight: f64,
    // (I⊗K)|φ+> for each forward Kraus operator
    ensemble: Vec<[C64; 4]>,
    backward: Vec<M2>,
    // P(i, x) of the forward state in the computational basis, index 2i + x
    p_ix: [f64; 4],
}

/// Secure dense coding bound to a channel configuration.
pub struct Sdc {
    branches: Vec<Branch>,
}

impl Sdc {
    pub fn new(cfg: &ChannelConfig) -> Result<Self> {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let branches = cfg
            .joint_branches()?
            .into_iter()
            .map(|b| {
                let ensemble: Vec<[C64; 4]> = b
                    .forward
                    .iter()
                    .map(|k| [s * k[0][0], s * k[1][0], s * k[0][1], s * k[1][1]])
                    .collect();
                let mut p_ix = [0.0; 4];
                for psi in &ensemble {
                    for (p, a) in p_ix.iter_mut().zip(psi) {
                        *p += a.norm_sqr();
                    }
                }
                Branch { weight: b.weight, ensemble, backward: b.backward, p_ix }
            })
            .collect();
        Ok(Self { branches })
    }

    /// Flat κ and τ tables, index (2i + j) * 4 + (2x + y).
    pub(crate) fn tables(&self, w: &AdaptiveUnitary) -> ([f64; 16], [f64; 16]) {
        let wm = w.m2();
        let wd = m2_dagger(wm);
        let sig = [0u8, 1, 2, 3].map(|k| sigma_m2(k >> 1, k & 1));
        let mut kap = [0.0; 16];
        let mut tau = [0.0; 16];
        let pm = |k: usize| if k == 0 { 1.0 } else { -1.0 };
        for br in &self.branches {
            for kb in &br.backward {
                // W† K W: the backward operator seen in the rotated frame
                let a = m2_mul(&wd, &m2_mul(kb, wm));
                for (xy, s) in sig.iter().enumerate() {
                    let m = m2_mul(&a, s);
                    for psi in &br.ensemble {
                        let mut v = [ZERO; 4];
                        for h in 0..2 {
                            v[2 * h] = m[0][0] * psi[2 * h] + m[0][1] * psi[2 * h + 1];
                            v[2 * h + 1] = m[1][0] * psi[2 * h] + m[1][1] * psi[2 * h + 1];
                        }
                        for i in 0..2 {
                            for j in 0..2 {
                                let amp = (v[i] + v[2 + (1 ^ i)] * pm(j)) * FRAC_1_SQRT_2;
                                kap[(2 * i + j) * 4 + xy] += 0.25 * br.weight * amp.norm_sqr();
                            }
                        }
                    }
                }
                for y in 0..2 {
                    for j in 0..2 {
                        let amp = (a[0][0] + a[0][1] * pm(y) + (a[1][0] + a[1][1] * pm(y)) * pm(j)) * 0.5;
                        let t = 0.5 * br.weight * amp.norm_sqr();
                        for i in 0..2 {
                            for x in 0..2 {
                                tau[(2 * i + j) * 4 + 2 * x + y] += br.p_ix[2 * i + x] * t;
                            }
                        }
                    }
                }
            }
        }
        (kap, tau)
    }
}

impl RateEvaluator for Sdc {
    fn evaluate(&self, w: &AdaptiveUnitary) -> KeyRateResult {
        let (kap, tau) = self.tables(w);
        let key_entropy = cond_entropy_flat(&kap, 4);
        let test_entropy = cond_entropy_flat(&tau, 4);
        let gamma_term = (1.0 / SDC_GAMMA).log2();
        KeyRateResult {
            raw_rate: gamma_term - key_entropy - test_entropy,
            gamma_term,
            key_entropy,
            test_entropy,
            kappa: vec![table(4, 4, &kap)],
            tau: vec![table(4, 4, &tau)],
            unitary: w.clone(),
        }
    }

    fn raw_rate(&self, w: &AdaptiveUnitary) -> f64 {
        let (kap, tau) = self.tables(w);
        (1.0 / SDC_GAMMA).log2() - cond_entropy_flat(&kap, 4) - cond_entropy_flat(&tau, 4)
    }
}

pub fn sdc_evaluate(cfg: &ChannelConfig, w: &AdaptiveUnitary) -> Result<KeyRateResult> {
    Ok(Sdc::new(cfg)?.evaluate(w))
}

/// κ from the four-qubit picture: W moved onto the ancilla pair, a plain Bell
/// measurement on (X, X'), then the rotated Bell measurement on (A, B).
/// Independent legs only.
pub fn sdc_purified_kappa(cfg: &ChannelConfig, w: &AdaptiveUnitary) -> Result<ProbabilityTable> {
    cfg.validate()?;
    if cfg.correlation_mu != 0.0 {
        return Err(Error::BadParams("purified path covers independent legs only".into()));
    }
    let fwd = make_channel(&cfg.forward)?;
    let bwd = make_channel(&cfg.backward)?;
    let rho_ax = apply_channel(&bell_state(0, 0).density(), &fwd, 1)?;
    let anc = rotated_bell(w, 0, 0, Party::Alice);
    let full = apply_channel(&rho_ax.tensor(&anc.density())?, &bwd, 3)?;
    let mut flat = [0.0; 16];
    for xy in 0..4u8 {
        let (x, y) = (xy >> 1, xy & 1);
        let rho_xy = project_out(full.matrix(), 4, &bell_state(x, y), &[1, 2])?.scale_real(4.0);
        for ij in 0..4u8 {
            let chi = rotated_bell(w, ij >> 1, ij & 1, Party::Alice);
            flat[ij as usize * 4 + xy as usize] = 0.25 * chi.expectation(&rho_xy);
        }
    }
    ProbabilityTable::new(4, 4, flat.to_vec())
}
