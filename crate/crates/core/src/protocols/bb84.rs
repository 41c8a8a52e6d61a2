use super::{cond_entropy_flat, table, ChannelConfig, KeyRateResult, RateEvaluator, BB84_GAMMA};
use crate::channels::{make_channel, NoiseConfig};
use crate::encoding::AdaptiveUnitary;
use crate::error::{Error, Result};
use crate::numkernel::{m2_dagger, m2_mul, M2};

/// One prepare-and-measure BB84 run through a single channel use.
pub struct Bb84OneWay {
    ops: Vec<M2>,
}

impl Bb84OneWay {
    pub fn new(channel: &NoiseConfig) -> Result<Self> {
        if channel.mu != 0.0 {
            return Err(Error::UnsupportedCorrelation("one-way BB84".into()));
        }
        Ok(Self { ops: make_channel(channel)?.ops() })
    }

    /// κ (computational) and τ (Fourier) tables, index 2i + x.
    pub(crate) fn tables(&self, w: &AdaptiveUnitary) -> ([f64; 4], [f64; 4]) {
        let wm = w.m2();
        let wd = m2_dagger(wm);
        let mut kap = [0.0; 4];
        let mut tau = [0.0; 4];
        let pm = |k: usize| if k == 0 { 1.0 } else { -1.0 };
        for k in &self.ops {
            let a = m2_mul(&wd, &m2_mul(k, wm));
            for i in 0..2 {
                for x in 0..2 {
                    kap[2 * i + x] += 0.5 * a[x][i].norm_sqr();
                    let f = (a[0][0] + a[0][1] * pm(i) + (a[1][0] + a[1][1] * pm(i)) * pm(x)) * 0.5;
                    tau[2 * i + x] += 0.5 * f.norm_sqr();
                }
            }
        }
        (kap, tau)
    }
}

impl RateEvaluator for Bb84OneWay {
    fn evaluate(&self, w: &AdaptiveUnitary) -> KeyRateResult {
        let (kap, tau) = self.tables(w);
        let key_entropy = cond_entropy_flat(&kap, 2);
        let test_entropy = cond_entropy_flat(&tau, 2);
        let gamma_term = (1.0 / BB84_GAMMA).log2();
        KeyRateResult {
            raw_rate: gamma_term - key_entropy - test_entropy,
            gamma_term,
            key_entropy,
            test_entropy,
            kappa: vec![table(2, 2, &kap)],
            tau: vec![table(2, 2, &tau)],
            unitary: w.clone(),
        }
    }

    fn raw_rate(&self, w: &AdaptiveUnitary) -> f64 {
        let (kap, tau) = self.tables(w);
        (1.0 / BB84_GAMMA).log2() - cond_entropy_flat(&kap, 2) - cond_entropy_flat(&tau, 2)
    }
}

pub fn bb84_oneway_evaluate(channel: &NoiseConfig, w: &AdaptiveUnitary) -> Result<KeyRateResult> {
    Ok(Bb84OneWay::new(channel)?.evaluate(w))
}

/// Two consecutive BB84 runs, forward and backward; each direction is clipped at
/// zero before summing. As a [`RateEvaluator`] both directions share one W.
pub struct Bb84TwoWay {
    forward: Bb84OneWay,
    backward: Bb84OneWay,
}

impl Bb84TwoWay {
    pub fn new(cfg: &ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.correlation_mu > 0.0 {
            return Err(Error::UnsupportedCorrelation("two-way BB84 with correlated legs".into()));
        }
        Ok(Self { forward: Bb84OneWay::new(&cfg.forward)?, backward: Bb84OneWay::new(&cfg.backward)? })
    }

    pub fn evaluate_pair(&self, wf: &AdaptiveUnitary, wb: &AdaptiveUnitary) -> KeyRateResult {
        let f = self.forward.evaluate(wf);
        let b = self.backward.evaluate(wb);
        let mut out = KeyRateResult {
            raw_rate: 0.0,
            gamma_term: 0.0,
            key_entropy: 0.0,
            test_entropy: 0.0,
            kappa: vec![f.kappa[0].clone(), b.kappa[0].clone()],
            tau: vec![f.tau[0].clone(), b.tau[0].clone()],
            unitary: wf.clone(),
        };
        // a clipped direction contributes nothing to any term
        for d in [&f, &b] {
            if d.raw_rate > 0.0 {
                out.raw_rate += d.raw_rate;
                out.gamma_term += d.gamma_term;
                out.key_entropy += d.key_entropy;
                out.test_entropy += d.test_entropy;
            }
        }
        out
    }
}

impl RateEvaluator for Bb84TwoWay {
    fn evaluate(&self, w: &AdaptiveUnitary) -> KeyRateResult {
        self.evaluate_pair(w, w)
    }

    fn raw_rate(&self, w: &AdaptiveUnitary) -> f64 {
        self.forward.raw_rate(w).max(0.0) + self.backward.raw_rate(w).max(0.0)
    }
}

pub fn bb84_twoway_evaluate(
    cfg: &ChannelConfig,
    wf: &AdaptiveUnitary,
    wb: &AdaptiveUnitary,
) -> Result<KeyRateResult> {
    Ok(Bb84TwoWay::new(cfg)?.evaluate_pair(wf, wb))
}
