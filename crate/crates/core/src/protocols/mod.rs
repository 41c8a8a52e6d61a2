//! Key-run (κ) and test-run (τ) statistics and the raw key-rate bound for each protocol.

mod bb84;
mod gamma;
mod lm05;
mod sdc;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bb84::{bb84_oneway_evaluate, bb84_twoway_evaluate, Bb84OneWay, Bb84TwoWay};
pub use gamma::{
    bb84_measurements, gamma_overlap, lm05_measurements, sdc_measurements, GammaConstants, BB84_GAMMA,
    LM05_GAMMA, SDC_GAMMA,
};
pub use lm05::{lm05_evaluate, lm05_operational_kappa, lm05_purified_state, Lm05};
pub use sdc::{sdc_evaluate, sdc_purified_kappa, Sdc};

use crate::channels::{correlated_branches, make_channel, NoiseConfig};
use crate::encoding::AdaptiveUnitary;
use crate::error::{Error, Result};
use crate::numkernel::M2;
use crate::qstates::ProbabilityTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "sdc")]
    Sdc,
    #[serde(rename = "lm05")]
    Lm05,
    #[serde(rename = "bb84_2way", alias = "bb84")]
    Bb84TwoWay,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Sdc, Protocol::Lm05, Protocol::Bb84TwoWay];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Sdc => "sdc",
            Protocol::Lm05 => "lm05",
            Protocol::Bb84TwoWay => "bb84_2way",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdc" => Ok(Protocol::Sdc),
            "lm05" => Ok(Protocol::Lm05),
            "bb84" | "bb84_2way" => Ok(Protocol::Bb84TwoWay),
            _ => Err(Error::BadParams(format!("unknown protocol '{s}'"))),
        }
    }
}

/// Forward and backward legs plus the forward/backward correlation degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub forward: NoiseConfig,
    pub backward: NoiseConfig,
    pub correlation_mu: f64,
}

impl ChannelConfig {
    /// Same noise on both legs; `noise.mu` becomes the leg correlation.
    pub fn symmetric(noise: NoiseConfig) -> Self {
        let mu = noise.mu;
        let leg = noise.with_mu(0.0);
        Self { forward: leg.clone(), backward: leg, correlation_mu: mu }
    }

    /// Noiseless forward leg, `noise` on the backward leg.
    pub fn backward_only(noise: NoiseConfig) -> Self {
        Self { forward: NoiseConfig::identity(), backward: noise.with_mu(0.0), correlation_mu: 0.0 }
    }

    pub fn noiseless() -> Self {
        Self::symmetric(NoiseConfig::identity())
    }

    pub fn validate(&self) -> Result<()> {
        self.forward.validate()?;
        self.backward.validate()?;
        if self.forward.mu != 0.0 || self.backward.mu != 0.0 {
            return Err(Error::BadParams("per-leg mu must be 0; use correlation_mu".into()));
        }
        let mu = self.correlation_mu;
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::BadParams(format!("correlation mu = {mu} outside [0, 1]")));
        }
        if mu > 0.0 {
            for leg in [&self.forward, &self.backward] {
                if !leg.kind.is_pauli() {
                    return Err(Error::UnsupportedCorrelation(leg.kind.to_string()));
                }
            }
            if self.forward != self.backward {
                return Err(Error::BadParams("correlated legs must share kind and parameters".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn joint_branches(&self) -> Result<Vec<JointBranch>> {
        self.validate()?;
        if self.correlation_mu == 0.0 {
            return Ok(vec![JointBranch {
                weight: 1.0,
                forward: make_channel(&self.forward)?.ops(),
                backward: make_channel(&self.backward)?.ops(),
            }]);
        }
        let cfg = self.forward.clone().with_mu(self.correlation_mu);
        let mut out = Vec::new();
        for b in correlated_branches(&cfg)? {
            for (q, op) in &b.backward_dist {
                out.push(JointBranch {
                    weight: b.forward_weight * q,
                    forward: vec![b.forward_op.to_m2()],
                    backward: vec![op.to_m2()],
                });
            }
        }
        Ok(out)
    }
}

/// One term of the forward/backward noise mixture: with probability `weight`
/// the legs act with the given Kraus lists.
#[derive(Debug, Clone)]
pub(crate) struct JointBranch {
    pub weight: f64,
    pub forward: Vec<M2>,
    pub backward: Vec<M2>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyRateResult {
    pub raw_rate: f64,
    pub gamma_term: f64,
    pub key_entropy: f64,
    pub test_entropy: f64,
    #[serde(skip)]
    pub kappa: Vec<ProbabilityTable>,
    #[serde(skip)]
    pub tau: Vec<ProbabilityTable>,
    #[serde(skip)]
    pub unitary: AdaptiveUnitary,
}

/// A protocol bound to a channel configuration, with W-independent parts precomputed.
pub trait RateEvaluator: Send + Sync {
    fn evaluate(&self, w: &AdaptiveUnitary) -> KeyRateResult;

    fn raw_rate(&self, w: &AdaptiveUnitary) -> f64 {
        self.evaluate(w).raw_rate
    }
}

pub fn prepare(protocol: Protocol, cfg: &ChannelConfig) -> Result<Box<dyn RateEvaluator>> {
    Ok(match protocol {
        Protocol::Sdc => Box::new(Sdc::new(cfg)?),
        Protocol::Lm05 => Box::new(Lm05::new(cfg)?),
        Protocol::Bb84TwoWay => Box::new(Bb84TwoWay::new(cfg)?),
    })
}

// Flat tables are alice-major; H(B|A) = H(AB) − H(A).
pub(crate) fn cond_entropy_flat(t: &[f64], bob_arity: usize) -> f64 {
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    let joint: f64 = t.iter().map(|&p| h(p)).sum();
    let marg: f64 = t.chunks(bob_arity).map(|row| h(row.iter().sum())).sum();
    (joint - marg).max(0.0)
}

pub(crate) fn table(alice: usize, bob: usize, flat: &[f64]) -> ProbabilityTable {
    ProbabilityTable::new(alice, bob, flat.to_vec()).expect("evaluator tables are normalized")
}
