//! Single-qubit noise models as Kraus lists, plus the correlated Pauli branch law.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{dagger, embed, ComplexMatrix, DensityMatrix, C64, I2, M2, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    Depolarizing,
    AmplitudeDamping,
    GeneralPauli,
    NmBitFlip,
    NmPhaseFlip,
    NmBitPhaseFlip,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 9] = [
        NoiseKind::BitFlip,
        NoiseKind::PhaseFlip,
        NoiseKind::BitPhaseFlip,
        NoiseKind::Depolarizing,
        NoiseKind::AmplitudeDamping,
        NoiseKind::GeneralPauli,
        NoiseKind::NmBitFlip,
        NoiseKind::NmPhaseFlip,
        NoiseKind::NmBitPhaseFlip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::BitFlip => "bit_flip",
            NoiseKind::PhaseFlip => "phase_flip",
            NoiseKind::BitPhaseFlip => "bit_phase_flip",
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::AmplitudeDamping => "amplitude_damping",
            NoiseKind::GeneralPauli => "general_pauli",
            NoiseKind::NmBitFlip => "nm_bit_flip",
            NoiseKind::NmPhaseFlip => "nm_phase_flip",
            NoiseKind::NmBitPhaseFlip => "nm_bit_phase_flip",
        }
    }

    pub fn is_pauli(self) -> bool {
        self != NoiseKind::AmplitudeDamping
    }

    pub fn is_non_markovian(self) -> bool {
        matches!(self, NoiseKind::NmBitFlip | NoiseKind::NmPhaseFlip | NoiseKind::NmBitPhaseFlip)
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::BadParams(format!("unknown channel kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    #[serde(default)]
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli_probs: Option<[f64; 4]>,
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

impl NoiseConfig {
    pub fn new(kind: NoiseKind, p: f64) -> Self {
        Self { kind, p, alpha: None, mu: 0.0, pauli_probs: None }
    }

    pub fn identity() -> Self {
        Self::new(NoiseKind::BitFlip, 0.0)
    }

    pub fn non_markovian(kind: NoiseKind, p: f64, alpha: f64) -> Self {
        Self { alpha: Some(alpha), ..Self::new(kind, p) }
    }

    pub fn general_pauli(probs: [f64; 4]) -> Self {
        Self { pauli_probs: Some(probs), ..Self::new(NoiseKind::GeneralPauli, 0.0) }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !in_unit(self.p) {
            return Err(Error::BadParams(format!("p = {} outside [0, 1]", self.p)));
        }
        match (self.kind.is_non_markovian(), self.alpha) {
            (false, Some(_)) => {
                return Err(Error::BadParams(format!("alpha given for {}", self.kind)));
            }
            (true, Some(a)) if !in_unit(a) => {
                return Err(Error::BadParams(format!("alpha = {a} outside [0, 1]")));
            }
            _ => {}
        }
        match (self.kind, self.pauli_probs) {
            (NoiseKind::GeneralPauli, None) => {
                return Err(Error::BadParams("general_pauli needs pauli_probs".into()));
            }
            (NoiseKind::GeneralPauli, Some(pr)) => {
                if pr.iter().any(|&x| !in_unit(x)) || (pr.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(Error::BadParams(format!("pauli_probs {pr:?} not a distribution")));
                }
            }
            (k, Some(_)) => return Err(Error::BadParams(format!("pauli_probs given for {k}"))),
            _ => {}
        }
        if !in_unit(self.mu) {
            return Err(Error::BadParams(format!("mu = {} outside [0, 1]", self.mu)));
        }
        if self.mu > 0.0 && !self.kind.is_pauli() {
            return Err(Error::UnsupportedCorrelation(self.kind.to_string()));
        }
        Ok(())
    }

    /// Probabilities on (I, X, Y, Z) for Pauli-family kinds.
    pub fn pauli_weights(&self) -> Option<[f64; 4]> {
        let p = self.p;
        let a = self.alpha.unwrap_or(0.0);
        let (n0, n1) = ((1.0 - a * p) * (1.0 - p), (1.0 + a * (1.0 - p)) * p);
        Some(match self.kind {
            NoiseKind::BitFlip => [1.0 - p, p, 0.0, 0.0],
            NoiseKind::PhaseFlip => [1.0 - p, 0.0, 0.0, p],
            NoiseKind::BitPhaseFlip => [1.0 - p, 0.0, p, 0.0],
            NoiseKind::Depolarizing => [1.0 - 3.0 * p / 4.0, p / 4.0, p / 4.0, p / 4.0],
            NoiseKind::GeneralPauli => self.pauli_probs?,
            NoiseKind::NmBitFlip => [n0, n1, 0.0, 0.0],
            NoiseKind::NmPhaseFlip => [n0, 0.0, 0.0, n1],
            NoiseKind::NmBitPhaseFlip => [n0, 0.0, n1, 0.0],
            NoiseKind::AmplitudeDamping => return None,
        })
    }
}

pub(crate) fn pauli_m2(k: usize) -> M2 {
    let i = C64::new(0.0, 1.0);
    match k {
        0 => I2,
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -i], [i, ZERO]],
        _ => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

fn scale_m2(m: &M2, s: f64) -> M2 {
    let s = C64::new(s, 0.0);
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<ComplexMatrix>,
    label: Option<NoiseKind>,
    params: Option<NoiseConfig>,
}

impl KrausChannel {
    /// A hand-built channel; completeness is not enforced here, see [`validate_cptp`].
    pub fn custom(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() || kraus.iter().any(|k| k.rows() != 2 || k.cols() != 2) {
            return Err(Error::BadParams("Kraus operators must be a nonempty list of 2x2 matrices".into()));
        }
        Ok(Self { kraus, label: None, params: None })
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> Option<NoiseKind> {
        self.label
    }

    pub fn params(&self) -> Option<&NoiseConfig> {
        self.params.as_ref()
    }

    pub(crate) fn ops(&self) -> Vec<M2> {
        self.kraus.iter().map(|k| k.to_m2()).collect()
    }
}

pub fn make_channel(cfg: &NoiseConfig) -> Result<KrausChannel> {
    cfg.validate()?;
    let ops: Vec<M2> = match cfg.pauli_weights() {
        Some(w) => w
            .iter()
            .enumerate()
            .filter(|(_, &wk)| wk > 0.0)
            .map(|(k, &wk)| scale_m2(&pauli_m2(k), wk.sqrt()))
            .collect(),
        None => {
            let p = cfg.p;
            let k1 = [[ONE, ZERO], [ZERO, C64::new((1.0 - p).sqrt(), 0.0)]];
            let k2 = [[ZERO, C64::new(p.sqrt(), 0.0)], [ZERO, ZERO]];
            if p > 0.0 {
                vec![k1, k2]
            } else {
                vec![k1]
            }
        }
    };
    Ok(KrausChannel {
        kraus: ops.iter().map(ComplexMatrix::from_m2).collect(),
        label: Some(cfg.kind),
        params: Some(cfg.clone()),
    })
}

pub fn validate_cptp(ch: &KrausChannel) -> f64 {
    let mut s = ComplexMatrix::zeros(2, 2);
    for k in &ch.kraus {
        s = &s + &dagger(k).matmul(k);
    }
    s.max_abs_diff(&ComplexMatrix::identity(2))
}

pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, qubit: usize) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    if qubit >= n {
        return Err(Error::BadSubsystem(format!("qubit {qubit} of {n}")));
    }
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for k in &ch.kraus {
        out = &out + &rho.matrix().conjugate_by(&embed(k, qubit, n));
    }
    Ok(DensityMatrix::from_trusted(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTrajectoryBranch {
    pub forward_weight: f64,
    pub forward_op: ComplexMatrix,
    pub backward_dist: Vec<(f64, ComplexMatrix)>,
}

/// Branches of the correlated Pauli law p_ij = (1−μ) p_i p_j + μ p_i δ_ij.
pub fn correlated_branches(cfg: &NoiseConfig) -> Result<Vec<PauliTrajectoryBranch>> {
    if !cfg.kind.is_pauli() {
        return Err(Error::UnsupportedCorrelation(cfg.kind.to_string()));
    }
    cfg.validate()?;
    let w = cfg.pauli_weights().expect("Pauli family");
    let mu = cfg.mu;
    Ok((0..4)
        .filter(|&i| w[i] > 0.0)
        .map(|i| PauliTrajectoryBranch {
            forward_weight: w[i],
            forward_op: ComplexMatrix::from_m2(&pauli_m2(i)),
            backward_dist: (0..4)
                .map(|j| ((1.0 - mu) * w[j] + if i == j { mu } else { 0.0 }, j))
                .filter(|&(q, _)| q > 0.0)
                .map(|(q, j)| (q, ComplexMatrix::from_m2(&pauli_m2(j))))
                .collect(),
        })
        .collect())
}
