//! Noisy dense-coding capacity C = log₂ d_B + S(ρ_A) − min_U S(Λ^b((I⊗U) ρ_AB (I⊗U)†)).

use nalgebra::Matrix4;
use serde::Serialize;

use crate::channels::make_channel;
use crate::encoding::AdaptiveUnitary;
use crate::error::{Error, Result};
use crate::numkernel::{m2_mul, C64, M2, ZERO};
use crate::optimize::{maximize_over_unitary, OptimizerSettings};
use crate::protocols::ChannelConfig;

pub const CLASSICAL_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub capacity: f64,
    #[serde(skip)]
    pub minimizer: AdaptiveUnitary,
    pub entropy_term: f64,
    pub receiver_entropy: f64,
}

fn entropy_of(m: &Matrix4<C64>) -> f64 {
    m.symmetric_eigenvalues()
        .iter()
        .map(|&l| if l > 0.0 { -l * l.log2() } else { 0.0 })
        .sum()
}

struct Prepared {
    ensemble: Vec<[C64; 4]>,
    backward: Vec<M2>,
    receiver_entropy: f64,
}

impl Prepared {
    fn new(cfg: &ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.correlation_mu != 0.0 {
            return Err(Error::BadParams("dense-coding capacity needs independent legs".into()));
        }
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ensemble: Vec<[C64; 4]> = make_channel(&cfg.forward)?
            .ops()
            .iter()
            .map(|k| [s * k[0][0], s * k[1][0], s * k[0][1], s * k[1][1]])
            .collect();
        // ρ_A = tr_B ρ_AB
        let mut ra = [[ZERO; 2]; 2];
        for v in &ensemble {
            for a in 0..2 {
                for b in 0..2 {
                    ra[a][b] += v[2 * a] * v[2 * b].conj() + v[2 * a + 1] * v[2 * b + 1].conj();
                }
            }
        }
        let tr = (ra[0][0].re + ra[1][1].re) / 2.0;
        let det = (ra[0][0] * ra[1][1] - ra[0][1] * ra[1][0]).re;
        let disc = (tr * tr - det).max(0.0).sqrt();
        let h = |l: f64| if l > 0.0 { -l * l.log2() } else { 0.0 };
        let receiver_entropy = h(tr + disc) + h(tr - disc);
        Ok(Self { ensemble, backward: make_channel(&cfg.backward)?.ops(), receiver_entropy })
    }

    fn output_entropy(&self, u: &AdaptiveUnitary) -> f64 {
        let mut rho = Matrix4::<C64>::zeros();
        for kb in &self.backward {
            let m = m2_mul(kb, u.m2());
            for psi in &self.ensemble {
                let mut v = [ZERO; 4];
                for h in 0..2 {
                    v[2 * h] = m[0][0] * psi[2 * h] + m[0][1] * psi[2 * h + 1];
                    v[2 * h + 1] = m[1][0] * psi[2 * h] + m[1][1] * psi[2 * h + 1];
                }
                for r in 0..4 {
                    for c in 0..4 {
                        rho[(r, c)] += v[r] * v[c].conj();
                    }
                }
            }
        }
        entropy_of(&rho)
    }
}

pub fn dc_capacity(cfg: &ChannelConfig, opts: &OptimizerSettings) -> Result<CapacityResult> {
    opts.validate()?;
    let prep = Prepared::new(cfg)?;
    let res = maximize_over_unitary(
        |[t, c, f]| -prep.output_entropy(&AdaptiveUnitary::clamped(t, c, f)),
        opts.grid_n,
        opts.refine_tol,
    );
    let [t, c, f] = res.best_params;
    let entropy_term = -res.best_value;
    Ok(CapacityResult {
        capacity: 1.0 + prep.receiver_entropy - entropy_term,
        minimizer: AdaptiveUnitary::clamped(t, c, f),
        entropy_term,
        receiver_entropy: prep.receiver_entropy,
    })
}

pub fn dc_capacity_fixed(cfg: &ChannelConfig, u: &AdaptiveUnitary) -> Result<f64> {
    let prep = Prepared::new(cfg)?;
    Ok(1.0 + prep.receiver_entropy - prep.output_entropy(u))
}
