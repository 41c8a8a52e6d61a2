//! Standard kets, measurement bases and entropy functionals.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::encoding::{encoding_bell_vector, AdaptiveUnitary};
use crate::error::{Error, Result};
use crate::numkernel::{hermitian_eigenvalues, kron, ComplexMatrix, DensityMatrix, StateVector, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

/// |B(xy)> = (1/√2) Σ_l e^{iπly} |l, l⊕x>
pub fn bell_state(x: u8, y: u8) -> StateVector {
    let mut a = vec![ZERO; 4];
    for l in 0..2usize {
        let sign = if l == 1 && y & 1 == 1 { -1.0 } else { 1.0 };
        a[2 * l + (l ^ (x as usize & 1))] = C64::new(sign * FRAC_1_SQRT_2, 0.0);
    }
    StateVector::new(a).expect("normalized")
}

pub fn computational_state(k: u8) -> StateVector {
    StateVector::basis(1, (k & 1) as usize)
}

/// |0_⊢> = |+>, |1_⊢> = |->
pub fn fourier_state(k: u8) -> StateVector {
    let s = if k & 1 == 0 { 1.0 } else { -1.0 };
    StateVector::new(vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(s * FRAC_1_SQRT_2, 0.0)]).expect("normalized")
}

/// Alice side: |χ(ij)> = (I⊗W)|B(ij)>. Bob side: (U^{ij†}⊗I)|φ+>, which equals
/// (I⊗W*)|B(ij)> up to a global phase.
pub fn rotated_bell(w: &AdaptiveUnitary, i: u8, j: u8, side: Party) -> StateVector {
    match side {
        Party::Alice => bell_state(i, j)
            .transform(&kron(&ComplexMatrix::identity(2), &w.matrix()))
            .expect("unitary"),
        Party::Bob => encoding_bell_vector(w, i, j),
    }
}

/// |i> ⊗ W|j_⊢>
pub fn test_basis_vector(w: &AdaptiveUnitary, i: u8, j: u8) -> StateVector {
    computational_state(i).kron(&fourier_state(j).transform(&w.matrix()).expect("unitary"))
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plogp(p)).sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let ev = hermitian_eigenvalues(rho.matrix()).expect("density matrices are Hermitian");
    ev.into_iter().map(|l| plogp(l.max(0.0))).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityTable {
    alice_arity: usize,
    bob_arity: usize,
    /// row-major: alice label major, bob label minor
    weights: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(alice_arity: usize, bob_arity: usize, mut weights: Vec<f64>) -> Result<Self> {
        if alice_arity == 0 || bob_arity == 0 || weights.len() != alice_arity * bob_arity {
            return Err(Error::InvalidTable(format!(
                "{} weights for {alice_arity}x{bob_arity}",
                weights.len()
            )));
        }
        for w in weights.iter_mut() {
            if !w.is_finite() || *w < -1e-12 {
                return Err(Error::InvalidTable(format!("weight {w}")));
            }
            *w = w.max(0.0);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTable(format!("total weight {total}")));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(Self { alice_arity, bob_arity, weights })
    }

    pub fn alice_arity(&self) -> usize {
        self.alice_arity
    }

    pub fn bob_arity(&self) -> usize {
        self.bob_arity
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.bob_arity + b]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn marginal(&self, party: Party) -> Vec<f64> {
        match party {
            Party::Alice => (0..self.alice_arity)
                .map(|a| (0..self.bob_arity).map(|b| self.weight(a, b)).sum())
                .collect(),
            Party::Bob => (0..self.bob_arity)
                .map(|b| (0..self.alice_arity).map(|a| self.weight(a, b)).sum())
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &ProbabilityTable) -> f64 {
        self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Entropy of the other party's label given `condition_on`'s label.
pub fn conditional_entropy(table: &ProbabilityTable, condition_on: Party) -> f64 {
    (shannon_entropy(&table.weights) - shannon_entropy(&table.marginal(condition_on))).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::adaptive_unitary;
    use std::f64::consts::PI;

    fn amp_close(v: &StateVector, expect: &[f64]) {
        for (a, e) in v.amplitudes().iter().zip(expect) {
            assert!((a - C64::new(*e, 0.0)).norm() < 1e-15, "{v:?}");
        }
    }

    #[test]
    fn bell_examples() {
        let s = FRAC_1_SQRT_2;
        amp_close(&bell_state(0, 0), &[s, 0., 0., s]);
        amp_close(&bell_state(1, 1), &[0., s, -s, 0.]);
        for a in 0..4u8 {
            for b in 0..4u8 {
                let ip = bell_state(a >> 1, a & 1).inner(&bell_state(b >> 1, b & 1)).norm();
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rotated_bell_examples() {
        let id = AdaptiveUnitary::identity();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(rotated_bell(&id, i, j, Party::Alice), bell_state(i, j));
                let b = rotated_bell(&id, i, j, Party::Bob);
                assert!((b.inner(&bell_state(i, j)).norm() - 1.0).abs() < 1e-15);
            }
        }
        let zh = adaptive_unitary(PI / 2., 0., 0.).unwrap();
        amp_close(&rotated_bell(&zh, 0, 0, Party::Alice), &[0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn test_basis_examples() {
        let s = FRAC_1_SQRT_2;
        amp_close(&test_basis_vector(&AdaptiveUnitary::identity(), 0, 0), &[s, s, 0., 0.]);
        let zh = adaptive_unitary(PI / 2., 0., 0.).unwrap();
        amp_close(&test_basis_vector(&zh, 1, 0), &[0., 0., 1., 0.]);
        let w = adaptive_unitary(0.7, 1.9, 0.2).unwrap();
        for a in 0..4u8 {
            for b in 0..4u8 {
                let ip = test_basis_vector(&w, a >> 1, a & 1).inner(&test_basis_vector(&w, b >> 1, b & 1)).norm();
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&bell_state(0, 1).density()).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(1)) - 1.0).abs() < 1e-14);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - 2.0).abs() < 1e-14);

        let corr = ProbabilityTable::new(4, 4, (0..16).map(|k| if k % 5 == 0 { 0.25 } else { 0.0 }).collect()).unwrap();
        assert!(conditional_entropy(&corr, Party::Alice).abs() < 1e-15);
        let prod = ProbabilityTable::new(4, 4, vec![1.0 / 16.0; 16]).unwrap();
        assert!((conditional_entropy(&prod, Party::Alice) - 2.0).abs() < 1e-14);
        let bsc = ProbabilityTable::new(2, 2, vec![0.25; 4]).unwrap();
        assert!((conditional_entropy(&bsc, Party::Bob) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn table_normalization() {
        let t = ProbabilityTable::new(1, 2, vec![0.5 + 4e-10, 0.5]).unwrap();
        assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let t = ProbabilityTable::new(1, 2, vec![-1e-13, 1.0]).unwrap();
        assert_eq!(t.weight(0, 0), 0.0);
        assert!(ProbabilityTable::new(1, 2, vec![0.5, 0.49]).is_err());
        assert!(ProbabilityTable::new(1, 2, vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityTable::new(2, 2, vec![1.0]).is_err());
    }
}
