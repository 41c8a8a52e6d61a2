//! The adaptive rotation W(θ,χ,φ) and the encoding set U^{xy} = W σ^{xy}.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numkernel::{
    kron, m2_mul, project_out, ComplexMatrix, DensityMatrix, StateVector, C64, M2, ONE, ZERO,
};
use crate::qstates::{bell_state, fourier_state};

const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveUnitary {
    pub theta: f64,
    pub chi: f64,
    pub phi: f64,
    m: M2,
}

impl AdaptiveUnitary {
    pub fn identity() -> Self {
        Self::clamped(0.0, 0.0, 0.0)
    }

    /// Build from angles clamped into [0, π]. Used by the optimizer.
    pub fn clamped(theta: f64, chi: f64, phi: f64) -> Self {
        let (theta, chi, phi) = (theta.clamp(0.0, PI), chi.clamp(0.0, PI), phi.clamp(0.0, PI));
        let (s, c) = (theta / 2.0).sin_cos();
        let m = [
            [C64::from_polar(c, chi), C64::from_polar(s, phi)],
            [-C64::from_polar(s, -phi), C64::from_polar(c, -chi)],
        ];
        Self { theta, chi, phi, m }
    }

    pub fn params(&self) -> [f64; 3] {
        [self.theta, self.chi, self.phi]
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_m2(&self.m)
    }

    pub(crate) fn m2(&self) -> &M2 {
        &self.m
    }
}

pub fn adaptive_unitary(theta: f64, chi: f64, phi: f64) -> Result<AdaptiveUnitary> {
    for a in [theta, chi, phi] {
        if !(-ANGLE_SLACK..=PI + ANGLE_SLACK).contains(&a) {
            return Err(Error::OutOfRange(a));
        }
    }
    Ok(AdaptiveUnitary::clamped(theta, chi, phi))
}

/// σ^{xy}: I, Z, X and −iY = [[0,−1],[1,0]] for xy = 00, 01, 10, 11.
pub(crate) fn sigma_m2(x: u8, y: u8) -> M2 {
    let m1 = -ONE;
    match (x & 1, y & 1) {
        (0, 0) => [[ONE, ZERO], [ZERO, ONE]],
        (0, _) => [[ONE, ZERO], [ZERO, m1]],
        (_, 0) => [[ZERO, ONE], [ONE, ZERO]],
        _ => [[ZERO, m1], [ONE, ZERO]],
    }
}

pub fn pauli_encoding(x: u8, y: u8) -> ComplexMatrix {
    ComplexMatrix::from_m2(&sigma_m2(x, y))
}

#[derive(Debug, Clone)]
pub struct EncodingSet {
    pub base: AdaptiveUnitary,
    u: [M2; 4],
}

impl EncodingSet {
    pub fn u(&self, x: u8, y: u8) -> ComplexMatrix {
        ComplexMatrix::from_m2(&self.u[(2 * x + y) as usize])
    }

    /// Max deviation of |tr(U†U')|/2 from δ over all pairs.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let ua = ComplexMatrix::from_m2(&self.u[a]);
                let ub = ComplexMatrix::from_m2(&self.u[b]);
                let t = crate::numkernel::dagger(&ua).matmul(&ub).trace().norm() / 2.0;
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((t - target).abs());
            }
        }
        worst
    }
}

pub fn encoding_set(w: &AdaptiveUnitary) -> EncodingSet {
    let u = [0u8, 1, 2, 3].map(|k| m2_mul(&w.m, &sigma_m2(k >> 1, k & 1)));
    EncodingSet { base: w.clone(), u }
}

/// `(U^{xy†} ⊗ I)|φ+>`, the Bell-type vector the encoding is teleported through.
pub(crate) fn encoding_bell_vector(w: &AdaptiveUnitary, x: u8, y: u8) -> StateVector {
    let ud = crate::numkernel::dagger(&encoding_set(w).u(x, y));
    let phi = bell_state(0, 0);
    phi.transform(&kron(&ud, &ComplexMatrix::identity(2))).expect("unitary image of a unit vector")
}

fn four_qubit(rho_ax: &DensityMatrix, ancilla: &StateVector) -> Result<ComplexMatrix> {
    Ok(rho_ax.tensor(&ancilla.density())?.matrix().clone())
}

/// Max residual of the two entanglement-swapping forms of the encoding against
/// `(I ⊗ U^{xy}) ρ (I ⊗ U^{xy})†`.
pub fn purification_residual(rho_ab: &DensityMatrix, w: &AdaptiveUnitary, x: u8, y: u8) -> Result<f64> {
    if rho_ab.num_qubits() != 2 {
        return Err(Error::Dimension("two-qubit state expected".into()));
    }
    let u = encoding_set(w).u(x, y);
    let rhs = rho_ab.conjugate(&kron(&ComplexMatrix::identity(2), &u));

    // qubits: A, X, X', B
    let plain = four_qubit(rho_ab, &bell_state(0, 0))?;
    let lhs = project_out(&plain, 4, &encoding_bell_vector(w, x, y), &[1, 2])?.scale_real(4.0);
    let r1 = lhs.max_abs_diff(rhs.matrix());

    let rotated_anc = bell_state(0, 0).transform(&kron(&ComplexMatrix::identity(2), &w.matrix()))?;
    let rotated = four_qubit(rho_ab, &rotated_anc)?;
    let lhs2 = project_out(&rotated, 4, &bell_state(x, y), &[1, 2])?.scale_real(4.0);
    let r2 = lhs2.max_abs_diff(rhs.matrix());
    Ok(r1.max(r2))
}

/// Residual of the test-run purification: measuring (X, X') in the product basis
/// |x> ⊗ |y_⊢> on ρ_AX ⊗ (I⊗W)|φ+><φ+|(I⊗W)† prepares W|y_⊢> on B.
pub fn test_purification_residual(rho_ab: &DensityMatrix, w: &AdaptiveUnitary) -> Result<f64> {
    if rho_ab.num_qubits() != 2 {
        return Err(Error::Dimension("two-qubit state expected".into()));
    }
    let wm = w.matrix();
    let anc = bell_state(0, 0).transform(&kron(&ComplexMatrix::identity(2), &wm))?;
    let joint = four_qubit(rho_ab, &anc)?;
    let mut worst: f64 = 0.0;
    for x in 0..2u8 {
        let kx = StateVector::basis(1, x as usize);
        let rho_a_given_x = project_out(rho_ab.matrix(), 2, &kx, &[1])?;
        for y in 0..2u8 {
            let prepared = fourier_state(y).transform(&wm)?;
            let lhs = kron(&rho_a_given_x, &prepared.projector());
            let rhs = project_out(&joint, 4, &kx.kron(&fourier_state(y)), &[1, 2])?.scale_real(2.0);
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
    }
    Ok(worst)
}
