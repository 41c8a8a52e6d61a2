use crate::encoding::AdaptiveUnitary;
use crate::error::{Error, Result};
use crate::numkernel::{hermitian_eigenvalues, kron, ComplexMatrix, StateVector};
use crate::qstates::{bell_state, computational_state, fourier_state, rotated_bell, test_basis_vector, Party};

pub const SDC_GAMMA: f64 = 0.25;
pub const LM05_GAMMA: f64 = 0.5;
pub const BB84_GAMMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaConstants {
    pub sdc: f64,
    pub lm05: f64,
    pub bb84: f64,
}

impl Default for GammaConstants {
    fn default() -> Self {
        Self { sdc: SDC_GAMMA, lm05: LM05_GAMMA, bb84: BB84_GAMMA }
    }
}

const TOL: f64 = 1e-10;

fn check_decomposition(meas: &[ComplexMatrix], name: &str) -> Result<()> {
    let Some(first) = meas.first() else {
        return Err(Error::NotADecomposition(format!("{name}: empty")));
    };
    let d = first.rows();
    let mut sum = ComplexMatrix::zeros(d, d);
    for p in meas {
        if p.rows() != d || p.cols() != d {
            return Err(Error::NotADecomposition(format!("{name}: mixed dimensions")));
        }
        if p.hermitian_residual() > TOL || p.matmul(p).max_abs_diff(p) > TOL {
            return Err(Error::NotADecomposition(format!("{name}: element is not a projector")));
        }
        sum = &sum + p;
    }
    if sum.max_abs_diff(&ComplexMatrix::identity(d)) > TOL {
        return Err(Error::NotADecomposition(format!("{name}: elements do not sum to identity")));
    }
    Ok(())
}

/// max over pairs of ‖√P √Q‖²_∞ for projective decompositions.
pub fn gamma_overlap(meas_a: &[ComplexMatrix], meas_b: &[ComplexMatrix]) -> Result<f64> {
    check_decomposition(meas_a, "first measurement")?;
    check_decomposition(meas_b, "second measurement")?;
    if meas_a[0].rows() != meas_b[0].rows() {
        return Err(Error::NotADecomposition("measurements act on different spaces".into()));
    }
    let mut best: f64 = 0.0;
    for p in meas_a {
        for q in meas_b {
            // ‖PQ‖² = λ_max(Q P Q)
            let qpq = q.matmul(p).matmul(q);
            let ev = hermitian_eigenvalues(&qpq)?;
            best = best.max(*ev.last().unwrap());
        }
    }
    Ok(best)
}

fn projectors(vs: impl IntoIterator<Item = StateVector>) -> Vec<ComplexMatrix> {
    vs.into_iter().map(|v| v.projector()).collect()
}

/// SDC: rotated Bell key measurement and the |i> ⊗ W|j_⊢> test measurement.
pub fn sdc_measurements(w: &AdaptiveUnitary) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
    let key = projectors((0..4u8).map(|k| rotated_bell(w, k >> 1, k & 1, Party::Alice)));
    let test = projectors((0..4u8).map(|k| test_basis_vector(w, k >> 1, k & 1)));
    (key, test)
}

/// LM05 in basis θ: Bob's coarse-grained rotated Bell measurement on (C, X')
/// against the conjugate-basis measurement of X' that prepares W|x> on the
/// returning qubit.
pub fn lm05_measurements(w: &AdaptiveUnitary, theta: u8) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
    let wc = w.matrix().entries().iter().map(|z| z.conj()).collect::<Vec<_>>();
    let wc = ComplexMatrix::new(2, 2, wc).expect("2x2");
    let rot = kron(&ComplexMatrix::identity(2), &wc);
    let mut key = vec![ComplexMatrix::zeros(4, 4), ComplexMatrix::zeros(4, 4)];
    for xy in 0..4u8 {
        let (x, y) = (xy >> 1, xy & 1);
        let b = if theta == 0 { x } else { y };
        let v = bell_state(x, y).transform(&rot).expect("unitary");
        key[b as usize] = &key[b as usize] + &v.projector();
    }
    let conj_basis = |k: u8| if theta == 0 { fourier_state(k) } else { computational_state(k) };
    let test = (0..2u8)
        .map(|k| {
            let v = conj_basis(k).transform(&wc).expect("unitary");
            kron(&ComplexMatrix::identity(2), &v.projector())
        })
        .collect();
    (key, test)
}

/// BB84: W-rotated computational against W-rotated Fourier basis.
pub fn bb84_measurements(w: &AdaptiveUnitary) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
    let wm = w.matrix();
    let rot = |v: StateVector| v.transform(&wm).expect("unitary");
    let key = projectors((0..2u8).map(|k| rot(computational_state(k))));
    let test = projectors((0..2u8).map(|k| rot(fourier_state(k))));
    (key, test)
}
