//! Dense complex linear algebra for operators on up to four qubits.
//!
//! Qubit 0 is the most significant tensor factor: basis index bit `n - 1 - q`
//! belongs to qubit `q`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 4;

const HERMITIAN_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Dimension("non-finite entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    pub(crate) fn from_m2(m: &M2) -> Self {
        Self { rows: 2, cols: 2, data: vec![m[0][0], m[0][1], m[1][0], m[1][1]] }
    }

    pub(crate) fn to_m2(&self) -> M2 {
        debug_assert!(self.rows == 2 && self.cols == 2);
        [[self.data[0], self.data[1]], [self.data[2], self.data[3]]]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, z: C64) {
        self.data[r * self.cols + c] = z;
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Max elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&dagger(self))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self.data[i * self.cols + k] * v[k]).sum())
            .collect()
    }

    /// Conjugate `A M A†`.
    pub fn conjugate_by(&self, a: &ComplexMatrix) -> ComplexMatrix {
        a.matmul(self).matmul(&dagger(a))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a.get(i, j);
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.data[(i * b.rows + k) * cols + j * b.cols + l] = s * b.get(k, l);
                }
            }
        }
    }
    out
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out.data[j * a.rows + i] = a.get(i, j).conj();
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let res = a.hermitian_residual();
    if res > HERMITIAN_TOL {
        return Err(Error::NotHermitian(res));
    }
    let n = a.rows;
    // symmetrize so round-off in the upper triangle cannot leak in
    let m = DMatrix::<C64>::from_fn(n, n, |i, j| (a.get(i, j) + a.get(j, i).conj()) * 0.5);
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 2 || !n.is_power_of_two() || n > 1 << MAX_QUBITS {
            return Err(Error::Dimension(format!("state dimension {n}")));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("squared norm {norm}")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut a = vec![ZERO; 1 << num_qubits];
        a[index] = ONE;
        Self { amplitudes: a }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut a = Vec::with_capacity(self.dim() * other.dim());
        for x in &self.amplitudes {
            for y in &other.amplitudes {
                a.push(x * y);
            }
        }
        StateVector { amplitudes: a }
    }

    /// Apply a unitary; the result is renormalized against round-off.
    pub fn transform(&self, u: &ComplexMatrix) -> Result<StateVector> {
        StateVector::normalized(u.apply(&self.amplitudes))
    }

    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        m
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(self.projector())
    }

    /// `<self| M |self>`, real part.
    pub fn expectation(&self, m: &ComplexMatrix) -> f64 {
        let mv = m.apply(&self.amplitudes);
        self.amplitudes.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = Self::qubits_for(&matrix)?;
        let h = matrix.hermitian_residual();
        if h > 1e-12 {
            return Err(Error::NotHermitian(h));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&matrix)?[0];
        if min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { num_qubits: n, matrix })
    }

    /// For matrices that are valid by construction (outputs of CPTP maps on valid states).
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let n = Self::qubits_for(&matrix).expect("density matrix dimension");
        Self { num_qubits: n, matrix }
    }

    fn qubits_for(m: &ComplexMatrix) -> Result<usize> {
        let d = m.rows();
        if !m.is_square() || d < 2 || !d.is_power_of_two() || d > 1 << MAX_QUBITS {
            return Err(Error::Dimension(format!("{}x{} density matrix", m.rows(), m.cols())));
        }
        Ok(d.trailing_zeros() as usize)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1 << num_qubits;
        Self::from_trusted(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.num_qubits + other.num_qubits > MAX_QUBITS {
            return Err(Error::Dimension("more than four qubits".into()));
        }
        Ok(Self::from_trusted(kron(&self.matrix, &other.matrix)))
    }

    /// `U rho U†` for a unitary on the full space.
    pub fn conjugate(&self, u: &ComplexMatrix) -> DensityMatrix {
        Self::from_trusted(self.matrix.conjugate_by(u))
    }

    pub fn probability(&self, v: &StateVector) -> f64 {
        v.expectation(&self.matrix)
    }
}

/// Embed a single-qubit operator at `qubit` in an `n`-qubit register.
pub fn embed(op: &ComplexMatrix, qubit: usize, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(1);
    let id = ComplexMatrix::identity(2);
    for q in 0..n {
        m = kron(&m, if q == qubit { op } else { &id });
    }
    m
}

fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits;
    if keep.is_empty() {
        return Err(Error::BadSubsystem("nothing to keep".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&q) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::BadSubsystem(format!("qubit {q} of {n}")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let k = kept.len();
    let compose = |r: usize, t: usize| -> usize {
        let mut idx = 0;
        for (pos, &q) in kept.iter().enumerate() {
            idx |= ((r >> (k - 1 - pos)) & 1) << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            idx |= ((t >> (traced.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        idx
    };
    let dk = 1 << k;
    let mut out = ComplexMatrix::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut s = ZERO;
            for t in 0..1 << traced.len() {
                s += rho.matrix.get(compose(r, t), compose(c, t));
            }
            out.set(r, c, s);
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// `(<bra|_{qubits} ⊗ I) M (|bra> ⊗ I)`; the result acts on the remaining qubits in order.
pub fn project_out(m: &ComplexMatrix, n: usize, bra: &StateVector, qubits: &[usize]) -> Result<ComplexMatrix> {
    if bra.num_qubits() != qubits.len() || qubits.iter().any(|&q| q >= n) {
        return Err(Error::BadSubsystem(format!("{qubits:?} of {n}")));
    }
    let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
    let dr = 1 << rest.len();
    let mut k = ComplexMatrix::zeros(dr, 1 << n);
    for f in 0..1 << n {
        let mut sub = 0;
        for &q in qubits {
            sub = (sub << 1) | bit(f, q, n);
        }
        let mut r = 0;
        for &q in &rest {
            r = (r << 1) | bit(f, q, n);
        }
        k.set(r, f, bra.amplitudes()[sub].conj());
    }
    Ok(k.matmul(m).matmul(&dagger(&k)))
}

// Fixed-size helpers for the hot evaluation paths.

pub(crate) type M2 = [[C64; 2]; 2];

pub(crate) const I2: M2 = [[ONE, ZERO], [ZERO, ONE]];

pub(crate) fn m2_mul(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub(crate) fn m2_dagger(a: &M2) -> M2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub(crate) fn m2_conj(a: &M2) -> M2 {
    [[a[0][0].conj(), a[0][1].conj()], [a[1][0].conj(), a[1][1].conj()]]
}

pub(crate) fn m2_apply(a: &M2, v: &[C64; 2]) -> [C64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Apply a 2x2 operator to `qubit` of an n-qubit amplitude vector in place.
pub(crate) fn apply_1q(v: &mut [C64], a: &M2, qubit: usize, n: usize) {
    let stride = 1 << (n - 1 - qubit);
    for base in 0..v.len() {
        if base & stride != 0 {
            continue;
        }
        let (x0, x1) = (v[base], v[base | stride]);
        v[base] = a[0][0] * x0 + a[0][1] * x1;
        v[base | stride] = a[1][0] * x0 + a[1][1] * x1;
    }
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
