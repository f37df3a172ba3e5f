//! Dense complex linear algebra for small qubit registers.
//!
//! Qubit 0 is the most significant bit of a computational-basis label: in an
//! `n`-qubit register, qubit `q` lives at bit position `n - 1 - q`. Every other
//! module in the crate follows this convention.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// Square complex matrix of arbitrary dimension.
pub type Matrix = DMatrix<C64>;
/// Single-qubit operator.
pub type Op2 = Matrix2<C64>;

/// Tolerance for structural checks (norms, traces, Hermiticity).
pub const STRUCT_TOL: f64 = 1e-10;
/// Lower bound accepted for eigenvalues of a density matrix.
pub const EIG_FLOOR: f64 = -1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub(crate) fn bit_of(index: usize, n: usize, q: usize) -> usize {
    (index >> (n - 1 - q)) & 1
}

#[inline]
pub(crate) fn mask_of(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// A normalized pure state of `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Wraps an amplitude vector, checking its length and norm.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n = log2_exact(amps.len())?;
        let norm = norm_sqr(&amps);
        if (norm - 1.0).abs() > STRUCT_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let n = log2_exact(amps.len())?;
        let norm = norm_sqr(&amps).sqrt();
        if norm < 1e-300 {
            return Err(Error::NotNormalized(0.0));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n, amps })
    }

    pub(crate) fn from_raw(n: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Self { n, amps }
    }

    /// `|+⟩^⊗n`.
    pub fn plus(n: usize) -> Self {
        let a = C64::new((1u64 << n) as f64, 0.0).sqrt().inv();
        Self { n, amps: vec![a; 1 << n] }
    }

    /// Single-qubit state `a|0⟩ + b|1⟩`, normalized.
    pub fn qubit(a: C64, b: C64) -> Result<Self> {
        Self::normalized(vec![a, b])
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amps, &other.amps)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            n: self.n,
            m: outer(&self.amps, &self.amps),
        }
    }

    /// Applies a single-qubit operator to qubit `q`.
    pub fn apply(&self, q: usize, op: &Op2) -> Result<PureState> {
        check_qubit(q, self.n)?;
        let mut amps = self.amps.clone();
        apply_op2_vec(&mut amps, self.n, q, op);
        Ok(Self { n: self.n, amps })
    }

    /// Expectation value `⟨ψ|O_q|ψ⟩` of a single-qubit observable.
    pub fn expectation(&self, q: usize, op: &Op2) -> Result<C64> {
        let moved = self.apply(q, op)?;
        Ok(self.inner(&moved))
    }

    /// Places `self` on `vertices` of an `n`-qubit register, filling the other qubits with
    /// `filler`. `vertices[j]` receives qubit `j` of `self`.
    pub fn embed(&self, vertices: &[usize], n: usize, filler: &PureState) -> Result<PureState> {
        if vertices.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: vertices.len() });
        }
        if filler.n != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: filler.n });
        }
        for &v in vertices {
            check_qubit(v, n)?;
        }
        let mut amps = vec![ZERO; 1 << n];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let mut sub = 0;
            for &v in vertices {
                sub = (sub << 1) | bit_of(idx, n, v);
            }
            let mut a = self.amps[sub];
            for q in (0..n).filter(|q| !vertices.contains(q)) {
                a *= filler.amps[bit_of(idx, n, q)];
            }
            *amp = a;
        }
        PureState::normalized(amps)
    }
}

/// A density matrix of `n` qubits: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: Matrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(m: Matrix) -> Result<Self> {
        let n = check_square_pow2(&m)?;
        let herm = hermiticity_defect(&m);
        if herm > STRUCT_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STRUCT_TOL || tr.im.abs() > STRUCT_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = hermitian_eig(&m)?.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < EIG_FLOOR {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { n, m })
    }

    /// Skips validation; callers guarantee the invariants hold up to rounding.
    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        let n = (m.nrows().trailing_zeros()) as usize;
        Self { n, m }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1 << n;
        Self { n, m: Matrix::identity(d, d) / C64::new(d as f64, 0.0) }
    }

    /// Single-qubit state from a Bloch vector of length at most one.
    pub fn from_bloch(v: [f64; 3]) -> Result<Self> {
        let (x, y, z) = (v[0], v[1], v[2]);
        let m = Matrix::from_row_slice(
            2,
            2,
            &[
                C64::new((1.0 + z) / 2.0, 0.0),
                C64::new(x / 2.0, -y / 2.0),
                C64::new(x / 2.0, y / 2.0),
                C64::new((1.0 - z) / 2.0, 0.0),
            ],
        );
        Self::new(m)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let mut s = 0.0;
        for v in self.m.iter() {
            s += v.norm_sqr();
        }
        s
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, psi: &PureState) -> f64 {
        quadratic_form(&self.m, psi.amplitudes()).re
    }

    /// Bloch vector of a single-qubit state.
    pub fn bloch(&self) -> Result<[f64; 3]> {
        if self.n != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.n });
        }
        let m = &self.m;
        Ok([2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re])
    }

    /// `U_q ρ U_q†` for a single-qubit unitary (or any operator) on qubit `q`.
    pub fn conjugate(&self, q: usize, op: &Op2) -> Result<DensityMatrix> {
        check_qubit(q, self.n)?;
        let mut m = self.m.clone();
        conjugate_op2(&mut m, self.n, q, op);
        Ok(Self { n: self.n, m })
    }

    /// Convex combination `(1-w)·self + w·other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(Self {
            n: self.n,
            m: &self.m * C64::new(1.0 - w, 0.0) + &other.m * C64::new(w, 0.0),
        })
    }
}

/// Kronecker product of two states of the same kind; `a` takes the leading qubits.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { n: self.n + other.n, amps }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self { n: self.n + other.n, m: self.m.kronecker(&other.m) }
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Reduced state on `keep` (original order preserved, duplicates ignored).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let n = rho.n;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    for &q in &kept {
        check_qubit(q, n)?;
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let k = kept.len();
    let dk = 1 << k;
    let dt = 1 << traced.len();
    let compose = |ki: usize, ti: usize| -> usize {
        let mut idx = 0;
        for (j, &q) in kept.iter().enumerate() {
            if (ki >> (k - 1 - j)) & 1 == 1 {
                idx |= mask_of(n, q);
            }
        }
        for (j, &q) in traced.iter().enumerate() {
            if (ti >> (traced.len() - 1 - j)) & 1 == 1 {
                idx |= mask_of(n, q);
            }
        }
        idx
    };
    let mut out = Matrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut s = ZERO;
            for t in 0..dt {
                s += rho.m[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = s;
        }
    }
    Ok(DensityMatrix { n: k, m: out })
}

/// Partial transpose over the listed qubits.
pub fn partial_transpose(m: &Matrix, n: usize, qubits: &[usize]) -> Result<Matrix> {
    let mut mask = 0;
    for &q in qubits {
        check_qubit(q, n)?;
        mask |= mask_of(n, q);
    }
    let d = m.nrows();
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            // swap the selected bits between row and column labels
            let ni = (i & !mask) | (j & mask);
            let nj = (j & !mask) | (i & mask);
            out[(ni, nj)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Column `j` is the eigenvector of `values[j]`.
    pub vectors: Matrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> Matrix {
        let d = self.values.len();
        let mut lam = Matrix::zeros(d, d);
        for (j, v) in self.values.iter().enumerate() {
            lam[(j, j)] = C64::new(*v, 0.0);
        }
        &self.vectors * lam * self.vectors.adjoint()
    }
}

/// Hermitian eigensolver (Householder tridiagonalization + implicit QR, via nalgebra).
pub fn hermitian_eig(m: &Matrix) -> Result<Eigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let defect = hermiticity_defect(m);
    if defect > 1e-8 {
        return Err(Error::NotHermitian(defect));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let d = m.nrows();
    let mut vectors = Matrix::zeros(d, d);
    let mut values = Vec::with_capacity(d);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let defect = hermiticity_defect(m);
    if defect > 1e-8 {
        return Err(Error::NotHermitian(defect));
    }
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &Matrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|v| v.abs()).sum())
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    hermitian_eigenvalues(rho.matrix())
        .map(|vals| shannon(&vals))
        .unwrap_or(f64::NAN)
}

/// `-Σ p log₂ p`, ignoring non-positive entries.
pub fn shannon(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 1e-15).map(|&p| -p * p.log2()).sum()
}

pub fn hermiticity_defect(m: &Matrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square_pow2(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    log2_exact(m.nrows())
}

pub(crate) fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q >= n {
        return Err(Error::QubitOutOfRange { index: q, qubits: n });
    }
    Ok(())
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `|a⟩⟨b|`.
pub fn outer(a: &[C64], b: &[C64]) -> Matrix {
    Matrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

/// `⟨v|M|v⟩`.
pub fn quadratic_form(m: &Matrix, v: &[C64]) -> C64 {
    bilinear(m, v, v)
}

/// `⟨u|M|v⟩`.
pub fn bilinear(m: &Matrix, u: &[C64], v: &[C64]) -> C64 {
    let d = v.len();
    let mut s = ZERO;
    for i in 0..d {
        if u[i] == ZERO {
            continue;
        }
        let mut row = ZERO;
        for j in 0..d {
            row += m[(i, j)] * v[j];
        }
        s += u[i].conj() * row;
    }
    s
}

/// In-place `op` on qubit `q` of an amplitude vector.
pub(crate) fn apply_op2_vec(amps: &mut [C64], n: usize, q: usize, op: &Op2) {
    let mask = mask_of(n, q);
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let (a0, a1) = (amps[i0], amps[i1]);
        amps[i0] = op[(0, 0)] * a0 + op[(0, 1)] * a1;
        amps[i1] = op[(1, 0)] * a0 + op[(1, 1)] * a1;
    }
}

/// `M ← op_q M`.
pub(crate) fn left_op2(m: &mut Matrix, n: usize, q: usize, op: &Op2) {
    let mask = mask_of(n, q);
    let d = m.nrows();
    for col in 0..m.ncols() {
        for i0 in 0..d {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let (a0, a1) = (m[(i0, col)], m[(i1, col)]);
            m[(i0, col)] = op[(0, 0)] * a0 + op[(0, 1)] * a1;
            m[(i1, col)] = op[(1, 0)] * a0 + op[(1, 1)] * a1;
        }
    }
}

/// `M ← M op_q†`.
pub(crate) fn right_op2_dagger(m: &mut Matrix, n: usize, q: usize, op: &Op2) {
    let mask = mask_of(n, q);
    let d = m.ncols();
    for row in 0..m.nrows() {
        for j0 in 0..d {
            if j0 & mask != 0 {
                continue;
            }
            let j1 = j0 | mask;
            let (a0, a1) = (m[(row, j0)], m[(row, j1)]);
            m[(row, j0)] = a0 * op[(0, 0)].conj() + a1 * op[(0, 1)].conj();
            m[(row, j1)] = a0 * op[(1, 0)].conj() + a1 * op[(1, 1)].conj();
        }
    }
}

/// `M ← op_q M op_q†`.
pub(crate) fn conjugate_op2(m: &mut Matrix, n: usize, q: usize, op: &Op2) {
    left_op2(m, n, q, op);
    right_op2_dagger(m, n, q, op);
}

/// Contracts qubit `q` of an (unnormalized) vector with `⟨bra|`, returning `n-1` qubits.
pub(crate) fn contract_vec(amps: &[C64], n: usize, q: usize, bra: &[C64; 2]) -> Vec<C64> {
    let (b0, b1) = (bra[0].conj(), bra[1].conj());
    let low_bits = n - 1 - q;
    let low_mask = (1usize << low_bits) - 1;
    let half = amps.len() / 2;
    let mut out = Vec::with_capacity(half);
    for j in 0..half {
        let hi = (j >> low_bits) << (low_bits + 1);
        let i0 = hi | (j & low_mask);
        let i1 = i0 | (1 << low_bits);
        out.push(b0 * amps[i0] + b1 * amps[i1]);
    }
    out
}

/// `⟨v|_q M |v⟩_q` on an `n`-qubit matrix, returning `n-1` qubits.
pub(crate) fn contract_matrix(m: &Matrix, n: usize, q: usize, v: &[C64; 2]) -> Matrix {
    let low_bits = n - 1 - q;
    let low_mask = (1usize << low_bits) - 1;
    let half = m.nrows() / 2;
    let split = |j: usize| -> (usize, usize) {
        let hi = (j >> low_bits) << (low_bits + 1);
        let i0 = hi | (j & low_mask);
        (i0, i0 | (1 << low_bits))
    };
    let (c0, c1) = (v[0].conj(), v[1].conj());
    Matrix::from_fn(half, half, |i, j| {
        let (i0, i1) = split(i);
        let (j0, j1) = split(j);
        c0 * (m[(i0, j0)] * v[0] + m[(i0, j1)] * v[1])
            + c1 * (m[(i1, j0)] * v[0] + m[(i1, j1)] * v[1])
    })
}

pub mod ops {
    //! Standard single-qubit operators.
    use super::{Op2, C64, I, ONE, ZERO};

    pub fn identity() -> Op2 {
        Op2::new(ONE, ZERO, ZERO, ONE)
    }
    pub fn x() -> Op2 {
        Op2::new(ZERO, ONE, ONE, ZERO)
    }
    pub fn y() -> Op2 {
        Op2::new(ZERO, -I, I, ZERO)
    }
    pub fn z() -> Op2 {
        Op2::new(ONE, ZERO, ZERO, -ONE)
    }
    pub fn h() -> Op2 {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Op2::new(s, s, s, -s)
    }
    /// Pauli `σ_j`, `j = 0..3`.
    pub fn pauli(j: usize) -> Op2 {
        match j {
            0 => identity(),
            1 => x(),
            2 => y(),
            3 => z(),
            _ => panic!("Pauli index {j} out of range"),
        }
    }
    /// `exp(-i φ Z / 2)`.
    pub fn rz(phi: f64) -> Op2 {
        Op2::new(C64::from_polar(1.0, -phi / 2.0), ZERO, ZERO, C64::from_polar(1.0, phi / 2.0))
    }
    /// `exp(-i φ X / 2)`.
    pub fn rx(phi: f64) -> Op2 {
        rn([1.0, 0.0, 0.0], phi)
    }
    /// `exp(-i φ Y / 2)`.
    pub fn ry(phi: f64) -> Op2 {
        rn([0.0, 1.0, 0.0], phi)
    }
    /// `exp(-i φ n̂·σ / 2)`; `axis` is assumed normalized.
    pub fn rn(axis: [f64; 3], phi: f64) -> Op2 {
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        let sigma = x() * C64::new(axis[0], 0.0) + y() * C64::new(axis[1], 0.0) + z() * C64::new(axis[2], 0.0);
        identity() * C64::new(c, 0.0) - sigma * (I * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![c(s), ZERO, ZERO, c(s)]).unwrap()
    }

    fn assert_mat_close(a: &Matrix, b: &Matrix, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() < tol, "{a} vs {b}");
        }
    }

    #[test]
    fn tensor_basis_and_plus() {
        let t = tensor(&PureState::basis(1, 0), &PureState::basis(1, 1));
        assert_eq!(t.amplitudes(), &[ZERO, ONE, ZERO, ZERO]);
        let p = tensor(&PureState::plus(1), &PureState::plus(1));
        for a in p.amplitudes() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
        }
        let mm = tensor(&DensityMatrix::maximally_mixed(1), &DensityMatrix::maximally_mixed(1));
        assert_mat_close(mm.matrix(), DensityMatrix::maximally_mixed(2).matrix(), 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = bell().to_density();
        let red = partial_trace(&rho, &[0]).unwrap();
        assert_mat_close(red.matrix(), DensityMatrix::maximally_mixed(1).matrix(), 1e-12);

        let plus = PureState::plus(1);
        let prod = tensor(&PureState::basis(1, 0).to_density(), &plus.to_density());
        let red = partial_trace(&prod, &[1]).unwrap();
        assert_mat_close(red.matrix(), plus.to_density().matrix(), 1e-12);

        // |G2⟩ = (|00⟩+|01⟩+|10⟩-|11⟩)/2: off-diagonal of the reduced state is (1/4)(1 - 1) = 0
        let g2 = PureState::new(vec![c(0.5), c(0.5), c(0.5), c(-0.5)]).unwrap();
        let red = partial_trace(&g2.to_density(), &[1]).unwrap();
        assert_mat_close(red.matrix(), DensityMatrix::maximally_mixed(1).matrix(), 1e-12);

        assert!(matches!(partial_trace(&rho, &[]), Err(Error::EmptySelection)));
    }

    #[test]
    fn eig_examples() {
        let e = hermitian_eig(&Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        let e = hermitian_eig(DensityMatrix::maximally_mixed(1).matrix()).unwrap();
        assert_abs_diff_eq!(e.values[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.values[1], 0.5, epsilon = 1e-15);

        let x = Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let e = hermitian_eig(&x).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], -1.0, epsilon = 1e-14);
        let plus = PureState::plus(1);
        let v0 = vec![e.vectors[(0, 0)], e.vectors[(1, 0)]];
        assert_abs_diff_eq!(inner(plus.amplitudes(), &v0).norm(), 1.0, epsilon = 1e-12);

        let bad = Matrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(hermitian_eig(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(Matrix::identity(2, 2)).is_err());
        let neg = Matrix::from_row_slice(2, 2, &[c(1.5), ZERO, ZERO, c(-0.5)]);
        assert!(matches!(DensityMatrix::new(neg), Err(Error::NotPositive(_))));
        assert!(PureState::new(vec![ONE, ONE]).is_err());
        assert!(PureState::new(vec![ONE, ZERO, ZERO]).is_err());
    }

    #[test]
    fn partial_transpose_of_bell_has_negative_eigenvalue() {
        let rho = bell().to_density();
        let pt = partial_transpose(rho.matrix(), 2, &[1]).unwrap();
        let vals = hermitian_eigenvalues(&pt).unwrap();
        assert_abs_diff_eq!(vals[3], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_norm_hermitian(&pt).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn contraction_matches_projection() {
        let g2 = PureState::new(vec![c(0.5), c(0.5), c(0.5), c(-0.5)]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [c(s), c(s)];
        // ⟨+|_0 |G2⟩ = |0⟩/√2
        let out = contract_vec(g2.amplitudes(), 2, 0, &plus);
        assert_abs_diff_eq!(out[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1].re, 0.0, epsilon = 1e-15);
        let m = contract_matrix(g2.to_density().matrix(), 2, 0, &plus);
        assert_abs_diff_eq!(m[(0, 0)].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn embed_places_qubits() {
        let one = PureState::basis(1, 1);
        let zero = PureState::basis(1, 0);
        let e = one.embed(&[2], 3, &zero).unwrap();
        assert_eq!(e.amplitudes()[1], ONE);
    }

    fn arb_state(n: usize) -> impl Strategy<Value = PureState> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
            .prop_filter_map("nonzero", |v| {
                PureState::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).ok()
            })
    }

    fn arb_mixed(n: usize) -> impl Strategy<Value = DensityMatrix> {
        prop::collection::vec((arb_state(n), 0.0f64..1.0), 1..4).prop_map(move |parts| {
            let total: f64 = parts.iter().map(|(_, w)| w).sum::<f64>() + 1e-3;
            let d = 1 << n;
            let mut m = Matrix::zeros(d, d);
            for (s, w) in &parts {
                m += s.to_density().into_matrix() * C64::new(*w / total, 0.0);
            }
            m += Matrix::identity(d, d) * C64::new(1e-3 / total / d as f64, 0.0);
            DensityMatrix::from_matrix_unchecked(m)
        })
    }

    proptest! {
        #[test]
        fn tensor_is_associative(a in arb_state(1), b in arb_state(2), c in arb_state(1)) {
            let l = tensor(&tensor(&a, &b), &c);
            let r = tensor(&a, &tensor(&b, &c));
            for (x, y) in l.amplitudes().iter().zip(r.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn partial_trace_recovers_factor(a in arb_mixed(1), b in arb_mixed(2)) {
            let joint = tensor(&a, &b);
            let red = partial_trace(&joint, &[0]).unwrap();
            for (x, y) in red.matrix().iter().zip(a.matrix().iter()) {
                prop_assert!((x - y).norm() < 1e-10);
            }
            let red_b = partial_trace(&joint, &[1, 2]).unwrap();
            for (x, y) in red_b.matrix().iter().zip(b.matrix().iter()) {
                prop_assert!((x - y).norm() < 1e-10);
            }
        }

        #[test]
        fn partial_trace_preserves_trace(rho in arb_mixed(3), keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..=3)) {
            let red = partial_trace(&rho, &keep).unwrap();
            prop_assert!((red.trace() - rho.trace()).norm() < 1e-10);
        }

        #[test]
        fn eig_reconstructs(rho in arb_mixed(3)) {
            let e = hermitian_eig(rho.matrix()).unwrap();
            let back = e.reconstruct();
            for (x, y) in back.iter().zip(rho.matrix().iter()) {
                prop_assert!((x - y).norm() < 1e-9);
            }
            prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
