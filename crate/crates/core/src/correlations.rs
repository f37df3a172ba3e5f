//! Entanglement and correlation measures: concurrence, negativity, mutual information,
//! classical correlations, discord, linear entropy and the minimum entanglement potential.
//!
//! Entropies are in bits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, conjugate_op2, entropy, hermitian_eig, ops, partial_trace, partial_transpose, trace_norm_hermitian,
    DensityMatrix, Matrix, Op2, C64,
};
use crate::optimize::{coordinate_descent, fibonacci_sphere, nelder_mead};

fn require_qubits(rho: &DensityMatrix, n: usize) -> Result<()> {
    if rho.qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.qubits() });
    }
    Ok(())
}

/// Eigenvalues of `ρ` below this are treated as exact zeros by [`concurrence`].
pub const RANK_FLOOR: f64 = 1e-12;

/// Wootters concurrence of a two-qubit state.
///
/// With `ρ = X X†`, `X = V √P` over the numerically nonzero eigenpairs, the `λ_i` are the
/// singular values of the `r × r` matrix `Xᵀ (σ_y⊗σ_y) X`, so a rank-deficient state
/// contributes no spurious square roots of round-off.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_qubits(rho, 2)?;
    let yy = {
        let y = Matrix::from_iterator(2, 2, ops::y().iter().cloned());
        y.kronecker(&y)
    };
    let e = hermitian_eig(rho.matrix())?;
    let kept: Vec<usize> = (0..4).filter(|&j| e.values[j] > RANK_FLOOR).collect();
    let mut x = Matrix::zeros(4, kept.len());
    for (c, &j) in kept.iter().enumerate() {
        x.set_column(c, &(e.vectors.column(j) * C64::new(e.values[j].sqrt(), 0.0)));
    }
    let tau = x.transpose() * yy * &x;
    let mut l: Vec<f64> = tau.singular_values().iter().cloned().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l.resize(4, 0.0);
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// `(‖ρ^{T_A}‖₁ − 1)/2` with `A` the listed qubits.
pub fn negativity(rho: &DensityMatrix, part_a: &[usize]) -> Result<f64> {
    if part_a.is_empty() {
        return Err(Error::EmptySelection);
    }
    let pt = partial_transpose(rho.matrix(), rho.qubits(), part_a)?;
    Ok(((trace_norm_hermitian(&pt)? - 1.0) / 2.0).max(0.0))
}

/// `I(A:B) = S(A) + S(B) − S(AB)` for a two-qubit state.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    require_qubits(rho, 2)?;
    let a = partial_trace(rho, &[0])?;
    let b = partial_trace(rho, &[1])?;
    Ok(entropy(&a) + entropy(&b) - entropy(rho))
}

/// Which qubit of a pair is measured when extracting classical correlations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    fn qubits(self) -> (usize, usize) {
        match self {
            Side::A => (0, 1),
            Side::B => (1, 0),
        }
    }
}

/// `S(ρ_other) − Σ_j p_j S(ρ_other|j)` after measuring `side` along the Bloch direction
/// `(polar, azimuth)`.
fn conditional_information(rho: &DensityMatrix, side: Side, polar: f64, azimuth: f64) -> f64 {
    let (meas, other) = side.qubits();
    let n = [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()];
    let up = crate::channels::bloch_state(n);
    let down = crate::channels::bloch_state([-n[0], -n[1], -n[2]]);
    let reduced = partial_trace(rho, &[other]).expect("two-qubit state");
    let mut conditional = 0.0;
    for s in [up, down] {
        let v = [s.amplitudes()[0], s.amplitudes()[1]];
        let post = linalg::contract_matrix(rho.matrix(), 2, meas, &v);
        let p = post.trace().re;
        if p > 1e-15 {
            conditional += p * entropy(&DensityMatrix::from_matrix_unchecked(post / C64::new(p, 0.0)));
        }
    }
    entropy(&reduced) - conditional
}

/// Best classical correlation over projective measurements on `side`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalCorrelation {
    pub value: f64,
    pub direction: [f64; 2],
    pub converged: bool,
}

pub const DISCORD_STARTS: usize = 16;
pub const DISCORD_TOL: f64 = 1e-8;

pub fn classical_correlation(rho: &DensityMatrix, side: Side) -> Result<ClassicalCorrelation> {
    require_qubits(rho, 2)?;
    let f = |x: &[f64]| -conditional_information(rho, side, x[0], x[1]);
    let mut best: Option<ClassicalCorrelation> = None;
    for start in fibonacci_sphere(DISCORD_STARTS) {
        let m = coordinate_descent(&f, &start, 0.4, DISCORD_TOL, 200_000);
        let cand = ClassicalCorrelation { value: -m.value, direction: [m.x[0], m.x[1]], converged: m.converged };
        if best.is_none_or(|b| cand.value > b.value) {
            best = Some(cand);
        }
    }
    let mut best = best.expect("at least one start");
    best.value = best.value.max(0.0);
    Ok(best)
}

/// `I − C` with `C` optimized over projective measurements on `side`.
pub fn discord(rho: &DensityMatrix, side: Side) -> Result<f64> {
    let i = mutual_information(rho)?;
    let c = classical_correlation(rho, side)?;
    Ok((i - c.value).max(0.0))
}

/// Correlation coefficients `c_j = Tr(ρ σ_j⊗σ_j)` when `ρ` is Bell-diagonal (vanishing local
/// Bloch vectors and off-diagonal correlations), else `None`.
pub fn bell_diagonal_coefficients(rho: &DensityMatrix) -> Option<[f64; 3]> {
    if rho.qubits() != 2 {
        return None;
    }
    let pauli = |j: usize| Matrix::from_iterator(2, 2, ops::pauli(j).iter().cloned());
    let expect = |a: usize, b: usize| (rho.matrix() * pauli(a).kronecker(&pauli(b))).trace().re;
    let mut c = [0.0; 3];
    for a in 0..4 {
        for b in 0..4 {
            if a == 0 && b == 0 {
                continue;
            }
            let v = expect(a, b);
            if a == b {
                c[a - 1] = v;
            } else if v.abs() > 1e-9 {
                return None;
            }
        }
    }
    Some(c)
}

/// Closed-form discord of a Bell-diagonal state with coefficients `c`.
pub fn discord_bell_diagonal(c: [f64; 3]) -> f64 {
    let xlogx = |x: f64| if x > 1e-15 { x * x.log2() } else { 0.0 };
    let lam = [
        (1.0 - c[0] - c[1] - c[2]) / 4.0,
        (1.0 - c[0] + c[1] + c[2]) / 4.0,
        (1.0 + c[0] - c[1] + c[2]) / 4.0,
        (1.0 + c[0] + c[1] - c[2]) / 4.0,
    ];
    let mutual = 2.0 + lam.iter().map(|&l| xlogx(l)).sum::<f64>();
    let cm = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let classical = xlogx((1.0 - cm) / 2.0) + xlogx((1.0 + cm) / 2.0) + 1.0;
    (mutual - classical).max(0.0)
}

/// `S_L = 2(1 − Tr ρ²)` of a single qubit.
pub fn linear_entropy(rho: &DensityMatrix) -> Result<f64> {
    require_qubits(rho, 1)?;
    Ok((2.0 * (1.0 - rho.purity())).clamp(0.0, 1.0))
}

/// Result of the entanglement-potential minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct MepResult {
    pub value: f64,
    /// `(α, β, γ)` of `R_z(α) R_y(β) R_z(γ)` per qubit.
    pub angles: Vec<f64>,
    pub converged: bool,
}

pub const MEP_MAX_QUBITS: usize = 3;
pub const MEP_STARTS: usize = 32;
pub const MEP_TOL: f64 = 1e-6;

fn euler(a: f64, b: f64, c: f64) -> Op2 {
    ops::rz(a) * ops::ry(b) * ops::rz(c)
}

/// Entanglement across system:ancilla after `CNOT` from each qubit to a fresh `|0⟩`,
/// measured as `‖ρ'^{T_{A'}}‖₁ − 1`.
pub fn activated_entanglement(rho: &DensityMatrix) -> Result<f64> {
    let n = rho.qubits();
    let d = 1usize << n;
    let m = rho.matrix();
    // ρ' = Σ_ij ρ_ij |i⟩⟨j| ⊗ |i⟩⟨j|
    let mut act = Matrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            act[(i * d + i, j * d + j)] = m[(i, j)];
        }
    }
    let ancillas: Vec<usize> = (n..2 * n).collect();
    let pt = partial_transpose(&act, 2 * n, &ancillas)?;
    Ok((trace_norm_hermitian(&pt)? - 1.0).max(0.0))
}

fn rotated(rho: &DensityMatrix, angles: &[f64]) -> Matrix {
    let n = rho.qubits();
    let mut m = rho.matrix().clone();
    for q in 0..n {
        let u = euler(angles[3 * q], angles[3 * q + 1], angles[3 * q + 2]);
        conjugate_op2(&mut m, n, q, &u);
    }
    m
}

/// Minimum over per-qubit unitaries of [`activated_entanglement`].
pub fn mep(rho: &DensityMatrix) -> Result<MepResult> {
    let n = rho.qubits();
    if n > MEP_MAX_QUBITS {
        return Err(Error::TooLarge { what: "MEP qubits", got: n, max: MEP_MAX_QUBITS });
    }
    let f = |x: &[f64]| {
        activated_entanglement(&DensityMatrix::from_matrix_unchecked(rotated(rho, x))).unwrap_or(f64::INFINITY)
    };
    let dims = 3 * n;
    let mut rng_state = 0x9E37_79B9_7F4A_7C15u64;
    let mut next = || {
        // splitmix64
        rng_state = rng_state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = rng_state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        (z ^ (z >> 31)) as f64 / u64::MAX as f64
    };
    let mut best: Option<MepResult> = None;
    for s in 0..MEP_STARTS {
        let x0: Vec<f64> = if s == 0 {
            vec![0.0; dims]
        } else {
            (0..dims).map(|_| next() * 2.0 * std::f64::consts::PI).collect()
        };
        let m = nelder_mead(&f, &x0, 0.6, MEP_TOL * 1e-3, 4000);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(MepResult { value: m.value, angles: m.x, converged: m.converged });
        }
        if best.as_ref().is_some_and(|b| b.value < 1e-12) {
            break;
        }
    }
    Ok(best.expect("at least one start"))
}

/// `Σ_{i≠j} |ρ_ij|`.
pub fn l1_coherence(m: &Matrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)].norm();
            }
        }
    }
    s
}

/// All two-qubit measures of a state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationProfile {
    pub concurrence: f64,
    pub negativity: f64,
    pub discord: f64,
    pub mutual_info: f64,
    pub classical_corr: f64,
    /// Of qubit `A`.
    pub linear_entropy: f64,
    pub mep: f64,
}

pub fn profile(rho: &DensityMatrix, side: Side) -> Result<CorrelationProfile> {
    require_qubits(rho, 2)?;
    let mutual_info = mutual_information(rho)?;
    let classical_corr = classical_correlation(rho, side)?.value;
    Ok(CorrelationProfile {
        concurrence: concurrence(rho)?,
        negativity: negativity(rho, &[0])?,
        discord: (mutual_info - classical_corr).max(0.0),
        mutual_info,
        classical_corr,
        linear_entropy: linear_entropy(&partial_trace(rho, &[0])?)?,
        mep: mep(rho)?.value,
    })
}
