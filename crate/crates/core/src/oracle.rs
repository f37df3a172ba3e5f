//! Brute-force reference simulator.
//!
//! Decoheres the whole resource density matrix, then walks the adaptive measurement tree
//! projecting one qubit at a time. Nothing is dropped, so it checks every shortcut taken by
//! the closed-form engines. Limited to six qubits.

use crate::channels::LocalChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    self, contract_matrix, left_op2, right_op2_dagger, DensityMatrix, Matrix, Op2, PureState, C64,
};
use crate::pattern::{MeasurementPattern, OutcomeVector};

pub const MAX_QUBITS: usize = 6;
/// Subtrees below this probability are not explored.
pub const PRUNE: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct OracleBranch {
    pub outcome: OutcomeVector,
    pub probability: f64,
    /// Normalized state of the output qubits (ascending vertex order).
    pub answer: Option<DensityMatrix>,
    /// Overlap of `answer` with the ideal output of this record.
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct OracleRun {
    pub branches: Vec<OracleBranch>,
    pub average: f64,
}

/// Applies `channels[v]` to vertex `v`, in ascending vertex order.
pub fn decohere(rho: &DensityMatrix, channels: &[Option<LocalChannel>]) -> Result<DensityMatrix> {
    let n = rho.qubits();
    if channels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: channels.len() });
    }
    let mut m = rho.matrix().clone();
    for (q, ch) in channels.iter().enumerate() {
        let Some(ch) = ch else { continue };
        let mut acc = Matrix::zeros(m.nrows(), m.ncols());
        for k in ch.kraus()? {
            let mut term = m.clone();
            left_op2(&mut term, n, q, &k);
            right_op2_dagger(&mut term, n, q, &k);
            acc += term;
        }
        m = acc;
    }
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Decoheres a pure resource and runs the pattern. The reference answer `|A_0⟩` is the
/// noiseless all-zero branch.
pub fn simulate(
    resource: &PureState,
    pat: &MeasurementPattern,
    channels: &[Option<LocalChannel>],
) -> Result<OracleRun> {
    if resource.qubits() > MAX_QUBITS {
        return Err(Error::TooLarge { what: "oracle qubits", got: resource.qubits(), max: MAX_QUBITS });
    }
    let ideal = pat.ideal_answers(resource)?;
    let a0 = ideal[0]
        .answer
        .clone()
        .ok_or_else(|| Error::Unsupported("the all-zero record is unreachable".into()))?;
    let rho = decohere(&resource.to_density(), channels)?;
    simulate_mixed(&rho, pat, &a0)
}

/// Runs the pattern on an arbitrary resource; `a0` is the noiseless answer of the all-zero
/// record.
pub fn simulate_mixed(rho: &DensityMatrix, pat: &MeasurementPattern, a0: &PureState) -> Result<OracleRun> {
    let n = rho.qubits();
    if n > MAX_QUBITS {
        return Err(Error::TooLarge { what: "oracle qubits", got: n, max: MAX_QUBITS });
    }
    if pat.total_qubits() != n {
        return Err(Error::DimensionMismatch { expected: pat.total_qubits(), got: n });
    }
    if a0.qubits() != pat.outputs().len() {
        return Err(Error::DimensionMismatch { expected: pat.outputs().len(), got: a0.qubits() });
    }
    let m = pat.len();
    let mut leaves: Vec<(f64, Option<Matrix>)> = vec![(0.0, None); 1 << m];
    descend(pat, rho.matrix().clone(), (0..n).collect(), 0, 0, &mut leaves);
    let mut branches = Vec::with_capacity(leaves.len());
    let mut average = 0.0;
    for (k, (p, state)) in leaves.into_iter().enumerate() {
        let answer = state.map(|s| DensityMatrix::from_matrix_unchecked(s / C64::new(p, 0.0)));
        let fidelity = answer.as_ref().map(|a| {
            let target = pat.branch_target(a0.amplitudes(), k as u64);
            linalg::quadratic_form(a.matrix(), &target).re
        });
        if let Some(f) = fidelity {
            average += p * f;
        }
        branches.push(OracleBranch { outcome: k as u64, probability: p, answer, fidelity });
    }
    Ok(OracleRun { branches, average })
}

fn descend(
    pat: &MeasurementPattern,
    m: Matrix,
    remaining: Vec<usize>,
    i: usize,
    k: u64,
    leaves: &mut [(f64, Option<Matrix>)],
) {
    let p = m.trace().re;
    if p < PRUNE {
        return;
    }
    if i == pat.len() {
        leaves[k as usize] = (p, Some(m));
        return;
    }
    let v = pat.measured()[i];
    let pos = remaining.iter().position(|&u| u == v).expect("measured vertex present");
    let rest: Vec<usize> = remaining.iter().copied().filter(|&u| u != v).collect();
    for bit in 0..2u64 {
        let kk = k | (bit << i);
        let basis = pat.branch_basis(i, kk);
        let next = contract_matrix(&m, remaining.len(), pos, &basis);
        descend(pat, next, rest.clone(), i + 1, kk, leaves);
    }
}

/// Born-rule statistics of measuring `qubit` in an orthonormal basis.
#[derive(Clone, Debug)]
pub struct MeasureOutcome {
    pub probabilities: [f64; 2],
    /// `P_j ρ P_j / p_j` on the full register; `None` when `p_j < 1e-14`.
    pub post: [Option<DensityMatrix>; 2],
}

pub fn measure_distribution(
    state: &DensityMatrix,
    qubit: usize,
    basis: (&PureState, &PureState),
) -> Result<MeasureOutcome> {
    linalg::check_qubit(qubit, state.qubits())?;
    let (b0, b1) = basis;
    if b0.qubits() != 1 || b1.qubits() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: b0.qubits().max(b1.qubits()) });
    }
    if b0.inner(b1).norm() > 1e-10 {
        return Err(Error::Unsupported("measurement basis is not orthogonal".into()));
    }
    let n = state.qubits();
    let mut probabilities = [0.0; 2];
    let mut post = [None, None];
    for (j, b) in [b0, b1].into_iter().enumerate() {
        let a = b.amplitudes();
        let proj = Op2::new(a[0] * a[0].conj(), a[0] * a[1].conj(), a[1] * a[0].conj(), a[1] * a[1].conj());
        let mut m = state.matrix().clone();
        left_op2(&mut m, n, qubit, &proj);
        right_op2_dagger(&mut m, n, qubit, &proj);
        let p = m.trace().re;
        probabilities[j] = p.max(0.0);
        if p >= PRUNE {
            post[j] = Some(DensityMatrix::from_matrix_unchecked(m / C64::new(p, 0.0)));
        }
    }
    Ok(MeasureOutcome { probabilities, post })
}
