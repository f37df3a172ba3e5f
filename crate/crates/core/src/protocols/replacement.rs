//! Trading the entangled resource of a non-adaptive pattern for a classically correlated one.
//!
//! Every measured qubit is dephased in its own measurement basis, which mixes the graph state
//! with its neighbor-`Z` image. Since each measurement commutes with the dephasing of its own
//! basis, the outcome statistics survive while every measured qubit ends up separable from
//! the rest.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::FixedPoleMap;
use crate::correlations::negativity;
use crate::error::{Error, Result};
use crate::linalg::{self, contract_vec, DensityMatrix, PureState, C64};
use crate::oracle::{self, MAX_QUBITS};
use crate::pattern::{basis_amplitudes, OutcomeVector};

use super::Protocol;

/// Bloch vector of a single-qubit pure state.
fn bloch_of(a: [C64; 2]) -> [f64; 3] {
    let c = a[0].conj() * a[1];
    [2.0 * c.re, 2.0 * c.im, a[0].norm_sqr() - a[1].norm_sqr()]
}

/// `ρ ↦ ½(ρ + (n̂·σ) ρ (n̂·σ))` with `n̂` the Bloch vector of `|M_0⟩`.
pub fn dephasing_map(theta: f64, alpha: f64) -> Result<FixedPoleMap> {
    FixedPoleMap::new(0.5, bloch_of(basis_amplitudes(theta, alpha, 0, 0)), std::f64::consts::PI)
}

/// One term `w |M_k⟩⟨M_k| ⊗ |A_k⟩⟨A_k|` of the replaced resource.
#[derive(Clone, Debug)]
pub struct EnsembleTerm {
    pub outcome: OutcomeVector,
    pub weight: f64,
    pub answer: PureState,
}

#[derive(Clone, Debug)]
pub enum Replaced {
    /// Full density matrix, for resources the oracle can handle.
    Dense(DensityMatrix),
    /// Product-state decomposition over the measured qubits.
    Ensemble(Vec<EnsembleTerm>),
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplacementReport {
    /// Measured vertices, in measurement order.
    pub replaced: Vec<usize>,
    /// Record probabilities on the original resource.
    pub original: Vec<f64>,
    /// Record probabilities on the replacement.
    pub replacement: Vec<f64>,
    /// Largest total-variation distance over the compared distributions.
    pub distance: f64,
    /// Negativity of each replaced vertex against the rest (dense case only).
    pub negativities: Vec<(usize, f64)>,
    /// Number of marginals compared.
    pub marginals: usize,
}

pub const DISTANCE_TOL: f64 = 1e-10;
pub const NEGATIVITY_TOL: f64 = 1e-9;

impl ReplacementReport {
    pub fn max_negativity(&self) -> f64 {
        self.negativities.iter().fold(0.0, |m, (_, v)| m.max(*v))
    }

    pub fn distribution_ok(&self) -> bool {
        self.distance <= DISTANCE_TOL
    }

    pub fn separable_ok(&self) -> bool {
        self.max_negativity() < NEGATIVITY_TOL
    }
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

pub const SAMPLED_MARGINALS: usize = 24;
pub const MARGINAL_SIZE: usize = 4;
const MARGINAL_SEED: u64 = 0x5eed;

/// Builds the classically correlated resource of a non-adaptive protocol.
///
/// Up to six qubits the replaced density matrix is formed explicitly and run through the
/// oracle. Larger resources are returned as an ensemble and checked on sampled marginals
/// against direct contraction of the pure resource.
pub fn classical_replacement(p: &Protocol, input: Option<&PureState>) -> Result<(Replaced, ReplacementReport)> {
    let pat = &p.pattern;
    if pat.is_adaptive() {
        return Err(Error::AdaptivePattern);
    }
    let resource = p.resource(input)?;
    let ideal = pat.ideal_answers(&resource)?;
    let original: Vec<f64> = ideal.iter().map(|b| b.probability).collect();
    let replaced_vertices = pat.measured().to_vec();

    if resource.qubits() <= MAX_QUBITS {
        let mut rho = resource.to_density();
        for (&v, a) in pat.measured().iter().zip(pat.angles()) {
            rho = dephasing_map(a.theta, a.alpha)?.apply(&rho, v)?;
        }
        let a0 = ideal[0]
            .answer
            .clone()
            .ok_or_else(|| Error::Unsupported("the all-zero record is unreachable".into()))?;
        let run = oracle::simulate_mixed(&rho, pat, &a0)?;
        let replacement: Vec<f64> = run.branches.iter().map(|b| b.probability).collect();
        let negativities = replaced_vertices
            .iter()
            .map(|&v| Ok((v, negativity(&rho, &[v])?)))
            .collect::<Result<Vec<_>>>()?;
        let report = ReplacementReport {
            replaced: replaced_vertices,
            distance: total_variation(&original, &replacement),
            original,
            replacement,
            negativities,
            marginals: 1,
        };
        return Ok((Replaced::Dense(rho), report));
    }

    let answers = pat.unnormalized_answers(&resource)?;
    let n_out = pat.outputs().len();
    let terms: Vec<EnsembleTerm> = answers
        .iter()
        .enumerate()
        .filter_map(|(k, a)| {
            let w = linalg::norm_sqr(a);
            (w > 1e-14).then(|| EnsembleTerm {
                outcome: k as u64,
                weight: w,
                answer: PureState::from_raw(n_out, a.iter().map(|x| x / w.sqrt()).collect()),
            })
        })
        .collect();
    let replacement: Vec<f64> = answers.iter().map(|a| linalg::norm_sqr(a)).collect();

    let m = pat.len();
    let mut rng = ChaCha8Rng::seed_from_u64(MARGINAL_SEED);
    let mut distance: f64 = 0.0;
    for _ in 0..SAMPLED_MARGINALS {
        let size = rng.random_range(1..=MARGINAL_SIZE.min(m));
        let mut subset = sample(&mut rng, m, size).into_vec();
        subset.sort_unstable();
        let direct = pure_marginal(&resource, p, &subset);
        let mut from_terms = vec![0.0; 1 << size];
        for t in &terms {
            from_terms[project(t.outcome, &subset)] += t.weight;
        }
        distance = distance.max(total_variation(&direct, &from_terms));
    }
    let report = ReplacementReport {
        replaced: replaced_vertices,
        original,
        replacement,
        distance,
        negativities: Vec::new(),
        marginals: SAMPLED_MARGINALS,
    };
    Ok((Replaced::Ensemble(terms), report))
}

/// Bits of `k` at the given measurement positions, packed in order.
fn project(k: OutcomeVector, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |acc, (j, &i)| acc | ((((k >> i) & 1) as usize) << j))
}

/// Joint distribution of the measurements at `positions`, by contracting only those qubits.
fn pure_marginal(resource: &PureState, p: &Protocol, positions: &[usize]) -> Vec<f64> {
    let pat = &p.pattern;
    let n = resource.qubits();
    let mut out = vec![0.0; 1 << positions.len()];
    for (sub, slot) in out.iter_mut().enumerate() {
        let mut amps = resource.amplitudes().to_vec();
        let mut remaining: Vec<usize> = (0..n).collect();
        for (j, &i) in positions.iter().enumerate() {
            let v = pat.measured()[i];
            let a = pat.angles()[i];
            let bra = basis_amplitudes(a.theta, a.alpha, 0, ((sub >> j) & 1) as u8);
            let pos = remaining.iter().position(|&u| u == v).expect("measured vertex present");
            amps = contract_vec(&amps, remaining.len(), pos, &bra);
            remaining.remove(pos);
        }
        *slot = linalg::norm_sqr(&amps);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphstate::{build_graph_state, Graph};
    use crate::linalg::{tensor, ops, Matrix};
    use crate::pattern::{Angle, BooleanExpr, Byproduct, MeasurementPattern};
    use crate::protocols::{cnot15, dj, rotation, DjFunction, Reference};

    #[test]
    fn two_vertex_replacement_matches_closed_form() {
        let pattern = MeasurementPattern::new(
            vec![0],
            vec![Angle::xy(0.0)],
            vec![BooleanExpr::zero()],
            vec![Byproduct { qubit: 1, fx: BooleanExpr::xor_of([0]), fz: BooleanExpr::zero(), fsig: BooleanExpr::zero() }],
        )
        .unwrap();
        let p = Protocol::new("g2", Graph::linear(2), pattern, vec![], Reference::State(PureState::plus(1))).unwrap();
        let (rep, report) = classical_replacement(&p, None).unwrap();
        let Replaced::Dense(rho) = rep else { panic!("expected dense") };
        // |G_2⟩ = (|+⟩|0⟩ + |−⟩|1⟩)/√2
        let plus = PureState::plus(1).to_density();
        let minus = plus.conjugate(0, &ops::z()).unwrap();
        let (zero, one) = (PureState::basis(1, 0).to_density(), PureState::basis(1, 1).to_density());
        let expected = (tensor(&plus, &zero).into_matrix() + tensor(&minus, &one).into_matrix()) * C64::new(0.5, 0.0);
        assert!((rho.matrix() - &expected).norm() < 1e-12);
        let mut flipped: Matrix = rho.matrix().clone();
        linalg::conjugate_op2(&mut flipped, 2, 0, &ops::x());
        assert!((flipped - rho.matrix()).norm() < 1e-12);
        assert!(report.distribution_ok() && report.separable_ok());
        // the graph state itself is entangled across the same cut
        let g = build_graph_state(&Graph::linear(2)).state().to_density();
        assert!(negativity(&g, &[0]).unwrap() > 0.4);
    }

    #[test]
    fn dj_replacement_keeps_the_answer() {
        for f in [DjFunction::Constant(0), DjFunction::Constant(1), DjFunction::Balanced] {
            let d = dj(3, f).unwrap();
            let (rep, report) = classical_replacement(&d.protocol, None).unwrap();
            assert!(matches!(rep, Replaced::Dense(_)));
            assert!(report.distribution_ok(), "{}", report.distance);
            assert!(report.separable_ok(), "{}", report.max_negativity());
            let p0 = d.prob_all_zero(&report.replacement);
            let expected = if f == DjFunction::Balanced { 0.0 } else { 1.0 };
            assert!((p0 - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn cnot_replacement_on_sampled_marginals() {
        let p = cnot15();
        let input = PureState::qubit(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let input = tensor(&input, &PureState::plus(1));
        let (rep, report) = classical_replacement(&p, Some(&input)).unwrap();
        let Replaced::Ensemble(terms) = rep else { panic!("expected ensemble") };
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert_eq!(report.marginals, SAMPLED_MARGINALS);
        assert!(report.distribution_ok(), "{}", report.distance);
    }

    #[test]
    fn adaptive_patterns_are_rejected() {
        let p = rotation(0.1, 0.2, 0.3);
        let input = PureState::basis(1, 0);
        assert!(matches!(classical_replacement(&p, Some(&input)), Err(Error::AdaptivePattern)));
    }

    #[test]
    fn dephasing_fixes_its_basis() {
        for (theta, alpha) in [(0.0, std::f64::consts::FRAC_PI_2), (0.7, 1.1), (0.0, 0.0)] {
            let map = dephasing_map(theta, alpha).unwrap();
            for k in 0..2 {
                let s = PureState::from_raw(1, basis_amplitudes(theta, alpha, 0, k).to_vec()).to_density();
                let out = map.apply(&s, 0).unwrap();
                assert!((out.matrix() - s.matrix()).norm() < 1e-12);
            }
        }
    }
}
