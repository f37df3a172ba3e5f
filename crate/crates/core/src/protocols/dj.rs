//! Deutsch-Jozsa on a graph state, without adaptations.
//!
//! Registers `r1..rN` sit on vertices `0..N-1` and start in `|+⟩ = H|0⟩`. The ancilla is a
//! three-vertex wire `a0 - a1 - a2` on vertices `N, N+1, N+2`. Measuring `a0` in `X` leaves
//! `a1` in `|k_{a0}⟩`, so a `CZ` edge from `r1` to `a1` acts as `CNOT_{1,A}` on an ancilla in
//! `|−⟩` up to a `Z^{k_{a0}⊕1}` by-product on `r1`. Register edges `r_i - r_{i+1}` for
//! `i ≥ 2` supply the `CZ_{i,i+1}` part of the balanced oracle. Every register is then
//! measured in `X`, which is `H` followed by a computational readout.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::graphstate::Graph;
use crate::linalg::{PureState, C64};
use crate::pattern::{Angle, BooleanExpr, Byproduct, MeasurementPattern, OutcomeVector};

use super::{Protocol, Reference};

/// Oracle functions with an adaptation-free graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DjFunction {
    /// `f ≡ c`.
    Constant(u8),
    /// `f(x) = x1 ⊕ x2x3 ⊕ x3x4 ⊕ … ⊕ x_{N-1}x_N`.
    Balanced,
}

impl DjFunction {
    /// Classical value of `f` on bits `x[0..n]` (`x[0]` is `x1`).
    pub fn eval(&self, x: &[u8]) -> u8 {
        match *self {
            DjFunction::Constant(c) => c & 1,
            DjFunction::Balanced => {
                let mut v = x[0];
                for i in 1..x.len().saturating_sub(1) {
                    v ^= x[i] & x[i + 1];
                }
                v & 1
            }
        }
    }
}

/// Protocol plus the map from raw outcomes to the logical register readout.
#[derive(Clone, Debug)]
pub struct DjProtocol {
    pub protocol: Protocol,
    pub function: DjFunction,
    pub n: usize,
    /// One expression per register, over vertex ids.
    pub readout: Vec<BooleanExpr>,
}

pub const MAX_BITS: usize = 17;

pub fn dj(n: usize, function: DjFunction) -> Result<DjProtocol> {
    if n == 0 {
        return Err(Error::Unsupported("Deutsch-Jozsa needs at least one input bit".into()));
    }
    if n > MAX_BITS {
        return Err(Error::TooLarge { what: "Deutsch-Jozsa bits", got: n, max: MAX_BITS });
    }
    if let DjFunction::Constant(c) = function {
        if c > 1 {
            return Err(Error::Unsupported(format!("constant {c} is not a bit")));
        }
    }
    let (a0, a1, a2) = (n, n + 1, n + 2);
    let mut edges = vec![(a0, a1), (a1, a2)];
    let balanced = function == DjFunction::Balanced;
    if balanced {
        edges.push((0, a1));
        edges.extend((1..n.saturating_sub(1)).map(|i| (i, i + 1)));
    }
    let graph = Graph::new(n + 3, edges)?;
    let measured: Vec<usize> = [a0, a1].into_iter().chain(0..n).collect();
    let pattern = MeasurementPattern::new(
        measured,
        vec![Angle::xy(0.0); n + 2],
        vec![BooleanExpr::zero(); n + 2],
        vec![Byproduct {
            qubit: a2,
            fx: BooleanExpr::xor_of([a1]),
            fz: BooleanExpr::xor_of([a0]).with_const(1),
            fsig: BooleanExpr::zero(),
        }],
    )?;
    let mut readout: Vec<BooleanExpr> = (0..n).map(|j| BooleanExpr::xor_of([j])).collect();
    if balanced {
        readout[0] = BooleanExpr::xor_of([0, a0]).with_const(1);
    }
    let minus = PureState::from_raw(1, vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)]);
    let name = match function {
        DjFunction::Constant(c) => format!("dj{n}-const{c}"),
        DjFunction::Balanced => format!("dj{n}-balanced"),
    };
    let protocol = Protocol::new(name, graph, pattern, vec![], Reference::State(minus))?;
    Ok(DjProtocol { protocol, function, n, readout })
}

impl DjProtocol {
    /// Logical register bits packed with `d1` as bit 0.
    pub fn logical(&self, k: OutcomeVector) -> u64 {
        let pat = &self.protocol.pattern;
        let value = |v: usize| pat.position_of(v).map_or(0, |i| ((k >> i) & 1) as u8);
        self.readout
            .iter()
            .enumerate()
            .fold(0, |acc, (j, e)| acc | ((e.eval(value) as u64) << j))
    }

    /// Probability of the all-zero logical readout from per-record probabilities.
    pub fn prob_all_zero(&self, record_probabilities: &[f64]) -> f64 {
        record_probabilities
            .iter()
            .enumerate()
            .filter(|(k, _)| self.logical(*k as u64) == 0)
            .map(|(_, p)| p)
            .sum()
    }

    /// `prob_all_zero` on the noiseless graph state.
    pub fn prob_all_zero_ideal(&self) -> Result<f64> {
        let res = self.protocol.resource(None)?;
        let probs: Vec<f64> = self.protocol.pattern.ideal_answers(&res)?.iter().map(|b| b.probability).collect();
        Ok(self.prob_all_zero(&probs))
    }

    /// Whether the readout declares `f` constant, as it should on every reachable record.
    pub fn declares_constant(&self, k: OutcomeVector) -> bool {
        self.logical(k) == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_matches_truth_table() {
        let table = [0, 0, 0, 1, 1, 1, 1, 0];
        for (x, &f) in table.iter().enumerate() {
            let bits = [(x >> 2) as u8 & 1, (x >> 1) as u8 & 1, x as u8 & 1];
            assert_eq!(DjFunction::Balanced.eval(&bits), f, "x = {x:03b}");
        }
    }

    #[test]
    fn discrimination_in_one_query() {
        for n in 1..=5 {
            for c in 0..2 {
                let p = dj(n, DjFunction::Constant(c)).unwrap();
                assert!((p.prob_all_zero_ideal().unwrap() - 1.0).abs() < 1e-10);
                assert!((p.protocol.zero_noise_fidelity(None).unwrap() - 1.0).abs() < 1e-10);
            }
            let p = dj(n, DjFunction::Balanced).unwrap();
            assert!(p.prob_all_zero_ideal().unwrap().abs() < 1e-10);
            assert!((p.protocol.zero_noise_fidelity(None).unwrap() - 1.0).abs() < 1e-10);
            assert!(!p.protocol.pattern.is_adaptive());
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(dj(0, DjFunction::Balanced).is_err());
        assert!(dj(3, DjFunction::Constant(2)).is_err());
    }
}
