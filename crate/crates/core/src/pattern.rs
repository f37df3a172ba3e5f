//! Measurement patterns: bases, adaptations, by-products and the ideal answer states.
//!
//! Outcome vectors are packed into a `u64`: the outcome of the `i`-th measurement (in
//! temporal order) is bit `i`. Boolean expressions refer to outcomes by the *vertex* that
//! produced them.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphstate::Graph;
use crate::linalg::{self, apply_op2_vec, contract_vec, ops, Matrix, PureState, C64, ONE};

/// Packed measurement record.
pub type OutcomeVector = u64;

/// Outcome of measurement `i`.
#[inline]
pub fn outcome_bit(k: OutcomeVector, i: usize) -> u8 {
    ((k >> i) & 1) as u8
}

/// Renders `k` as `k1k2…kM`.
pub fn outcome_string(k: OutcomeVector, m: usize) -> String {
    (0..m).map(|i| if outcome_bit(k, i) == 1 { '1' } else { '0' }).collect()
}

/// XOR of a constant, single outcomes and pairwise products of outcomes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BooleanExpr {
    #[serde(rename = "const", default)]
    pub constant: u8,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xor: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub and2: Vec<[usize; 2]>,
}

impl BooleanExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self { constant: 1, ..Self::default() }
    }

    pub fn xor_of(vertices: impl IntoIterator<Item = usize>) -> Self {
        Self { xor: vertices.into_iter().collect(), ..Self::default() }
    }

    pub fn with_const(mut self, c: u8) -> Self {
        self.constant = c;
        self
    }

    pub fn with_and(mut self, a: usize, b: usize) -> Self {
        self.and2.push([a, b]);
        self
    }

    /// Identically zero (no constant, no terms).
    pub fn is_zero(&self) -> bool {
        self.constant == 0 && self.xor.is_empty() && self.and2.is_empty()
    }

    pub fn is_affine(&self) -> bool {
        self.and2.is_empty()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.xor.iter().copied().chain(self.and2.iter().flatten().copied()).collect()
    }

    /// Evaluates with `value(v)` giving the outcome bit of vertex `v`.
    pub fn eval(&self, value: impl Fn(usize) -> u8) -> u8 {
        let mut acc = self.constant & 1;
        for &v in &self.xor {
            acc ^= value(v) & 1;
        }
        for &[a, b] in &self.and2 {
            acc ^= value(a) & value(b) & 1;
        }
        acc
    }

    fn compile(&self, position: &dyn Fn(usize) -> Option<usize>) -> Result<Compiled> {
        if self.constant > 1 {
            return Err(Error::InvalidPattern(format!("constant {} is not a bit", self.constant)));
        }
        let pos = |v: usize| {
            position(v).ok_or_else(|| Error::InvalidPattern(format!("vertex {v} is not measured")))
        };
        let mut xor_mask = 0u64;
        for &v in &self.xor {
            xor_mask ^= 1 << pos(v)?;
        }
        let mut and_masks = Vec::with_capacity(self.and2.len());
        for &[a, b] in &self.and2 {
            and_masks.push((1u64 << pos(a)?) | (1u64 << pos(b)?));
        }
        Ok(Compiled { constant: self.constant, xor_mask, and_masks })
    }
}

/// Position-indexed form of a [`BooleanExpr`].
#[derive(Clone, Debug, PartialEq, Eq)]
struct Compiled {
    constant: u8,
    xor_mask: u64,
    and_masks: Vec<u64>,
}

impl Compiled {
    fn eval(&self, k: OutcomeVector) -> u8 {
        let mut acc = self.constant ^ ((k & self.xor_mask).count_ones() & 1) as u8;
        for &m in &self.and_masks {
            acc ^= (k & m == m) as u8;
        }
        acc
    }

    fn highest_position(&self) -> Option<u32> {
        let all = self.and_masks.iter().fold(self.xor_mask, |a, m| a | m);
        (all != 0).then(|| 63 - all.leading_zeros())
    }
}

/// Measurement angles of one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angle {
    pub theta: f64,
    pub alpha: f64,
}

impl Angle {
    pub fn xy(theta: f64) -> Self {
        Self { theta, alpha: FRAC_PI_2 }
    }

    pub fn z() -> Self {
        Self { theta: 0.0, alpha: 0.0 }
    }

    pub fn plane(&self) -> Plane {
        if self.alpha.abs() < 1e-12 {
            Plane::Z
        } else if (self.alpha - FRAC_PI_2).abs() < 1e-12 {
            Plane::Xy
        } else {
            Plane::Other
        }
    }
}

/// Which mixing probability governs a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Z,
    Other,
}

/// Pauli correction on one output qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Byproduct {
    pub qubit: usize,
    #[serde(default)]
    pub fx: BooleanExpr,
    #[serde(default)]
    pub fz: BooleanExpr,
    #[serde(default)]
    pub fsig: BooleanExpr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternJson {
    measured: Vec<usize>,
    angles: Vec<Angle>,
    adapt: Vec<BooleanExpr>,
    byproducts: Vec<Byproduct>,
}

/// Ordered single-qubit measurements with their adaptations and by-product corrections.
///
/// Output qubits are the by-product qubits; answer states list them in ascending vertex
/// order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PatternJson", into = "PatternJson")]
pub struct MeasurementPattern {
    measured: Vec<usize>,
    angles: Vec<Angle>,
    adapt: Vec<BooleanExpr>,
    byproducts: Vec<Byproduct>,
    outputs: Vec<usize>,
    adapt_c: Vec<Compiled>,
    // per output, in ascending vertex order: (fx, fz, fsig)
    bp_c: Vec<[Compiled; 3]>,
}

impl TryFrom<PatternJson> for MeasurementPattern {
    type Error = Error;
    fn try_from(j: PatternJson) -> Result<Self> {
        MeasurementPattern::new(j.measured, j.angles, j.adapt, j.byproducts)
    }
}

impl From<MeasurementPattern> for PatternJson {
    fn from(p: MeasurementPattern) -> Self {
        PatternJson { measured: p.measured, angles: p.angles, adapt: p.adapt, byproducts: p.byproducts }
    }
}

pub const MAX_MEASUREMENTS: usize = 63;

impl MeasurementPattern {
    pub fn new(
        measured: Vec<usize>,
        angles: Vec<Angle>,
        adapt: Vec<BooleanExpr>,
        byproducts: Vec<Byproduct>,
    ) -> Result<Self> {
        let m = measured.len();
        if angles.len() != m || adapt.len() != m {
            return Err(Error::InvalidPattern(format!(
                "{m} measured qubits but {} angles and {} adaptations",
                angles.len(),
                adapt.len()
            )));
        }
        if m > MAX_MEASUREMENTS {
            return Err(Error::TooLarge { what: "measurements", got: m, max: MAX_MEASUREMENTS });
        }
        let unique: BTreeSet<usize> = measured.iter().copied().collect();
        if unique.len() != m {
            return Err(Error::InvalidPattern("a qubit is measured twice".into()));
        }
        if angles.iter().any(|a| !a.theta.is_finite() || !a.alpha.is_finite()) {
            return Err(Error::InvalidPattern("non-finite angle".into()));
        }
        let position = |v: usize| measured.iter().position(|&u| u == v);
        let mut adapt_c = Vec::with_capacity(m);
        for (i, e) in adapt.iter().enumerate() {
            let c = e.compile(&position)?;
            if c.constant != 0 || c.highest_position().is_some_and(|h| h as usize >= i) {
                return Err(Error::InvalidPattern(format!(
                    "adaptation of qubit {} must depend only on earlier outcomes",
                    measured[i]
                )));
            }
            if angles[i].plane() == Plane::Z && !e.is_zero() {
                return Err(Error::InvalidPattern(format!(
                    "qubit {} is measured along z and cannot be adapted",
                    measured[i]
                )));
            }
            adapt_c.push(c);
        }
        let mut sorted = byproducts.clone();
        sorted.sort_by_key(|b| b.qubit);
        let outputs: Vec<usize> = sorted.iter().map(|b| b.qubit).collect();
        if outputs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPattern("duplicate output qubit".into()));
        }
        if outputs.iter().any(|o| unique.contains(o)) {
            return Err(Error::InvalidPattern("an output qubit is also measured".into()));
        }
        if outputs.is_empty() {
            return Err(Error::InvalidPattern("no output qubits".into()));
        }
        let mut bp_c = Vec::with_capacity(sorted.len());
        for b in &sorted {
            bp_c.push([b.fx.compile(&position)?, b.fz.compile(&position)?, b.fsig.compile(&position)?]);
        }
        Ok(Self { measured, angles, adapt, byproducts, outputs, adapt_c, bp_c })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pattern serializes")
    }

    /// Checks that the pattern measures or outputs every vertex of `g` exactly once.
    pub fn validate_for(&self, g: &Graph) -> Result<()> {
        let n = g.vertices();
        let mut seen = vec![false; n];
        for &v in self.measured.iter().chain(&self.outputs) {
            linalg::check_qubit(v, n)?;
            seen[v] = true;
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPattern(format!("vertex {v} is neither measured nor an output")));
        }
        Ok(())
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn adaptations(&self) -> &[BooleanExpr] {
        &self.adapt
    }

    pub fn byproducts(&self) -> &[Byproduct] {
        &self.byproducts
    }

    /// Output vertices in ascending order.
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.measured.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measured.is_empty()
    }

    pub fn total_qubits(&self) -> usize {
        self.measured.len() + self.outputs.len()
    }

    /// Measurement position of vertex `v`.
    pub fn position_of(&self, v: usize) -> Option<usize> {
        self.measured.iter().position(|&u| u == v)
    }

    pub fn is_adaptive(&self) -> bool {
        self.adapt.iter().any(|e| !e.is_zero())
    }

    /// Whether every by-product function is affine.
    pub fn byproducts_affine(&self) -> bool {
        self.byproducts.iter().all(|b| b.fx.is_affine() && b.fz.is_affine())
    }

    /// `s_i(k)` for measurement `i`.
    pub fn adaptation(&self, i: usize, k: OutcomeVector) -> u8 {
        self.adapt_c[i].eval(k)
    }

    /// All adaptation bits packed like an outcome vector.
    pub fn adaptation_bits(&self, k: OutcomeVector) -> u64 {
        (0..self.len()).fold(0, |acc, i| acc | ((self.adaptation(i, k) as u64) << i))
    }

    /// Basis vector `|M_{k_i}^{s_i(k)}⟩` used by measurement `i` on branch `k`.
    pub fn branch_basis(&self, i: usize, k: OutcomeVector) -> [C64; 2] {
        let a = self.angles[i];
        basis_amplitudes(a.theta, a.alpha, self.adaptation(i, k), outcome_bit(k, i))
    }

    /// `(f_X, f_Z, f_Sig)` of each output (ascending vertex order) on branch `k`.
    pub fn byproduct_bits(&self, k: OutcomeVector) -> Vec<[u8; 3]> {
        self.bp_c.iter().map(|c| [c[0].eval(k), c[1].eval(k), c[2].eval(k)]).collect()
    }

    /// `⊗_i (−1)^{f_Sig} X^{f_X} Z^{f_Z}` on the output register.
    pub fn byproduct_unitary(&self, k: OutcomeVector) -> Matrix {
        let bits = self.byproduct_bits(k);
        let mut u = Matrix::from_element(1, 1, ONE);
        for [fx, fz, fsig] in bits {
            let mut op = ops::identity();
            if fz == 1 {
                op = ops::z() * op;
            }
            if fx == 1 {
                op = ops::x() * op;
            }
            if fsig == 1 {
                op = -op;
            }
            let op = Matrix::from_iterator(2, 2, op.iter().cloned());
            u = u.kronecker(&op);
        }
        u
    }

    /// Applies the by-product of branch `k` to an output-register vector.
    pub fn apply_byproduct(&self, k: OutcomeVector, amps: &mut [C64]) {
        let bits = self.byproduct_bits(k);
        let n = bits.len();
        let mut sign = false;
        for (q, [fx, fz, fsig]) in bits.into_iter().enumerate() {
            if fz == 1 {
                apply_op2_vec(amps, n, q, &ops::z());
            }
            if fx == 1 {
                apply_op2_vec(amps, n, q, &ops::x());
            }
            sign ^= fsig == 1;
        }
        if sign {
            amps.iter_mut().for_each(|a| *a = -*a);
        }
    }

    /// `BP_r BP_0 |a0⟩`: the output expected on record `r` when `a0` is the answer of the
    /// all-zero record.
    pub fn branch_target(&self, a0: &[C64], r: OutcomeVector) -> Vec<C64> {
        let mut v = a0.to_vec();
        self.apply_byproduct(0, &mut v);
        self.apply_byproduct(r, &mut v);
        v
    }

    /// Unnormalized answers `Ã_k = (⊗_i ⟨M_{k_i}^{s_i(k)}|) |ψ⟩` for all `2^M` branches.
    pub fn unnormalized_answers(&self, resource: &PureState) -> Result<Vec<Vec<C64>>> {
        let n = resource.qubits();
        if self.total_qubits() != n {
            return Err(Error::DimensionMismatch { expected: self.total_qubits(), got: n });
        }
        for &v in self.measured.iter().chain(&self.outputs) {
            linalg::check_qubit(v, n)?;
        }
        let m = self.len();
        let mut out = vec![Vec::new(); 1 << m];
        let remaining: Vec<usize> = (0..n).collect();
        self.descend(resource.amplitudes().to_vec(), remaining, 0, 0, &mut out);
        Ok(out)
    }

    fn descend(&self, amps: Vec<C64>, remaining: Vec<usize>, i: usize, k: u64, out: &mut [Vec<C64>]) {
        if i == self.len() {
            out[k as usize] = amps;
            return;
        }
        let v = self.measured[i];
        let pos = remaining.iter().position(|&u| u == v).expect("measured vertex present");
        let rest: Vec<usize> = remaining.iter().copied().filter(|&u| u != v).collect();
        let n = remaining.len();
        for bit in 0..2u64 {
            let kk = k | (bit << i);
            let bra = self.branch_basis(i, kk);
            let next = contract_vec(&amps, n, pos, &bra);
            self.descend(next, rest.clone(), i + 1, kk, out);
        }
    }

    /// Every branch with its probability and normalized answer.
    pub fn ideal_answers(&self, resource: &PureState) -> Result<Vec<Branch>> {
        Ok(self
            .unnormalized_answers(resource)?
            .into_iter()
            .map(|a| {
                let p = linalg::norm_sqr(&a);
                let n_out = self.outputs.len();
                let answer = if p > 1e-14 {
                    Some(PureState::from_raw(n_out, a.iter().map(|x| x / p.sqrt()).collect()))
                } else {
                    None
                };
                Branch { probability: p, answer }
            })
            .collect())
    }
}

/// One branch of the ideal measurement tree. `answer` is `None` on unreachable branches.
#[derive(Clone, Debug)]
pub struct Branch {
    pub probability: f64,
    pub answer: Option<PureState>,
}

/// `|M_k^s(θ, α)⟩` as two amplitudes.
pub fn basis_amplitudes(theta: f64, alpha: f64, s: u8, k: u8) -> [C64; 2] {
    let sign = if s & 1 == 0 { 1.0 } else { -1.0 };
    let phase = C64::from_polar(1.0, -sign * theta);
    let (c, sn) = ((alpha / 2.0).cos(), (alpha / 2.0).sin());
    if k & 1 == 0 {
        [C64::new(c, 0.0), phase * sn]
    } else {
        [C64::new(sn, 0.0), -phase * c]
    }
}

pub fn basis_vector(theta: f64, alpha: f64, s: u8, k: u8) -> PureState {
    PureState::from_raw(1, basis_amplitudes(theta, alpha, s, k).to_vec())
}

/// Branch-wise fidelity of the ideal answers against `BP_k BP_0 |Ã_0⟩`; `None` on unreachable
/// branches.
pub fn zero_noise_fidelities(pat: &MeasurementPattern, resource: &PureState) -> Result<Vec<Option<f64>>> {
    let branches = pat.ideal_answers(resource)?;
    let zero = branches[0]
        .answer
        .clone()
        .ok_or_else(|| Error::Internal("branch 0 unreachable".into()))?;
    Ok(branches
        .iter()
        .enumerate()
        .map(|(k, b)| {
            b.answer.as_ref().map(|ans| {
                let target = pat.branch_target(zero.amplitudes(), k as u64);
                linalg::inner(&target, ans.amplitudes()).norm_sqr()
            })
        })
        .collect())
}
