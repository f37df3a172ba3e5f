//! Closed-form fidelity of a noisy measurement pattern.
//!
//! The resource is expanded along the measurement tree as
//! `|ψ⟩ = Σ_k (⊗_i |M_{k_i}^{s_i(k)}⟩) ⊗ |Ã_k⟩`. Local noise on a measured qubit only
//! reshuffles weight between the two outcomes of its basis, so the probability of a record
//! `r` and the fidelity of the corresponding output with `BP_r|A_0⟩` reduce to sums over
//! pairs of branches weighted by the mixing probabilities.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::NoiseChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, left_op2, right_op2_dagger, Matrix, Op2, PureState, C64, ONE, ZERO};
use crate::pattern::{outcome_bit, outcome_string, MeasurementPattern, OutcomeVector, Plane};

pub const MAX_ADAPTIVE: usize = 8;
pub const MAX_NONADAPTIVE: usize = 20;
pub const MAX_KERNEL: usize = 6;
/// Records with probability below this are reported without a fidelity.
pub const UNREACHABLE: f64 = 1e-12;

/// Probability and fidelity of one measurement record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFidelity {
    pub outcome: OutcomeVector,
    pub probability: f64,
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub measurements: usize,
    pub outcomes: Vec<OutcomeFidelity>,
    pub average: f64,
}

impl FidelityReport {
    fn from_outcomes(measurements: usize, outcomes: Vec<OutcomeFidelity>) -> Self {
        let average = average_of(&outcomes);
        Self { measurements, outcomes, average }
    }

    pub fn average(&self) -> f64 {
        self.average
    }

    pub fn get(&self, r: OutcomeVector) -> Option<&OutcomeFidelity> {
        self.outcomes.get(r as usize).filter(|o| o.outcome == r)
    }

    /// Rows `t,outcome,Z,F` (empty `F` for unreachable records).
    pub fn write_csv<W: Write>(&self, out: W, t: f64) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["t", "outcome", "Z", "F"])?;
        for o in &self.outcomes {
            w.write_record([
                t.to_string(),
                outcome_string(o.outcome, self.measurements),
                o.probability.to_string(),
                o.fidelity.map(|f| f.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `{"t": …, "F_bar": …}`.
    pub fn summary_json(&self, t: f64) -> serde_json::Value {
        serde_json::json!({ "t": t, "F_bar": self.average })
    }
}

/// `Σ_r Z_r F(r)` over reachable records.
pub fn average(report: &FidelityReport) -> f64 {
    average_of(&report.outcomes)
}

fn average_of(outcomes: &[OutcomeFidelity]) -> f64 {
    outcomes.iter().filter_map(|o| o.fidelity.map(|f| f * o.probability)).sum()
}

/// Ideal-answer data shared by the engines.
struct Answers {
    m: usize,
    /// `Ã_k`, unnormalized.
    tilde: Vec<Vec<C64>>,
    /// `|A_0⟩`, normalized.
    a0: Vec<C64>,
}

impl Answers {
    fn new(pat: &MeasurementPattern, resource: &PureState) -> Result<Self> {
        let tilde = pat.unnormalized_answers(resource)?;
        let p0 = linalg::norm_sqr(&tilde[0]);
        if p0 < UNREACHABLE {
            return Err(Error::Unsupported("the all-zero record is unreachable; no reference answer".into()));
        }
        let a0 = tilde[0].iter().map(|a| a / p0.sqrt()).collect();
        Ok(Self { m: pat.len(), tilde, a0 })
    }

    /// Ideal output of record `r`.
    fn target(&self, pat: &MeasurementPattern, r: OutcomeVector) -> Vec<C64> {
        pat.branch_target(&self.a0, r)
    }
}

fn check_channels(pat: &MeasurementPattern, measured: &[NoiseChannel], answer: &[NoiseChannel]) -> Result<()> {
    if measured.len() != pat.len() {
        return Err(Error::DimensionMismatch { expected: pat.len(), got: measured.len() });
    }
    if answer.len() != pat.outputs().len() {
        return Err(Error::DimensionMismatch { expected: pat.outputs().len(), got: answer.len() });
    }
    if let Some(i) = pat.angles().iter().position(|a| a.plane() == Plane::Other) {
        return Err(Error::Unsupported(format!(
            "measurement {i} is neither equatorial nor along z"
        )));
    }
    Ok(())
}

/// `p(a)` per measurement: weight carried from outcome `a` to the other outcome.
fn flip_probabilities(pat: &MeasurementPattern, measured: &[NoiseChannel]) -> Vec<[f64; 2]> {
    pat.angles()
        .iter()
        .zip(measured)
        .map(|(a, ch)| {
            let mp = ch.mixing_probabilities();
            match a.plane() {
                Plane::Z => mp.p_z,
                _ => [mp.p_xy, mp.p_xy],
            }
        })
        .collect()
}

/// `Λ†(X)` for a product of single-qubit channels on an `n`-qubit operator.
fn adjoint_product(channels: &[NoiseChannel], x: &Matrix) -> Result<Matrix> {
    let n = channels.len();
    let mut cur = x.clone();
    for (q, ch) in channels.iter().enumerate() {
        if ch.is_identity() {
            continue;
        }
        let mut acc = Matrix::zeros(cur.nrows(), cur.ncols());
        for k in ch.kraus()? {
            let kd: Op2 = k.adjoint();
            let mut term = cur.clone();
            // K† X K
            left_op2(&mut term, n, q, &kd);
            right_op2_dagger(&mut term, n, q, &kd);
            acc += term;
        }
        cur = acc;
    }
    Ok(cur)
}

/// `Λ(X)` for a product of single-qubit channels.
fn forward_product(channels: &[NoiseChannel], x: &Matrix) -> Matrix {
    let n = channels.len();
    channels.iter().enumerate().fold(x.clone(), |m, (q, ch)| {
        if ch.is_identity() {
            m
        } else {
            ch.apply_matrix(&m, n, q)
        }
    })
}

/// `A_{r,k,l} = ⟨A_r|Λ(|A_k⟩⟨A_l|)|A_r⟩` over normalized answers.
#[derive(Clone, Debug)]
pub struct AnswerKernel {
    m: usize,
    values: Vec<C64>,
}

impl AnswerKernel {
    pub fn measurements(&self) -> usize {
        self.m
    }

    pub fn get(&self, r: OutcomeVector, k: OutcomeVector, l: OutcomeVector) -> C64 {
        let d = 1usize << self.m;
        self.values[(r as usize * d + k as usize) * d + l as usize]
    }
}

pub fn answer_kernel(
    pat: &MeasurementPattern,
    resource: &PureState,
    answer_channels: &[NoiseChannel],
) -> Result<AnswerKernel> {
    if pat.len() > MAX_KERNEL {
        return Err(Error::TooLarge { what: "kernel measurements", got: pat.len(), max: MAX_KERNEL });
    }
    if answer_channels.len() != pat.outputs().len() {
        return Err(Error::DimensionMismatch { expected: pat.outputs().len(), got: answer_channels.len() });
    }
    let ans = Answers::new(pat, resource)?;
    let d = 1usize << ans.m;
    let normalized: Vec<Vec<C64>> = ans
        .tilde
        .iter()
        .map(|a| {
            let p = linalg::norm_sqr(a);
            if p < UNREACHABLE {
                vec![ZERO; a.len()]
            } else {
                a.iter().map(|x| x / p.sqrt()).collect()
            }
        })
        .collect();
    let targets: Vec<Vec<C64>> = (0..d as u64).map(|r| ans.target(pat, r)).collect();
    let mut values = vec![ZERO; d * d * d];
    for k in 0..d {
        for l in 0..d {
            let evolved = forward_product(answer_channels, &linalg::outer(&normalized[k], &normalized[l]));
            for r in 0..d {
                values[(r * d + k) * d + l] = linalg::quadratic_form(&evolved, &targets[r]);
            }
        }
    }
    Ok(AnswerKernel { m: ans.m, values })
}

/// Adaptive engine: full double sum over branch pairs.
pub fn fidelity_adaptive(
    pat: &MeasurementPattern,
    resource: &PureState,
    measured_channels: &[NoiseChannel],
    answer_channels: &[NoiseChannel],
) -> Result<FidelityReport> {
    if pat.len() > MAX_ADAPTIVE {
        return Err(Error::TooLarge { what: "adaptive measurements", got: pat.len(), max: MAX_ADAPTIVE });
    }
    check_channels(pat, measured_channels, answer_channels)?;
    let ans = Answers::new(pat, resource)?;
    let flips = flip_probabilities(pat, measured_channels);
    let m = ans.m;
    let d = 1usize << m;

    // ⟨Ã_l|Ã_k⟩ does not depend on r
    let gram: Vec<C64> = (0..d * d)
        .map(|kl| linalg::inner(&ans.tilde[kl % d], &ans.tilde[kl / d]))
        .collect();

    let raw: Vec<(f64, f64)> = (0..d as u64)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let target = ans.target(pat, r);
            let q = adjoint_product(answer_channels, &linalg::outer(&target, &target))?;
            let qk: Vec<Vec<C64>> = ans.tilde.iter().map(|a| mat_vec(&q, a)).collect();
            // overlaps of each branch's basis vector with the record's basis, per measurement
            let mut c_same = vec![ZERO; m * d];
            let mut c_other = vec![ZERO; m * d];
            for i in 0..m {
                let a = pat.angles()[i];
                let s_r = pat.adaptation(i, r);
                let r_i = outcome_bit(r, i);
                let same = crate::pattern::basis_amplitudes(a.theta, a.alpha, s_r, r_i);
                let other = crate::pattern::basis_amplitudes(a.theta, a.alpha, s_r, 1 - r_i);
                for k in 0..d as u64 {
                    let v = pat.branch_basis(i, k);
                    c_same[i * d + k as usize] = linalg::inner(&same, &v);
                    c_other[i * d + k as usize] = linalg::inner(&other, &v);
                }
            }
            let mut num = ZERO;
            let mut z = ZERO;
            for k in 0..d {
                for l in 0..d {
                    let mut w = ONE;
                    for i in 0..m {
                        let r_i = outcome_bit(r, i) as usize;
                        let wi = c_same[i * d + k] * c_same[i * d + l].conj() * (1.0 - flips[i][r_i])
                            + c_other[i * d + k] * c_other[i * d + l].conj() * flips[i][1 - r_i];
                        w *= wi;
                        if w == ZERO {
                            break;
                        }
                    }
                    if w == ZERO {
                        continue;
                    }
                    num += w * linalg::inner(&ans.tilde[l], &qk[k]);
                    z += w * gram[k * d + l];
                }
            }
            Ok((z.re, num.re))
        })
        .collect::<Result<_>>()?;

    let total: f64 = raw.iter().map(|(z, _)| z).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Internal(format!("record probabilities sum to {total}")));
    }
    let outcomes = raw
        .into_iter()
        .enumerate()
        .map(|(r, (z, num))| OutcomeFidelity {
            outcome: r as u64,
            probability: z / total,
            fidelity: (z >= UNREACHABLE).then(|| (num / z).clamp(0.0, 1.0 + 1e-9)),
        })
        .collect();
    Ok(FidelityReport::from_outcomes(m, outcomes))
}

fn mat_vec(m: &Matrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..v.len()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// Precomputed data for the non-adaptive engine.
pub struct NonAdaptive<'a> {
    pat: &'a MeasurementPattern,
    ans: Answers,
    flips: Vec<[f64; 2]>,
    answer_channels: Vec<NoiseChannel>,
    norms: Vec<f64>,
}

impl<'a> NonAdaptive<'a> {
    pub fn new(
        pat: &'a MeasurementPattern,
        resource: &PureState,
        measured_channels: &[NoiseChannel],
        answer_channels: &[NoiseChannel],
    ) -> Result<Self> {
        if pat.is_adaptive() {
            return Err(Error::AdaptivePattern);
        }
        if pat.len() > MAX_NONADAPTIVE {
            return Err(Error::TooLarge { what: "non-adaptive measurements", got: pat.len(), max: MAX_NONADAPTIVE });
        }
        check_channels(pat, measured_channels, answer_channels)?;
        let ans = Answers::new(pat, resource)?;
        let flips = flip_probabilities(pat, measured_channels);
        let norms = ans.tilde.iter().map(|a| linalg::norm_sqr(a)).collect();
        Ok(Self { pat, ans, flips, answer_channels: answer_channels.to_vec(), norms })
    }

    /// `(Z_r, F(r))` for a single record.
    pub fn outcome(&self, r: OutcomeVector) -> Result<OutcomeFidelity> {
        let target = self.ans.target(self.pat, r);
        let q = adjoint_product(&self.answer_channels, &linalg::outer(&target, &target))?;
        let m = self.ans.m;
        let mut num = 0.0;
        let mut z = 0.0;
        for (k, a) in self.ans.tilde.iter().enumerate() {
            if self.norms[k] < 1e-300 {
                continue;
            }
            let mut w = 1.0;
            for i in 0..m {
                let (ri, ki) = (outcome_bit(r, i) as usize, outcome_bit(k as u64, i) as usize);
                w *= if ri == ki { 1.0 - self.flips[i][ri] } else { self.flips[i][ki] };
            }
            if w == 0.0 {
                continue;
            }
            num += w * linalg::quadratic_form(&q, a).re;
            z += w * self.norms[k];
        }
        Ok(OutcomeFidelity {
            outcome: r,
            probability: z,
            fidelity: (z >= UNREACHABLE).then(|| (num / z).clamp(0.0, 1.0 + 1e-9)),
        })
    }

    /// Whether `F(r) = F(0)` and `Z_r = 2^{-M}` follow from the by-product structure.
    pub fn shift_invariant(&self) -> bool {
        let m = self.ans.m;
        let uniform = 1.0 / (1u64 << m) as f64;
        self.answer_channels.iter().all(|c| c.is_pauli())
            && self.flips.iter().all(|f| (f[0] - f[1]).abs() < 1e-15)
            && self.pat.byproducts_affine()
            && self.norms.iter().all(|n| (n - uniform).abs() < 1e-12)
            && self.ans.tilde.iter().enumerate().all(|(k, a)| {
                let target = self.ans.target(self.pat, k as u64);
                linalg::inner(&target, a).norm_sqr() / self.norms[k] > 1.0 - 1e-10
            })
    }

    pub fn report(&self) -> Result<FidelityReport> {
        let m = self.ans.m;
        let d = 1u64 << m;
        let outcomes: Vec<OutcomeFidelity> = if self.shift_invariant() {
            let f0 = self.outcome(0)?;
            let p = 1.0 / d as f64;
            (0..d).map(|r| OutcomeFidelity { outcome: r, probability: p, fidelity: f0.fidelity }).collect()
        } else {
            (0..d).into_par_iter().map(|r| self.outcome(r)).collect::<Result<_>>()?
        };
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Internal(format!("record probabilities sum to {total}")));
        }
        Ok(FidelityReport::from_outcomes(m, outcomes))
    }
}

/// Non-adaptive engine; rejects patterns with adaptations.
pub fn fidelity_nonadaptive(
    pat: &MeasurementPattern,
    resource: &PureState,
    measured_channels: &[NoiseChannel],
    answer_channels: &[NoiseChannel],
) -> Result<FidelityReport> {
    NonAdaptive::new(pat, resource, measured_channels, answer_channels)?.report()
}

/// Picks the non-adaptive engine when the pattern allows it.
pub fn fidelity(
    pat: &MeasurementPattern,
    resource: &PureState,
    measured_channels: &[NoiseChannel],
    answer_channels: &[NoiseChannel],
) -> Result<FidelityReport> {
    if pat.is_adaptive() {
        fidelity_adaptive(pat, resource, measured_channels, answer_channels)
    } else {
        fidelity_nonadaptive(pat, resource, measured_channels, answer_channels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphstate::{build_graph_state, prepare_resource, Graph};
    use crate::pattern::{Angle, BooleanExpr, Byproduct};
    use proptest::prelude::*;

    fn rsp(phi: f64) -> MeasurementPattern {
        MeasurementPattern::new(
            vec![0],
            vec![Angle::xy(phi)],
            vec![BooleanExpr::zero()],
            vec![Byproduct { qubit: 1, fx: BooleanExpr::xor_of([0]), fz: BooleanExpr::zero(), fsig: BooleanExpr::zero() }],
        )
        .unwrap()
    }

    fn three_chain() -> MeasurementPattern {
        MeasurementPattern::new(
            vec![0, 1],
            vec![Angle::xy(0.4), Angle::xy(1.3)],
            vec![BooleanExpr::zero(), BooleanExpr::xor_of([0])],
            vec![Byproduct { qubit: 2, fx: BooleanExpr::xor_of([1]), fz: BooleanExpr::xor_of([0]), fsig: BooleanExpr::zero() }],
        )
        .unwrap()
    }

    #[test]
    fn rsp_phase_flip_closed_form() {
        let g2 = build_graph_state(&Graph::linear(2));
        for gt in [0.0, 0.3, 1.0, 2.5] {
            let ch = NoiseChannel::phase_flip(1.0, gt).unwrap();
            let expected = (1.0 + (-2.0 * gt).exp()) / 2.0;
            let pat = rsp(0.7);
            let a = fidelity_adaptive(&pat, g2.state(), &[ch], &[NoiseChannel::identity()]).unwrap();
            let na = fidelity_nonadaptive(&pat, g2.state(), &[ch], &[NoiseChannel::identity()]).unwrap();
            assert!((a.average - expected).abs() < 1e-12);
            assert!((na.average - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_noise_is_perfect() {
        let g = Graph::linear(3);
        let input = PureState::qubit(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let res = prepare_resource(&g, &input, &[0]).unwrap();
        let id = NoiseChannel::identity();
        let rep = fidelity_adaptive(&three_chain(), &res, &[id, id], &[id]).unwrap();
        for o in &rep.outcomes {
            assert!((o.probability - 0.25).abs() < 1e-12);
            assert!((o.fidelity.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_examples() {
        let g2 = build_graph_state(&Graph::linear(2));
        // φ = π/2: the answer (|0⟩ − i|1⟩)/√2 is orthogonal to its X image
        let k = answer_kernel(&rsp(std::f64::consts::FRAC_PI_2), g2.state(), &[NoiseChannel::identity()]).unwrap();
        assert!(k.get(0, 1, 1).norm() < 1e-12);
        assert!((k.get(0, 0, 0) - ONE).norm() < 1e-12);
        assert!((k.get(1, 1, 1) - ONE).norm() < 1e-12);
    }

    #[test]
    fn guards() {
        let g2 = build_graph_state(&Graph::linear(2));
        let ch = NoiseChannel::identity();
        assert!(matches!(
            fidelity_nonadaptive(&three_chain(), &PureState::plus(3), &[ch, ch], &[ch]),
            Err(Error::AdaptivePattern)
        ));
        assert!(fidelity_adaptive(&rsp(0.1), g2.state(), &[], &[ch]).is_err());
    }

    #[test]
    fn csv_and_json() {
        let g2 = build_graph_state(&Graph::linear(2));
        let ch = NoiseChannel::white(1.0, 0.2).unwrap();
        let rep = fidelity_nonadaptive(&rsp(0.3), g2.state(), &[ch], &[NoiseChannel::identity()]).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf, 0.2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,outcome,Z,F\n0.2,0,0.5,"));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(rep.summary_json(0.2)["F_bar"], rep.average);
    }

    fn arb_channel() -> impl Strategy<Value = NoiseChannel> {
        (0.0f64..2.0, 0.0f64..2.0, 0.0f64..=1.0, 0.0f64..1.5)
            .prop_map(|(b, extra, s, t)| NoiseChannel::new(b, b / 2.0 + extra, s, t).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn kernel_is_hermitian(ch in arb_channel(), phi in 0.0f64..6.3) {
            let res = prepare_resource(&Graph::linear(3), &PureState::qubit(C64::new(0.8, 0.0), C64::new(0.36, 0.48)).unwrap(), &[0]).unwrap();
            let mut pat = three_chain();
            pat = MeasurementPattern::new(pat.measured().to_vec(), vec![Angle::xy(phi), Angle::xy(0.9)], pat.adaptations().to_vec(), pat.byproducts().to_vec()).unwrap();
            let k = answer_kernel(&pat, &res, &[ch]).unwrap();
            for r in 0..4 { for a in 0..4 { for b in 0..4 {
                prop_assert!((k.get(r, a, b) - k.get(r, b, a).conj()).norm() < 1e-10);
            }}
                for a in 0..4 {
                    let v = k.get(r, a, a);
                    prop_assert!(v.im.abs() < 1e-10 && v.re > -1e-10 && v.re < 1.0 + 1e-10);
                }
            }
        }

        #[test]
        fn report_invariants(chs in prop::collection::vec(arb_channel(), 3)) {
            let res = prepare_resource(&Graph::linear(3), &PureState::qubit(C64::new(0.8, 0.0), C64::new(0.36, 0.48)).unwrap(), &[0]).unwrap();
            let rep = fidelity_adaptive(&three_chain(), &res, &chs[..2], &chs[2..]).unwrap();
            let total: f64 = rep.outcomes.iter().map(|o| o.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            for o in &rep.outcomes {
                let f = o.fidelity.unwrap();
                prop_assert!((-1e-12..=1.0 + 1e-9).contains(&f));
            }
            prop_assert!((average(&rep) - rep.average).abs() < 1e-12);
        }
    }
}
