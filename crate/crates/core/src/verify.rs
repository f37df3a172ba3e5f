//! Acceptance checks, runnable from the CLI and from the test suite.
//!
//! Each check compares the engines against closed forms, the oracle or each other and
//! reports a pass/fail line. Tolerances can be scaled to confirm that the checks bite.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{choi_of, NoiseChannel};
use crate::correlations::{concurrence, discord, mep, negativity, Side};
use crate::error::Result;
use crate::experiment::random_state;
use crate::fidelity::{fidelity_adaptive, NonAdaptive};
use crate::linalg::{self, hermitian_eigenvalues, tensor, DensityMatrix, PureState, C64};
use crate::oracle::{self, decohere};
use crate::protocols::ancilla::{ancilla_step, white_with_mixing};
use crate::protocols::{self, classical_replacement, dj, DjFunction, Protocol};

/// Multiplies every tolerance; `1.0` is the real suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance {
    pub scale: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl Tolerance {
    fn tol(&self, x: f64) -> f64 {
        x * self.scale
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

/// Tracks the worst deviation against each tolerance and the failures seen.
struct Checker {
    tol: Tolerance,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checker {
    fn new(tol: Tolerance) -> Self {
        Self { tol, failures: Vec::new(), notes: Vec::new() }
    }

    /// `|a − b| ≤ tol` over a batch; records the maximum deviation.
    fn close(&mut self, what: &str, pairs: impl IntoIterator<Item = (f64, f64)>, tol: f64) {
        let worst = pairs.into_iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let limit = self.tol.tol(tol);
        if worst.is_nan() || worst > limit {
            self.failures.push(format!("{what}: max deviation {worst:.3e} > {limit:.1e}"));
        } else {
            self.notes.push(format!("{what} {worst:.1e}"));
        }
    }

    /// `a ≥ b − slack` everywhere.
    fn at_least(&mut self, what: &str, pairs: impl IntoIterator<Item = (f64, f64, f64)>, slack: f64) {
        let limit = self.tol.tol(slack);
        let mut worst = f64::INFINITY;
        let mut at = f64::NAN;
        for (x, a, b) in pairs {
            if a - b < worst {
                worst = a - b;
                at = x;
            }
        }
        if worst.is_nan() || worst < -limit {
            self.failures.push(format!("{what}: violated by {:.3e} at {at:.3}", -worst));
        } else {
            self.notes.push(format!("{what} ok"));
        }
    }

    fn require(&mut self, what: &str, ok: bool, detail: impl Into<String>) {
        if !ok {
            self.failures.push(format!("{what}: {}", detail.into()));
        }
    }

    fn finish(self) -> Outcome {
        if self.failures.is_empty() {
            Outcome { passed: true, detail: self.notes.join("; ") }
        } else {
            Outcome { passed: false, detail: self.failures.join("; ") }
        }
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}

/// RSP resource with `ch` on the measured qubit.
fn rsp_state(ch: NoiseChannel) -> Result<DensityMatrix> {
    let p = protocols::rsp(FRAC_PI_4);
    let res = p.resource(None)?;
    decohere(&res.to_density(), &p.vertex_channels(&[ch], &[]))
}

fn oracle_average(p: &Protocol, input: Option<&PureState>, ch: NoiseChannel) -> Result<f64> {
    let res = p.resource(input)?;
    let channels = p.vertex_channels(&vec![ch; p.pattern.len()], &[]);
    Ok(oracle::simulate(&res, &p.pattern, &channels)?.average)
}

fn rsp_closed_form(c: &mut Checker, white: bool) -> Result<()> {
    let p = protocols::rsp(FRAC_PI_4);
    let (mut engine, mut oracle_pairs, mut conc) = (Vec::new(), Vec::new(), Vec::new());
    for t in grid(0.0, 3.0, 50) {
        let (ch, rate) = if white { (NoiseChannel::white(1.0, t)?, 4.0) } else { (NoiseChannel::phase_flip(1.0, t)?, 2.0) };
        let d = (-rate * t).exp();
        let f = p.fidelity_uniform(None, ch)?.average;
        engine.push((f, (1.0 + d) / 2.0));
        oracle_pairs.push((f, oracle_average(&p, None, ch)?));
        let expected_c = if white { ((3.0 * d - 1.0) / 2.0).max(0.0) } else { d };
        conc.push((concurrence(&rsp_state(ch)?)?, expected_c));
    }
    c.close("engine vs closed form", engine, 1e-9);
    c.close("engine vs oracle", oracle_pairs, 1e-9);
    c.close("concurrence vs closed form", conc, 1e-9);
    Ok(())
}

/// 1. RSP under phase flip.
pub fn rsp_phase_flip(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    rsp_closed_form(&mut c, false)?;
    Ok(c.finish())
}

/// 2. RSP under white noise, including the sudden-death instant.
pub fn rsp_white(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    rsp_closed_form(&mut c, true)?;
    let t_death = 3f64.ln() / 4.0;
    let ch = NoiseChannel::white(1.0, t_death)?;
    let f = protocols::rsp(FRAC_PI_4).fidelity_uniform(None, ch)?.average;
    c.close("fidelity at sudden death", [(f, 2.0 / 3.0)], 1e-10);
    c.close("concurrence at sudden death", [(concurrence(&rsp_state(ch)?)?, 0.0)], 1e-9);
    Ok(c.finish())
}

struct RspCurves {
    t: Vec<f64>,
    f_pf: Vec<f64>,
    f_w: Vec<f64>,
}

fn rsp_curves(ratio: f64, ts: &[f64]) -> Result<RspCurves> {
    let p = protocols::rsp(FRAC_PI_4);
    let mut out = RspCurves { t: ts.to_vec(), f_pf: Vec::new(), f_w: Vec::new() };
    for &t in ts {
        out.f_pf.push(p.fidelity_uniform(None, NoiseChannel::phase_flip(1.0, t)?)?.average);
        out.f_w.push(p.fidelity_uniform(None, NoiseChannel::white(ratio, t)?)?.average);
    }
    Ok(out)
}

/// 3. With `Γ_w = 0.375 Γ_pf` the less entangled white-noise state computes better.
pub fn fig1_ordering(tol: Tolerance) -> Result<Outcome> {
    let ratio = 0.375;
    let mut c = Checker::new(tol);
    let ts: Vec<f64> = grid(0.0, 3.0, 61).into_iter().skip(1).collect();
    let curves = rsp_curves(ratio, &ts)?;
    let mut c_pf = Vec::new();
    let mut c_w = Vec::new();
    for &t in &ts {
        c_pf.push(concurrence(&rsp_state(NoiseChannel::phase_flip(1.0, t)?)?)?);
        c_w.push(concurrence(&rsp_state(NoiseChannel::white(ratio, t)?)?)?);
    }
    c.at_least("F_w >= F_pf", (0..ts.len()).map(|j| (curves.t[j], curves.f_w[j], curves.f_pf[j])), 1e-12);
    c.at_least("C_w <= C_pf", (0..ts.len()).map(|j| (ts[j], c_pf[j], c_w[j])), 1e-12);
    let one = [1.0];
    let at1 = rsp_curves(ratio, &one)?;
    let gap_f = at1.f_w[0] - at1.f_pf[0];
    let gap_c = concurrence(&rsp_state(NoiseChannel::phase_flip(1.0, 1.0)?)?)?
        - concurrence(&rsp_state(NoiseChannel::white(ratio, 1.0)?)?)?;
    c.require("strict at Γ_pf t = 1", gap_f > c.tol.tol(1e-6) && gap_c > c.tol.tol(1e-6), format!("gaps {gap_f:.3e}, {gap_c:.3e}"));
    c.notes.push(format!("gaps at t=1: F {gap_f:.4}, C {gap_c:.4}"));
    Ok(c.finish())
}

/// 4. With `Γ_w = 0.57 Γ_pf`: lower white-noise discord at `Γ_pf t = 1` together with
///    `F_w ≥ F_pf`, and white-noise discord positive on the whole grid.
pub fn fig2_ordering(tol: Tolerance) -> Result<Outcome> {
    let ratio = 0.57;
    let mut c = Checker::new(tol);
    let d_pf = discord(&rsp_state(NoiseChannel::phase_flip(1.0, 1.0)?)?, Side::A)?;
    let d_w = discord(&rsp_state(NoiseChannel::white(ratio, 1.0)?)?, Side::A)?;
    let at1 = rsp_curves(ratio, &[1.0])?;
    c.require("D_w < D_pf at Γ_pf t = 1", d_w < d_pf, format!("D_w = {d_w:.6}, D_pf = {d_pf:.6}"));
    c.at_least("F_w >= F_pf at Γ_pf t = 1", [(1.0, at1.f_w[0], at1.f_pf[0])], 1e-12);
    let mut min_d: f64 = f64::INFINITY;
    for t in grid(0.0, 3.0, 31).into_iter().skip(1) {
        min_d = min_d.min(discord(&rsp_state(NoiseChannel::white(ratio, t)?)?, Side::A)?);
    }
    c.require("white-noise discord positive", min_d > 0.0, format!("min {min_d:.3e}"));
    c.notes.push(format!("D_w(1) = {d_w:.5}, D_pf(1) = {d_pf:.5}, F_w(1) = {:.5}, F_pf(1) = {:.5}", at1.f_w[0], at1.f_pf[0]));
    Ok(c.finish())
}

/// 5. `MEP = 1 − p = 2F̄ − 1` for both RSP noise models.
pub fn mep_relation(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    let p = protocols::rsp(FRAC_PI_4);
    let mut vs_p = Vec::new();
    let mut vs_f = Vec::new();
    for pr in grid(0.05, 0.95, 10) {
        for ch in [NoiseChannel::phase_flip_with_p(pr)?, NoiseChannel::white_with_p(pr)?] {
            let m = mep(&rsp_state(ch)?)?.value;
            vs_p.push((m, 1.0 - pr));
            vs_f.push((m, 2.0 * p.fidelity_uniform(None, ch)?.average - 1.0));
        }
    }
    c.close("MEP vs 1 - p", vs_p, 1e-4);
    c.close("MEP vs 2F - 1", vs_f, 1e-4);
    Ok(c.finish())
}

/// 6. Rotation with matched flip probabilities: equal fidelities, different negativities.
pub fn rotation_matched(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    let p = protocols::rotation(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4);
    let input = PureState::basis(1, 0);
    let res = p.resource(Some(&input))?;
    let mut fid = Vec::new();
    let mut gap: f64 = 0.0;
    for t in grid(0.0, 2.0, 20) {
        let (pf, w) = (NoiseChannel::phase_flip(1.0, t)?, NoiseChannel::white(0.5, t)?);
        fid.push((p.fidelity_uniform(Some(&input), pf)?.average, p.fidelity_uniform(Some(&input), w)?.average));
        let neg = |ch: NoiseChannel| -> Result<f64> {
            let rho = decohere(&res.to_density(), &p.vertex_channels(&vec![ch; p.pattern.len()], &[]))?;
            negativity(&rho, p.pattern.outputs())
        };
        gap = gap.max((neg(pf)? - neg(w)?).abs());
    }
    c.close("F_pf vs F_w", fid, 1e-10);
    c.require("negativities differ", gap >= 1e-3, format!("max gap {gap:.3e}"));
    c.notes.push(format!("max negativity gap {gap:.4}"));
    Ok(c.finish())
}

/// Random member of the channel family with `2C ≥ B`.
pub fn random_channel(rng: &mut impl Rng) -> NoiseChannel {
    let b = rng.random_range(0.0..3.0);
    let cc = rng.random_range(b / 2.0..3.0f64.max(b / 2.0 + 0.1));
    let s = rng.random_range(0.0..1.0);
    let t = rng.random_range(0.0..2.0);
    NoiseChannel::new(b, cc, s, t).expect("completely positive by construction")
}

/// 7. Adaptive engine against the oracle on the rotation pattern.
pub fn rotation_oracle(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs = Vec::new();
    for _ in 0..20 {
        let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-PI..PI));
        let p = protocols::rotation(a[0], a[1], a[2]);
        let input = random_state(&mut rng, 1);
        let ch = random_channel(&mut rng);
        let res = p.resource(Some(&input))?;
        let measured = vec![ch; p.pattern.len()];
        let answer = vec![ch];
        let engine = fidelity_adaptive(&p.pattern, &res, &measured, &answer)?;
        let run = oracle::simulate(&res, &p.pattern, &p.vertex_channels(&measured, &answer))?;
        for (e, o) in engine.outcomes.iter().zip(&run.branches) {
            pairs.push((e.probability, o.probability));
            if let (Some(fe), Some(fo)) = (e.fidelity, o.fidelity) {
                pairs.push((fe, fo));
            }
        }
    }
    c.close("per-record (Z, F) vs oracle", pairs, 1e-9);
    Ok(c.finish())
}

fn random_product(rng: &mut impl Rng) -> PureState {
    tensor(&random_state(rng, 1), &random_state(rng, 1))
}

/// 8. CNOT: zero-noise correctness, matched noise models, shift invariance.
pub fn cnot(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    let p = protocols::cnot15();
    c.require("adaptation-free", !p.pattern.is_adaptive(), "pattern has adaptations");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut zero = Vec::new();
    for _ in 0..5 {
        zero.push((p.zero_noise_fidelity(Some(&random_product(&mut rng)))?, 1.0));
    }
    c.close("zero-noise fidelity", zero, 1e-9);
    let input = random_product(&mut rng);
    let mut matched = Vec::new();
    for t in grid(0.0, 1.5, 4) {
        let f_pf = p.fidelity_uniform(Some(&input), NoiseChannel::phase_flip(1.0, t)?)?.average;
        let f_w = p.fidelity_uniform(Some(&input), NoiseChannel::white(0.5, t)?)?.average;
        matched.push((f_pf, f_w));
    }
    c.close("F_pf vs F_w", matched, 1e-10);
    let res = p.resource(Some(&input))?;
    let ch = NoiseChannel::white(0.5, 0.4)?;
    let engine = NonAdaptive::new(&p.pattern, &res, &vec![ch; p.pattern.len()], &[NoiseChannel::identity(); 2])?;
    let f0 = engine.outcome(0)?.fidelity.unwrap_or(f64::NAN);
    let mut shifts = Vec::new();
    for _ in 0..50 {
        let r = rng.random_range(0..1u64 << p.pattern.len());
        shifts.push((engine.outcome(r)?.fidelity.unwrap_or(f64::NAN), f0));
    }
    c.close("F(r) vs F(0)", shifts, 1e-10);
    Ok(c.finish())
}

/// 9. Deutsch-Jozsa on the graph state and on its classical replacement.
pub fn deutsch_jozsa(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    let mut probs = Vec::new();
    for f in [DjFunction::Constant(0), DjFunction::Constant(1), DjFunction::Balanced] {
        let d = dj(3, f)?;
        let expected = if f == DjFunction::Balanced { 0.0 } else { 1.0 };
        probs.push((d.prob_all_zero_ideal()?, expected));
        let (_, report) = classical_replacement(&d.protocol, None)?;
        probs.push((d.prob_all_zero(&report.replacement), expected));
        let worst = report.max_negativity();
        c.require(
            "replacement separable",
            report.negativities.len() == d.protocol.pattern.len() && worst < c.tol.tol(1e-9),
            format!("max negativity {worst:.3e}"),
        );
    }
    c.close("Pr(all-zero readout)", probs, 1e-10);
    Ok(c.finish())
}

/// 10. Ancilla-driven step: closed form, bound and saturation.
pub fn ancilla(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut formula = Vec::new();
    let mut bound = Vec::new();
    for p in [0.05, 0.2, 0.5] {
        let ch = white_with_mixing(p)?;
        for _ in 0..100 {
            let n = rng.random_range(1..=3);
            let reg = random_state(&mut rng, n);
            let i = rng.random_range(0..n);
            let phi = rng.random_range(-PI..PI);
            let r = ancilla_step(&reg, i, phi, &ch)?;
            formula.push((r.mean_fidelity, r.predicted));
            bound.push((p, r.bound, r.mean_fidelity));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)])?;
        let r = ancilla_step(&bell, 0, 0.9, &ch)?;
        c.close("saturation", [(r.mean_fidelity, r.bound), (r.xi, 0.0)], 1e-9);
    }
    c.close("F vs 1 - p(1 - ξ²)", formula, 1e-9);
    c.at_least("F <= 1 - p S_L", bound, 1e-9);
    Ok(c.finish())
}

/// 11. The channel family is CPTP, normalized and a semigroup.
pub fn channel_family(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut min_eig, mut tp, mut lsum, mut semi) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let rho = DensityMatrix::from_bloch([0.3, -0.5, 0.6])?;
    for _ in 0..200 {
        let ch = random_channel(&mut rng);
        let eig = hermitian_eigenvalues(&ch.choi())?;
        min_eig.push((eig.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0), 0.0));
        // partial trace over the output factor of the Choi matrix is the identity
        let j = ch.choi();
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s = j[(2 * a, 2 * b)] + j[(2 * a + 1, 2 * b + 1)];
            tp.push((s.norm(), if a == b { 1.0 } else { 0.0 }));
        }
        lsum.push((ch.lambdas().as_array().iter().sum(), 1.0));
        let t1 = rng.random_range(0.0..1.5);
        let t2 = rng.random_range(0.0..1.5);
        let (a, b, ab) = (ch.at_time(t1)?, ch.at_time(t2)?, ch.at_time(t1 + t2)?);
        let composed = a.apply(&b.apply(&rho, 0)?, 0)?;
        let direct = ab.apply(&rho, 0)?;
        semi.push(((composed.matrix() - direct.matrix()).norm(), 0.0));
        let choi_direct = choi_of(|m| ab.apply_op(m));
        let choi_composed = choi_of(|m| a.apply_op(&b.apply_op(m)));
        semi.push(((choi_direct - choi_composed).norm(), 0.0));
    }
    c.close("Choi PSD", min_eig, 1e-10);
    c.close("trace preservation", tp, 1e-10);
    c.close("λ sum", lsum, 1e-12);
    c.close("semigroup", semi, 1e-9);
    Ok(c.finish())
}

/// 12. Every quantitative claim is reproduced at full scale; the largest resource is the
///     15-qubit CNOT, simulated as a pure state.
pub fn desk_scale(tol: Tolerance) -> Result<Outcome> {
    let mut c = Checker::new(tol);
    let p = protocols::cnot15();
    let res = p.resource(Some(&PureState::basis(2, 0)))?;
    c.require("full CNOT resource", res.dim() == 1 << 15, format!("dimension {}", res.dim()));
    c.close("resource norm", [(linalg::norm_sqr(res.amplitudes()), 1.0)], 1e-10);
    c.notes.push("no substitutions".into());
    Ok(c.finish())
}

/// One acceptance criterion.
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub check: fn(Tolerance) -> Result<Outcome>,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, name: "rsp-phase-flip", tags: &["rsp", "fidelity", "concurrence"], check: rsp_phase_flip },
    Criterion { id: 2, name: "rsp-white", tags: &["rsp", "fidelity", "concurrence"], check: rsp_white },
    Criterion { id: 3, name: "rsp-fig1-ordering", tags: &["rsp", "fig1"], check: fig1_ordering },
    Criterion { id: 4, name: "rsp-fig2-ordering", tags: &["rsp", "fig2", "discord"], check: fig2_ordering },
    Criterion { id: 5, name: "rsp-mep", tags: &["rsp", "mep"], check: mep_relation },
    Criterion { id: 6, name: "rotation-matched-noise", tags: &["rotation", "fig4"], check: rotation_matched },
    Criterion { id: 7, name: "rotation-oracle", tags: &["rotation", "oracle"], check: rotation_oracle },
    Criterion { id: 8, name: "cnot15", tags: &["cnot", "cnot15"], check: cnot },
    Criterion { id: 9, name: "deutsch-jozsa", tags: &["dj", "replacement"], check: deutsch_jozsa },
    Criterion { id: 10, name: "ancilla-driven", tags: &["ancilla"], check: ancilla },
    Criterion { id: 11, name: "channel-family", tags: &["channels"], check: channel_family },
    Criterion { id: 12, name: "desk-scale", tags: &["scale"], check: desk_scale },
];

impl Criterion {
    /// Matches the id, a tag, or a substring of the name.
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.to_ascii_lowercase();
        self.id.to_string() == f || self.tags.contains(&f.as_str()) || self.name.contains(&f)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub fn find(id: u8) -> &'static Criterion {
    &CRITERIA[(id - 1) as usize]
}

/// Runs one criterion; errors count as failures.
pub fn run_one(c: &Criterion, tol: Tolerance) -> CriterionResult {
    let start = Instant::now();
    let outcome = (c.check)(tol).unwrap_or_else(|e| Outcome { passed: false, detail: format!("error: {e}") });
    CriterionResult { id: c.id, name: c.name, passed: outcome.passed, detail: outcome.detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all(filter: Option<&str>, tol: Tolerance) -> Vec<CriterionResult> {
    CRITERIA.iter().filter(|c| filter.is_none_or(|f| c.matches(f))).map(|c| run_one(c, tol)).collect()
}

/// `PASS  3 rsp-fig1-ordering (0.12 s): …`
pub fn format_line(r: &CriterionResult) -> String {
    format!(
        "{} {:>2} {:<24} ({:.2} s) {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.id,
        r.name,
        r.seconds,
        r.detail
    )
}
