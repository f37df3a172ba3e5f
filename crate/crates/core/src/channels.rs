//! Single-qubit decoherence: the four-parameter Markovian family, its phase-flip and
//! white-noise cases, fixed-pole rotation maps and operator-sum forms.
//!
//! The family acts as
//!
//! ```text
//! Λ(ρ) = Σ_j λ_j σ_j ρ σ_j + μ [Zρ + ρZ − iXρY + iYρX]
//! ```
//!
//! shrinking the equatorial Bloch components by `e^{−Ct}`, the `z` component by
//! `e^{−Bt}` and shifting it by `4μ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, conjugate_op2, hermitian_eig, left_op2, ops, right_op2_dagger, DensityMatrix, Matrix, Op2,
    PureState, C64, EIG_FLOOR, I, ONE, STRUCT_TOL,
};

/// `e^{−rate·t}`, with `0·∞ = 0` so that an idle channel stays the identity at any time.
fn decay(rate: f64, t: f64) -> f64 {
    if rate == 0.0 {
        1.0
    } else {
        (-rate * t).exp()
    }
}

/// Decoherence probability of a phase-flip channel, `1 − e^{−2Γt}`.
pub fn p_phase_flip(gamma: f64, t: f64) -> f64 {
    1.0 - decay(2.0 * gamma, t)
}

/// Decoherence probability of white noise, `1 − e^{−4Γt}`.
pub fn p_white(gamma: f64, t: f64) -> f64 {
    1.0 - decay(4.0 * gamma, t)
}

/// Member of the single-qubit Markovian family, frozen at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "S")]
    s: f64,
    t: f64,
}

/// Coefficients `(λ0, λ1, λ2, λ3, μ)` of the defining operator sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lambdas {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub mu: f64,
}

impl Lambdas {
    pub fn as_array(&self) -> [f64; 4] {
        [self.l0, self.l1, self.l2, self.l3]
    }
}

/// Probability that decoherence swaps the two outcomes of a measurement.
///
/// `p_z[k]` is the weight with which `|k⟩⟨k|` is carried to the opposite pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingProbability {
    pub p_xy: f64,
    pub p_z: [f64; 2],
}

impl NoiseChannel {
    /// Validates the rates and complete positivity. `t` may be `+∞`.
    pub fn new(b: f64, c: f64, s: f64, t: f64) -> Result<Self> {
        let finite_rates = b.is_finite() && c.is_finite() && s.is_finite();
        if !finite_rates || b < 0.0 || c < 0.0 || !(0.0..=1.0).contains(&s) || t.is_nan() || t < 0.0 {
            return Err(Error::InvalidChannel(format!("B={b}, C={c}, S={s}, t={t}")));
        }
        let ch = Self { b, c, s, t };
        let min = choi_min_eigenvalue(&ch.choi());
        if min < EIG_FLOOR {
            return Err(Error::InvalidChannel(format!(
                "not completely positive (Choi eigenvalue {min:e}); requires 2C ≥ B"
            )));
        }
        Ok(ch)
    }

    pub fn identity() -> Self {
        Self { b: 0.0, c: 0.0, s: 0.5, t: 0.0 }
    }

    /// Pure dephasing: `B = 0`, `C = 2Γ`.
    pub fn phase_flip(gamma: f64, t: f64) -> Result<Self> {
        Self::new(0.0, 2.0 * gamma, 0.5, t)
    }

    /// Depolarizing: `S = 1/2`, `B = C = 4Γ`.
    pub fn white(gamma: f64, t: f64) -> Result<Self> {
        Self::new(4.0 * gamma, 4.0 * gamma, 0.5, t)
    }

    /// Phase flip with decoherence probability `p = 1 − e^{−2Γt}` (unit rate).
    pub fn phase_flip_with_p(p: f64) -> Result<Self> {
        Self::phase_flip(1.0, -(1.0 - p).ln() / 2.0)
    }

    /// White noise with decoherence probability `p = 1 − e^{−4Γt}` (unit rate).
    pub fn white_with_p(p: f64) -> Result<Self> {
        Self::white(1.0, -(1.0 - p).ln() / 4.0)
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.b, self.c, self.s, t)
    }

    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn lambdas(&self) -> Lambdas {
        let eb = decay(self.b, self.t);
        let ec = decay(self.c, self.t);
        Lambdas {
            l0: (1.0 + 2.0 * ec + eb) / 4.0,
            l1: (1.0 - eb) / 4.0,
            l2: (1.0 - eb) / 4.0,
            l3: (1.0 - 2.0 * ec + eb) / 4.0,
            mu: (2.0 * self.s - 1.0) * (1.0 - eb) / 4.0,
        }
    }

    /// Whether the map is a mixture of Pauli conjugations (`μ = 0`).
    pub fn is_pauli(&self) -> bool {
        self.lambdas().mu.abs() < 1e-15
    }

    pub fn is_identity(&self) -> bool {
        let l = self.lambdas();
        (l.l0 - 1.0).abs() < 1e-15 && l.mu.abs() < 1e-15
    }

    pub fn mixing_probabilities(&self) -> MixingProbability {
        let l = self.lambdas();
        MixingProbability {
            p_xy: l.l1 + l.l3,
            p_z: [2.0 * l.l1 - 2.0 * l.mu, 2.0 * l.l1 + 2.0 * l.mu],
        }
    }

    /// The single-qubit action, evaluated term by term from the defining sum.
    pub fn apply_op(&self, rho: &Op2) -> Op2 {
        let l = self.lambdas();
        let (x, y, z) = (ops::x(), ops::y(), ops::z());
        let mut out = rho * C64::new(l.l0, 0.0);
        for (j, lam) in [(1, l.l1), (2, l.l2), (3, l.l3)] {
            let s = ops::pauli(j);
            out += s * rho * s * C64::new(lam, 0.0);
        }
        out + (z * rho + rho * z - x * rho * y * I + y * rho * x * I) * C64::new(l.mu, 0.0)
    }

    /// Acts on qubit `q` of a density matrix, identity elsewhere.
    pub fn apply(&self, rho: &DensityMatrix, q: usize) -> Result<DensityMatrix> {
        linalg::check_qubit(q, rho.qubits())?;
        let out = self.apply_matrix(rho.matrix(), rho.qubits(), q);
        let tr = out.trace();
        if (tr.re - 1.0).abs() > 1e-8 {
            return Err(Error::Internal(format!("channel output trace {tr}")));
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    pub(crate) fn apply_matrix(&self, m: &Matrix, n: usize, q: usize) -> Matrix {
        let l = self.lambdas();
        let mut out = m * C64::new(l.l0, 0.0);
        for (j, lam) in [(1, l.l1), (2, l.l2), (3, l.l3)] {
            if lam == 0.0 {
                continue;
            }
            let mut term = m.clone();
            conjugate_op2(&mut term, n, q, &ops::pauli(j));
            out += term * C64::new(lam, 0.0);
        }
        if l.mu != 0.0 {
            let (x, y, z) = (ops::x(), ops::y(), ops::z());
            let mut zr = m.clone();
            left_op2(&mut zr, n, q, &z);
            let mut rz = m.clone();
            right_op2_dagger(&mut rz, n, q, &z);
            // X ρ Y and Y ρ X (Y and X are Hermitian, so M·op = M·op†)
            let mut xry = m.clone();
            left_op2(&mut xry, n, q, &x);
            right_op2_dagger(&mut xry, n, q, &y);
            let mut yrx = m.clone();
            left_op2(&mut yrx, n, q, &y);
            right_op2_dagger(&mut yrx, n, q, &x);
            out += (zr + rz - xry * I + yrx * I) * C64::new(l.mu, 0.0);
        }
        out
    }

    pub fn choi(&self) -> Matrix {
        choi_of(|m| self.apply_op(m))
    }

    pub fn kraus(&self) -> Result<Vec<Op2>> {
        kraus_from_choi(&self.choi())
    }
}

/// `ρ ↦ (1 − p)ρ + p R_n̂(φ) ρ R_n̂(φ)†`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoleMap {
    p: f64,
    axis: [f64; 3],
    phi: f64,
}

impl FixedPoleMap {
    pub fn new(p: f64, axis: [f64; 3], phi: f64) -> Result<Self> {
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STRUCT_TOL {
            return Err(Error::InvalidChannel(format!("axis norm {norm}")));
        }
        if !(0.0..=1.0).contains(&p) || !phi.is_finite() {
            return Err(Error::InvalidChannel(format!("p={p}, phi={phi}")));
        }
        Ok(Self { p, axis, phi })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn rotation(&self) -> Op2 {
        ops::rn(self.axis, self.phi)
    }

    pub fn apply_op(&self, rho: &Op2) -> Op2 {
        let r = self.rotation();
        rho * C64::new(1.0 - self.p, 0.0) + r * rho * r.adjoint() * C64::new(self.p, 0.0)
    }

    pub fn apply(&self, rho: &DensityMatrix, q: usize) -> Result<DensityMatrix> {
        linalg::check_qubit(q, rho.qubits())?;
        let r = self.rotation();
        let mut rotated = rho.matrix().clone();
        conjugate_op2(&mut rotated, rho.qubits(), q, &r);
        let out = rho.matrix() * C64::new(1.0 - self.p, 0.0) + rotated * C64::new(self.p, 0.0);
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    pub fn choi(&self) -> Matrix {
        choi_of(|m| self.apply_op(m))
    }

    pub fn kraus(&self) -> Result<Vec<Op2>> {
        kraus_from_choi(&self.choi())
    }
}

/// The two states left untouched by a fixed-pole map: Bloch vectors `+n̂` and `−n̂`.
///
/// A rotation by a multiple of `2π` fixes every state; the `z` basis is returned then.
pub fn protected_basis(m: &FixedPoleMap) -> (PureState, PureState) {
    let turns = m.phi / (2.0 * std::f64::consts::PI);
    let axis = if (turns - turns.round()).abs() < 1e-12 { [0.0, 0.0, 1.0] } else { m.axis };
    let up = bloch_state(axis);
    let down = bloch_state([-axis[0], -axis[1], -axis[2]]);
    (up, down)
}

/// Pure state with unit Bloch vector `v`.
pub fn bloch_state(v: [f64; 3]) -> PureState {
    let theta = v[2].clamp(-1.0, 1.0).acos();
    let azimuth = v[1].atan2(v[0]);
    PureState::from_raw(
        1,
        vec![C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), azimuth)],
    )
}

/// Any single-qubit map the simulators can apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalChannel {
    Noise(NoiseChannel),
    FixedPole(FixedPoleMap),
}

impl LocalChannel {
    pub fn apply_op(&self, rho: &Op2) -> Op2 {
        match self {
            LocalChannel::Noise(c) => c.apply_op(rho),
            LocalChannel::FixedPole(c) => c.apply_op(rho),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix, q: usize) -> Result<DensityMatrix> {
        match self {
            LocalChannel::Noise(c) => c.apply(rho, q),
            LocalChannel::FixedPole(c) => c.apply(rho, q),
        }
    }

    pub fn kraus(&self) -> Result<Vec<Op2>> {
        match self {
            LocalChannel::Noise(c) => c.kraus(),
            LocalChannel::FixedPole(c) => c.kraus(),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            LocalChannel::Noise(c) => c.is_identity(),
            LocalChannel::FixedPole(c) => c.p == 0.0,
        }
    }
}

impl From<NoiseChannel> for LocalChannel {
    fn from(c: NoiseChannel) -> Self {
        LocalChannel::Noise(c)
    }
}

impl From<FixedPoleMap> for LocalChannel {
    fn from(c: FixedPoleMap) -> Self {
        LocalChannel::FixedPole(c)
    }
}

/// JSON description of a channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    General {
        #[serde(rename = "B")]
        b: f64,
        #[serde(rename = "C")]
        c: f64,
        #[serde(rename = "S")]
        s: f64,
        t: f64,
    },
    Pf {
        gamma: f64,
        t: f64,
    },
    White {
        gamma: f64,
        t: f64,
    },
    FixedPole {
        p: f64,
        axis: [f64; 3],
        phi: f64,
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<LocalChannel> {
        Ok(match *self {
            ChannelSpec::General { b, c, s, t } => NoiseChannel::new(b, c, s, t)?.into(),
            ChannelSpec::Pf { gamma, t } => NoiseChannel::phase_flip(gamma, t)?.into(),
            ChannelSpec::White { gamma, t } => NoiseChannel::white(gamma, t)?.into(),
            ChannelSpec::FixedPole { p, axis, phi } => FixedPoleMap::new(p, axis, phi)?.into(),
        })
    }

    /// Builds a member of the Markovian family; fixed-pole maps are rejected.
    pub fn build_noise(&self) -> Result<NoiseChannel> {
        match self.build()? {
            LocalChannel::Noise(c) => Ok(c),
            LocalChannel::FixedPole(_) => {
                Err(Error::InvalidChannel("fixed_pole is not a member of the noise family".into()))
            }
        }
    }
}

/// `J = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`, input factor first.
pub fn choi_of(map: impl Fn(&Op2) -> Op2) -> Matrix {
    let mut j = Matrix::zeros(4, 4);
    for i in 0..2 {
        for k in 0..2 {
            let mut e = Op2::zeros();
            e[(i, k)] = ONE;
            let out = map(&e);
            for a in 0..2 {
                for b in 0..2 {
                    j[(i * 2 + a, k * 2 + b)] = out[(a, b)];
                }
            }
        }
    }
    j
}

fn choi_min_eigenvalue(j: &Matrix) -> f64 {
    hermitian_eig(j).map(|e| *e.values.last().unwrap()).unwrap_or(f64::NEG_INFINITY)
}

/// Operator-sum form from the Choi matrix; tiny negative eigenvalues are clamped.
pub fn kraus_from_choi(j: &Matrix) -> Result<Vec<Op2>> {
    let eig = hermitian_eig(j)?;
    let mut out = Vec::new();
    for (m, &lam) in eig.values.iter().enumerate() {
        if lam < EIG_FLOOR {
            return Err(Error::InvalidChannel(format!("Choi eigenvalue {lam:e}")));
        }
        if lam <= 1e-14 {
            continue;
        }
        let w = lam.sqrt();
        let mut k = Op2::zeros();
        for o in 0..2 {
            for i in 0..2 {
                k[(o, i)] = eig.vectors[(i * 2 + o, m)] * w;
            }
        }
        out.push(k);
    }
    if out.is_empty() {
        out.push(Op2::zeros());
    }
    Ok(out)
}

/// `Σ K ρ K†`.
pub fn apply_kraus(kraus: &[Op2], rho: &Op2) -> Op2 {
    kraus.iter().fold(Op2::zeros(), |acc, k| acc + k * rho * k.adjoint())
}

/// Heisenberg-picture action `Σ K† X K`.
pub fn apply_kraus_adjoint(kraus: &[Op2], x: &Op2) -> Op2 {
    kraus.iter().fold(Op2::zeros(), |acc, k| acc + k.adjoint() * x * k)
}
