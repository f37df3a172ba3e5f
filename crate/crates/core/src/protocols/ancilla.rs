//! Ancilla-driven steps: a fresh `|+⟩` ancilla is coupled to the register by
//! `E = H_a H_r CZ_{ar}`, suffers the channel, and is measured.
//!
//! The ancilla is appended as the last qubit of the register.

use serde::Serialize;

use crate::channels::NoiseChannel;
use crate::correlations::linear_entropy;
use crate::error::{Error, Result};
use crate::linalg::{self, apply_op2_vec, contract_matrix, ops, partial_trace, DensityMatrix, PureState, C64};
use crate::pattern::basis_amplitudes;

pub const MAX_REGISTER: usize = 4;
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AncillaReport {
    pub mean_fidelity: f64,
    /// `Tr(Z ρ_{r_i})` before the interaction.
    pub xi: f64,
    /// Linear entropy of the same reduced state.
    pub s_l: f64,
    /// Probability that the channel flips the ancilla outcome.
    pub p: f64,
    /// `1 − p(1 − ξ²)`.
    pub predicted: f64,
    /// `1 − p S_L`.
    pub bound: f64,
    pub bound_ok: bool,
}

/// Phase-flip channel whose `xy` flip probability is `p ≤ 1/2`.
pub fn phase_flip_with_mixing(p: f64) -> Result<NoiseChannel> {
    check_mixing(p)?;
    NoiseChannel::phase_flip(1.0, -(1.0 - 2.0 * p).ln() / 2.0)
}

/// White-noise channel whose `xy` flip probability is `p ≤ 1/2`.
pub fn white_with_mixing(p: f64) -> Result<NoiseChannel> {
    check_mixing(p)?;
    NoiseChannel::white(1.0, -(1.0 - 2.0 * p).ln() / 4.0)
}

fn check_mixing(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidChannel(format!("flip probability {p} outside [0, 1/2]")));
    }
    Ok(())
}

fn check_register(register: &PureState, qubits: &[usize]) -> Result<()> {
    let n = register.qubits();
    if n > MAX_REGISTER {
        return Err(Error::TooLarge { what: "register qubits", got: n, max: MAX_REGISTER });
    }
    for &q in qubits {
        linalg::check_qubit(q, n)?;
    }
    Ok(())
}

/// `E_{a,q}` on an `n`-qubit vector whose ancilla is qubit `a`.
fn couple(amps: &mut [C64], n: usize, a: usize, q: usize) {
    let (ma, mq) = (linalg::mask_of(n, a), linalg::mask_of(n, q));
    for (idx, x) in amps.iter_mut().enumerate() {
        if idx & ma != 0 && idx & mq != 0 {
            *x = -*x;
        }
    }
    apply_op2_vec(amps, n, a, &ops::h());
    apply_op2_vec(amps, n, q, &ops::h());
}

fn with_ancilla(register: &PureState) -> Vec<C64> {
    linalg::tensor(register, &PureState::plus(1)).into_amplitudes()
}

/// Noisy ancilla, measured in `basis(k)`; returns `Σ_k p_k ⟨T_k|ρ_k|T_k⟩`.
fn mean_fidelity(
    coupled: Vec<C64>,
    channel: &NoiseChannel,
    basis: impl Fn(u8) -> [C64; 2],
    target: impl Fn(u8) -> Vec<C64>,
) -> Result<f64> {
    let n = coupled.len().trailing_zeros() as usize;
    let rho = channel.apply(&PureState::from_raw(n, coupled).to_density(), n - 1)?;
    let mut mean = 0.0;
    for k in 0..2u8 {
        let post = contract_matrix(rho.matrix(), n, n - 1, &basis(k));
        // unnormalized: p_k F_k
        mean += linalg::quadratic_form(&post, &target(k)).re;
    }
    Ok(mean)
}

fn reduced_stats(register: &PureState, i: usize) -> Result<(f64, f64)> {
    let reduced: DensityMatrix = partial_trace(&register.to_density(), &[i])?;
    let xi = reduced.bloch()?[2];
    Ok((xi, linear_entropy(&reduced)?))
}

fn report(mean_fidelity: f64, xi: f64, s_l: f64, p: f64) -> AncillaReport {
    let bound = 1.0 - p * s_l;
    AncillaReport {
        mean_fidelity,
        xi,
        s_l,
        p,
        predicted: 1.0 - p * (1.0 - xi * xi),
        bound,
        bound_ok: mean_fidelity <= bound + BOUND_SLACK,
    }
}

/// Single-qubit step on register qubit `i`: the ancilla is measured in
/// `(|0⟩ ± e^{−iφ}|1⟩)/√2`, which applies `X^k H R_z(φ)` to `r_i`.
pub fn ancilla_step(register: &PureState, i: usize, phi: f64, channel: &NoiseChannel) -> Result<AncillaReport> {
    check_register(register, &[i])?;
    let n = register.qubits();
    let mut amps = with_ancilla(register);
    couple(&mut amps, n + 1, n, i);
    let mean = mean_fidelity(
        amps,
        channel,
        |k| basis_amplitudes(phi, std::f64::consts::FRAC_PI_2, 0, k),
        |k| {
            let mut t = register.amplitudes().to_vec();
            apply_op2_vec(&mut t, n, i, &ops::rz(phi));
            apply_op2_vec(&mut t, n, i, &ops::h());
            if k == 1 {
                apply_op2_vec(&mut t, n, i, &ops::x());
            }
            t
        },
    )?;
    let (xi, s_l) = reduced_stats(register, i)?;
    Ok(report(mean, xi, s_l, channel.mixing_probabilities().p_xy))
}

/// Two-qubit step: `E_{a,i}` then `E_{a,j}`, ancilla measured in `Z`, which applies
/// `(X^k H ⊗ H) CZ` to `(r_i, r_j)`. `ξ` and `S_L` refer to `r_i`.
pub fn ancilla_two_qubit_step(
    register: &PureState,
    i: usize,
    j: usize,
    channel: &NoiseChannel,
) -> Result<AncillaReport> {
    check_register(register, &[i, j])?;
    if i == j {
        return Err(Error::Unsupported("the two register qubits must differ".into()));
    }
    let n = register.qubits();
    let mut amps = with_ancilla(register);
    couple(&mut amps, n + 1, n, i);
    couple(&mut amps, n + 1, n, j);
    let mean = mean_fidelity(
        amps,
        channel,
        |k| basis_amplitudes(0.0, 0.0, 0, k),
        |k| {
            let mut t = register.amplitudes().to_vec();
            let (mi, mj) = (linalg::mask_of(n, i), linalg::mask_of(n, j));
            for (idx, x) in t.iter_mut().enumerate() {
                if idx & mi != 0 && idx & mj != 0 {
                    *x = -*x;
                }
            }
            apply_op2_vec(&mut t, n, i, &ops::h());
            apply_op2_vec(&mut t, n, j, &ops::h());
            if k == 1 {
                apply_op2_vec(&mut t, n, i, &ops::x());
            }
            t
        },
    )?;
    let (xi, s_l) = reduced_stats(register, i)?;
    let pz = channel.mixing_probabilities().p_z;
    Ok(report(mean, xi, s_l, (pz[0] + pz[1]) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use proptest::prelude::*;

    fn entangled_pair() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn mixing_constructors() {
        for p in [0.0, 0.05, 0.2, 0.5] {
            assert!((white_with_mixing(p).unwrap().mixing_probabilities().p_xy - p).abs() < 1e-12);
            assert!((phase_flip_with_mixing(p).unwrap().mixing_probabilities().p_xy - p).abs() < 1e-12);
        }
        assert!(white_with_mixing(0.6).is_err());
    }

    #[test]
    fn pure_unentangled_register_is_protected() {
        for p in [0.05, 0.2, 0.5] {
            let r = ancilla_step(&PureState::basis(1, 0), 0, 0.7, &white_with_mixing(p).unwrap()).unwrap();
            assert!((r.xi - 1.0).abs() < 1e-12 && r.s_l < 1e-12);
            assert!((r.mean_fidelity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn maximally_entangled_register_saturates() {
        for p in [0.05, 0.2, 0.5] {
            let r = ancilla_step(&entangled_pair(), 0, 1.3, &white_with_mixing(p).unwrap()).unwrap();
            assert!(r.xi.abs() < 1e-12 && (r.s_l - 1.0).abs() < 1e-12);
            assert!((r.mean_fidelity - (1.0 - p)).abs() < 1e-12);
            assert!((r.mean_fidelity - r.bound).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_steps_are_exact() {
        let reg = PureState::normalized(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5), ZERO, C64::new(0.4, -0.6)]).unwrap();
        let id = NoiseChannel::identity();
        assert!((ancilla_step(&reg, 1, 0.4, &id).unwrap().mean_fidelity - 1.0).abs() < 1e-12);
        assert!((ancilla_two_qubit_step(&reg, 0, 1, &id).unwrap().mean_fidelity - 1.0).abs() < 1e-12);
        assert!(ancilla_two_qubit_step(&reg, 1, 1, &id).is_err());
    }

    fn arb_register() -> impl Strategy<Value = PureState> {
        (1usize..=3).prop_flat_map(|n| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
                .prop_filter_map("nonzero", |v| PureState::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).ok())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn closed_form_and_bound(reg in arb_register(), phi in -3.2f64..3.2, p in 0.0f64..0.5, white in any::<bool>()) {
            let ch = if white { white_with_mixing(p).unwrap() } else { phase_flip_with_mixing(p).unwrap() };
            let i = reg.qubits() - 1;
            let r = ancilla_step(&reg, i, phi, &ch).unwrap();
            prop_assert!((r.mean_fidelity - r.predicted).abs() < 1e-9);
            prop_assert!(r.bound_ok);
        }

        #[test]
        fn two_qubit_closed_form_and_bound(reg in arb_register(), p in 0.0f64..0.5) {
            prop_assume!(reg.qubits() >= 2);
            let r = ancilla_two_qubit_step(&reg, 0, 1, &white_with_mixing(p).unwrap()).unwrap();
            prop_assert!((r.mean_fidelity - r.predicted).abs() < 1e-9);
            prop_assert!(r.bound_ok);
        }
    }
}
