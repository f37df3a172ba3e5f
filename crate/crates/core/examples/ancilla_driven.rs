//! One ancilla-driven step on a two-qubit register and how its fidelity tracks
//! the mixedness of the driven qubit.

use oneway_noise::linalg::{PureState, C64};
use oneway_noise::protocols::ancilla::{phase_flip_with_mixing, white_with_mixing};
use oneway_noise::protocols::ancilla_step;

fn main() -> oneway_noise::Result<()> {
    let p = 0.2;
    println!("{:>6} {:>8} {:>8} {:>10} {:>8}", "theta", "xi", "S_L", "F_white", "bound");
    for k in 0..=4 {
        let theta = std::f64::consts::FRAC_PI_4 * k as f64 / 2.0;
        // cos θ|00⟩ + sin θ|11⟩
        let z = C64::new(0.0, 0.0);
        let reg = PureState::new(vec![C64::new(theta.cos(), 0.0), z, z, C64::new(theta.sin(), 0.0)])?;
        let w = ancilla_step(&reg, 0, 0.4, &white_with_mixing(p)?)?;
        let pf = ancilla_step(&reg, 0, 0.4, &phase_flip_with_mixing(p)?)?;
        println!("{theta:>6.3} {:>8.4} {:>8.4} {:>10.5} {:>8.5}  (phase flip {:.5})", w.xi, w.s_l, w.mean_fidelity, w.bound, pf.mean_fidelity);
    }
    Ok(())
}
