//! A general single-qubit rotation on a five-vertex chain. Phase flip at rate
//! Γ and white noise at Γ/2 give the same fidelity while the resource states
//! differ in entanglement.

use std::f64::consts::FRAC_PI_4;

use oneway_noise::channels::NoiseChannel;
use oneway_noise::correlations::negativity;
use oneway_noise::linalg::PureState;
use oneway_noise::protocols;

fn main() -> oneway_noise::Result<()> {
    let p = protocols::rotation(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4);
    let input = PureState::basis(1, 0);
    let res = p.resource(Some(&input))?.to_density();
    println!("{:>5} {:>8} {:>8} {:>8} {:>8}", "t", "F_pf", "F_w", "N_pf", "N_w");
    for k in 0..=6 {
        let t = 0.25 * k as f64;
        let pf = NoiseChannel::phase_flip(1.0, t)?;
        let w = NoiseChannel::white(0.5, t)?;
        let noisy = |ch: NoiseChannel| -> oneway_noise::Result<f64> {
            let mut rho = res.clone();
            for &v in p.pattern.measured() {
                rho = ch.apply(&rho, v)?;
            }
            negativity(&rho, &[0, 1])
        };
        println!(
            "{t:>5.2} {:>8.5} {:>8.5} {:>8.5} {:>8.5}",
            p.fidelity_uniform(Some(&input), pf)?.average,
            p.fidelity_uniform(Some(&input), w)?.average,
            noisy(pf)?,
            noisy(w)?,
        );
    }
    Ok(())
}
