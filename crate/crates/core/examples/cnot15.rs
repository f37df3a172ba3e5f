//! The fifteen-vertex CNOT pattern: zero-noise check and the noisy fidelity
//! for a Bell-producing input.

use oneway_noise::channels::NoiseChannel;
use oneway_noise::linalg::{tensor, PureState};
use oneway_noise::protocols;

fn main() -> oneway_noise::Result<()> {
    let p = protocols::cnot15();
    let input = tensor(&PureState::plus(1), &PureState::basis(1, 0));
    println!("{} vertices, {} measured", p.qubits(), p.pattern.measured().len());
    println!("zero-noise fidelity {:.12}", p.zero_noise_fidelity(Some(&input))?);
    for t in [0.02, 0.05, 0.1, 0.2] {
        let f = p.fidelity_uniform(Some(&input), NoiseChannel::phase_flip(1.0, t)?)?;
        println!("Γt = {t:<5} F = {:.6} over {} records", f.average, f.outcomes.len());
    }
    Ok(())
}
