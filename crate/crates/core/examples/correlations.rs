//! Every correlation measure on a decohered two-qubit cluster state.

use oneway_noise::channels::NoiseChannel;
use oneway_noise::correlations::{mep, profile, Side};
use oneway_noise::protocols;

fn main() -> oneway_noise::Result<()> {
    let g = protocols::rsp(0.0).resource(None)?.to_density();
    for (label, ch) in [("phase flip", NoiseChannel::phase_flip(1.0, 0.5)?), ("white", NoiseChannel::white(0.57, 0.5)?)] {
        let rho = ch.apply(&g, 0)?;
        let pr = profile(&rho, Side::A)?;
        println!("{label}:");
        println!("  concurrence {:.5}  negativity {:.5}", pr.concurrence, pr.negativity);
        println!("  I {:.5} = J {:.5} + D {:.5}", pr.mutual_info, pr.classical_corr, pr.discord);
        println!("  S_L(A) {:.5}", pr.linear_entropy);
        let m = mep(&rho)?;
        println!("  MEP {:.5} (converged: {}) at angles {:.3?}", m.value, m.converged, m.angles);
    }
    Ok(())
}
