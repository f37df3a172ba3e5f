//! Remote state preparation on a two-vertex cluster: fidelity and concurrence
//! under phase-flip and white noise.
//!
//! ```text
//! cargo run --example rsp_noise
//! ```

use oneway_noise::channels::NoiseChannel;
use oneway_noise::correlations::concurrence;
use oneway_noise::protocols;

fn main() -> oneway_noise::Result<()> {
    let p = protocols::rsp(0.7);
    let g = p.resource(None)?.to_density();
    // white noise at 3/8 of the phase-flip rate
    println!("{:>5} {:>8} {:>8} {:>8} {:>8}", "t", "F_pf", "F_w", "C_pf", "C_w");
    for k in 0..=10 {
        let t = 0.3 * k as f64;
        let pf = NoiseChannel::phase_flip(1.0, t)?;
        let w = NoiseChannel::white(0.375, t)?;
        println!(
            "{t:>5.2} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            p.fidelity_uniform(None, pf)?.average,
            p.fidelity_uniform(None, w)?.average,
            concurrence(&pf.apply(&g, 0)?)?,
            concurrence(&w.apply(&g, 0)?)?,
        );
    }
    Ok(())
}
