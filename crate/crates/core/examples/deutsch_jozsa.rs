//! Deutsch-Jozsa as a measurement pattern, its behaviour under noise, and the
//! separable resource that reproduces its statistics.

use oneway_noise::channels::NoiseChannel;
use oneway_noise::protocols::{classical_replacement, dj, DjFunction};

fn main() -> oneway_noise::Result<()> {
    for f in [DjFunction::Constant(0), DjFunction::Balanced] {
        let d = dj(3, f)?;
        println!("{:?}: Pr(all-zero) ideal {:.4}", f, d.prob_all_zero_ideal()?);
        for t in [0.1, 0.5, 1.0] {
            let report = d.protocol.fidelity_uniform(None, NoiseChannel::phase_flip(1.0, t)?)?;
            let probs: Vec<f64> = report.outcomes.iter().map(|o| o.probability).collect();
            println!("  Γt = {t}: Pr(all-zero) {:.4}", d.prob_all_zero(&probs));
        }
        let (_, rep) = classical_replacement(&d.protocol, None)?;
        println!(
            "  replacement: distribution distance {:.1e}, max negativity {:.1e} (graph state {:.3})",
            rep.distance,
            rep.max_negativity(),
            {
                let g = d.protocol.resource(None)?.to_density();
                let mut m: f64 = 0.0;
                for &v in d.protocol.pattern.measured() {
                    m = m.max(oneway_noise::correlations::negativity(&g, &[v])?);
                }
                m
            }
        );
    }
    Ok(())
}
