//! Build a pattern by hand, run both fidelity engines and cross-check them
//! against the density-matrix simulator.

use oneway_noise::channels::NoiseChannel;
use oneway_noise::fidelity::{fidelity_adaptive, fidelity_nonadaptive};
use oneway_noise::graphstate::{prepare_resource, Graph};
use oneway_noise::linalg::{PureState, C64};
use oneway_noise::oracle;
use oneway_noise::pattern::{outcome_string, Angle, BooleanExpr, Byproduct, MeasurementPattern};

fn main() -> oneway_noise::Result<()> {
    let graph = Graph::linear(3);
    let pattern = MeasurementPattern::new(
        vec![0, 1],
        vec![Angle::xy(0.3), Angle::xy(-0.8)],
        vec![BooleanExpr::zero(), BooleanExpr::xor_of([0])],
        vec![Byproduct { qubit: 2, fx: BooleanExpr::xor_of([1]), fz: BooleanExpr::xor_of([0]), fsig: BooleanExpr::zero() }],
    )?;
    let input = PureState::qubit(C64::new(0.6, 0.0), C64::new(0.0, 0.8))?;
    let resource = prepare_resource(&graph, &input, &[0])?;
    let ch = NoiseChannel::new(1.0, 0.9, 0.7, 0.4)?;

    let adaptive = fidelity_adaptive(&pattern, &resource, &[ch; 2], &[ch])?;
    for o in &adaptive.outcomes {
        println!("k = {} Z = {:.4} F = {:?}", outcome_string(o.outcome, 2), o.probability, o.fidelity);
    }
    let vertex: Vec<_> = (0..3).map(|_| Some(ch.into())).collect();
    let run = oracle::simulate(&resource, &pattern, &vertex)?;
    println!("adaptive {:.12}  oracle {:.12}", adaptive.average, run.average);

    // the same pattern without adaptation goes through the cheaper engine
    let flat = MeasurementPattern::new(
        vec![0, 1],
        vec![Angle::xy(0.3), Angle::xy(-0.8)],
        vec![BooleanExpr::zero(); 2],
        pattern.byproducts().to_vec(),
    )?;
    let na = fidelity_nonadaptive(&flat, &resource, &[ch; 2], &[ch])?;
    println!("non-adaptive {:.12}", na.average);
    Ok(())
}
