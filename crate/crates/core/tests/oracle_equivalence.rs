//! Closed-form engines against the brute-force density-matrix simulator on random patterns.

use oneway_noise::channels::NoiseChannel;
use oneway_noise::fidelity::{fidelity_adaptive, fidelity_nonadaptive, FidelityReport};
use oneway_noise::graphstate::{prepare_resource, Graph};
use oneway_noise::linalg::{PureState, C64};
use oneway_noise::oracle::{self, OracleRun};
use oneway_noise::pattern::{Angle, BooleanExpr, Byproduct, MeasurementPattern};
use proptest::prelude::*;

fn arb_channel() -> impl Strategy<Value = NoiseChannel> {
    (0.0f64..3.0, 0.0f64..3.0, 0.0f64..=1.0, 0.0f64..2.0)
        .prop_map(|(b, extra, s, t)| NoiseChannel::new(b, b / 2.0 + extra, s, t).unwrap())
}

fn arb_state(n: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter_map("nonzero", |v| PureState::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).ok())
}

/// A random pattern on `n` vertices: the last `outputs` vertices are outputs, the rest are
/// measured in vertex order.
#[derive(Debug, Clone)]
struct Case {
    graph: Graph,
    pattern: MeasurementPattern,
    input: PureState,
    measured: Vec<NoiseChannel>,
    answer: Vec<NoiseChannel>,
}

fn subset_of(bits: u64, pool: &[usize]) -> Vec<usize> {
    pool.iter().enumerate().filter(|(j, _)| bits >> j & 1 == 1).map(|(_, &v)| v).collect()
}

fn arb_case(adaptive: bool) -> impl Strategy<Value = Case> {
    (3usize..=6, 1usize..=2).prop_flat_map(move |(n, outs)| {
        let m = n - outs;
        let extra_edges = prop::collection::vec((0..n, 0..n), 0..4);
        let angles = prop::collection::vec((any::<bool>(), -3.2f64..3.2), m);
        let masks = prop::collection::vec(any::<u64>(), m + 3 * outs);
        let channels = prop::collection::vec(arb_channel(), n);
        (Just((n, outs)), extra_edges, angles, masks, channels, arb_state(1))
            .prop_map(move |((n, outs), extra, angles, masks, channels, input)| {
                let m = n - outs;
                let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
                edges.extend(extra.into_iter().filter(|(a, b)| a != b));
                let graph = Graph::new(n, edges).unwrap();
                let measured: Vec<usize> = (0..m).collect();
                let angles: Vec<Angle> =
                    angles.iter().map(|&(z, th)| if z { Angle::z() } else { Angle::xy(th) }).collect();
                let adapt = (0..m)
                    .map(|i| {
                        if !adaptive || angles[i] == Angle::z() {
                            BooleanExpr::zero()
                        } else {
                            BooleanExpr::xor_of(subset_of(masks[i], &measured[..i]))
                        }
                    })
                    .collect();
                let byproducts = (0..outs)
                    .map(|o| {
                        let mask = |j: usize| masks[m + 3 * o + j];
                        let mut fsig = BooleanExpr::xor_of(subset_of(mask(2), &measured));
                        if adaptive && m >= 2 {
                            fsig = fsig.with_and(0, 1);
                        }
                        Byproduct {
                            qubit: m + o,
                            fx: BooleanExpr::xor_of(subset_of(mask(0), &measured)),
                            fz: BooleanExpr::xor_of(subset_of(mask(1), &measured)).with_const((mask(1) >> 40) as u8 & 1),
                            fsig,
                        }
                    })
                    .collect();
                let pattern = MeasurementPattern::new(measured, angles, adapt, byproducts).unwrap();
                let answer = channels[m..].to_vec();
                let measured_ch = channels[..m].to_vec();
                Case { graph, pattern, input, measured: measured_ch, answer }
            })
    })
}

fn run_oracle(case: &Case, resource: &PureState) -> OracleRun {
    let mut vertex = vec![None; case.graph.vertices()];
    for (v, ch) in case.pattern.measured().iter().zip(&case.measured) {
        vertex[*v] = Some((*ch).into());
    }
    for (v, ch) in case.pattern.outputs().iter().zip(&case.answer) {
        vertex[*v] = Some((*ch).into());
    }
    oracle::simulate(resource, &case.pattern, &vertex).unwrap()
}

fn compare(engine: &FidelityReport, run: &OracleRun) -> Result<(), TestCaseError> {
    prop_assert_eq!(engine.outcomes.len(), run.branches.len());
    for (e, o) in engine.outcomes.iter().zip(&run.branches) {
        prop_assert!((e.probability - o.probability).abs() < 1e-9, "Z {} vs {}", e.probability, o.probability);
        if let (Some(fe), Some(fo)) = (e.fidelity, o.fidelity) {
            if o.probability > 1e-8 {
                prop_assert!((fe - fo).abs() < 1e-9, "F {} vs {} at {}", fe, fo, e.outcome);
            }
        }
    }
    prop_assert!((engine.average - run.average).abs() < 1e-9);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adaptive_engine_matches_oracle(case in arb_case(true)) {
        let resource = prepare_resource(&case.graph, &case.input, &[0]).unwrap();
        let engine = fidelity_adaptive(&case.pattern, &resource, &case.measured, &case.answer).unwrap();
        compare(&engine, &run_oracle(&case, &resource))?;
    }

    #[test]
    fn nonadaptive_engine_matches_oracle(case in arb_case(false)) {
        let resource = prepare_resource(&case.graph, &case.input, &[0]).unwrap();
        let engine = fidelity_nonadaptive(&case.pattern, &resource, &case.measured, &case.answer).unwrap();
        compare(&engine, &run_oracle(&case, &resource))?;
        let adaptive = fidelity_adaptive(&case.pattern, &resource, &case.measured, &case.answer).unwrap();
        compare(&adaptive, &run_oracle(&case, &resource))?;
    }
}

#[test]
fn identity_channels_reproduce_ideal_branches() {
    let graph = Graph::linear(4);
    let pattern = MeasurementPattern::new(
        vec![0, 1, 2],
        vec![Angle::xy(0.3), Angle::z(), Angle::xy(-1.0)],
        vec![BooleanExpr::zero(), BooleanExpr::zero(), BooleanExpr::xor_of([0])],
        vec![Byproduct { qubit: 3, fx: BooleanExpr::xor_of([2]), fz: BooleanExpr::xor_of([1]), fsig: BooleanExpr::zero() }],
    )
    .unwrap();
    let input = PureState::qubit(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
    let resource = prepare_resource(&graph, &input, &[0]).unwrap();
    let id = NoiseChannel::identity();
    let engine = fidelity_adaptive(&pattern, &resource, &[id; 3], &[id]).unwrap();
    let ideal = pattern.ideal_answers(&resource).unwrap();
    for (e, b) in engine.outcomes.iter().zip(&ideal) {
        assert!((e.probability - b.probability).abs() < 1e-12);
    }
    let run = oracle::simulate(&resource, &pattern, &[None, None, None, None]).unwrap();
    assert!((engine.average - run.average).abs() < 1e-12);
}
