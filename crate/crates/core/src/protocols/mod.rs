//! Protocol catalog: remote state preparation, Euler rotation, CNOT, Deutsch-Jozsa and the
//! ancilla-driven model.

use serde::Serialize;

use crate::channels::{LocalChannel, NoiseChannel};
use crate::error::{Error, Result};
use crate::fidelity::{self, FidelityReport};
use crate::graphstate::{build_graph_state, prepare_resource, Graph};
use crate::linalg::{self, ops, Matrix, Op2, PureState, C64};
use crate::pattern::{zero_noise_fidelities, Angle, BooleanExpr, Byproduct, MeasurementPattern};

pub mod ancilla;
pub mod dj;
pub mod replacement;

pub use ancilla::{ancilla_step, ancilla_two_qubit_step, AncillaReport};
pub use dj::{dj, DjFunction, DjProtocol};
pub use replacement::{classical_replacement, ReplacementReport};

/// What the outputs should hold when every outcome is zero.
#[derive(Clone, Debug)]
pub enum Reference {
    /// Unitary from the input register to the output register.
    Unitary(Matrix),
    /// Fixed output state (no input qubits).
    State(PureState),
}

/// A graph, a pattern on it and the ideal computation it implements.
#[derive(Clone, Debug)]
pub struct Protocol {
    pub name: String,
    pub graph: Graph,
    pub pattern: MeasurementPattern,
    /// `input_vertices[j]` carries qubit `j` of the input; other vertices start in `|+⟩`.
    pub input_vertices: Vec<usize>,
    pub reference: Reference,
}

#[derive(Serialize)]
struct ProtocolJson<'a> {
    name: &'a str,
    graph: &'a Graph,
    pattern: &'a MeasurementPattern,
    inputs: &'a [usize],
}

impl Protocol {
    pub fn new(
        name: impl Into<String>,
        graph: Graph,
        pattern: MeasurementPattern,
        input_vertices: Vec<usize>,
        reference: Reference,
    ) -> Result<Self> {
        pattern.validate_for(&graph)?;
        for &v in &input_vertices {
            linalg::check_qubit(v, graph.vertices())?;
        }
        Ok(Self { name: name.into(), graph, pattern, input_vertices, reference })
    }

    pub fn input_qubits(&self) -> usize {
        self.input_vertices.len()
    }

    pub fn qubits(&self) -> usize {
        self.graph.vertices()
    }

    /// Graph and pattern as JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProtocolJson {
            name: &self.name,
            graph: &self.graph,
            pattern: &self.pattern,
            inputs: &self.input_vertices,
        })
        .expect("protocol serializes")
    }

    fn check_input(&self, input: Option<&PureState>) -> Result<()> {
        let got = input.map_or(0, |s| s.qubits());
        if got != self.input_qubits() {
            return Err(Error::DimensionMismatch { expected: self.input_qubits(), got });
        }
        Ok(())
    }

    /// Entangled resource with the input loaded.
    pub fn resource(&self, input: Option<&PureState>) -> Result<PureState> {
        self.check_input(input)?;
        match input {
            Some(s) => prepare_resource(&self.graph, s, &self.input_vertices),
            None => Ok(build_graph_state(&self.graph).into_state()),
        }
    }

    /// Ideal output on the all-zero record.
    pub fn expected_output(&self, input: Option<&PureState>) -> Result<PureState> {
        self.check_input(input)?;
        match (&self.reference, input) {
            (Reference::State(s), _) => Ok(s.clone()),
            (Reference::Unitary(u), Some(s)) => {
                let v = u * nalgebra::DVector::from_column_slice(s.amplitudes());
                PureState::normalized(v.iter().cloned().collect())
            }
            (Reference::Unitary(u), None) => PureState::normalized(u.column(0).iter().cloned().collect()),
        }
    }

    /// Smallest branch fidelity against `BP_k U|in⟩` without noise, plus the same check
    /// against the pattern's own all-zero answer.
    pub fn zero_noise_fidelity(&self, input: Option<&PureState>) -> Result<f64> {
        let res = self.resource(input)?;
        let expected = self.expected_output(input)?;
        let branches = self.pattern.ideal_answers(&res)?;
        let mut worst: f64 = 1.0;
        for (k, b) in branches.iter().enumerate() {
            let Some(ans) = &b.answer else { continue };
            let mut target = expected.amplitudes().to_vec();
            self.pattern.apply_byproduct(k as u64, &mut target);
            worst = worst.min(linalg::inner(&target, ans.amplitudes()).norm_sqr());
        }
        for f in zero_noise_fidelities(&self.pattern, &res)?.into_iter().flatten() {
            worst = worst.min(f);
        }
        Ok(worst)
    }

    /// Closed-form fidelity with one channel per measured qubit (measurement order) and one
    /// per output.
    pub fn fidelity(
        &self,
        input: Option<&PureState>,
        measured: &[NoiseChannel],
        answer: &[NoiseChannel],
    ) -> Result<FidelityReport> {
        fidelity::fidelity(&self.pattern, &self.resource(input)?, measured, answer)
    }

    /// Same channel on every measured qubit, noiseless outputs.
    pub fn fidelity_uniform(&self, input: Option<&PureState>, ch: NoiseChannel) -> Result<FidelityReport> {
        let measured = vec![ch; self.pattern.len()];
        let answer = vec![NoiseChannel::identity(); self.pattern.outputs().len()];
        self.fidelity(input, &measured, &answer)
    }

    /// Per-vertex channels for the oracle from measurement-order and output-order lists.
    pub fn vertex_channels(&self, measured: &[NoiseChannel], answer: &[NoiseChannel]) -> Vec<Option<LocalChannel>> {
        let mut out = vec![None; self.qubits()];
        for (&v, ch) in self.pattern.measured().iter().zip(measured) {
            out[v] = Some((*ch).into());
        }
        for (&v, ch) in self.pattern.outputs().iter().zip(answer) {
            out[v] = Some((*ch).into());
        }
        out
    }
}

fn op_to_matrix(op: &Op2) -> Matrix {
    Matrix::from_iterator(2, 2, op.iter().cloned())
}

fn bp(qubit: usize, fx: BooleanExpr, fz: BooleanExpr) -> Byproduct {
    Byproduct { qubit, fx, fz, fsig: BooleanExpr::zero() }
}

/// Remote preparation of `R_x(φ)|0⟩ = cos(φ/2)|0⟩ − i sin(φ/2)|1⟩` on a two-vertex graph.
pub fn rsp(phi: f64) -> Protocol {
    let pattern = MeasurementPattern::new(
        vec![0],
        vec![Angle::xy(phi)],
        vec![BooleanExpr::zero()],
        vec![bp(1, BooleanExpr::xor_of([0]), BooleanExpr::zero())],
    )
    .expect("valid pattern");
    let target = PureState::from_raw(1, vec![C64::new((phi / 2.0).cos(), 0.0), C64::new(0.0, -(phi / 2.0).sin())]);
    Protocol::new("rsp", Graph::linear(2), pattern, vec![], Reference::State(target)).expect("valid protocol")
}

/// `R_x(φ3) R_z(φ2) R_x(φ1)` on a five-vertex chain; input on vertex 0, output on vertex 4.
pub fn rotation(phi1: f64, phi2: f64, phi3: f64) -> Protocol {
    let angles = vec![Angle::xy(0.0), Angle::xy(phi1), Angle::xy(phi2), Angle::xy(phi3)];
    let adapt = vec![
        BooleanExpr::zero(),
        BooleanExpr::xor_of([0]),
        BooleanExpr::xor_of([1]),
        BooleanExpr::xor_of([0, 2]),
    ];
    let byproduct = Byproduct {
        qubit: 4,
        fx: BooleanExpr::xor_of([3, 1]),
        fz: BooleanExpr::xor_of([2, 0]),
        fsig: BooleanExpr::zero().with_and(2, 1),
    };
    let pattern = MeasurementPattern::new(vec![0, 1, 2, 3], angles, adapt, vec![byproduct]).expect("valid pattern");
    let u = ops::rx(phi3) * ops::rz(phi2) * ops::rx(phi1);
    Protocol::new("rotation", Graph::linear(5), pattern, vec![0], Reference::Unitary(op_to_matrix(&u)))
        .expect("valid protocol")
}

/// 15-vertex CNOT. Control enters on vertex 0 and leaves on 6, target enters on 8 and
/// leaves on 14; vertex 7 bridges 3 and 11. No adaptations.
pub fn cnot15() -> Protocol {
    let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, i + 1)).collect();
    edges.extend((8..14).map(|i| (i, i + 1)));
    edges.extend([(3, 7), (7, 11)]);
    let graph = Graph::new(15, edges).expect("valid graph");
    let x_measured = [0, 8, 9, 10, 12, 13];
    let measured: Vec<usize> = (0..15).filter(|v| *v != 6 && *v != 14).collect();
    let angles = measured
        .iter()
        .map(|v| if x_measured.contains(v) { Angle::xy(0.0) } else { Angle::xy(-std::f64::consts::FRAC_PI_2) })
        .collect();
    // outcome k_j of the 1-based vertex j lives on vertex j - 1
    let k = |js: &[usize]| BooleanExpr::xor_of(js.iter().map(|j| j - 1));
    let byproducts = vec![
        bp(6, k(&[2, 3, 5, 6]), k(&[1, 3, 4, 5, 8, 9, 11]).with_const(1)),
        bp(14, k(&[2, 3, 8, 10, 12, 14]), k(&[9, 11, 13])),
    ];
    let pattern = MeasurementPattern::new(measured.clone(), angles, vec![BooleanExpr::zero(); 13], byproducts)
        .expect("valid pattern");
    let mut cnot = Matrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        cnot[(j, i)] = C64::new(1.0, 0.0);
    }
    Protocol::new("cnot15", graph, pattern, vec![0, 8], Reference::Unitary(cnot)).expect("valid protocol")
}

/// Catalog entries addressable by name.
pub fn by_name(name: &str) -> Result<Protocol> {
    use std::f64::consts::FRAC_PI_4;
    match name {
        "rsp" => Ok(rsp(FRAC_PI_4)),
        "rotation" => Ok(rotation(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4)),
        "cnot15" => Ok(cnot15()),
        "dj" => Ok(dj::dj(3, DjFunction::Balanced)?.protocol),
        other => Err(Error::Unsupported(format!("unknown protocol '{other}'"))),
    }
}

pub const CATALOG: [&str; 4] = ["rsp", "rotation", "cnot15", "dj"];

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn product(a: (f64, f64), b: (f64, f64)) -> PureState {
        let q = |(th, ph): (f64, f64)| {
            PureState::from_raw(1, vec![C64::new((th / 2.0).cos(), 0.0), C64::from_polar((th / 2.0).sin(), ph)])
        };
        linalg::tensor(&q(a), &q(b))
    }

    #[test]
    fn rsp_is_correct() {
        for phi in [0.0, 0.4, 2.0] {
            let p = rsp(phi);
            assert!((p.zero_noise_fidelity(None).unwrap() - 1.0).abs() < 1e-12);
        }
        let zero = rsp(0.0).expected_output(None).unwrap();
        assert_eq!(zero, PureState::basis(1, 0));
    }

    #[test]
    fn rotation_is_correct() {
        let input = PureState::qubit(C64::new(0.3, 0.1), C64::new(-0.5, 0.7)).unwrap();
        for (a, b, c) in [(0.0, 0.0, 0.0), (FRAC_PI_4, FRAC_PI_4, FRAC_PI_4), (0.3, -1.2, 2.5)] {
            let p = rotation(a, b, c);
            assert!((p.zero_noise_fidelity(Some(&input)).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_byproduct_example() {
        let p = rotation(0.1, 0.2, 0.3);
        // k = (0, 1, 1, 0): bits 1 and 2 set
        assert_eq!(p.pattern.byproduct_bits(0b0110), vec![[1, 1, 1]]);
    }

    #[test]
    fn cnot_is_correct() {
        let p = cnot15();
        assert!(!p.pattern.is_adaptive());
        for (a, b) in [((0.0, 0.0), (0.0, 0.0)), ((1.0, 0.3), (2.0, -1.0)), ((3.1, 0.0), (0.0, 0.0))] {
            let f = p.zero_noise_fidelity(Some(&product(a, b))).unwrap();
            assert!((f - 1.0).abs() < 1e-9, "{f}");
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus_zero = PureState::new(vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let bell = p.expected_output(Some(&plus_zero)).unwrap();
        assert!((bell.amplitudes()[3].re - s).abs() < 1e-12);
    }

    #[test]
    fn catalog_resolves() {
        for name in CATALOG {
            let p = by_name(name).unwrap();
            assert!(p.to_json().contains(&format!("\"name\": \"{}\"", p.name)));
        }
        assert!(by_name("simon").is_err());
    }
}
