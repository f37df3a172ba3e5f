//! Graphs and the graph states built on them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, mask_of, ops, Op2, PureState, STRUCT_TOL};

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;
    fn try_from(j: GraphJson) -> Result<Self> {
        Graph::new(j.n, j.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson { n: g.n, edges: g.edges.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n, edges: set })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: BTreeSet::new() }
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn linear(n: usize) -> Self {
        Self { n, edges: (1..n).map(|i| (i - 1, i)).collect() }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    /// Edges in lexicographic order, each as `(low, high)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match () {
                _ if a == v => Some(b),
                _ if b == v => Some(a),
                _ => None,
            })
            .collect()
    }
}

/// A graph together with its stabilizer state `∏ CZ |+⟩^n`.
#[derive(Clone, Debug)]
pub struct GraphState {
    graph: Graph,
    state: PureState,
}

impl GraphState {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn into_state(self) -> PureState {
        self.state
    }

    /// `‖K_i|G⟩ − |G⟩‖` for the stabilizer `K_i = X_i ∏_{j∈N_i} Z_j`.
    pub fn stabilizer_defect(&self, i: usize) -> Result<f64> {
        linalg::check_qubit(i, self.graph.n)?;
        let mut s = self.state.apply(i, &ops::x())?;
        for j in self.graph.neighbors(i) {
            s = s.apply(j, &ops::z())?;
        }
        Ok(distance(&s, &self.state))
    }

    pub fn is_stabilized(&self) -> bool {
        (0..self.graph.n).all(|i| self.stabilizer_defect(i).map(|d| d < STRUCT_TOL).unwrap_or(false))
    }
}

fn distance(a: &PureState, b: &PureState) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Applies `CZ` along every edge as a diagonal sign update.
pub(crate) fn apply_cz_edges(amps: &mut [num_complex::Complex64], n: usize, graph: &Graph) {
    let masks: Vec<usize> = graph.edges().map(|(a, b)| mask_of(n, a) | mask_of(n, b)).collect();
    for (idx, a) in amps.iter_mut().enumerate() {
        let parity = masks.iter().filter(|&&m| idx & m == m).count() & 1;
        if parity == 1 {
            *a = -*a;
        }
    }
}

pub fn build_graph_state(g: &Graph) -> GraphState {
    let mut amps = PureState::plus(g.n).into_amplitudes();
    apply_cz_edges(&mut amps, g.n, g);
    GraphState { graph: g.clone(), state: PureState::from_raw(g.n, amps) }
}

/// Resource state with `input` loaded on `input_vertices` (qubit `j` of `input` on
/// `input_vertices[j]`), `|+⟩` elsewhere, then entangled along every edge.
pub fn prepare_resource(g: &Graph, input: &PureState, input_vertices: &[usize]) -> Result<PureState> {
    let plus = PureState::plus(1);
    let mut amps = input.embed(input_vertices, g.n, &plus)?.into_amplitudes();
    apply_cz_edges(&mut amps, g.n, g);
    Ok(PureState::from_raw(g.n, amps))
}

/// Single-qubit gates accepted by [`apply_local`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalOp {
    X,
    Y,
    Z,
    H,
    Rz(f64),
    /// Rotation by the angle about a unit axis.
    Rn([f64; 3], f64),
}

impl LocalOp {
    pub fn matrix(&self) -> Op2 {
        match *self {
            LocalOp::X => ops::x(),
            LocalOp::Y => ops::y(),
            LocalOp::Z => ops::z(),
            LocalOp::H => ops::h(),
            LocalOp::Rz(phi) => ops::rz(phi),
            LocalOp::Rn(axis, phi) => ops::rn(axis, phi),
        }
    }
}

pub fn apply_local(state: &PureState, op: LocalOp, qubit: usize) -> Result<PureState> {
    if let LocalOp::Rn(axis, _) = op {
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STRUCT_TOL {
            return Err(Error::Unsupported(format!("rotation axis has norm {norm}")));
        }
    }
    state.apply(qubit, &op.matrix())
}

/// Checks `X_i|G⟩ = ∏_{j∈N_i} Z_j |G⟩`.
pub fn neighbor_z_equivalence(gs: &GraphState, i: usize) -> Result<bool> {
    linalg::check_qubit(i, gs.graph.n)?;
    let lhs = gs.state.apply(i, &ops::x())?;
    let mut rhs = gs.state.clone();
    for j in gs.graph.neighbors(i) {
        rhs = rhs.apply(j, &ops::z())?;
    }
    Ok(distance(&lhs, &rhs) < STRUCT_TOL)
}
