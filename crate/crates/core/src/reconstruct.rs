//! Instrumentation: measure and reset at each node, then replay the node's
//! traced path with fresh ancillas standing in for every other qubit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate};
use crate::select::{select_monitorable_nodes, Node, SelectError};
use crate::trace::{flatten_path, trace_node, TraceError, TracedPath};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    #[error("node {0} is not monitorable")]
    NotMonitorable(Node),

    #[error("node {0} requested twice")]
    DuplicateNode(Node),

    #[error("node {node}: gate {index} of the path differs from the circuit being instrumented")]
    PathMismatch { node: Node, index: usize },

    #[error(transparent)]
    Trace(#[from] TraceError),

    #[error(transparent)]
    Select(#[from] SelectError),

    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Where a gate of an instrumented circuit came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum Provenance {
    Original { index: usize },
    Measure { node: Node },
    Reset { node: Node },
    Replay { node: Node, source: usize },
}

/// Layout of one node's inserted block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeBlock {
    pub node: Node,
    pub clbit: usize,
    /// Original qubit → ancilla qubit.
    pub ancilla_map: BTreeMap<usize, usize>,
    pub measure_pos: usize,
    /// Position of the last replayed gate.
    pub replay_end: usize,
    pub replayed: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstrumentedCircuit {
    pub circuit: Circuit,
    pub original_qubits: usize,
    pub original_clbits: usize,
    /// In insertion order (gate index, then qubit).
    pub blocks: Vec<NodeBlock>,
    pub provenance: Vec<Provenance>,
    pub extra_qubits: usize,
}

impl InstrumentedCircuit {
    pub fn monitor_bits(&self) -> BTreeMap<Node, usize> {
        self.blocks.iter().map(|b| (b.node, b.clbit)).collect()
    }

    pub fn nodes(&self) -> Vec<Node> {
        self.blocks.iter().map(|b| b.node).collect()
    }

    /// Removes every inserted gate and ancilla, recovering the input circuit.
    pub fn strip(&self) -> Circuit {
        let mut out = Circuit::new(self.original_qubits, self.original_clbits);
        for (gate, prov) in self.circuit.gates().iter().zip(&self.provenance) {
            if let Provenance::Original { .. } = prov {
                out.push(gate.clone()).expect("original gates fit the original register");
            }
        }
        out
    }
}

/// Number of original qubits other than the monitored one on the node's path.
pub fn extra_qubit_cost(circuit: &Circuit, node: Node) -> Result<usize, TraceError> {
    Ok(trace_node(circuit, node)?.other_qubits().len())
}

/// Instruments `circuit` at `nodes`, each of which must be monitorable.
pub fn reconstruct(circuit: &Circuit, nodes: &[Node]) -> Result<InstrumentedCircuit, ReconstructError> {
    let plan = select_monitorable_nodes(circuit, crate::entangle::DEFAULT_SEPARABILITY_TOL)?;
    let mut paths = Vec::with_capacity(nodes.len());
    for &node in nodes {
        if !plan.contains(node) {
            return Err(ReconstructError::NotMonitorable(node));
        }
        paths.push(trace_node(circuit, node)?);
    }
    reconstruct_with_paths(circuit, &paths)
}

/// Instruments `circuit` using already traced paths, possibly traced on a
/// different circuit with the same layout. No separability check is made.
/// Each path's node gate must act on its qubit in `circuit`.
pub fn reconstruct_with_paths(circuit: &Circuit, paths: &[TracedPath]) -> Result<InstrumentedCircuit, ReconstructError> {
    let mut order: Vec<&TracedPath> = paths.iter().collect();
    order.sort_by_key(|p| p.node());
    let mut seen = BTreeSet::new();
    for p in &order {
        let node = p.node();
        if !seen.insert(node) {
            return Err(ReconstructError::DuplicateNode(node));
        }
        let fits = circuit
            .gate(node.index)
            .is_some_and(|g| g.kind.is_unitary() && g.acts_on(node.qubit));
        if !fits {
            return Err(ReconstructError::PathMismatch {
                node,
                index: node.index,
            });
        }
        for e in flatten_path(p) {
            let same_shape = circuit
                .gate(e.gate_index)
                .is_some_and(|g| g.qubits.len() == e.qubits.len() && g.kind.is_unitary());
            if !same_shape || e.qubits.iter().any(|&q| q >= circuit.num_qubits()) {
                return Err(ReconstructError::PathMismatch {
                    node,
                    index: e.gate_index,
                });
            }
        }
    }

    let n = circuit.num_qubits();
    let m = circuit.num_clbits();
    let mut next_ancilla = n;
    let mut maps = Vec::with_capacity(order.len());
    for p in &order {
        let map: BTreeMap<usize, usize> = p
            .other_qubits()
            .into_iter()
            .map(|q| {
                next_ancilla += 1;
                (q, next_ancilla - 1)
            })
            .collect();
        maps.push(map);
    }
    let extra_qubits = next_ancilla - n;
    let mut out = Circuit::new(next_ancilla, m + order.len());
    let mut provenance = Vec::new();
    let mut blocks = Vec::with_capacity(order.len());
    let mut cursor = 0;
    for (i, gate) in circuit.gates().iter().enumerate() {
        out.push(gate.clone())?;
        provenance.push(Provenance::Original { index: i });
        while cursor < order.len() && order[cursor].node_index == i {
            let path = order[cursor];
            let node = path.node();
            let clbit = m + cursor;
            let map = &maps[cursor];
            let measure_pos = out.len();
            out.push(Gate::measure(node.qubit, clbit))?;
            provenance.push(Provenance::Measure { node });
            out.push(Gate::reset(node.qubit))?;
            provenance.push(Provenance::Reset { node });
            let mut replayed = Vec::new();
            for e in flatten_path(path) {
                let qubits = e
                    .qubits
                    .iter()
                    .map(|&q| if q == node.qubit { q } else { map[&q] })
                    .collect();
                out.push(Gate::unitary(e.kind, e.params.clone(), qubits)?)?;
                provenance.push(Provenance::Replay {
                    node,
                    source: e.gate_index,
                });
                replayed.push(e.gate_index);
            }
            blocks.push(NodeBlock {
                node,
                clbit,
                ancilla_map: map.clone(),
                measure_pos,
                replay_end: out.len() - 1,
                replayed,
            });
            cursor += 1;
        }
    }
    Ok(InstrumentedCircuit {
        circuit: out,
        original_qubits: n,
        original_clbits: m,
        blocks,
        provenance,
        extra_qubits,
    })
}

/// The replay block of `path` alone, on a fresh register: the monitored qubit
/// becomes qubit 0 and the other path qubits follow in ascending order.
pub fn replay_circuit(path: &TracedPath) -> Circuit {
    let others: Vec<usize> = path.other_qubits().into_iter().collect();
    let local = |q: usize| {
        if q == path.target_qubit {
            0
        } else {
            1 + others.binary_search(&q).expect("path qubit")
        }
    };
    let mut c = Circuit::new(1 + others.len(), 0);
    for e in flatten_path(path) {
        let qubits: Vec<usize> = e.qubits.iter().map(|&q| local(q)).collect();
        c.apply(e.kind, &e.params, &qubits).expect("path gates are well formed");
    }
    c
}
