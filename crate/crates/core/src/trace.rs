//! Backward depth-first tracing of the gates that causally reach a qubit.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::select::Node;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("gate index {index} out of range for a circuit of {len} gates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("gate {index} does not act on qubit {qubit}")]
    NotOnQubit { qubit: usize, index: usize },

    #[error("gate {index} is a mid-circuit `{kind}` inside the traced prefix")]
    MidCircuitOp { index: usize, kind: GateKind },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub gate_index: usize,
    pub kind: GateKind,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
    /// Trace of the other operand before this gate; two-qubit gates only.
    pub sub_path: Option<Vec<PathEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracedPath {
    pub target_qubit: usize,
    pub node_index: usize,
    /// Ascending gate index at every nesting level.
    pub entries: Vec<PathEntry>,
    /// `(gate index, qubit)` pairs consumed by the search.
    pub visited: BTreeSet<(usize, usize)>,
}

impl TracedPath {
    /// Distinct gate indices, ascending.
    pub fn gate_indices(&self) -> Vec<usize> {
        flatten_path(self).iter().map(|e| e.gate_index).collect()
    }

    /// Qubits other than the target that appear anywhere on the path.
    pub fn other_qubits(&self) -> BTreeSet<usize> {
        flatten_path(self)
            .iter()
            .flat_map(|e| e.qubits.iter().copied())
            .filter(|&q| q != self.target_qubit)
            .collect()
    }

    pub fn node(&self) -> Node {
        Node::new(self.target_qubit, self.node_index)
    }
}

/// Traces every gate at or before `start_index` that influences `qubit`.
pub fn trace_path(circuit: &Circuit, qubit: usize, start_index: usize) -> Result<TracedPath, TraceError> {
    let gate = circuit.gate(start_index).ok_or(TraceError::IndexOutOfRange {
        index: start_index,
        len: circuit.len(),
    })?;
    if !gate.acts_on(qubit) || gate.is_barrier() {
        return Err(TraceError::NotOnQubit {
            qubit,
            index: start_index,
        });
    }
    let mut visited = BTreeSet::new();
    let entries = dfs(circuit, qubit, Some(start_index), &mut visited)?;
    Ok(TracedPath {
        target_qubit: qubit,
        node_index: start_index,
        entries,
        visited,
    })
}

pub fn trace_node(circuit: &Circuit, node: Node) -> Result<TracedPath, TraceError> {
    trace_path(circuit, node.qubit, node.index)
}

fn dfs(
    circuit: &Circuit,
    target: usize,
    start: Option<usize>,
    visited: &mut BTreeSet<(usize, usize)>,
) -> Result<Vec<PathEntry>, TraceError> {
    let mut path = Vec::new();
    let Some(start) = start else { return Ok(path) };
    for i in (0..=start).rev() {
        if visited.contains(&(i, target)) {
            continue;
        }
        let gate = &circuit.gates()[i];
        if !gate.acts_on(target) || gate.is_barrier() {
            continue;
        }
        if !gate.kind.is_unitary() {
            return Err(TraceError::MidCircuitOp { index: i, kind: gate.kind });
        }
        if gate.qubits.len() == 1 {
            path.push(PathEntry {
                gate_index: i,
                kind: gate.kind,
                params: gate.params.clone(),
                qubits: gate.qubits.clone(),
                sub_path: None,
            });
        } else {
            for &q in &gate.qubits {
                if q != target {
                    let sub_path = dfs(circuit, q, i.checked_sub(1), visited)?;
                    path.push(PathEntry {
                        gate_index: i,
                        kind: gate.kind,
                        params: gate.params.clone(),
                        qubits: gate.qubits.clone(),
                        sub_path: Some(sub_path),
                    });
                }
            }
        }
        visited.insert((i, target));
    }
    path.reverse();
    Ok(path)
}

/// All entries at every nesting depth, one per gate index, ascending.
pub fn flatten_path(path: &TracedPath) -> Vec<&PathEntry> {
    fn walk<'a>(entries: &'a [PathEntry], out: &mut Vec<&'a PathEntry>) {
        for e in entries {
            out.push(e);
            if let Some(sub) = &e.sub_path {
                walk(sub, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(&path.entries, &mut out);
    out.sort_by_key(|e| e.gate_index);
    out.dedup_by_key(|e| e.gate_index);
    out
}
