//! Bit-layout manifest written next to an instrumented QASM file.

use midmon::circuit::{Circuit, GateKind};
use midmon::reconstruct::{InstrumentedCircuit, NodeBlock, Provenance};
use midmon::select::Node;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::report::SCHEMA_VERSION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum BitRole {
    Output,
    Monitor { node: Node },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClbitEntry {
    pub clbit: usize,
    #[serde(flatten)]
    pub role: BitRole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub original_qubits: usize,
    pub original_clbits: usize,
    pub extra_qubits: usize,
    pub clbits: Vec<ClbitEntry>,
    pub blocks: Vec<NodeBlock>,
    /// One entry per gate of the instrumented circuit.
    pub provenance: Vec<Provenance>,
}

impl Manifest {
    pub fn describe(inst: &InstrumentedCircuit) -> Manifest {
        let mut clbits: Vec<ClbitEntry> = (0..inst.original_clbits)
            .map(|clbit| ClbitEntry {
                clbit,
                role: BitRole::Output,
            })
            .collect();
        clbits.extend(inst.blocks.iter().map(|b| ClbitEntry {
            clbit: b.clbit,
            role: BitRole::Monitor { node: b.node },
        }));
        Manifest {
            schema_version: SCHEMA_VERSION,
            original_qubits: inst.original_qubits,
            original_clbits: inst.original_clbits,
            extra_qubits: inst.extra_qubits,
            clbits,
            blocks: inst.blocks.clone(),
            provenance: inst.provenance.clone(),
        }
    }

    /// Reattaches the layout to a parsed instrumented circuit, checking that
    /// every inserted measure and reset sits where the manifest says.
    pub fn rebuild(&self, circuit: Circuit) -> Result<InstrumentedCircuit, CliError> {
        let mismatch = |msg: String| Err(CliError::ManifestMismatch(msg));
        if self.schema_version != SCHEMA_VERSION {
            return mismatch(format!("schema version {} is not {SCHEMA_VERSION}", self.schema_version));
        }
        if circuit.num_qubits() != self.original_qubits + self.extra_qubits {
            return mismatch(format!(
                "circuit has {} qubits, manifest expects {}",
                circuit.num_qubits(),
                self.original_qubits + self.extra_qubits
            ));
        }
        if circuit.num_clbits() != self.original_clbits + self.blocks.len() {
            return mismatch(format!(
                "circuit has {} classical bits, manifest expects {}",
                circuit.num_clbits(),
                self.original_clbits + self.blocks.len()
            ));
        }
        if circuit.len() != self.provenance.len() {
            return mismatch(format!(
                "circuit has {} operations, manifest lists {}",
                circuit.len(),
                self.provenance.len()
            ));
        }
        let clbit_of = |node: Node| self.blocks.iter().find(|b| b.node == node).map(|b| b.clbit);
        let mut next_original = 0;
        for (pos, (gate, prov)) in circuit.gates().iter().zip(&self.provenance).enumerate() {
            let ok = match *prov {
                Provenance::Original { index } => {
                    let in_order = index == next_original;
                    next_original += 1;
                    in_order && gate.qubits.iter().all(|&q| q < self.original_qubits)
                }
                Provenance::Measure { node } => {
                    gate.kind == GateKind::Measure && gate.qubits == [node.qubit] && gate.clbit == clbit_of(node)
                }
                Provenance::Reset { node } => gate.kind == GateKind::Reset && gate.qubits.contains(&node.qubit),
                Provenance::Replay { .. } => gate.kind.is_unitary(),
            };
            if !ok {
                return mismatch(format!("operation {pos} (`{gate}`) does not match {prov:?}"));
            }
        }
        for b in &self.blocks {
            let measure = self.provenance.get(b.measure_pos);
            if measure != Some(&Provenance::Measure { node: b.node }) || b.replay_end >= circuit.len() {
                return mismatch(format!("block for node {} points outside its operations", b.node));
            }
        }
        Ok(InstrumentedCircuit {
            circuit,
            original_qubits: self.original_qubits,
            original_clbits: self.original_clbits,
            blocks: self.blocks.clone(),
            provenance: self.provenance.clone(),
            extra_qubits: self.extra_qubits,
        })
    }
}
