use super::Circuit;

/// ASAP layer assignment. Barriers carry no layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layering {
    pub layer_of: Vec<Option<usize>>,
    pub num_layers: usize,
}

impl Layering {
    pub fn layer(&self, gate_index: usize) -> Option<usize> {
        self.layer_of.get(gate_index).copied().flatten()
    }
}

/// Places every gate one layer after the latest earlier gate sharing a qubit
/// with it, or at layer 0 when there is none.
pub fn asap_layers(circuit: &Circuit) -> Layering {
    let mut frontier = vec![0usize; circuit.num_qubits()];
    let mut layer_of = Vec::with_capacity(circuit.len());
    let mut num_layers = 0;
    for gate in circuit.gates() {
        if gate.is_barrier() {
            layer_of.push(None);
            continue;
        }
        let layer = gate.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
        for &q in &gate.qubits {
            frontier[q] = layer + 1;
        }
        num_layers = num_layers.max(layer + 1);
        layer_of.push(Some(layer));
    }
    Layering { layer_of, num_layers }
}
