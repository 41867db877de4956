use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{asap_layers, Circuit};
use crate::select::MonitorPlan;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub node_cov: f64,
    pub qubit_cov: f64,
    pub depth_cov: f64,
    pub monitored_nodes: usize,
    /// Gates counted as potential nodes: unitary gates minus, per qubit, the
    /// gate right before its final measurement.
    pub total_nodes: usize,
    pub monitored_qubits: usize,
    pub num_qubits: usize,
    /// Deepest layer holding a node, if any.
    pub deepest_layer: Option<usize>,
    pub num_layers: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn coverage_metrics(circuit: &Circuit, plan: &MonitorPlan) -> CoverageReport {
    let excluded: BTreeSet<usize> = circuit.gates_before_final_measure().into_iter().flatten().collect();
    let included: BTreeSet<usize> = circuit
        .gates()
        .iter()
        .enumerate()
        .filter(|(i, g)| g.kind.is_unitary() && !excluded.contains(i))
        .map(|(i, _)| i)
        .collect();
    let node_indices: BTreeSet<usize> = plan.m_lists.iter().flatten().copied().collect();
    let monitored_nodes = node_indices.intersection(&included).count();

    let monitored_qubits = plan.m_lists.iter().filter(|l| !l.is_empty()).count();

    let unitary_positions: Vec<usize> = circuit
        .gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind.is_unitary())
        .map(|(i, _)| i)
        .collect();
    let layering = asap_layers(&circuit.unitary_part());
    let deepest_layer = node_indices
        .iter()
        .filter_map(|i| unitary_positions.binary_search(i).ok())
        .filter_map(|k| layering.layer(k))
        .max();

    CoverageReport {
        node_cov: ratio(monitored_nodes, included.len()),
        qubit_cov: ratio(monitored_qubits, circuit.num_qubits()),
        depth_cov: ratio(deepest_layer.map_or(0, |l| l + 1), layering.num_layers),
        monitored_nodes,
        total_nodes: included.len(),
        monitored_qubits,
        num_qubits: circuit.num_qubits(),
        deepest_layer,
        num_layers: layering.num_layers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_qasm;
    use crate::corpus;
    use crate::select::select_monitorable_nodes;

    fn cov(c: &Circuit) -> CoverageReport {
        coverage_metrics(c, &select_monitorable_nodes(c, 1e-9).unwrap())
    }

    #[test]
    fn worked_example() {
        let r = cov(&corpus::worked_example());
        assert_eq!(r.qubit_cov, 1.0);
        // Unitary gates 0..=6 minus the three final Hadamards.
        assert_eq!(r.total_nodes, 4);
        // Nodes 0, 2, 3 counted; 5 is excluded as pre-measurement.
        assert_eq!(r.monitored_nodes, 3);
        // Layers: h q0 0, cx 1, h q2 0, swap 2, then 2/3/3.
        assert_eq!(r.num_layers, 4);
        assert_eq!(r.deepest_layer, Some(3));
        assert_eq!(r.depth_cov, 1.0);
    }

    #[test]
    fn ghz_qubit_coverage() {
        for n in 3..=6 {
            let r = cov(&corpus::ghz(n));
            assert_eq!(r.qubit_cov, 1.0 / n as f64);
            assert_eq!(r.depth_cov, 1.0 / n as f64);
        }
    }

    #[test]
    fn single_qubit_circuit() {
        let c = parse_qasm(
            "OPENQASM 2.0; qreg q[2]; creg c[2]; h q[0]; t q[0]; x q[1]; h q[1]; s q[1]; measure q -> c;",
        )
        .unwrap();
        let r = cov(&c);
        assert_eq!(r.node_cov, 1.0);
        assert_eq!(r.total_nodes, 3);
    }

    #[test]
    fn empty_plan() {
        let c = corpus::ghz(3);
        let plan = select_monitorable_nodes(&c, 1e-9).unwrap().restricted_to(&[]);
        let r = coverage_metrics(&c, &plan);
        assert_eq!((r.node_cov, r.qubit_cov, r.depth_cov), (0.0, 0.0, 0.0));
    }
}
