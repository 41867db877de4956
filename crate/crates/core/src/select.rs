//! Monitorable node selection.
//!
//! One forward pass keeps the prefix state and, per qubit, a lock flag. A
//! single-qubit gate on an unlocked qubit is a node. A two-qubit gate locks
//! whichever operand it leaves entangled with the rest of the register; a
//! SWAP instead recomputes both operands' flags from scratch, which is the
//! only way a locked qubit becomes monitorable again.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::entangle::{concurrence, reduced_density, schmidt_spectrum, single_qubit_lambda2};
use crate::sim::{SimError, StateVector, DEFAULT_QUBIT_LIMIT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    #[error("gate {index} is a mid-circuit `{kind}`; node selection needs an uninstrumented circuit")]
    MidCircuitOp { index: usize, kind: GateKind },

    #[error("node (q{qubit}, {index}) does not name a gate acting on that qubit")]
    StaleNode { qubit: usize, index: usize },

    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A gate position paired with the qubit monitored after it. Ordered by
/// gate index, then qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub index: usize,
    pub qubit: usize,
}

impl Node {
    pub fn new(qubit: usize, index: usize) -> Node {
        Node { index, qubit }
    }
}

impl std::fmt::Display for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(q{}, {})", self.qubit, self.index)
    }
}

/// Separability measurements taken after a two-qubit gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDiagnostic {
    pub gate_index: usize,
    pub qubits: [usize; 2],
    pub concurrence: f64,
    /// `λ2` of `{a,b} | rest`; absent when the pair is the whole register.
    pub pair_lambda2: Option<f64>,
    /// `λ2` of `a | rest` and `b | rest`.
    pub lambda2: [f64; 2],
    pub locked_after: [bool; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorPlan {
    pub num_qubits: usize,
    /// Per qubit, strictly increasing gate indices.
    pub m_lists: Vec<Vec<usize>>,
    /// Lock state at the end of the pass.
    pub locked: Vec<bool>,
    pub diagnostics: Vec<GateDiagnostic>,
    /// Per qubit, the gate that immediately precedes its final measurement.
    pub pre_measure: Vec<Option<usize>>,
}

impl MonitorPlan {
    /// All nodes sorted by gate index, then qubit.
    pub fn nodes(&self) -> Vec<Node> {
        let mut nodes: Vec<Node> = self
            .m_lists
            .iter()
            .enumerate()
            .flat_map(|(q, list)| list.iter().map(move |&i| Node::new(q, i)))
            .collect();
        nodes.sort();
        nodes
    }

    pub fn len(&self) -> usize {
        self.m_lists.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, node: Node) -> bool {
        self.m_lists.get(node.qubit).is_some_and(|l| l.binary_search(&node.index).is_ok())
    }

    /// The node sits right before its qubit's final measurement, which
    /// already observes it.
    pub fn is_redundant(&self, node: Node) -> bool {
        self.pre_measure.get(node.qubit).copied().flatten() == Some(node.index)
    }

    /// Nodes that are not redundant.
    pub fn informative_nodes(&self) -> Vec<Node> {
        self.nodes().into_iter().filter(|&n| !self.is_redundant(n)).collect()
    }

    /// True when every node is redundant (including the empty plan).
    pub fn is_unmonitorable(&self) -> bool {
        self.informative_nodes().is_empty()
    }

    /// Largest node gate index.
    pub fn last_node_index(&self) -> Option<usize> {
        self.m_lists.iter().filter_map(|l| l.last().copied()).max()
    }

    /// Plan restricted to `nodes`.
    pub fn restricted_to(&self, nodes: &[Node]) -> MonitorPlan {
        let mut m_lists = vec![Vec::new(); self.num_qubits];
        for n in nodes {
            if self.contains(*n) {
                m_lists[n.qubit].push(n.index);
            }
        }
        for list in &mut m_lists {
            list.sort_unstable();
            list.dedup();
        }
        MonitorPlan {
            m_lists,
            ..self.clone()
        }
    }
}

/// Runs the selection pass. Final measurements and barriers are skipped;
/// any other measurement or reset is an error.
pub fn select_monitorable_nodes(circuit: &Circuit, tol: f64) -> Result<MonitorPlan, SelectError> {
    check_uninstrumented(circuit)?;
    let n = circuit.num_qubits();
    if n > DEFAULT_QUBIT_LIMIT {
        return Err(SimError::QubitLimit {
            needed: n,
            limit: DEFAULT_QUBIT_LIMIT,
        }
        .into());
    }
    let mut state = StateVector::zero(n);
    let mut locked = vec![false; n];
    let mut m_lists = vec![Vec::new(); n];
    let mut diagnostics = Vec::new();
    for (i, gate) in circuit.gates().iter().enumerate() {
        if !gate.kind.is_unitary() {
            continue;
        }
        state.apply_gate_mut(gate)?;
        if gate.kind.is_single_qubit() {
            let q = gate.qubits[0];
            if !locked[q] {
                m_lists[q].push(i);
            }
            continue;
        }
        let (a, b) = (gate.qubits[0], gate.qubits[1]);
        let rho = reduced_density(&state, &[a, b]).expect("operands are distinct and in range");
        let pair_lambda2 = (n > 2).then(|| {
            schmidt_spectrum(&state, &[a, b], tol)
                .expect("pair is a strict subset")
                .lambda2()
        });
        let lambda2 = [single_qubit_lambda2(&state, a), single_qubit_lambda2(&state, b)];
        for (k, &q) in [a, b].iter().enumerate() {
            let entangled = lambda2[k] > tol;
            if gate.kind == GateKind::Swap {
                locked[q] = entangled;
            } else if entangled {
                locked[q] = true;
            }
        }
        for q in [a, b] {
            if !locked[q] {
                m_lists[q].push(i);
            }
        }
        diagnostics.push(GateDiagnostic {
            gate_index: i,
            qubits: [a, b],
            concurrence: concurrence(&rho).expect("two-qubit reduction"),
            pair_lambda2,
            lambda2,
            locked_after: [locked[a], locked[b]],
        });
    }
    Ok(MonitorPlan {
        num_qubits: n,
        m_lists,
        locked,
        diagnostics,
        pre_measure: circuit.gates_before_final_measure(),
    })
}

fn check_uninstrumented(circuit: &Circuit) -> Result<(), SelectError> {
    match circuit.first_mid_circuit_op() {
        Some(index) => Err(SelectError::MidCircuitOp {
            index,
            kind: circuit.gates()[index].kind,
        }),
        None => Ok(()),
    }
}

/// Pre-measurement outcome probabilities of a node's qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeExpectation {
    pub qubit: usize,
    pub gate_index: usize,
    pub p0: f64,
    pub p1: f64,
}

impl NodeExpectation {
    pub fn node(&self) -> Node {
        Node::new(self.qubit, self.gate_index)
    }
}

/// Expectations for every node of `plan`, in [`MonitorPlan::nodes`] order.
pub fn expected_probabilities(circuit: &Circuit, plan: &MonitorPlan) -> Result<Vec<NodeExpectation>, SelectError> {
    node_expectations(circuit, &plan.nodes())
}

/// Expectations for arbitrary nodes, in the given order. Nodes need not be
/// separable; the diagonal of the reduced state is reported either way.
pub fn node_expectations(circuit: &Circuit, nodes: &[Node]) -> Result<Vec<NodeExpectation>, SelectError> {
    check_uninstrumented(circuit)?;
    for node in nodes {
        let ok = circuit
            .gate(node.index)
            .is_some_and(|g| g.kind.is_unitary() && g.acts_on(node.qubit));
        if !ok {
            return Err(SelectError::StaleNode {
                qubit: node.qubit,
                index: node.index,
            });
        }
    }
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by_key(|&k| nodes[k].index);
    let mut out = vec![None; nodes.len()];
    let mut state = StateVector::zero(circuit.num_qubits());
    let mut applied = 0;
    for k in order {
        let node = nodes[k];
        while applied <= node.index {
            let gate = &circuit.gates()[applied];
            if gate.kind.is_unitary() {
                state.apply_gate_mut(gate)?;
            }
            applied += 1;
        }
        let p1 = state.prob_one(node.qubit);
        out[k] = Some(NodeExpectation {
            qubit: node.qubit,
            gate_index: node.index,
            p0: 1.0 - p1,
            p1,
        });
    }
    Ok(out.into_iter().map(|e| e.expect("every node visited")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_qasm;
    use crate::corpus;

    #[test]
    fn worked_example_lists() {
        let plan = select_monitorable_nodes(&corpus::worked_example(), 1e-9).unwrap();
        assert_eq!(plan.m_lists, vec![vec![0], vec![3, 5], vec![2]]);
        assert_eq!(plan.locked, vec![true, false, true]);
        assert!(plan.is_redundant(Node::new(1, 5)));
        assert!(!plan.is_redundant(Node::new(0, 0)));
        assert!(!plan.is_unmonitorable());
    }

    #[test]
    fn ghz3_only_first_hadamard() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[3]; h q[0]; cx q[0],q[1]; cx q[1],q[2];").unwrap();
        let plan = select_monitorable_nodes(&c, 1e-9).unwrap();
        assert_eq!(plan.m_lists, vec![vec![0], vec![], vec![]]);
        let d = &plan.diagnostics[0];
        assert!((d.concurrence - 1.0).abs() < 1e-12);
        assert!(d.pair_lambda2.unwrap() < 1e-12);
        assert!((plan.diagnostics[1].concurrence).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_circuit_lists_everything() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0]; x q[1]; t q[0]; ry(0.3) q[1];").unwrap();
        let plan = select_monitorable_nodes(&c, 1e-9).unwrap();
        assert_eq!(plan.m_lists, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(plan.locked, vec![false, false]);
    }

    #[test]
    fn trivial_cx_keeps_both_operands() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[2]; x q[1]; cx q[0],q[1];").unwrap();
        let plan = select_monitorable_nodes(&c, 1e-9).unwrap();
        assert_eq!(plan.m_lists, vec![vec![1], vec![0, 1]]);
    }

    #[test]
    fn only_swap_unlocks() {
        // The second cx disentangles, but the operands stay locked.
        let c = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0]; cx q[0],q[1]; cx q[0],q[1]; h q[0];").unwrap();
        let plan = select_monitorable_nodes(&c, 1e-9).unwrap();
        assert_eq!(plan.m_lists, vec![vec![0], vec![]]);
        assert_eq!(plan.locked, vec![true, true]);
    }

    #[test]
    fn rejects_instrumented_input() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[1]; creg c[1]; h q[0]; measure q[0] -> c[0]; h q[0];").unwrap();
        assert!(matches!(
            select_monitorable_nodes(&c, 1e-9),
            Err(SelectError::MidCircuitOp { index: 1, .. })
        ));
    }

    #[test]
    fn expectations() {
        let fig = corpus::figure_example();
        let e = node_expectations(&fig, &[Node::new(0, 0)]).unwrap();
        assert!(e[0].p0.abs() < 1e-15 && (e[0].p1 - 1.0).abs() < 1e-15);

        let c = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        let e = node_expectations(&c, &[Node::new(0, 0), Node::new(1, 1)]).unwrap();
        assert!((e[0].p0 - 0.5).abs() < 1e-15);
        assert!((e[1].p0 - 0.5).abs() < 1e-15);

        let idle = parse_qasm("OPENQASM 2.0; qreg q[2]; x q[0]; cx q[0],q[1]; cx q[0],q[1];").unwrap();
        let e = node_expectations(&idle, &[Node::new(1, 2)]).unwrap();
        assert!((e[0].p0 - 1.0).abs() < 1e-15);

        assert!(matches!(
            node_expectations(&c, &[Node::new(1, 0)]),
            Err(SelectError::StaleNode { .. })
        ));
        assert!(node_expectations(&c, &[Node::new(0, 7)]).is_err());
    }

    #[test]
    fn restriction_keeps_only_known_nodes() {
        let plan = select_monitorable_nodes(&corpus::worked_example(), 1e-9).unwrap();
        let r = plan.restricted_to(&[Node::new(1, 5), Node::new(2, 6)]);
        assert_eq!(r.m_lists, vec![vec![], vec![5], vec![]]);
        assert_eq!(plan.last_node_index(), Some(5));
    }
}
