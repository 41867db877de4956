mod common;

use std::collections::BTreeSet;

use midmon::circuit::{Circuit, GateKind};
use midmon::corpus;
use midmon::reconstruct::{reconstruct, replay_circuit, Provenance};
use midmon::select::{node_expectations, select_monitorable_nodes, Node};
use midmon::sim::{simulate_prefix, Sampler};
use midmon::trace::trace_path;
use proptest::prelude::*;

use common::{circuit_strategy, purity_1q, reduced_1q, trace_distance_1q};

const TOL: f64 = 1e-9;

/// Smaller eigenvalue of the qubit's reduced state, i.e. `λ2²`.
fn min_eigenvalue(amps: &[num_complex::Complex64], qubit: usize) -> f64 {
    let r = reduced_1q(amps, qubit);
    let a = (r[0][0] - r[1][1]).re;
    0.5 * (1.0 - (a * a + 4.0 * r[0][1].norm_sqr()).sqrt())
}

/// Node lists by replaying the selection rules over a purity-style
/// separability test computed from raw amplitudes.
fn oracle_lists(c: &Circuit) -> Vec<Vec<usize>> {
    let n = c.num_qubits();
    let mut locked = vec![false; n];
    let mut lists = vec![Vec::new(); n];
    for (i, g) in c.gates().iter().enumerate() {
        if !g.kind.is_unitary() {
            continue;
        }
        if g.qubits.len() == 2 {
            let s = simulate_prefix(c, i).unwrap();
            for &q in &g.qubits {
                let entangled = min_eigenvalue(s.amplitudes(), q) > 1e-14;
                if g.kind == GateKind::Swap {
                    locked[q] = entangled;
                } else {
                    locked[q] |= entangled;
                }
            }
        }
        for &q in &g.qubits {
            if !locked[q] {
                lists[q].push(i);
            }
        }
    }
    lists
}

fn pre_measure_p0(c: &Circuit, node: Node) -> f64 {
    reduced_1q(simulate_prefix(c, node.index).unwrap().amplitudes(), node.qubit)[0][0].re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn plan_matches_amplitude_oracle(c in circuit_strategy(6, 40)) {
        let plan = select_monitorable_nodes(&c, TOL).unwrap();
        prop_assert_eq!(plan.m_lists, oracle_lists(&c));
    }

    #[test]
    fn selected_nodes_are_pure(c in circuit_strategy(6, 40)) {
        let plan = select_monitorable_nodes(&c, TOL).unwrap();
        for node in plan.nodes() {
            let s = simulate_prefix(&c, node.index).unwrap();
            let p = purity_1q(&reduced_1q(s.amplitudes(), node.qubit));
            prop_assert!(p >= 1.0 - TOL, "{} purity {}", node, p);
        }
    }

    #[test]
    fn locks_persist_without_swaps(c in circuit_strategy(6, 40)) {
        prop_assume!(c.gates().iter().all(|g| g.kind != GateKind::Swap));
        let plan = select_monitorable_nodes(&c, TOL).unwrap();
        for q in 0..c.num_qubits() {
            let on_q: Vec<usize> = (0..c.len()).filter(|&i| c.gates()[i].kind.is_unitary() && c.gates()[i].acts_on(q)).collect();
            // Nodes form a prefix of the qubit's gates.
            prop_assert_eq!(&plan.m_lists[q][..], &on_q[..plan.m_lists[q].len()]);
        }
    }

    #[test]
    fn replay_reproduces_reduced_state(c in circuit_strategy(6, 40), pick in any::<prop::sample::Index>()) {
        // Holds for any (gate, operand), monitorable or not.
        let sites: Vec<Node> = c
            .gates()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kind.is_unitary())
            .flat_map(|(i, g)| g.qubits.iter().map(move |&q| Node::new(q, i)))
            .collect();
        prop_assume!(!sites.is_empty());
        let node = sites[pick.index(sites.len())];
        let path = trace_path(&c, node.qubit, node.index).unwrap();
        let replay = simulate_prefix(&replay_circuit(&path), path.gate_indices().len() - 1).unwrap();
        let original = simulate_prefix(&c, node.index).unwrap();
        let d = trace_distance_1q(&reduced_1q(replay.amplitudes(), 0), &reduced_1q(original.amplitudes(), node.qubit));
        prop_assert!(d <= 1e-10, "{} distance {}", node, d);
        // Every gate on the target up to the node is replayed.
        let indices: BTreeSet<usize> = path.gate_indices().into_iter().collect();
        for i in 0..=node.index {
            if c.gates()[i].kind.is_unitary() && c.gates()[i].acts_on(node.qubit) {
                prop_assert!(indices.contains(&i));
            }
        }
        prop_assert!(indices.iter().all(|&i| i <= node.index));
    }

    #[test]
    fn strip_inverts_instrumentation(c in circuit_strategy(5, 30)) {
        let plan = select_monitorable_nodes(&c, TOL).unwrap();
        let inst = reconstruct(&c, &plan.nodes()).unwrap();
        prop_assert_eq!(inst.strip(), c.clone());
        prop_assert_eq!(inst.provenance.len(), inst.circuit.len());
        prop_assert_eq!(inst.circuit.num_clbits(), c.num_clbits() + plan.len());
        let bits: BTreeSet<usize> = inst.monitor_bits().into_values().collect();
        prop_assert_eq!(bits.len(), plan.len());
        prop_assert!(bits.iter().all(|&b| b >= c.num_clbits()));
        let replays = inst.provenance.iter().filter(|p| matches!(p, Provenance::Replay { .. })).count();
        let blocks: usize = inst.blocks.iter().map(|b| b.replayed.len()).sum();
        prop_assert_eq!(replays, blocks);
    }

    #[test]
    fn replay_restores_node_probability(c in circuit_strategy(4, 20)) {
        let plan = select_monitorable_nodes(&c, TOL).unwrap();
        let inst = reconstruct(&c, &plan.nodes()).unwrap();
        let probes: Vec<(usize, usize)> = inst.blocks.iter().map(|b| (b.replay_end, b.node.qubit)).collect();
        let restored = Sampler::default().branch_averaged_p0(&inst.circuit, &probes).unwrap();
        for (block, p0) in inst.blocks.iter().zip(restored) {
            let before = pre_measure_p0(&c, block.node);
            prop_assert!((p0 - before).abs() < 1e-9, "{}: {} vs {}", block.node, p0, before);
        }
    }
}

#[test]
fn expectations_match_prefix_states() {
    for (name, c) in corpus::bundled() {
        let plan = select_monitorable_nodes(&c, TOL).unwrap();
        for e in node_expectations(&c, &plan.nodes()).unwrap() {
            let p0 = pre_measure_p0(&c, e.node());
            assert!((e.p0 - p0).abs() < 1e-12, "{name} {}", e.node());
            assert!((e.p0 + e.p1 - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn worked_example_trace_and_layout() {
    let c = corpus::worked_example();
    let plan = select_monitorable_nodes(&c, TOL).unwrap();
    assert_eq!(plan.m_lists, vec![vec![0], vec![3, 5], vec![2]]);
    let path = trace_path(&c, 1, 5).unwrap();
    assert_eq!(path.gate_indices(), vec![0, 1, 2, 3, 5]);
    let inst = reconstruct(&c, &[Node::new(1, 5)]).unwrap();
    assert_eq!(inst.extra_qubits, 2);
    assert_eq!(inst.blocks[0].replayed, vec![0, 1, 2, 3, 5]);
}
