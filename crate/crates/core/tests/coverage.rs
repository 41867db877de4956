mod common;

use midmon::analysis::coverage_metrics;
use midmon::circuit::{Circuit, GateKind};
use midmon::corpus;
use midmon::select::select_monitorable_nodes;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::circuit_strategy;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coverage_is_monotone_in_the_node_set(c in circuit_strategy(6, 40), keep in any::<u64>()) {
        let plan = select_monitorable_nodes(&c, 1e-9).unwrap();
        let nodes = plan.nodes();
        let subset: Vec<_> = nodes.iter().enumerate().filter(|(k, _)| keep >> (k % 64) & 1 == 1).map(|(_, n)| *n).collect();
        let full = coverage_metrics(&c, &plan);
        let part = coverage_metrics(&c, &plan.restricted_to(&subset));
        prop_assert!(part.node_cov <= full.node_cov);
        prop_assert!(part.qubit_cov <= full.qubit_cov);
        prop_assert!(part.depth_cov <= full.depth_cov);
        for r in [&full, &part] {
            for v in [r.node_cov, r.qubit_cov, r.depth_cov] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}

#[test]
fn single_qubit_circuits_are_fully_covered() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let n = rng.gen_range(1..6);
        let mut c = Circuit::new(n, n);
        for _ in 0..rng.gen_range(n..30) {
            let kind = GateKind::SINGLE_QUBIT[rng.gen_range(0..GateKind::SINGLE_QUBIT.len())];
            let params: Vec<f64> = (0..kind.num_params()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            c.apply(kind, &params, &[rng.gen_range(0..n)]).unwrap();
        }
        c.measure_all().unwrap();
        let r = coverage_metrics(&c, &select_monitorable_nodes(&c, 1e-9).unwrap());
        if r.total_nodes > 0 {
            assert_eq!(r.node_cov, 1.0);
        }
    }
}

#[test]
fn fixed_values() {
    let example = corpus::worked_example();
    let r = coverage_metrics(&example, &select_monitorable_nodes(&example, 1e-9).unwrap());
    assert_eq!(r.qubit_cov, 1.0);
    for n in 3..=6 {
        let c = corpus::ghz(n);
        let r = coverage_metrics(&c, &select_monitorable_nodes(&c, 1e-9).unwrap());
        assert_eq!(r.qubit_cov, 1.0 / n as f64);
    }
}
