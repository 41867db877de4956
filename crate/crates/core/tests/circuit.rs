mod common;

use std::path::Path;

use midmon::circuit::{asap_layers, emit_qasm, parse_qasm, Circuit, QasmError};
use midmon::corpus;
use proptest::prelude::*;

use common::circuit_strategy;

fn corpus_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

#[test]
fn corpus_files_match_builders() {
    let bundled = corpus::bundled();
    let files = std::fs::read_dir(corpus_dir()).unwrap().count();
    assert_eq!(files, bundled.len());
    for (name, built) in bundled {
        let text = std::fs::read_to_string(corpus_dir().join(format!("{name}.qasm"))).unwrap();
        let parsed = parse_qasm(&text).unwrap();
        assert!(parsed.approx_eq(&built, 1e-12), "{name}");
        assert_eq!(emit_qasm(&built), text, "{name}");
    }
}

#[test]
fn corpus_size_limits() {
    for k in 0..corpus::RANDOM_CORPUS_SIZE {
        let c = corpus::bundled_random(k);
        assert!((2..=8).contains(&c.num_qubits()));
        let unitary = c.gates().iter().filter(|g| g.kind.is_unitary()).count();
        assert!((10..=60).contains(&unitary));
    }
}

#[test]
fn parse_errors_carry_positions() {
    assert!(matches!(parse_qasm(""), Err(QasmError::Syntax { .. })));
    match parse_qasm("OPENQASM 2.0;\nqreg q[2];\nfoo q[0];") {
        Err(QasmError::UnsupportedGate { name, line, .. }) => assert_eq!((name.as_str(), line), ("foo", 3)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_qasm("OPENQASM 2.0; qreg q[2]; cx q[0];"),
        Err(QasmError::Arity { expected: 2, found: 1, .. })
    ));
    assert!(matches!(
        parse_qasm("OPENQASM 2.0; qreg q[2]; h q[5];"),
        Err(QasmError::Operation { .. }) | Err(QasmError::Syntax { .. })
    ));
}

fn check_layering(c: &Circuit) {
    let layering = asap_layers(c);
    let gates = c.gates();
    for (i, g) in gates.iter().enumerate() {
        let Some(layer) = layering.layer(i) else {
            assert!(g.is_barrier());
            continue;
        };
        assert!(layer < layering.num_layers);
        let preds: Vec<usize> = (0..i)
            .filter(|&j| !gates[j].is_barrier() && g.qubits.iter().any(|&q| gates[j].acts_on(q)))
            .filter_map(|j| layering.layer(j))
            .collect();
        // Strictly after every predecessor sharing a qubit.
        assert!(preds.iter().all(|&p| p < layer));
        // As early as possible.
        assert_eq!(layer, preds.iter().max().map_or(0, |p| p + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn emit_parse_round_trip(c in circuit_strategy(6, 40)) {
        let text = emit_qasm(&c);
        let back = parse_qasm(&text).unwrap();
        prop_assert!(back.approx_eq(&c, 1e-12));
        prop_assert_eq!(emit_qasm(&back), text);
    }

    #[test]
    fn layering_is_monotone_and_minimal(c in circuit_strategy(6, 40)) {
        check_layering(&c);
        check_layering(&c.unitary_part());
    }
}
