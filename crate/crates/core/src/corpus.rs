//! Bundled benchmark circuits.
//!
//! Every builder measures the qubits it reads out at the end, with qubit `k`
//! written to classical bit `k`. The same circuits are committed as QASM under
//! `corpus/` in this crate.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, GateKind};

/// Seed of the first bundled random circuit; the others follow consecutively.
pub const RANDOM_CORPUS_SEED: u64 = 2025;
pub const RANDOM_CORPUS_SIZE: usize = 10;

fn g(c: &mut Circuit, kind: GateKind, params: &[f64], qubits: &[usize]) {
    c.apply(kind, params, qubits).expect("builder gates are well formed");
}

fn measure_all(mut c: Circuit) -> Circuit {
    c.measure_all().expect("one clbit per qubit");
    c
}

/// Three-qubit monitoring walkthrough: H on q0, CNOT q0→q1, H on q2,
/// SWAP q1,q2, then H on every qubit and a final measurement.
pub fn worked_example() -> Circuit {
    let mut c = Circuit::new(3, 3);
    g(&mut c, GateKind::H, &[], &[0]);
    g(&mut c, GateKind::Cx, &[], &[0, 1]);
    g(&mut c, GateKind::H, &[], &[2]);
    g(&mut c, GateKind::Swap, &[], &[1, 2]);
    for q in 0..3 {
        g(&mut c, GateKind::H, &[], &[q]);
    }
    measure_all(c)
}

/// The drawn variant of the walkthrough: X on q0 and the gates listed in
/// drawing order (x q0; h q2; cx q0,q1; swap q1,q2; h ×3; measure ×3).
pub fn figure_example() -> Circuit {
    let mut c = Circuit::new(3, 3);
    g(&mut c, GateKind::X, &[], &[0]);
    g(&mut c, GateKind::H, &[], &[2]);
    g(&mut c, GateKind::Cx, &[], &[0, 1]);
    g(&mut c, GateKind::Swap, &[], &[1, 2]);
    for q in 0..3 {
        g(&mut c, GateKind::H, &[], &[q]);
    }
    measure_all(c)
}

pub fn bell() -> Circuit {
    let mut c = Circuit::new(2, 2);
    g(&mut c, GateKind::H, &[], &[0]);
    g(&mut c, GateKind::Cx, &[], &[0, 1]);
    measure_all(c)
}

/// CNOT-chain GHZ state on `n ≥ 2` qubits.
pub fn ghz(n: usize) -> Circuit {
    let mut c = Circuit::new(n, n);
    g(&mut c, GateKind::H, &[], &[0]);
    for q in 0..n - 1 {
        g(&mut c, GateKind::Cx, &[], &[q, q + 1]);
    }
    measure_all(c)
}

/// Controlled-RY as two RY halves around CNOTs.
fn cry(c: &mut Circuit, theta: f64, control: usize, target: usize) {
    g(c, GateKind::Ry, &[theta / 2.0], &[target]);
    g(c, GateKind::Cx, &[], &[control, target]);
    g(c, GateKind::Ry, &[-theta / 2.0], &[target]);
    g(c, GateKind::Cx, &[], &[control, target]);
}

/// `(|001⟩ + |010⟩ + |100⟩)/√3`.
pub fn w3() -> Circuit {
    let mut c = Circuit::new(3, 3);
    g(&mut c, GateKind::X, &[], &[0]);
    cry(&mut c, 2.0 * (1.0f64 / 3.0).sqrt().acos(), 0, 1);
    g(&mut c, GateKind::Cx, &[], &[1, 0]);
    cry(&mut c, PI / 2.0, 1, 2);
    g(&mut c, GateKind::Cx, &[], &[2, 1]);
    measure_all(c)
}

/// Deutsch–Jozsa on three input qubits with the balanced oracle
/// `f(x) = x0 ⊕ x1 ⊕ x2`; q3 is the phase ancilla and is not measured.
pub fn dj4() -> Circuit {
    let mut c = Circuit::new(4, 3);
    g(&mut c, GateKind::X, &[], &[3]);
    for q in 0..4 {
        g(&mut c, GateKind::H, &[], &[q]);
    }
    for q in 0..3 {
        g(&mut c, GateKind::Cx, &[], &[q, 3]);
    }
    for q in 0..3 {
        g(&mut c, GateKind::H, &[], &[q]);
    }
    for q in 0..3 {
        c.measure(q, q).expect("in range");
    }
    c
}

/// QFT on `n` qubits applied to a basis input whose odd qubits are set.
pub fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n, n);
    for q in (1..n).step_by(2) {
        g(&mut c, GateKind::X, &[], &[q]);
    }
    for j in (0..n).rev() {
        g(&mut c, GateKind::H, &[], &[j]);
        for k in (0..j).rev() {
            g(&mut c, GateKind::Cp, &[PI / f64::from(1u32 << (j - k))], &[k, j]);
        }
    }
    for q in 0..n / 2 {
        g(&mut c, GateKind::Swap, &[], &[q, n - 1 - q]);
    }
    measure_all(c)
}

/// Phase estimation of `P(π/2)` (phase 1/4) with two counting qubits
/// (q0, q1) and eigenstate `|1⟩` on q2. Reads `10` deterministically.
pub fn qpe3() -> Circuit {
    let mut c = Circuit::new(3, 2);
    g(&mut c, GateKind::X, &[], &[2]);
    g(&mut c, GateKind::H, &[], &[0]);
    g(&mut c, GateKind::H, &[], &[1]);
    g(&mut c, GateKind::Cp, &[PI / 2.0], &[0, 2]);
    g(&mut c, GateKind::Cp, &[PI], &[1, 2]);
    g(&mut c, GateKind::Swap, &[], &[0, 1]);
    g(&mut c, GateKind::H, &[], &[0]);
    g(&mut c, GateKind::Cp, &[-PI / 2.0], &[0, 1]);
    g(&mut c, GateKind::H, &[], &[1]);
    c.measure(0, 0).expect("in range");
    c.measure(1, 1).expect("in range");
    c
}

/// Doubly controlled Z from CNOT, T and T† gates.
fn ccz(c: &mut Circuit, a: usize, b: usize, t: usize) {
    g(c, GateKind::Cx, &[], &[b, t]);
    g(c, GateKind::Tdg, &[], &[t]);
    g(c, GateKind::Cx, &[], &[a, t]);
    g(c, GateKind::T, &[], &[t]);
    g(c, GateKind::Cx, &[], &[b, t]);
    g(c, GateKind::Tdg, &[], &[t]);
    g(c, GateKind::Cx, &[], &[a, t]);
    g(c, GateKind::T, &[], &[b]);
    g(c, GateKind::T, &[], &[t]);
    g(c, GateKind::Cx, &[], &[a, b]);
    g(c, GateKind::T, &[], &[a]);
    g(c, GateKind::Tdg, &[], &[b]);
    g(c, GateKind::Cx, &[], &[a, b]);
}

/// One Grover iteration on three qubits marking `|111⟩`.
pub fn grover3() -> Circuit {
    let mut c = Circuit::new(3, 3);
    for q in 0..3 {
        g(&mut c, GateKind::H, &[], &[q]);
    }
    ccz(&mut c, 0, 1, 2);
    for q in 0..3 {
        g(&mut c, GateKind::H, &[], &[q]);
        g(&mut c, GateKind::X, &[], &[q]);
    }
    ccz(&mut c, 0, 1, 2);
    for q in 0..3 {
        g(&mut c, GateKind::X, &[], &[q]);
        g(&mut c, GateKind::H, &[], &[q]);
    }
    measure_all(c)
}

/// Two-local RY/CZ ansatz, four qubits, two entangling repetitions.
pub fn two_local4() -> Circuit {
    let mut c = Circuit::new(4, 4);
    let angles = [0.3, 1.2, -0.7, 2.1, 0.9, -1.4, 0.5, 1.8, -0.2, 0.6, 1.1, -0.9];
    let mut next = angles.iter().copied();
    for rep in 0..3 {
        for q in 0..4 {
            g(&mut c, GateKind::Ry, &[next.next().expect("enough angles")], &[q]);
        }
        if rep < 2 {
            for q in 0..3 {
                g(&mut c, GateKind::Cz, &[], &[q, q + 1]);
            }
        }
    }
    measure_all(c)
}

/// Random circuit over the full gate set, measured at the end.
pub fn random_circuit(num_qubits: usize, num_gates: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(num_qubits, num_qubits);
    for _ in 0..num_gates {
        let two = num_qubits > 1 && rng.gen_bool(0.35);
        let kind = if two {
            GateKind::TWO_QUBIT[rng.gen_range(0..GateKind::TWO_QUBIT.len())]
        } else {
            GateKind::SINGLE_QUBIT[rng.gen_range(0..GateKind::SINGLE_QUBIT.len())]
        };
        let params: Vec<f64> = (0..kind.num_params()).map(|_| rng.gen_range(-PI..PI)).collect();
        let a = rng.gen_range(0..num_qubits);
        let qubits = if two {
            let mut b = rng.gen_range(0..num_qubits - 1);
            if b >= a {
                b += 1;
            }
            vec![a, b]
        } else {
            vec![a]
        };
        g(&mut c, kind, &params, &qubits);
    }
    measure_all(c)
}

/// Bundled random circuit `k`: 2–8 qubits, 10–60 gates.
pub fn bundled_random(k: usize) -> Circuit {
    let seed = RANDOM_CORPUS_SEED + k as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=8);
    let gates = rng.gen_range(10..=60);
    random_circuit(n, gates, seed)
}

/// The full bundled corpus as `(name, circuit)` pairs.
pub fn bundled() -> Vec<(String, Circuit)> {
    let mut out = vec![
        ("example".to_string(), worked_example()),
        ("bell".to_string(), bell()),
    ];
    for n in 3..=6 {
        out.push((format!("ghz{n}"), ghz(n)));
    }
    out.push(("w3".to_string(), w3()));
    out.push(("dj4".to_string(), dj4()));
    out.push(("qft3".to_string(), qft(3)));
    out.push(("qft4".to_string(), qft(4)));
    out.push(("qpe3".to_string(), qpe3()));
    out.push(("grover3".to_string(), grover3()));
    out.push(("twolocal4".to_string(), two_local4()));
    for k in 0..RANDOM_CORPUS_SIZE {
        out.push((format!("random{k:02}"), bundled_random(k)));
    }
    out
}
