mod common;

use midmon::analysis::{chi_square_test, tvd};
use midmon::circuit::{Gate, GateKind};
use midmon::corpus;
use midmon::sim::gates::{dagger2, dagger4, single_qubit_matrix, two_qubit_matrix};
use midmon::sim::{final_state, ideal_output_distribution, sample_shots, StateVector};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{circuit_strategy, random_state};

/// Gate application by explicit index arithmetic, one output amplitude at a
/// time.
fn naive_apply(amps: &[C64], gate: &Gate) -> Vec<C64> {
    let bit = |i: usize, q: usize| (i >> q) & 1;
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    if let [q] = gate.qubits[..] {
        let m = single_qubit_matrix(gate.kind, &gate.params).unwrap();
        for (i, o) in out.iter_mut().enumerate() {
            for b in 0..2 {
                *o += m[bit(i, q)][b] * amps[(i & !(1 << q)) | b << q];
            }
        }
    } else {
        let (a, b) = (gate.qubits[0], gate.qubits[1]);
        let m = two_qubit_matrix(gate.kind, &gate.params).unwrap();
        for (i, o) in out.iter_mut().enumerate() {
            let row = 2 * bit(i, a) + bit(i, b);
            for col in 0..4 {
                let j = (i & !(1 << a) & !(1 << b)) | (col >> 1) << a | (col & 1) << b;
                *o += m[row][col] * amps[j];
            }
        }
    }
    out
}

fn random_gate(n: usize, rng: &mut impl Rng) -> Gate {
    let two = n >= 2 && rng.gen_bool(0.5);
    let kind = if two {
        GateKind::TWO_QUBIT[rng.gen_range(0..GateKind::TWO_QUBIT.len())]
    } else {
        GateKind::SINGLE_QUBIT[rng.gen_range(0..GateKind::SINGLE_QUBIT.len())]
    };
    let params = (0..kind.num_params()).map(|_| rng.gen_range(-4.0..4.0)).collect();
    let qubits = if two {
        let a = rng.gen_range(0..n);
        vec![a, (a + rng.gen_range(1..n)) % n]
    } else {
        vec![rng.gen_range(0..n)]
    };
    Gate::unitary(kind, params, qubits).unwrap()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn kernel_matches_naive_application(n in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = random_state(n, &mut rng);
        let gate = random_gate(n, &mut rng);
        let state = StateVector::from_amplitudes(amps.clone()).unwrap();
        let fast = state.apply_gate(&gate).unwrap();
        prop_assert!(max_diff(fast.amplitudes(), &naive_apply(&amps, &gate)) < 1e-12);
    }

    #[test]
    fn gate_then_inverse_is_identity(n in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = random_state(n, &mut rng);
        let gate = random_gate(n, &mut rng);
        let mut state = StateVector::from_amplitudes(amps.clone()).unwrap();
        state.apply_gate_mut(&gate).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        if let [q] = gate.qubits[..] {
            state.apply_single(q, &dagger2(&single_qubit_matrix(gate.kind, &gate.params).unwrap()));
        } else {
            let m = two_qubit_matrix(gate.kind, &gate.params).unwrap();
            state.apply_two(gate.qubits[0], gate.qubits[1], &dagger4(&m));
        }
        prop_assert!(max_diff(state.amplitudes(), &amps) < 1e-12);
    }

    #[test]
    fn circuits_preserve_norm(c in circuit_strategy(7, 60)) {
        let s = final_state(&c).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        let ideal = ideal_output_distribution(&c).unwrap();
        prop_assert!((ideal.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic(c in circuit_strategy(5, 30), seed in any::<u64>()) {
        let a = sample_shots(&c, 64, seed).unwrap();
        let b = sample_shots(&c, 64, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.counts.values().sum::<u64>(), 64);
    }
}

/// Expected TVD of an `n`-shot empirical distribution under the normal
/// approximation: `½ Σ sqrt(2 p (1-p) / (π n))`.
fn expected_sampling_tvd(ideal: &midmon::dist::Distribution, shots: u64) -> f64 {
    let n = shots as f64;
    0.5 * ideal
        .iter()
        .map(|(_, p)| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n)).sqrt())
        .sum::<f64>()
}

#[test]
fn sampler_agrees_with_ideal_distribution_on_corpus() {
    for (name, c) in corpus::bundled() {
        let ideal = ideal_output_distribution(&c).unwrap();
        let counts = sample_shots(&c, 8192, 2025).unwrap();
        let d = tvd(&ideal, &counts.distribution());
        let bound = 3.0 * expected_sampling_tvd(&ideal, 8192) + 1e-3;
        assert!(d < bound, "{name}: tvd {d} > {bound}");
        let chi2 = chi_square_test(&counts, &ideal, 1e-4);
        assert!(chi2.flag.passed(), "{name}: {chi2:?}");
    }
}
