//! Oracles written against raw amplitudes, independent of the library's
//! density-matrix and selection code.

#![allow(dead_code)]

use std::f64::consts::PI;

use midmon::circuit::{Circuit, GateKind};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 2×2 reduced density matrix of `qubit`, as `[[r00, r01], [r10, r11]]`.
pub fn reduced_1q(amps: &[C64], qubit: usize) -> [[C64; 2]; 2] {
    let bit = 1usize << qubit;
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, a) in amps.iter().enumerate() {
        if i & bit == 0 {
            let b = amps[i | bit];
            r[0][0] += a * a.conj();
            r[0][1] += a * b.conj();
            r[1][0] += b * a.conj();
            r[1][1] += b * b.conj();
        }
    }
    r
}

pub fn purity_1q(r: &[[C64; 2]; 2]) -> f64 {
    (r[0][0] * r[0][0] + r[0][1] * r[1][0] + r[1][0] * r[0][1] + r[1][1] * r[1][1]).re
}

/// Trace distance of two one-qubit states. The difference is traceless and
/// Hermitian, so its eigenvalues are `±sqrt(d00² + |d01|²)`.
pub fn trace_distance_1q(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> f64 {
    let d00 = (a[0][0] - b[0][0]).re;
    let d01 = a[0][1] - b[0][1];
    (d00 * d00 + d01.norm_sqr()).sqrt()
}

pub fn random_state(num_qubits: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..1usize << num_qubits)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

/// Random unitary-only circuit with a final measurement on every qubit.
pub fn random_measured_circuit(num_qubits: usize, num_gates: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(num_qubits, num_qubits);
    for _ in 0..num_gates {
        push_random_gate(&mut c, &mut rng);
    }
    c.measure_all().unwrap();
    c
}

pub fn push_random_gate(c: &mut Circuit, rng: &mut impl Rng) {
    let n = c.num_qubits();
    let two = n >= 2 && rng.gen_bool(0.4);
    let kind = if two {
        GateKind::TWO_QUBIT[rng.gen_range(0..GateKind::TWO_QUBIT.len())]
    } else {
        GateKind::SINGLE_QUBIT[rng.gen_range(0..GateKind::SINGLE_QUBIT.len())]
    };
    let params: Vec<f64> = (0..kind.num_params()).map(|_| rng.gen_range(-PI..PI)).collect();
    let qubits = if two {
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        vec![a, b]
    } else {
        vec![rng.gen_range(0..n)]
    };
    c.apply(kind, &params, &qubits).unwrap();
}

/// Random measured circuits of up to `max_qubits` qubits and `max_gates` gates.
pub fn circuit_strategy(max_qubits: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_qubits, 0..=max_gates, any::<u64>()).prop_map(|(n, g, s)| random_measured_circuit(n, g, s))
}

/// `ln Γ(k/2)` for integer `k ≥ 1`, by the exact recursion from `Γ(1) = 1`
/// and `Γ(1/2) = √π`.
pub fn ln_gamma_half(k: usize) -> f64 {
    let (mut z, mut acc) = if k % 2 == 0 { (1.0, 0.0) } else { (0.5, 0.5 * PI.ln()) };
    while z < k as f64 / 2.0 {
        acc += z.ln();
        z += 1.0;
    }
    acc
}

/// Upper tail of chi-square(`dof`) by composite Simpson integration. With
/// `t = u²` the density becomes `2 u^(k-1) e^(-u²/2) / (2^(k/2) Γ(k/2))`,
/// which is smooth at the origin for every `k`.
pub fn chi_square_sf_oracle(stat: f64, dof: usize) -> f64 {
    let k = dof as f64;
    let log_norm = 2f64.ln() - 0.5 * k * 2f64.ln() - ln_gamma_half(dof);
    let f = |u: f64| {
        if u <= 0.0 {
            return if dof == 1 { log_norm.exp() } else { 0.0 };
        }
        (log_norm + (k - 1.0) * u.ln() - 0.5 * u * u).exp()
    };
    let lo = stat.max(0.0).sqrt();
    let hi = lo.max(k.sqrt()) + 40.0;
    let n = 40_000;
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

pub fn random_distribution(support: usize, rng: &mut impl Rng) -> midmon::dist::Distribution {
    let weights: Vec<f64> = (0..support).map(|_| rng.gen_range(0.0..1.0f64).powi(2)).collect();
    let total: f64 = weights.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let probs = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(i, w)| (format!("{i:04b}"), w / total))
        .collect();
    midmon::dist::Distribution::from_map(probs)
}
