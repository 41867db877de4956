//! Noise-free execution backends.
//!
//! [`simulate_prefix`] and [`ideal_output_distribution`] are exact dense
//! statevector evaluations. [`sample_shots`] runs per-shot trajectories with
//! mid-circuit measurement and reset.

pub mod gates;
mod sampler;
mod statevector;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::dist::Distribution;

pub use sampler::{branch_averaged_p0, sample_shots, Sampler, ShotCounts};
pub use statevector::StateVector;

/// Default cap on simultaneously simulated qubits.
pub const DEFAULT_QUBIT_LIMIT: usize = 24;

/// Amplitude magnitude below which a basis state leaves the ideal support.
pub const DEFAULT_AMP_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("`{0}` is not a unitary gate")]
    NonUnitary(GateKind),

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("{needed} simultaneously live qubits exceed the simulator limit of {limit}")]
    QubitLimit { needed: usize, limit: usize },

    #[error("gate {index} is a mid-circuit `{kind}`; this evaluation needs a unitary prefix")]
    MidCircuitOp { index: usize, kind: GateKind },

    #[error("gate index {index} out of range for a circuit of {len} gates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("measure at gate {index} has no classical bit target")]
    MissingClbit { index: usize },

    #[error("invalid amplitudes: {0}")]
    BadAmplitudes(String),
}

pub type IdealDistribution = Distribution;

/// State after gates `0..=upto`, starting from `|0…0⟩`.
pub fn simulate_prefix(circuit: &Circuit, upto: usize) -> Result<StateVector, SimError> {
    simulate_prefix_with_limit(circuit, upto, DEFAULT_QUBIT_LIMIT)
}

pub fn simulate_prefix_with_limit(circuit: &Circuit, upto: usize, limit: usize) -> Result<StateVector, SimError> {
    if upto >= circuit.len() {
        return Err(SimError::IndexOutOfRange {
            index: upto,
            len: circuit.len(),
        });
    }
    check_width(circuit.num_qubits(), limit)?;
    let mut state = StateVector::zero(circuit.num_qubits());
    for (index, gate) in circuit.gates()[..=upto].iter().enumerate() {
        if matches!(gate.kind, GateKind::Measure | GateKind::Reset) {
            return Err(SimError::MidCircuitOp { index, kind: gate.kind });
        }
        state.apply_gate_mut(gate)?;
    }
    Ok(state)
}

/// Final state of the unitary part of a circuit whose only non-unitary
/// operations are final measurements.
pub fn final_state(circuit: &Circuit) -> Result<StateVector, SimError> {
    if let Some(index) = circuit.first_mid_circuit_op() {
        return Err(SimError::MidCircuitOp {
            index,
            kind: circuit.gates()[index].kind,
        });
    }
    check_width(circuit.num_qubits(), DEFAULT_QUBIT_LIMIT)?;
    let mut state = StateVector::zero(circuit.num_qubits());
    for gate in circuit.gates().iter().filter(|g| g.kind.is_unitary()) {
        state.apply_gate_mut(gate)?;
    }
    Ok(state)
}

fn check_width(needed: usize, limit: usize) -> Result<(), SimError> {
    if needed > limit {
        Err(SimError::QubitLimit { needed, limit })
    } else {
        Ok(())
    }
}

/// Output distribution over classical bitstrings implied by the statevector,
/// keeping only basis states with amplitude magnitude above `amp_threshold`.
/// Bitstrings list classical bit 0 first; unwritten bits read 0.
pub fn ideal_output_distribution_with(circuit: &Circuit, amp_threshold: f64) -> Result<IdealDistribution, SimError> {
    let state = final_state(circuit)?;
    let mask = circuit.final_measure_mask();
    let mut source: Vec<Option<usize>> = vec![None; circuit.num_clbits()];
    for (i, gate) in circuit.gates().iter().enumerate() {
        if mask[i] {
            source[gate.clbit.expect("measure has a clbit")] = Some(gate.qubits[0]);
        }
    }
    let mut probs: BTreeMap<String, f64> = BTreeMap::new();
    for (index, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm() <= amp_threshold {
            continue;
        }
        let key: String = source
            .iter()
            .map(|s| match s {
                Some(q) if (index >> q) & 1 == 1 => '1',
                _ => '0',
            })
            .collect();
        *probs.entry(key).or_insert(0.0) += amp.norm_sqr();
    }
    let total: f64 = probs.values().sum();
    for p in probs.values_mut() {
        *p /= total;
    }
    Ok(Distribution::from_map(probs))
}

pub fn ideal_output_distribution(circuit: &Circuit) -> Result<IdealDistribution, SimError> {
    ideal_output_distribution_with(circuit, DEFAULT_AMP_THRESHOLD)
}
