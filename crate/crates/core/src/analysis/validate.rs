//! Behavior-preservation checks for an instrumented circuit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{chi_square_test, tvd, ChiSquare, Flag};
use super::{AnalysisError, Thresholds};
use crate::dist::Distribution;
use crate::reconstruct::InstrumentedCircuit;
use crate::select::{node_expectations, Node, NodeExpectation};
use crate::sim::{ideal_output_distribution_with, Sampler, ShotCounts};

/// Observed bitstrings outside the ideal support.
pub fn unexpected_outputs(ideal: &Distribution, observed: &ShotCounts) -> Vec<String> {
    observed
        .counts
        .keys()
        .filter(|k| !ideal.contains(k))
        .cloned()
        .collect()
}

/// True iff every observed bitstring lies in the ideal support.
pub fn possible_outputs_check(ideal: &Distribution, observed: &ShotCounts) -> bool {
    unexpected_outputs(ideal, observed).is_empty()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeFrequencyCheck {
    pub node: Node,
    pub p0_expected: f64,
    pub freq0_observed: f64,
    pub delta: f64,
    pub pass: bool,
}

/// Compares each node's expected `P(0)` with the zero frequency of its
/// monitor bit.
pub fn probability_verification(
    expected: &[NodeExpectation],
    observed: &ShotCounts,
    bits: &BTreeMap<Node, usize>,
    tol: f64,
) -> Result<Vec<NodeFrequencyCheck>, AnalysisError> {
    expected
        .iter()
        .map(|e| {
            let node = e.node();
            let freq0 = bits
                .get(&node)
                .and_then(|&b| observed.zero_frequency(b))
                .ok_or(AnalysisError::MissingNodeBit(node))?;
            let delta = (e.p0 - freq0).abs();
            Ok(NodeFrequencyCheck {
                node,
                p0_expected: e.p0,
                freq0_observed: freq0,
                delta,
                pass: delta < tol,
            })
        })
        .collect()
}

/// Restoration of one node: `P(0)` of the monitored qubit right after its
/// replay block, averaged exactly over all measurement branches, against the
/// pre-measurement value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRestoration {
    pub node: Node,
    pub p0_before: f64,
    pub p0_restored: f64,
    pub delta: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub outputs_ok: bool,
    pub unexpected_outputs: Vec<String>,
    pub chi2: ChiSquare,
    pub tvd: f64,
    pub tvd_pass: bool,
    /// Both distribution criteria failed.
    pub deviation: bool,
    pub per_node: Vec<NodeRestoration>,
    /// Sampled monitor-bit frequencies; informational.
    pub node_frequencies: Vec<NodeFrequencyCheck>,
    pub shots: u64,
    pub seed: u64,
    pub overall: bool,
}

/// Runs the three checks on `instrumented` against the uninstrumented
/// circuit it was built from.
pub fn validate(
    instrumented: &InstrumentedCircuit,
    shots: u64,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<ValidationVerdict, AnalysisError> {
    let original = instrumented.strip();
    let ideal = ideal_output_distribution_with(&original, thresholds.amp_threshold)?;
    let sampler = Sampler {
        qubit_limit: thresholds.qubit_limit,
    };
    let counts = sampler.sample(&instrumented.circuit, shots, seed)?;
    let restricted = counts.restricted(instrumented.original_clbits);

    let unexpected = unexpected_outputs(&ideal, &restricted);
    let chi2 = chi_square_test(&restricted, &ideal, thresholds.chi2_alpha);
    let distance = tvd(&ideal, &restricted.distribution());
    let tvd_pass = distance <= thresholds.tvd;
    let deviation = chi2.flag == Flag::F && !tvd_pass;

    let nodes = instrumented.nodes();
    let expected = node_expectations(&original, &nodes)?;
    let probes: Vec<(usize, usize)> = instrumented.blocks.iter().map(|b| (b.replay_end, b.node.qubit)).collect();
    let restored = sampler.branch_averaged_p0(&instrumented.circuit, &probes)?;
    let per_node: Vec<NodeRestoration> = expected
        .iter()
        .zip(restored)
        .map(|(e, p0)| {
            let delta = (e.p0 - p0).abs();
            NodeRestoration {
                node: e.node(),
                p0_before: e.p0,
                p0_restored: p0,
                delta,
                pass: delta < thresholds.probability,
            }
        })
        .collect();
    let node_frequencies = probability_verification(&expected, &counts, &instrumented.monitor_bits(), thresholds.probability)?;

    let overall = unexpected.is_empty() && !deviation && per_node.iter().all(|n| n.pass);
    Ok(ValidationVerdict {
        outputs_ok: unexpected.is_empty(),
        unexpected_outputs: unexpected,
        chi2,
        tvd: distance,
        tvd_pass,
        deviation,
        per_node,
        node_frequencies,
        shots,
        seed,
        overall,
    })
}
