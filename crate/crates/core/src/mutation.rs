//! Single-gate fault injection, equivalent-mutant screening, and
//! detection/localization scoring against a monitor built from the pristine
//! circuit.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{chi_square_test, probability_verification, tvd, AnalysisError, ChiSquare, Flag, NodeFrequencyCheck, Thresholds};
use crate::circuit::{Circuit, CircuitError, Gate, GateKind};
use crate::filter::{filter_nodes, plan_instance, FilterError};
use crate::reconstruct::{reconstruct_with_paths, ReconstructError};
use crate::select::{node_expectations, select_monitorable_nodes, MonitorPlan, Node, NodeExpectation, SelectError};
use crate::sim::{ideal_output_distribution_with, simulate_prefix, Sampler, SimError};
use crate::trace::{trace_node, TraceError, TracedPath};

/// Resampling budget for a state-changing replacement.
pub const MAX_ATTEMPTS: usize = 50;

/// Prefix states this close (fidelity) count as unchanged.
const SAME_STATE_FIDELITY: f64 = 1.0 - 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MutationError {
    #[error("no gate at or before the last monitored node can be mutated")]
    NoEligibleGate,

    #[error("no state-changing replacement found in {0} attempts")]
    NoStateChange(usize),

    #[error("baseline asks for {requested} nodes but only {available} gates are eligible")]
    TooManyNodes { requested: usize, available: usize },

    #[error("monitor was built for {expected} qubits, circuit has {actual}")]
    LayoutMismatch { expected: usize, actual: usize },

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Select(#[from] SelectError),

    #[error(transparent)]
    Trace(#[from] TraceError),

    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),

    #[error(transparent)]
    Analysis(#[from] AnalysisError),

    #[error(transparent)]
    Filter(#[from] FilterError),

    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mutation {
    pub gate_index: usize,
    pub original: Gate,
    pub replacement: Gate,
    pub seed: u64,
}

fn single_pool() -> Vec<(GateKind, Vec<f64>)> {
    vec![
        (GateKind::H, vec![]),
        (GateKind::X, vec![]),
        (GateKind::Y, vec![]),
        (GateKind::Z, vec![]),
        (GateKind::S, vec![]),
        (GateKind::T, vec![]),
        (GateKind::Rx, vec![PI / 3.0]),
    ]
}

fn two_pool() -> Vec<(GateKind, Vec<f64>)> {
    vec![
        (GateKind::Cx, vec![]),
        (GateKind::Cz, vec![]),
        (GateKind::Swap, vec![]),
        (GateKind::Cp, vec![PI / 2.0]),
    ]
}

/// Unitary gates at or before the plan's last node.
pub fn eligible_indices(circuit: &Circuit, plan: &MonitorPlan) -> Vec<usize> {
    let Some(last) = plan.last_node_index() else { return Vec::new() };
    (0..=last.min(circuit.len().saturating_sub(1)))
        .filter(|&i| circuit.gates()[i].kind.is_unitary())
        .collect()
}

/// Replaces one eligible gate with a same-arity gate that changes the
/// state right after it.
pub fn mutate(circuit: &Circuit, plan: &MonitorPlan, seed: u64) -> Result<(Circuit, Mutation), MutationError> {
    let eligible = eligible_indices(circuit, plan);
    if eligible.is_empty() {
        return Err(MutationError::NoEligibleGate);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let index = eligible[rng.gen_range(0..eligible.len())];
        let original = circuit.gates()[index].clone();
        let pool: Vec<(GateKind, Vec<f64>)> = if original.qubits.len() == 1 { single_pool() } else { two_pool() }
            .into_iter()
            .filter(|(k, _)| *k != original.kind)
            .collect();
        let (kind, params) = pool[rng.gen_range(0..pool.len())].clone();
        let mut qubits = original.qubits.clone();
        if qubits.len() == 2 && rng.gen_bool(0.5) {
            qubits.swap(0, 1);
        }
        let replacement = Gate::unitary(kind, params, qubits)?;
        let mut mutated = circuit.clone();
        mutated.replace(index, replacement.clone())?;
        if changes_state(circuit, &mutated, index)? {
            return Ok((
                mutated,
                Mutation {
                    gate_index: index,
                    original,
                    replacement,
                    seed,
                },
            ));
        }
    }
    Err(MutationError::NoStateChange(MAX_ATTEMPTS))
}

fn changes_state(a: &Circuit, b: &Circuit, index: usize) -> Result<bool, SimError> {
    let sa = simulate_prefix(a, index)?;
    let sb = simulate_prefix(b, index)?;
    Ok(sa.fidelity(&sb) < SAME_STATE_FIDELITY)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub same_support: bool,
    pub chi2: ChiSquare,
    pub tvd: f64,
}

/// Whether `mutated` is statistically indistinguishable from `original` at
/// the output: same ideal support, and the mutant's samples pass both the
/// chi-square and TVD criteria against the original's ideal distribution.
pub fn equivalence_check(
    original: &Circuit,
    mutated: &Circuit,
    shots: u64,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<EquivalenceReport, MutationError> {
    let ideal = ideal_output_distribution_with(original, thresholds.amp_threshold)?;
    let ideal_mutated = ideal_output_distribution_with(mutated, thresholds.amp_threshold)?;
    let same_support = ideal.support() == ideal_mutated.support();
    let sampler = Sampler {
        qubit_limit: thresholds.qubit_limit,
    };
    let counts = sampler.sample(mutated, shots, seed)?;
    let chi2 = chi_square_test(&counts, &ideal, thresholds.chi2_alpha);
    let distance = tvd(&ideal, &counts.distribution());
    Ok(EquivalenceReport {
        equivalent: same_support && chi2.flag == Flag::P && distance <= thresholds.tvd,
        same_support,
        chi2,
        tvd: distance,
    })
}

/// What the monitor knows: nodes, their paths and expected probabilities,
/// all derived from the pristine circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitorSetup {
    pub num_qubits: usize,
    pub paths: Vec<TracedPath>,
    pub expectations: Vec<NodeExpectation>,
}

impl MonitorSetup {
    pub fn new(original: &Circuit, nodes: &[Node]) -> Result<MonitorSetup, MutationError> {
        let mut nodes = nodes.to_vec();
        nodes.sort();
        let paths = nodes.iter().map(|&n| trace_node(original, n)).collect::<Result<_, _>>()?;
        Ok(MonitorSetup {
            num_qubits: original.num_qubits(),
            paths,
            expectations: node_expectations(original, &nodes)?,
        })
    }

    pub fn nodes(&self) -> Vec<Node> {
        self.paths.iter().map(|p| p.node()).collect()
    }

    /// Replaces the exact expectations with the monitor-bit frequencies of
    /// the instrumented `original` sampled under `shots` and `seed`.
    pub fn paired(&self, original: &Circuit, shots: u64, seed: u64, thresholds: &Thresholds) -> Result<MonitorSetup, MutationError> {
        let instrumented = reconstruct_with_paths(original, &self.paths)?;
        let sampler = Sampler {
            qubit_limit: thresholds.qubit_limit,
        };
        let counts = sampler.sample(&instrumented.circuit, shots, seed)?;
        let bits = instrumented.monitor_bits();
        let expectations = self
            .expectations
            .iter()
            .map(|e| {
                let node = e.node();
                let p0 = bits
                    .get(&node)
                    .and_then(|&b| counts.zero_frequency(b))
                    .ok_or(AnalysisError::MissingNodeBit(node))?;
                Ok(NodeExpectation { p0, p1: 1.0 - p0, ..*e })
            })
            .collect::<Result<_, MutationError>>()?;
        Ok(MonitorSetup {
            num_qubits: self.num_qubits,
            paths: self.paths.clone(),
            expectations,
        })
    }
}

/// What a node's monitor-bit frequency is compared against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// Exact `P(0)` of the unmutated circuit.
    #[default]
    Theoretical,
    /// Frequencies of the unmutated instrumented circuit under the same seed
    /// and shot count, which cancels sampling noise common to both runs.
    Paired,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuspectPath {
    pub node: Node,
    pub gates: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationOutcome {
    pub equivalent: bool,
    pub detected: bool,
    pub localized: bool,
    pub anomalous_nodes: Vec<NodeFrequencyCheck>,
    pub suspect_paths: Vec<SuspectPath>,
}

/// Instruments `circuit` with the monitor's paths, samples it, and flags
/// every node whose monitor-bit zero frequency is more than the probability
/// threshold away from its expectation. The fault is localized when
/// `mutated_index` lies on an anomalous node's path.
pub fn detect_and_localize(
    circuit: &Circuit,
    setup: &MonitorSetup,
    mutated_index: Option<usize>,
    shots: u64,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<MutationOutcome, MutationError> {
    if circuit.num_qubits() != setup.num_qubits {
        return Err(MutationError::LayoutMismatch {
            expected: setup.num_qubits,
            actual: circuit.num_qubits(),
        });
    }
    let instrumented = reconstruct_with_paths(circuit, &setup.paths)?;
    let sampler = Sampler {
        qubit_limit: thresholds.qubit_limit,
    };
    let counts = sampler.sample(&instrumented.circuit, shots, seed)?;
    let checks = probability_verification(&setup.expectations, &counts, &instrumented.monitor_bits(), thresholds.probability)?;
    let anomalous_nodes: Vec<NodeFrequencyCheck> = checks.into_iter().filter(|c| c.delta > thresholds.probability).collect();
    let flagged: BTreeSet<Node> = anomalous_nodes.iter().map(|c| c.node).collect();
    let suspect_paths: Vec<SuspectPath> = setup
        .paths
        .iter()
        .filter(|p| flagged.contains(&p.node()))
        .map(|p| SuspectPath {
            node: p.node(),
            gates: p.gate_indices(),
        })
        .collect();
    let localized = mutated_index.is_some_and(|i| suspect_paths.iter().any(|s| s.gates.binary_search(&i).is_ok()));
    Ok(MutationOutcome {
        equivalent: false,
        detected: !anomalous_nodes.is_empty(),
        localized,
        anomalous_nodes,
        suspect_paths,
    })
}

/// `k` distinct unitary gates chosen uniformly, each paired with one of its
/// operands at random. No separability screening.
pub fn random_baseline(circuit: &Circuit, k: usize, seed: u64) -> Result<MonitorPlan, MutationError> {
    let candidates: Vec<usize> = (0..circuit.len()).filter(|&i| circuit.gates()[i].kind.is_unitary()).collect();
    if k > candidates.len() {
        return Err(MutationError::TooManyNodes {
            requested: k,
            available: candidates.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m_lists = vec![Vec::new(); circuit.num_qubits()];
    let mut picked: Vec<usize> = sample(&mut rng, candidates.len(), k).into_iter().map(|j| candidates[j]).collect();
    picked.sort_unstable();
    for i in picked {
        let qubits = &circuit.gates()[i].qubits;
        let q = qubits[rng.gen_range(0..qubits.len())];
        m_lists[q].push(i);
    }
    Ok(MonitorPlan {
        num_qubits: circuit.num_qubits(),
        locked: vec![false; circuit.num_qubits()],
        m_lists,
        diagnostics: Vec::new(),
        pre_measure: circuit.gates_before_final_measure(),
    })
}

/// Nodes all sit within the first three gates.
pub fn is_low_value(plan: &MonitorPlan) -> bool {
    plan.last_node_index().is_some_and(|i| i <= 2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub mutants_per_circuit: usize,
    /// Shots for the equivalence screen.
    pub shots: u64,
    /// Shots for detection runs.
    pub mutation_shots: u64,
    pub seed: u64,
    pub q_max: usize,
    pub tol_separability: f64,
    pub thresholds: Thresholds,
    pub reference: Reference,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            mutants_per_circuit: 3,
            shots: 8192,
            mutation_shots: 1000,
            seed: 2025,
            q_max: crate::filter::DEFAULT_Q_MAX,
            tol_separability: crate::entangle::DEFAULT_SEPARABILITY_TOL,
            thresholds: Thresholds::default(),
            reference: Reference::Theoretical,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutantRecord {
    pub mutation: Mutation,
    pub equivalence: EquivalenceReport,
    pub monitor: MutationOutcome,
    pub baseline: MutationOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitEvaluation {
    pub name: String,
    pub skipped: Option<String>,
    pub nodes: Vec<Node>,
    pub baseline_nodes: Vec<Node>,
    pub unmutated: Option<MutationOutcome>,
    pub baseline_unmutated: Option<MutationOutcome>,
    pub mutants: Vec<MutantRecord>,
}

fn sub_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs the mutation protocol on one circuit.
pub fn evaluate_circuit(name: &str, circuit: &Circuit, cfg: &EvaluationConfig) -> Result<CircuitEvaluation, MutationError> {
    let skip = |reason: &str| CircuitEvaluation {
        name: name.to_string(),
        skipped: Some(reason.to_string()),
        nodes: Vec::new(),
        baseline_nodes: Vec::new(),
        unmutated: None,
        baseline_unmutated: None,
        mutants: Vec::new(),
    };
    let full = select_monitorable_nodes(circuit, cfg.tol_separability)?;
    if full.is_unmonitorable() {
        return Ok(skip("unmonitorable"));
    }
    if is_low_value(&full) {
        return Ok(skip("low-value"));
    }
    let (instance, candidates) = plan_instance(circuit, &full, cfg.q_max)?;
    let solution = filter_nodes(&instance)?;
    let nodes: Vec<Node> = solution.selected.iter().map(|&id| candidates[id]).collect();
    if nodes.is_empty() {
        return Ok(skip("no node fits the qubit budget"));
    }
    let plan = full.restricted_to(&nodes);
    let setup = MonitorSetup::new(circuit, &nodes)?;
    // A two-qubit gate can carry two nodes, so a plan may outnumber the gates.
    let unitary_gates = circuit.gates().iter().filter(|g| g.kind.is_unitary()).count();
    let baseline_plan = random_baseline(circuit, nodes.len().min(unitary_gates), sub_seed(cfg.seed, 1_000))?;
    let baseline_nodes = baseline_plan.nodes();
    let baseline = MonitorSetup::new(circuit, &baseline_nodes)?;
    let th = &cfg.thresholds;
    let (setup, baseline) = match cfg.reference {
        Reference::Theoretical => (setup, baseline),
        Reference::Paired => (
            setup.paired(circuit, cfg.mutation_shots, cfg.seed, th)?,
            baseline.paired(circuit, cfg.mutation_shots, cfg.seed, th)?,
        ),
    };

    let unmutated = detect_and_localize(circuit, &setup, None, cfg.mutation_shots, cfg.seed, th)?;
    let baseline_unmutated = detect_and_localize(circuit, &baseline, None, cfg.mutation_shots, cfg.seed, th)?;

    let mut mutants = Vec::with_capacity(cfg.mutants_per_circuit);
    for m in 0..cfg.mutants_per_circuit as u64 {
        let (mutated, mutation) = mutate(circuit, &plan, sub_seed(cfg.seed, m))?;
        let equivalence = equivalence_check(circuit, &mutated, cfg.shots, cfg.seed, th)?;
        let at = Some(mutation.gate_index);
        let mut monitor = detect_and_localize(&mutated, &setup, at, cfg.mutation_shots, cfg.seed, th)?;
        let mut base = detect_and_localize(&mutated, &baseline, at, cfg.mutation_shots, cfg.seed, th)?;
        monitor.equivalent = equivalence.equivalent;
        base.equivalent = equivalence.equivalent;
        mutants.push(MutantRecord {
            mutation,
            equivalence,
            monitor,
            baseline: base,
        });
    }
    Ok(CircuitEvaluation {
        name: name.to_string(),
        skipped: None,
        nodes,
        baseline_nodes,
        unmutated: Some(unmutated),
        baseline_unmutated: Some(baseline_unmutated),
        mutants,
    })
}

/// Tallies in the shape of a detection table. Rates are over
/// non-equivalent mutants; equivalent mutants never count as detected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub circuits: usize,
    pub skipped: usize,
    pub mutants: usize,
    pub equivalent: usize,
    pub non_equivalent: usize,
    pub detected: usize,
    pub localized: usize,
    /// Equivalent mutants on which the monitor raised an anomaly.
    pub equivalent_flagged: usize,
    /// Unmutated circuits on which the monitor raised an anomaly.
    pub unmutated_flagged: usize,
    pub baseline_detected: usize,
    pub baseline_localized: usize,
    pub baseline_unmutated_flagged: usize,
    pub detection_rate: f64,
    pub localization_rate: f64,
    pub baseline_detection_rate: f64,
    pub baseline_localization_rate: f64,
}

pub fn summarize(evaluations: &[CircuitEvaluation]) -> EvaluationSummary {
    let mut s = EvaluationSummary {
        circuits: evaluations.len(),
        ..EvaluationSummary::default()
    };
    for e in evaluations {
        if e.skipped.is_some() {
            s.skipped += 1;
            continue;
        }
        s.unmutated_flagged += usize::from(e.unmutated.as_ref().is_some_and(|o| o.detected));
        s.baseline_unmutated_flagged += usize::from(e.baseline_unmutated.as_ref().is_some_and(|o| o.detected));
        for m in &e.mutants {
            s.mutants += 1;
            if m.equivalence.equivalent {
                s.equivalent += 1;
                s.equivalent_flagged += usize::from(m.monitor.detected);
                continue;
            }
            s.non_equivalent += 1;
            s.detected += usize::from(m.monitor.detected);
            s.localized += usize::from(m.monitor.localized);
            s.baseline_detected += usize::from(m.baseline.detected);
            s.baseline_localized += usize::from(m.baseline.localized);
        }
    }
    let rate = |n: usize| if s.non_equivalent == 0 { 0.0 } else { n as f64 / s.non_equivalent as f64 };
    s.detection_rate = rate(s.detected);
    s.localization_rate = rate(s.localized);
    s.baseline_detection_rate = rate(s.baseline_detected);
    s.baseline_localization_rate = rate(s.baseline_localized);
    s
}
