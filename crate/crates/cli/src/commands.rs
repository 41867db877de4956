use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use midmon::analysis::{coverage_metrics, validate, CoverageReport, ValidationVerdict};
use midmon::circuit::{emit_qasm, parse_qasm, Circuit};
use midmon::filter::{filter_nodes, plan_instance, FilterSolution};
use midmon::mutation::{evaluate_circuit, summarize, CircuitEvaluation, EvaluationSummary, Reference};
use midmon::reconstruct::{extra_qubit_cost, reconstruct, InstrumentedCircuit};
use midmon::select::{expected_probabilities, select_monitorable_nodes, GateDiagnostic, MonitorPlan, Node};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::Manifest;
use crate::report::{to_json, write_text, Report};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    parse_qasm(&read(path)?).map_err(|source| CliError::Qasm {
        path: path.to_path_buf(),
        source,
    })
}

fn plan_for(circuit: &Circuit, cfg: &RunConfig) -> Result<MonitorPlan, CliError> {
    if circuit.num_qubits() > cfg.q_max {
        return Err(CliError::Input(format!(
            "circuit has {} qubits, more than the budget of {}",
            circuit.num_qubits(),
            cfg.q_max
        )));
    }
    Ok(select_monitorable_nodes(circuit, cfg.tol_separability)?)
}

/// Nodes chosen by the qubit-budget filter.
fn filtered(circuit: &Circuit, plan: &MonitorPlan, cfg: &RunConfig) -> Result<(Vec<Node>, FilterSolution), CliError> {
    let (instance, candidates) = plan_instance(circuit, plan, cfg.q_max)?;
    let solution = filter_nodes(&instance)?;
    let nodes = solution.selected.iter().map(|&id| candidates[id]).collect();
    Ok((nodes, solution))
}

#[derive(Serialize)]
struct CircuitSummary {
    path: String,
    qubits: usize,
    clbits: usize,
    operations: usize,
}

impl CircuitSummary {
    fn new(path: &Path, c: &Circuit) -> CircuitSummary {
        CircuitSummary {
            path: path.display().to_string(),
            qubits: c.num_qubits(),
            clbits: c.num_clbits(),
            operations: c.len(),
        }
    }
}

#[derive(Serialize)]
struct NodeEntry {
    qubit: usize,
    gate: usize,
    redundant: bool,
    extra_qubits: usize,
    p0: f64,
    p1: f64,
    selected: bool,
}

#[derive(Serialize)]
struct FilterSummary {
    selected: Vec<Node>,
    obj1: usize,
    obj2: usize,
    covered_qubits: BTreeSet<usize>,
    extra_qubits: usize,
    warning: Option<String>,
}

#[derive(Serialize)]
struct AnalyzeBody {
    circuit: CircuitSummary,
    m_lists: Vec<Vec<usize>>,
    locked: Vec<bool>,
    nodes: Vec<NodeEntry>,
    diagnostics: Vec<GateDiagnostic>,
    filter: FilterSummary,
    coverage: CoverageReport,
    selected_coverage: CoverageReport,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// OpenQASM 2.0 input.
    pub qasm: PathBuf,
}

pub fn analyze(args: &AnalyzeArgs, cfg: &RunConfig) -> Result<String, CliError> {
    let circuit = load_circuit(&args.qasm)?;
    let plan = plan_for(&circuit, cfg)?;
    let (selected, solution) = filtered(&circuit, &plan, cfg)?;
    let expectations = expected_probabilities(&circuit, &plan)?;
    let nodes = expectations
        .iter()
        .map(|e| {
            let node = e.node();
            Ok(NodeEntry {
                qubit: node.qubit,
                gate: node.index,
                redundant: plan.is_redundant(node),
                extra_qubits: extra_qubit_cost(&circuit, node)?,
                p0: e.p0,
                p1: e.p1,
                selected: selected.contains(&node),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let body = AnalyzeBody {
        circuit: CircuitSummary::new(&args.qasm, &circuit),
        m_lists: plan.m_lists.clone(),
        locked: plan.locked.clone(),
        diagnostics: plan.diagnostics.clone(),
        filter: FilterSummary {
            extra_qubits: nodes.iter().filter(|n| n.selected).map(|n| n.extra_qubits).sum(),
            selected: selected.clone(),
            obj1: solution.obj1,
            obj2: solution.obj2,
            covered_qubits: solution.covered,
            warning: solution.warning,
        },
        nodes,
        coverage: coverage_metrics(&circuit, &plan),
        selected_coverage: coverage_metrics(&circuit, &plan.restricted_to(&selected)),
    };
    to_json(&Report::new("analyze", cfg, body))
}

#[derive(Serialize)]
struct CoverageBody {
    circuit: CircuitSummary,
    coverage: CoverageReport,
    selected_coverage: CoverageReport,
}

pub fn coverage(args: &AnalyzeArgs, cfg: &RunConfig) -> Result<String, CliError> {
    let circuit = load_circuit(&args.qasm)?;
    let plan = plan_for(&circuit, cfg)?;
    let (selected, _) = filtered(&circuit, &plan, cfg)?;
    let body = CoverageBody {
        circuit: CircuitSummary::new(&args.qasm, &circuit),
        coverage: coverage_metrics(&circuit, &plan),
        selected_coverage: coverage_metrics(&circuit, &plan.restricted_to(&selected)),
    };
    to_json(&Report::new("coverage", cfg, body))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Selection {
    /// Nodes kept by the qubit-budget filter.
    Filtered,
    /// Every monitorable node.
    All,
    /// No node; the circuit is emitted unchanged.
    None,
}

fn parse_node(text: &str) -> Result<Node, String> {
    let (q, g) = text
        .split_once(':')
        .ok_or_else(|| format!("expected QUBIT:GATE, got `{text}`"))?;
    let q = q.trim().trim_start_matches('q');
    let qubit = q.parse().map_err(|_| format!("bad qubit `{q}`"))?;
    let index = g.trim().parse().map_err(|_| format!("bad gate index `{g}`"))?;
    Ok(Node::new(qubit, index))
}

#[derive(Args, Debug)]
pub struct InstrumentArgs {
    /// OpenQASM 2.0 input.
    pub qasm: PathBuf,

    /// Node to instrument as QUBIT:GATE (repeatable); overrides --selection.
    #[arg(long = "node", value_parser = parse_node)]
    pub nodes: Vec<Node>,

    #[arg(long, value_enum, default_value_t = Selection::Filtered)]
    pub selection: Selection,

    /// Manifest destination; defaults to the output path with `.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn default_manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn instrument_circuit(circuit: &Circuit, nodes: &[Node], selection: Selection, cfg: &RunConfig) -> Result<InstrumentedCircuit, CliError> {
    let plan = plan_for(circuit, cfg)?;
    let chosen = if !nodes.is_empty() {
        nodes.to_vec()
    } else {
        match selection {
            Selection::Filtered => filtered(circuit, &plan, cfg)?.0,
            Selection::All => plan.nodes(),
            Selection::None => Vec::new(),
        }
    };
    let inst = reconstruct(circuit, &chosen)?;
    if inst.circuit.num_qubits() > cfg.q_max {
        return Err(CliError::Input(format!(
            "instrumented circuit needs {} qubits, more than the budget of {}",
            inst.circuit.num_qubits(),
            cfg.q_max
        )));
    }
    Ok(inst)
}

/// Writes the instrumented QASM and its manifest.
pub fn instrument(args: &InstrumentArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let manifest_path = match (&args.manifest, &cfg.output) {
        (Some(m), _) => m.clone(),
        (None, Some(out)) => default_manifest_path(out),
        (None, None) => return Err(CliError::Config("--manifest is required when writing QASM to standard output".into())),
    };
    let circuit = load_circuit(&args.qasm)?;
    let inst = instrument_circuit(&circuit, &args.nodes, args.selection, cfg)?;
    write_text(cfg.output.as_deref(), &emit_qasm(&inst.circuit))?;
    write_text(Some(&manifest_path), &to_json(&Manifest::describe(&inst))?)
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// The uninstrumented OpenQASM 2.0 circuit.
    pub qasm: PathBuf,

    /// Instrumented circuit from `instrument`; built in place when absent.
    #[arg(long, requires = "manifest")]
    pub instrumented: Option<PathBuf>,

    #[arg(long, requires = "instrumented")]
    pub manifest: Option<PathBuf>,
}

#[derive(Serialize)]
struct ValidateBody {
    circuit: CircuitSummary,
    nodes: Vec<Node>,
    extra_qubits: usize,
    verdict: ValidationVerdict,
}

/// Returns the report and whether validation passed.
pub fn validate_cmd(args: &ValidateArgs, cfg: &RunConfig) -> Result<(String, bool), CliError> {
    let original = load_circuit(&args.qasm)?;
    let inst = match (&args.instrumented, &args.manifest) {
        (Some(qasm), Some(manifest)) => {
            let parsed = load_circuit(qasm)?;
            let text = read(manifest)?;
            let manifest: Manifest = serde_json::from_str(&text).map_err(|source| CliError::ManifestFormat {
                path: manifest.clone(),
                source,
            })?;
            let inst = manifest.rebuild(parsed)?;
            if !inst.strip().approx_eq(&original, 1e-12) {
                return Err(CliError::ManifestMismatch(
                    "the instrumented circuit's original operations differ from the input circuit".into(),
                ));
            }
            inst
        }
        _ => instrument_circuit(&original, &[], Selection::Filtered, cfg)?,
    };
    let verdict = validate(&inst, cfg.shots, cfg.seed, &cfg.thresholds())?;
    let pass = verdict.overall;
    let body = ValidateBody {
        circuit: CircuitSummary::new(&args.qasm, &original),
        nodes: inst.nodes(),
        extra_qubits: inst.extra_qubits,
        verdict,
    };
    Ok((to_json(&Report::new("validate", cfg, body))?, pass))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReferenceArg {
    /// Exact node probabilities of the unmutated circuit.
    Theoretical,
    /// Same-seed frequencies of the unmutated instrumented circuit.
    Paired,
}

impl From<ReferenceArg> for Reference {
    fn from(r: ReferenceArg) -> Reference {
        match r {
            ReferenceArg::Theoretical => Reference::Theoretical,
            ReferenceArg::Paired => Reference::Paired,
        }
    }
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Directory of `.qasm` files.
    pub corpus: PathBuf,

    #[arg(long, default_value_t = 3)]
    pub mutants: usize,

    #[arg(long, value_enum, default_value_t = ReferenceArg::Theoretical)]
    pub reference: ReferenceArg,
}

#[derive(Serialize)]
struct EvaluateBody {
    corpus: String,
    mutants_per_circuit: usize,
    reference: Reference,
    summary: EvaluationSummary,
    circuits: Vec<CircuitEvaluation>,
}

pub fn evaluate(args: &EvaluateArgs, cfg: &RunConfig) -> Result<String, CliError> {
    let entries = std::fs::read_dir(&args.corpus).map_err(|source| CliError::Io {
        path: args.corpus.clone(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Input(format!("{}: no .qasm files", args.corpus.display())));
    }
    let eval_cfg = cfg.evaluation(args.mutants, args.reference.into());
    let mut circuits = Vec::with_capacity(files.len());
    for path in &files {
        let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let circuit = load_circuit(path)?;
        let e = evaluate_circuit(&name, &circuit, &eval_cfg).map_err(|source| CliError::Mutation {
            circuit: name.clone(),
            source,
        })?;
        circuits.push(e);
    }
    let body = EvaluateBody {
        corpus: args.corpus.display().to_string(),
        mutants_per_circuit: args.mutants,
        reference: eval_cfg.reference,
        summary: summarize(&circuits),
        circuits,
    };
    to_json(&Report::new("evaluate", cfg, body))
}
