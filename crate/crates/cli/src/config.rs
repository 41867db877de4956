use std::path::PathBuf;

use clap::Args;
use midmon::analysis::Thresholds;
use midmon::entangle::DEFAULT_SEPARABILITY_TOL;
use midmon::filter::DEFAULT_Q_MAX;
use midmon::mutation::{EvaluationConfig, Reference};
use midmon::sim::DEFAULT_AMP_THRESHOLD;
use serde::Serialize;

use crate::error::CliError;

/// Settings shared by every subcommand.
#[derive(Args, Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Largest total qubit count of an instrumented circuit.
    #[arg(long, default_value_t = DEFAULT_Q_MAX)]
    pub q_max: usize,

    #[arg(long, default_value_t = 8192)]
    pub shots: u64,

    /// Shots per detection run in the mutation study.
    #[arg(long, default_value_t = 1000)]
    pub mutation_shots: u64,

    #[arg(long, default_value_t = 2025)]
    pub seed: u64,

    #[arg(long, default_value_t = DEFAULT_SEPARABILITY_TOL)]
    pub tol_separability: f64,

    /// Largest tolerated |Δp0| for a node.
    #[arg(long, default_value_t = 1e-2)]
    pub tol_probability: f64,

    #[arg(long, default_value_t = 0.15)]
    pub tvd_threshold: f64,

    #[arg(long, default_value_t = 0.01)]
    pub chi2_alpha: f64,

    /// Amplitude magnitude below which an outcome leaves the ideal support.
    #[arg(long, default_value_t = DEFAULT_AMP_THRESHOLD)]
    pub amp_threshold: f64,

    /// Report destination; standard output when absent.
    #[arg(long, short)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn check(&self) -> Result<(), CliError> {
        let positive = [
            ("tol-separability", self.tol_separability),
            ("tol-probability", self.tol_probability),
            ("tvd-threshold", self.tvd_threshold),
            ("chi2-alpha", self.chi2_alpha),
            ("amp-threshold", self.amp_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("--{name} must be positive, got {v}")));
            }
        }
        if self.shots == 0 || self.mutation_shots == 0 {
            return Err(CliError::Config("shot counts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            chi2_alpha: self.chi2_alpha,
            tvd: self.tvd_threshold,
            probability: self.tol_probability,
            amp_threshold: self.amp_threshold,
            ..Thresholds::default()
        }
    }

    pub fn evaluation(&self, mutants_per_circuit: usize, reference: Reference) -> EvaluationConfig {
        EvaluationConfig {
            mutants_per_circuit,
            shots: self.shots,
            mutation_shots: self.mutation_shots,
            seed: self.seed,
            q_max: self.q_max,
            tol_separability: self.tol_separability,
            thresholds: self.thresholds(),
            reference,
        }
    }
}
