//! Validation statistics and coverage metrics.

pub mod coverage;
pub mod stats;
pub mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::select::{Node, SelectError};
use crate::sim::{SimError, DEFAULT_AMP_THRESHOLD, DEFAULT_QUBIT_LIMIT};

pub use coverage::{coverage_metrics, CoverageReport};
pub use stats::{chi_square_sf, chi_square_test, tvd, ChiSquare, Flag};
pub use validate::{
    possible_outputs_check, probability_verification, unexpected_outputs, validate, NodeFrequencyCheck,
    NodeRestoration, ValidationVerdict,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no classical bit recorded for node {0}")]
    MissingNodeBit(Node),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Select(#[from] SelectError),
}

/// Decision thresholds shared by validation and the mutation study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub chi2_alpha: f64,
    pub tvd: f64,
    /// Largest tolerated `|Δp0|` for a node.
    pub probability: f64,
    pub amp_threshold: f64,
    pub qubit_limit: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            chi2_alpha: 0.01,
            tvd: 0.15,
            probability: 1e-2,
            amp_threshold: DEFAULT_AMP_THRESHOLD,
            qubit_limit: DEFAULT_QUBIT_LIMIT,
        }
    }
}
