use std::path::PathBuf;

use midmon::analysis::AnalysisError;
use midmon::circuit::QasmError;
use midmon::filter::FilterError;
use midmon::mutation::MutationError;
use midmon::reconstruct::ReconstructError;
use midmon::select::SelectError;
use midmon::trace::TraceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Qasm {
        path: PathBuf,
        #[source]
        source: QasmError,
    },

    #[error("{path}: malformed manifest: {source}")]
    ManifestFormat {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("manifest does not match the circuits: {0}")]
    ManifestMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Select(#[from] SelectError),

    #[error(transparent)]
    Filter(#[from] FilterError),

    #[error(transparent)]
    Trace(#[from] TraceError),

    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),

    #[error(transparent)]
    Analysis(#[from] AnalysisError),

    #[error("{circuit}: {source}")]
    Mutation {
        circuit: String,
        #[source]
        source: MutationError,
    },

    #[error("cannot serialize report: {0}")]
    Report(#[from] serde_json::Error),
}
