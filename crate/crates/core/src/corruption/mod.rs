//! Corruption operators over observations, transitions and environment state.

pub mod config;
pub mod largest_box;
pub mod ops;
pub mod runtime;
pub mod spec;

use thiserror::Error;

pub use config::{all_defaults_document, parse_config};
pub use largest_box::find_largest_non_overlapping_box;
pub use runtime::{CorruptedEnv, CorruptionRuntime};
pub use spec::{
    AccidentalTouchParams, AppMinimizationParams, Condition, CorruptionKind, CorruptionParams, CorruptionSpec,
    MarkParams, MultiAppsParams, NetworkErrorParams, Placement, PopUpParams, ResolutionParams, Scope,
    SubtitleParams, VerificationParams,
};

#[derive(Debug, Error, PartialEq)]
pub enum CorruptionError {
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for {field}: {message}")]
    Validation { field: String, message: String },
}
