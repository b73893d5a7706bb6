//! Data ingestion and result serialization: Touchstone two-port files,
//! CSV spectra and calibration tables, and the deterministic JSON result
//! envelope.
//!
//! Parsers reject rather than coerce: malformed numbers, missing columns
//! and non-monotone frequency axes are errors with line or row/column
//! coordinates, never silent NaNs. Number parsing is locale-independent.

mod csv;
mod digest;
mod envelope;
mod touchstone;

pub use csv::{load_calibration, parse_spectrum_csv, write_calibration, ColumnMap};
pub use digest::fnv1a64_hex;
pub use envelope::{ColumnSpec, NamedTable, ParamValue, ResultEnvelope};
pub use touchstone::{parse_touchstone, write_touchstone, TouchstoneFormat, TouchstoneRecord};

use thiserror::Error;

/// Errors produced by the data-io layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    /// Malformed content at a specific line (1-based).
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    /// Malformed cell at specific coordinates (1-based row of the data
    /// section, named column).
    #[error("row {row}, column '{column}': {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },
    /// A required column is missing from the header.
    #[error("missing column '{name}' in header")]
    MissingColumn { name: String },
    /// Validation failures, all listed.
    #[error("validation failed: {}", .violations.join("; "))]
    Validation { violations: Vec<String> },
    /// The document is structurally not what was requested.
    #[error("{0}")]
    Format(String),
}
