//! Inverse pipeline: lineshape fits, damping and coupling extraction,
//! anomaly-parameter fits and the critical-coupling search.
//!
//! All fits are deterministic damped least-squares procedures seeded from
//! the data itself (dip positions and 3 dB widths); no user-supplied
//! starting points are needed. Distinct fits share no state and may run
//! concurrently.

mod anomaly;
mod bare;
mod calibration;
mod coupling;
mod lm;
mod lorentzian;
mod report;
mod two_mode;

pub use anomaly::{fit_anomaly_params, AnomalyAxis, AnomalyDataset};
pub use bare::{fit_bare_cavity, BareCavityFit};
pub use calibration::{
    find_critical_spacing, CalibrationRow, CalibrationTable, CriticalSearch, CriticalSpacing, Pchip,
};
pub use coupling::{extract_coupling_vs_phase, PhaseCouplingPoint};
pub use lm::{levenberg_marquardt, levenberg_marquardt_unbounded, LmOptions, LmProblem, LmResult};
pub use lorentzian::{fit_inverse_lorentzian, LorentzianFit};
pub use report::{FitParameter, FitReport};
pub use two_mode::{fit_two_resonances, fit_two_resonances_forced};

use thiserror::Error;

/// Errors produced by the fitting layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    /// The lineshape shows more than one resonance dip; a two-resonance
    /// model is required.
    #[error(
        "ambiguous lineshape: {minima} resonance dips detected; \
         use fit_two_resonances for multi-mode spectra"
    )]
    AmbiguousLineshape { minima: usize },
    /// Not enough usable samples to run the requested fit.
    #[error("insufficient data: need at least {need} usable samples, got {got}")]
    InsufficientData { need: usize, got: usize },
    /// The dataset cannot pin down the requested parameters.
    #[error("identifiability error: {0}")]
    Identifiability(String),
    /// Calibration-table validation failures, all violations listed.
    #[error("invalid calibration table: {}", .violations.join("; "))]
    InvalidTable { violations: Vec<String> },
    /// A model-layer error surfaced while evaluating the fit model.
    #[error("model error during fit: {0}")]
    Model(#[from] crate::model::ModelError),
}
