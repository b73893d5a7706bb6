//! Experiment engines: spacing, phase and field-detuning sweeps over the
//! forward model, plus the synthetic spectrum generator used for
//! round-trip validation.
//!
//! Grid cells are independent pure evaluations; map rows are computed in
//! parallel and the results are identical to sequential evaluation.

mod axis;
mod field;
mod phase;
mod spacing;
mod synth;

pub use axis::{AxisKind, DetuningSpec, MapKind, SweepAxis, SweepMap};
pub use field::{field_sweep, BranchPoint, CouplingSummary, FieldSweepResult};
pub use phase::{phase_sweep, PhaseSweepResult};
pub use spacing::{spacing_sweep, SpacingSweepResult};
pub use synth::{engineered_calibration_table, synthesize_spectrum, ForwardModel};

use thiserror::Error;

/// Errors produced by the sweep layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    /// Axis construction failed.
    #[error("invalid sweep axis: {0}")]
    InvalidAxis(String),
    /// The phase experiment requires the magnon biased onto the cavity.
    #[error("phase sweep requires f_m = f_c; got f_m = {f_m_ghz} GHz, f_c = {f_c_ghz} GHz")]
    NotResonant { f_m_ghz: f64, f_c_ghz: f64 },
    /// Spacing outside the calibration-table range (no extrapolation).
    #[error("spacing {value_mm} mm outside the calibrated range [{lo_mm}, {hi_mm}] mm")]
    OutOfRange {
        value_mm: f64,
        lo_mm: f64,
        hi_mm: f64,
    },
    /// A model-layer error surfaced while evaluating the sweep.
    #[error("model error during sweep: {0}")]
    Model(#[from] crate::model::ModelError),
    /// A fit-layer error surfaced while building traces.
    #[error("fit error during sweep: {0}")]
    Fit(#[from] crate::fit::FitError),
}

/// Default frequency axis: ±10 effective linewidths around the center
/// with 2001 points (floor of 2 MHz half-span keeps degenerate widths
/// usable).
pub fn default_frequency_axis(center_ghz: f64, linewidth_mhz: f64) -> SweepAxis {
    let half_mhz = 10.0 * linewidth_mhz.abs().max(2.0);
    SweepAxis::linear(
        AxisKind::FrequencyGhz,
        center_ghz - half_mhz * 1e-3,
        center_ghz + half_mhz * 1e-3,
        2001,
    )
    .expect("default frequency axis is valid")
}

/// Default phase axis: 41 points over [0, 2π].
pub fn default_phase_axis() -> SweepAxis {
    SweepAxis::linear(AxisKind::DeltaPhiRad, 0.0, 2.0 * std::f64::consts::PI, 41)
        .expect("default phase axis is valid")
}

/// Default field-detuning axis: 81 points over ±60 MHz.
pub fn default_detuning_axis() -> SweepAxis {
    SweepAxis::linear(AxisKind::DetuningMhz, -60.0, 60.0, 81)
        .expect("default detuning axis is valid")
}
