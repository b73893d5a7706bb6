//! Domain types and forward formulas for the coupled cavity-magnon system.
//!
//! Unit conventions, used everywhere in this crate:
//!
//! * absolute frequencies and frequency grids: GHz (linear frequency, not
//!   angular);
//! * damping, extrinsic-coupling and coupling-strength rates: MHz,
//!   half-width (HWHM) convention;
//! * magnetic fields: mT; lengths: m; wavelengths: mm; phases: rad;
//! * group delay: ns.
//!
//! Complex mode frequencies are written `ω̃ = ω − iδ` with the damping rate
//! as a negative imaginary part. Transmission values follow the measured
//! (network-analyzer) phase convention: an under-coupled resonance has
//! negative on-resonance group delay. Formulas that mix GHz frequencies
//! with MHz rates convert rates to GHz internally via [`MHZ`].

mod delay;
mod modes;
mod spectrum;
mod transmission;
mod types;

pub use delay::{group_delay, resonance_group_delay_ns, unwrap_phase, GroupDelayResult};
pub use modes::{
    cooperativity, coupling_from_modes, denominator_poles, drift_matrix, drift_modes,
    eigenvalues_2x2, solve_monic_quadratic,
};
pub use spectrum::{
    local_minima, log_magnitude_dips, magnitude_dips, smooth_boxcar, Provenance, Spectrum,
    SpectrumMeta,
};
pub use transmission::{bare_cavity_s21, coupled_s21, CoupledResponse};
pub use types::{
    effective_damping, AnomalyParams, CavityMode, ComplexModePair, CoupledSystem, CouplingResult,
    MagnonMode, PhaseLink,
};

use thiserror::Error;

/// GHz per MHz; rates stored in MHz are scaled by this inside formulas.
pub const MHZ: f64 = 1e-3;

/// Errors produced by the model layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A constructor argument violated a type invariant.
    #[error("invalid parameter {name}: {reason} (got {value})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// The effective magnon field `mu0_H + mu0_HA` must be positive.
    #[error(
        "non-positive effective field: mu0_H = {mu0_h_mt} mT, mu0_HA = {mu0_ha_mt} mT \
         (mu0_H + mu0_HA must be > 0)"
    )]
    NonPositiveEffectiveField { mu0_h_mt: f64, mu0_ha_mt: f64 },
    /// Guided wavelength must be positive to define a travelling phase.
    #[error("non-positive wavelength: {wavelength_mm} mm")]
    NonPositiveWavelength { wavelength_mm: f64 },
    /// The transmission denominator vanished (only possible with zero
    /// dissipation everywhere).
    #[error("transmission singularity at f = {f_ghz} GHz (lossless pole)")]
    Singularity { f_ghz: f64 },
    /// Cooperativity diverges when either effective damping is exactly zero.
    #[error("singular cooperativity: effective damping is zero (critical coupling)")]
    SingularCooperativity,
    /// On-resonance group delay diverges at exact critical coupling.
    #[error("group delay diverges at critical coupling (beta = 0)")]
    CriticalCoupling,
    /// A spectrum grid or value array failed validation.
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    /// Group delay needs at least three grid points.
    #[error("group delay needs at least 3 grid points (got {got})")]
    TooFewPoints { got: usize },
}
