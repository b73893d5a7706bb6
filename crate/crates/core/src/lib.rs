//! Transmission modeling and parameter extraction for a microwave cavity
//! coupled remotely to a magnon mode through travelling photons.
//!
//! The crate is organized in four layers:
//!
//! * [`model`] — domain types and the exact forward formulas: bare-cavity
//!   transmission, the coupled-system transmission with its phenomenological
//!   anomaly parameters, normal modes, coupling-strength extraction and
//!   group delay.
//! * [`fit`] — the inverse pipeline: Lorentzian and two-resonance lineshape
//!   fits, damping-rate extraction, coupling-vs-phase extraction, anomaly
//!   parameter fits and critical-coupling search over calibration tables.
//! * [`sweep`] — experiment engines that map transmission and group delay
//!   over spacing, phase and field-detuning grids, plus the synthetic
//!   spectrum generator used for round-trip validation.
//! * [`io`] — Touchstone and CSV ingestion and the deterministic result
//!   envelope used for all serialized output.
//!
//! All frequencies are linear frequencies (GHz for absolute frequencies and
//! grids, MHz for damping/coupling rates), matching the conventions used in
//! microwave spectroscopy. All operations are pure functions of immutable
//! values and are safe to call concurrently.

pub mod fit;
pub mod io;
pub mod model;
pub mod sweep;

pub use model::{
    AnomalyParams, CavityMode, ComplexModePair, CoupledSystem, CouplingResult, MagnonMode,
    ModelError, PhaseLink, Provenance, Spectrum, SpectrumMeta,
};
