//! Spacing experiment: bare-cavity transmission versus lateral spacing
//! from a calibration table, with the effective-damping and group-delay
//! traces that locate the critical-coupling conditions.

use rayon::prelude::*;

use crate::fit::CalibrationTable;
use crate::model::{bare_cavity_s21, resonance_group_delay_ns, CavityMode};

use super::axis::{MapKind, SweepAxis, SweepMap};
use super::SweepError;

/// Result of [`spacing_sweep`].
#[derive(Debug, Clone)]
pub struct SpacingSweepResult {
    /// `|S21|` over (d, f).
    pub amplitude: SweepMap,
    /// Interpolated effective damping β(d) (MHz).
    pub beta_trace: Vec<(f64, f64)>,
    /// On-resonance group delay τ_g(f_c)(d) (ns); `None` marks the exact
    /// critical-coupling singularity.
    pub tau_g_trace: Vec<(f64, Option<f64>)>,
    /// On-resonance amplitude `|S21(f_c)|`(d).
    pub s21_at_fc: Vec<(f64, f64)>,
}

/// Interpolate the calibration table at each requested spacing and map
/// the bare-cavity response. Spacings outside the table range are
/// rejected (interpolation only, no extrapolation).
pub fn spacing_sweep(
    table: &CalibrationTable,
    spacings: &SweepAxis,
    freqs: &SweepAxis,
) -> Result<SpacingSweepResult, SweepError> {
    let (lo, hi) = table.d_range_mm();
    for d in spacings.samples() {
        if *d < lo || *d > hi {
            return Err(SweepError::OutOfRange {
                value_mm: *d,
                lo_mm: lo,
                hi_mm: hi,
            });
        }
    }

    let interp = table.interpolants();
    let mut cavities = Vec::with_capacity(spacings.len());
    for d in spacings.samples() {
        let cavity = CavityMode::new(
            interp.f_c.eval(*d),
            interp.beta0.eval(*d).max(0.0),
            interp.kappa_l.eval(*d).max(0.0),
            interp.kappa_r.eval(*d).max(0.0),
        )
        .map_err(SweepError::Model)?;
        cavities.push(cavity);
    }

    let rows: Vec<Vec<Option<f64>>> = cavities
        .par_iter()
        .map(|cavity| {
            freqs
                .samples()
                .iter()
                .map(|f| Some(bare_cavity_s21(*f, cavity).norm()))
                .collect()
        })
        .collect();

    let mut beta_trace = Vec::with_capacity(spacings.len());
    let mut tau_g_trace = Vec::with_capacity(spacings.len());
    let mut s21_at_fc = Vec::with_capacity(spacings.len());
    for (d, cavity) in spacings.samples().iter().zip(&cavities) {
        beta_trace.push((*d, cavity.beta_mhz()));
        tau_g_trace.push((*d, resonance_group_delay_ns(cavity).ok()));
        s21_at_fc.push((*d, bare_cavity_s21(cavity.f_c_ghz(), cavity).norm()));
    }

    Ok(SpacingSweepResult {
        amplitude: SweepMap::from_rows(spacings.clone(), freqs.clone(), MapKind::Amplitude, rows)?,
        beta_trace,
        tau_g_trace,
        s21_at_fc,
    })
}
