//! Phase experiment: transmission and group delay versus the
//! phase-shifter offset with the magnon biased onto the cavity.

use rayon::prelude::*;

use crate::model::{group_delay, CoupledResponse, CoupledSystem, Spectrum, SpectrumMeta};
use crate::model::{log_magnitude_dips, MHZ};

use super::axis::{MapKind, SweepAxis, SweepMap};
use super::SweepError;

/// Result of [`phase_sweep`].
#[derive(Debug, Clone)]
pub struct PhaseSweepResult {
    /// `|S21|` over (ΔΦ, f).
    pub amplitude: SweepMap,
    /// Group delay (ns) over (ΔΦ, f); cells at transmission zeros are
    /// flagged.
    pub group_delay: SweepMap,
    /// On-resonance inverse amplitude `1/|S21(f_c)|` per ΔΦ, evaluated at
    /// the bare cavity frequency; `None` marks an exact zero.
    pub on_resonance_inverse: Vec<(f64, Option<f64>)>,
    /// Dip splitting (MHz) per ΔΦ where two minima resolve.
    pub splitting_mhz: Vec<(f64, Option<f64>)>,
}

impl PhaseSweepResult {
    /// Phase of maximum resolvable splitting, if any ΔΦ resolves two dips.
    pub fn max_splitting(&self) -> Option<(f64, f64)> {
        self.splitting_mhz
            .iter()
            .filter_map(|(phi, s)| s.map(|s| (*phi, s)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }
}

struct PhaseRow {
    amplitude: Vec<Option<f64>>,
    delay: Vec<Option<f64>>,
    inverse_at_fc: Option<f64>,
    splitting: Option<f64>,
}

fn evaluate_row(
    sys: &CoupledSystem,
    delta_phi: f64,
    freqs: &SweepAxis,
) -> Result<PhaseRow, SweepError> {
    let sys = sys.with_delta_phi(delta_phi)?;
    let response = CoupledResponse::from_system(&sys)?;

    let mut values = Vec::with_capacity(freqs.len());
    for f in freqs.samples() {
        // A lossless pole is the only evaluation failure; treat it as a
        // flagged singular cell like an exact zero.
        match response.s21(*f) {
            Ok(v) => values.push(v),
            Err(_) => values.push(num_complex::Complex64::new(0.0, 0.0)),
        }
    }
    let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let amplitude: Vec<Option<f64>> = mags.iter().map(|m| Some(*m)).collect();

    let spectrum = Spectrum::new(
        freqs.samples().to_vec(),
        values,
        SpectrumMeta::synthetic(None),
    )
    .map_err(SweepError::Model)?;
    let delay = group_delay(&spectrum).map_err(SweepError::Model)?.tau_ns;

    let inverse_at_fc = match response.s21(sys.cavity.f_c_ghz()) {
        Ok(v) if v.norm() > 0.0 => Some(1.0 / v.norm()),
        _ => None,
    };

    let minima = log_magnitude_dips(&mags, 5);
    let splitting = if minima.len() >= 2 {
        let mut by_depth = minima;
        by_depth.sort_by(|a, b| mags[*a].partial_cmp(&mags[*b]).unwrap());
        let (a, b) = (by_depth[0], by_depth[1]);
        Some((freqs.samples()[a] - freqs.samples()[b]).abs() / MHZ)
    } else {
        None
    };

    Ok(PhaseRow {
        amplitude,
        delay,
        inverse_at_fc,
        splitting,
    })
}

/// Sweep the phase-shifter offset with the magnon on resonance,
/// producing amplitude and group-delay maps plus the on-resonance
/// inverse-amplitude and splitting traces.
pub fn phase_sweep(
    sys: &CoupledSystem,
    phis: &SweepAxis,
    freqs: &SweepAxis,
) -> Result<PhaseSweepResult, SweepError> {
    let f_m = sys.magnon.frequency_ghz().map_err(SweepError::Model)?;
    let f_c = sys.cavity.f_c_ghz();
    if (f_m - f_c).abs() > 1e-9 * f_c {
        return Err(SweepError::NotResonant {
            f_m_ghz: f_m,
            f_c_ghz: f_c,
        });
    }

    let rows: Vec<Result<PhaseRow, SweepError>> = phis
        .samples()
        .par_iter()
        .map(|phi| evaluate_row(sys, *phi, freqs))
        .collect();

    let mut amplitude_rows = Vec::with_capacity(phis.len());
    let mut delay_rows = Vec::with_capacity(phis.len());
    let mut inverse = Vec::with_capacity(phis.len());
    let mut splittings = Vec::with_capacity(phis.len());
    for (phi, row) in phis.samples().iter().zip(rows) {
        let row = row?;
        amplitude_rows.push(row.amplitude);
        delay_rows.push(row.delay);
        inverse.push((*phi, row.inverse_at_fc));
        splittings.push((*phi, row.splitting));
    }

    Ok(PhaseSweepResult {
        amplitude: SweepMap::from_rows(
            phis.clone(),
            freqs.clone(),
            MapKind::Amplitude,
            amplitude_rows,
        )?,
        group_delay: SweepMap::from_rows(
            phis.clone(),
            freqs.clone(),
            MapKind::GroupDelay,
            delay_rows,
        )?,
        on_resonance_inverse: inverse,
        splitting_mhz: splittings,
    })
}
