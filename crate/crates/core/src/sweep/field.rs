//! Field experiment: transmission versus bias-field detuning at fixed
//! travelling phase, with anti-crossing branch extraction.

use rayon::prelude::*;

use crate::model::{
    cooperativity, log_magnitude_dips, CoupledResponse, CoupledSystem, CouplingResult, MHZ,
};
use num_complex::Complex64;

use super::axis::{MapKind, SweepAxis, SweepMap};
use super::SweepError;

/// Transmission-minima branches at one field detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub delta_m_mhz: f64,
    pub lower_ghz: Option<f64>,
    pub upper_ghz: Option<f64>,
}

impl BranchPoint {
    pub fn separation_mhz(&self) -> Option<f64> {
        match (self.lower_ghz, self.upper_ghz) {
            (Some(lo), Some(hi)) => Some((hi - lo) / MHZ),
            _ => None,
        }
    }
}

/// Coupling figures derived from the anti-crossing at zero detuning:
/// the coupling magnitude is the minimum branch separation there, and
/// the cooperativity follows from the effective dampings.
#[derive(Debug, Clone)]
pub struct CouplingSummary {
    pub g_abs_mhz: f64,
    pub cooperativity: Option<f64>,
    pub alpha_mhz: f64,
    pub beta_mhz: f64,
}

/// Result of [`field_sweep`].
#[derive(Debug, Clone)]
pub struct FieldSweepResult {
    /// `|S21|` over (Δ_m, f).
    pub amplitude: SweepMap,
    /// Branch traces per detuning, continuity-matched across columns.
    pub branches: Vec<BranchPoint>,
    /// Coupling summary when two branches resolve at Δ_m = 0.
    pub coupling: Option<CouplingSummary>,
}

/// Sweep the field detuning `Δ_m = f_m − f_c` (MHz) at the system's
/// fixed phase setting. Detunings that would drive the magnon frequency
/// non-positive are rejected before any evaluation.
pub fn field_sweep(
    sys: &CoupledSystem,
    detunings: &SweepAxis,
    freqs: &SweepAxis,
) -> Result<FieldSweepResult, SweepError> {
    // Validate every detuning first.
    let mut systems = Vec::with_capacity(detunings.len());
    for dm in detunings.samples() {
        systems.push(sys.with_detuning_mhz(*dm).map_err(SweepError::Model)?);
    }

    let rows: Vec<Result<Vec<f64>, SweepError>> = systems
        .par_iter()
        .map(|s| {
            let response = CoupledResponse::from_system(s).map_err(SweepError::Model)?;
            Ok(freqs
                .samples()
                .iter()
                .map(|f| match response.s21(*f) {
                    Ok(v) => v.norm(),
                    Err(_) => 0.0,
                })
                .collect())
        })
        .collect();

    let mut mag_rows = Vec::with_capacity(detunings.len());
    for row in rows {
        mag_rows.push(row?);
    }

    // Branch extraction: up to two deepest minima per column, matched to
    // the previous column by nearest frequency.
    let grid = freqs.samples();
    let mut branches: Vec<BranchPoint> = Vec::with_capacity(detunings.len());
    let mut last_lower: Option<f64> = None;
    let mut last_upper: Option<f64> = None;
    for (dm, mags) in detunings.samples().iter().zip(&mag_rows) {
        let minima = log_magnitude_dips(mags, 5);
        let mut point = BranchPoint {
            delta_m_mhz: *dm,
            lower_ghz: None,
            upper_ghz: None,
        };
        match minima.len() {
            0 => {}
            1 => {
                let f = grid[minima[0]];
                // Assign the lone dip to the nearer previous branch.
                let d_lower = last_lower.map(|v| (v - f).abs()).unwrap_or(f64::MAX);
                let d_upper = last_upper.map(|v| (v - f).abs()).unwrap_or(f64::MAX);
                if d_lower <= d_upper {
                    point.lower_ghz = Some(f);
                } else {
                    point.upper_ghz = Some(f);
                }
            }
            _ => {
                let mut by_depth = minima;
                by_depth.sort_by(|a, b| mags[*a].partial_cmp(&mags[*b]).unwrap());
                let mut pair = [grid[by_depth[0]], grid[by_depth[1]]];
                pair.sort_by(|a, b| a.partial_cmp(b).unwrap());
                point.lower_ghz = Some(pair[0]);
                point.upper_ghz = Some(pair[1]);
            }
        }
        last_lower = point.lower_ghz.or(last_lower);
        last_upper = point.upper_ghz.or(last_upper);
        branches.push(point);
    }

    // Coupling summary from the branch separation at the detuning nearest
    // zero; the minimum separation of an anti-crossing sits there.
    let coupling = branches
        .iter()
        .filter(|b| b.separation_mhz().is_some())
        .min_by(|a, b| {
            a.delta_m_mhz
                .abs()
                .partial_cmp(&b.delta_m_mhz.abs())
                .unwrap()
        })
        .and_then(|at_zero| {
            if at_zero.delta_m_mhz.abs() > detuning_step(detunings) {
                return None;
            }
            let g_abs = at_zero.separation_mhz().unwrap();
            let alpha = sys.magnon.alpha_mhz();
            let beta = sys.cavity.beta_mhz();
            let g = CouplingResult::from_raw(Complex64::new(g_abs, 0.0));
            Some(CouplingSummary {
                g_abs_mhz: g_abs,
                cooperativity: cooperativity(&g, alpha, beta).ok(),
                alpha_mhz: alpha,
                beta_mhz: beta,
            })
        });

    let amplitude_rows = mag_rows
        .into_iter()
        .map(|row| row.into_iter().map(Some).collect())
        .collect();
    Ok(FieldSweepResult {
        amplitude: SweepMap::from_rows(
            detunings.clone(),
            freqs.clone(),
            MapKind::Amplitude,
            amplitude_rows,
        )?,
        branches,
        coupling,
    })
}

fn detuning_step(detunings: &SweepAxis) -> f64 {
    let s = detunings.samples();
    ((s[s.len() - 1] - s[0]) / (s.len() - 1) as f64).abs()
}
