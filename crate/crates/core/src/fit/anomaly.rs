//! Anomaly-parameter fit: recover the phase-period divisor and the
//! drive/readout attenuation from a labeled dataset of coupled spectra
//! with every other system parameter fixed by prior calibration.

use crate::model::{AnomalyParams, CoupledResponse, CoupledSystem, Spectrum};

use super::lm::{levenberg_marquardt, LmOptions, LmProblem};
use super::report::FitReport;
use super::FitError;

/// What the dataset labels mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnomalyAxis {
    /// Labels are phase-shifter offsets ΔΦ (rad).
    Phase,
    /// Labels are field detunings Δ_m (MHz); the template's phase offset
    /// stays fixed.
    Detuning,
}

/// A labeled dataset for the anomaly fit.
#[derive(Debug, Clone)]
pub struct AnomalyDataset {
    pub axis: AnomalyAxis,
    pub points: Vec<(f64, Spectrum)>,
}

struct AnomalyProblem<'a> {
    dataset: &'a AnomalyDataset,
    systems: Vec<CoupledSystem>,
    residual_count: usize,
}

impl AnomalyProblem<'_> {
    fn fill(&self, eta: f64, delta: f64, out: &mut [f64]) {
        let mut k = 0;
        for (sys, (_, spectrum)) in self.systems.iter().zip(&self.dataset.points) {
            let response = CoupledResponse::from_parts(
                &sys.cavity,
                &sys.magnon,
                sys.link.total_phase_rad(),
                eta,
                delta,
            );
            match response {
                Ok(r) => {
                    for (f, data) in spectrum.grid_ghz().iter().zip(spectrum.values()) {
                        match r.s21(*f) {
                            Ok(model) => {
                                out[k] = model.re - data.re;
                                out[k + 1] = model.im - data.im;
                            }
                            Err(_) => {
                                out[k] = 1e6;
                                out[k + 1] = 1e6;
                            }
                        }
                        k += 2;
                    }
                }
                Err(_) => {
                    for slot in out[k..k + 2 * spectrum.len()].iter_mut() {
                        *slot = 1e6;
                    }
                    k += 2 * spectrum.len();
                }
            }
        }
    }
}

impl LmProblem for AnomalyProblem<'_> {
    fn residual_count(&self) -> usize {
        self.residual_count
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        self.fill(p[0], p[1], out);
    }
}

/// Fit `(η, δ)` by minimizing the summed complex misfit of the coupled
/// transmission over the dataset. `η` is searched over the coarse grid
/// {1, 2} and then refined continuously; `δ` stays inside `[0, 1]`.
///
/// Phase datasets must span at least half a phase period (π rad) or the
/// objective is flat in `η` and an identifiability error is returned.
pub fn fit_anomaly_params(
    dataset: &AnomalyDataset,
    template: &CoupledSystem,
) -> Result<(AnomalyParams, FitReport), FitError> {
    if dataset.points.is_empty() {
        return Err(FitError::InsufficientData { need: 1, got: 0 });
    }
    if dataset.axis == AnomalyAxis::Phase {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (phi, _) in &dataset.points {
            lo = lo.min(*phi);
            hi = hi.max(*phi);
        }
        let span = hi - lo;
        if span < std::f64::consts::PI {
            return Err(FitError::Identifiability(format!(
                "phase coverage {span:.3} rad is below half a period; \
                 provide at least pi radians of phase span"
            )));
        }
    }

    // Materialize one system per labeled point.
    let mut systems = Vec::with_capacity(dataset.points.len());
    for (label, _) in &dataset.points {
        let sys = match dataset.axis {
            AnomalyAxis::Phase => template.with_delta_phi(*label)?,
            AnomalyAxis::Detuning => template.with_detuning_mhz(*label)?,
        };
        systems.push(sys);
    }
    let residual_count = 2 * dataset.points.iter().map(|(_, s)| s.len()).sum::<usize>();
    let problem = AnomalyProblem {
        dataset,
        systems,
        residual_count,
    };

    // Coarse eta grid, delta refined at each candidate.
    let opts = LmOptions::default();
    let lower = [0.25, 0.0];
    let upper = [4.0, 1.0];
    let mut best: Option<super::lm::LmResult> = None;
    for eta0 in [1.0, 2.0] {
        let result = levenberg_marquardt(&problem, &[eta0, 0.99], &lower, &upper, &opts);
        if best.as_ref().is_none_or(|b| result.cost < b.cost) {
            best = Some(result);
        }
    }
    let best = best.unwrap();

    let params = AnomalyParams::new(best.params[0], best.params[1].clamp(0.0, 1.0))?;
    let report = FitReport::from_lm(&best, &["eta", "delta"]);
    Ok((params, report))
}
