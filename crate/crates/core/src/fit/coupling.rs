//! Coupling strength versus travelling phase, extracted spectrum by
//! spectrum from a phase-labeled dataset.

use num_complex::Complex64;

use crate::model::{coupling_from_modes, CouplingResult, Spectrum};

use super::two_mode::fit_two_resonances_forced;

/// One extracted point: the phase label and the coupling, or the fit
/// failure that produced a gap.
#[derive(Debug, Clone)]
pub struct PhaseCouplingPoint {
    pub phi_rad: f64,
    pub coupling: Option<CouplingResult>,
    pub error: Option<String>,
}

/// Extract `G(Φ)` by fitting each spectrum's two resonances and applying
/// the mode-pair coupling formula with the given half-loaded bare modes.
/// Per-spectrum fit failures become gaps; the sweep never aborts. Output
/// is ordered by phase.
pub fn extract_coupling_vs_phase(
    dataset: &[(f64, Spectrum)],
    omega_c_tilde_ghz: Complex64,
    omega_m_tilde_ghz: Complex64,
) -> Vec<PhaseCouplingPoint> {
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by(|a, b| dataset[*a].0.partial_cmp(&dataset[*b].0).unwrap());

    order
        .into_iter()
        .map(|idx| {
            let (phi, spectrum) = &dataset[idx];
            match fit_two_resonances_forced(spectrum) {
                Ok((pair, _report)) => PhaseCouplingPoint {
                    phi_rad: *phi,
                    coupling: Some(coupling_from_modes(
                        &pair,
                        omega_c_tilde_ghz,
                        omega_m_tilde_ghz,
                    )),
                    error: None,
                },
                Err(err) => PhaseCouplingPoint {
                    phi_rad: *phi,
                    coupling: None,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect()
}
