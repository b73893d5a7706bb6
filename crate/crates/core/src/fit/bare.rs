//! Bare-cavity fit: extract `(f_c, κ_cL, κ_cR)` from a transmission
//! spectrum with the intrinsic damping fixed by prior calibration.

use num_complex::Complex64;

use crate::model::{CavityMode, Spectrum, MHZ};

use super::lm::{levenberg_marquardt, LmOptions, LmProblem};
use super::lorentzian::lorentzian_profile_fit;
use super::report::FitReport;
use super::FitError;

/// Outcome of [`fit_bare_cavity`]. Complex spectra pin both extrinsic
/// rates; amplitude-only spectra pin only `|β|` and the loaded-width
/// combination `κ_cL + κ_cR`, which is reported as such.
#[derive(Debug, Clone, PartialEq)]
pub enum BareCavityFit {
    Complex {
        f_c_ghz: f64,
        kappa_l_mhz: f64,
        kappa_r_mhz: f64,
    },
    AmplitudeOnly {
        f_c_ghz: f64,
        abs_beta_mhz: f64,
        kappa_sum_mhz: f64,
    },
}

impl BareCavityFit {
    /// Rebuild the cavity when the fit resolved both rates.
    pub fn cavity(&self, beta0_mhz: f64) -> Option<CavityMode> {
        match self {
            Self::Complex {
                f_c_ghz,
                kappa_l_mhz,
                kappa_r_mhz,
            } => CavityMode::new(*f_c_ghz, beta0_mhz, *kappa_l_mhz, *kappa_r_mhz).ok(),
            Self::AmplitudeOnly { .. } => None,
        }
    }

    pub fn f_c_ghz(&self) -> f64 {
        match self {
            Self::Complex { f_c_ghz, .. } | Self::AmplitudeOnly { f_c_ghz, .. } => *f_c_ghz,
        }
    }
}

struct ComplexProblem {
    f: Vec<f64>,
    data: Vec<Complex64>,
    beta0_mhz: f64,
}

impl ComplexProblem {
    fn model(&self, p: &[f64], f: f64) -> (Complex64, Complex64, Complex64) {
        let beta_ghz = (self.beta0_mhz + p[1] / 2.0 - p[2] / 2.0) * MHZ;
        let loaded_ghz = (self.beta0_mhz + p[1] / 2.0 + p[2] / 2.0) * MHZ;
        let d = f - p[0];
        let num = Complex64::new(d, -beta_ghz);
        let den = Complex64::new(d, -loaded_ghz);
        (num, den, num / den)
    }
}

impl LmProblem for ComplexProblem {
    fn residual_count(&self) -> usize {
        2 * self.f.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (i, (f, data)) in self.f.iter().zip(&self.data).enumerate() {
            let (_, _, s) = self.model(p, *f);
            out[2 * i] = s.re - data.re;
            out[2 * i + 1] = s.im - data.im;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut [f64]) -> bool {
        // S = N/D with N = Δ − iβ, D = Δ − iB (GHz):
        //   ∂S/∂f_c = (N − D)/D²,
        //   ∂S/∂κL  = (i/2)(N − D)/D² · MHZ,
        //   ∂S/∂κR  = (i/2)(N + D)/D² · MHZ.
        let i = Complex64::new(0.0, 1.0);
        for (k, f) in self.f.iter().enumerate() {
            let (num, den, _) = self.model(p, *f);
            let den2 = den * den;
            let ds_dfc = (num - den) / den2;
            let ds_dkl = i * (0.5 * MHZ) * (num - den) / den2;
            let ds_dkr = i * (0.5 * MHZ) * (num + den) / den2;
            let cols = [ds_dfc, ds_dkl, ds_dkr];
            for (j, c) in cols.iter().enumerate() {
                out[(2 * k) * 3 + j] = c.re;
                out[(2 * k + 1) * 3 + j] = c.im;
            }
        }
        true
    }
}

struct AmplitudeProblem {
    f: Vec<f64>,
    mag2: Vec<f64>,
}

impl LmProblem for AmplitudeProblem {
    fn residual_count(&self) -> usize {
        self.f.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let beta2 = (p[1] * MHZ) * (p[1] * MHZ);
        let loaded2 = (p[2] * MHZ) * (p[2] * MHZ);
        for (i, (f, m2)) in self.f.iter().zip(&self.mag2).enumerate() {
            let d2 = (f - p[0]) * (f - p[0]);
            out[i] = (d2 + beta2) / (d2 + loaded2) - m2;
        }
    }
}

/// Fit the bare-cavity transmission on complex residuals, with the
/// intrinsic damping `β0` fixed from independent calibration.
///
/// Complex spectra return both extrinsic rates with standard errors.
/// Amplitude-only spectra cannot separate `κ_cL` from `κ_cR` beyond
/// `|β|` and their sum; the identifiable combinations are reported with
/// a reduced-identifiability warning.
pub fn fit_bare_cavity(
    spectrum: &Spectrum,
    beta0_mhz: f64,
) -> Result<(BareCavityFit, FitReport), FitError> {
    if !(beta0_mhz.is_finite() && beta0_mhz >= 0.0) {
        return Err(FitError::Model(
            crate::model::ModelError::InvalidParameter {
                name: "beta0",
                value: beta0_mhz,
                reason: "must be finite and >= 0",
            },
        ));
    }
    if spectrum.len() < 5 {
        return Err(FitError::InsufficientData {
            need: 5,
            got: spectrum.len(),
        });
    }

    // Width and depth seeds from the inverse-square profile.
    let (lor, _) = lorentzian_profile_fit(spectrum)?;
    let f_c0 = lor.center_ghz;
    let abs_beta0 = lor.hwhm_mhz.max(1e-6);
    // Baseline-normalized profile peak A = (B² − β²)/β², so B = |β|√(A+1).
    let loaded0 =
        abs_beta0 * (lor.amplitude.max(0.0) / lor.baseline.max(f64::MIN_POSITIVE) + 1.0).sqrt();

    if spectrum.meta().amplitude_only {
        let problem = AmplitudeProblem {
            f: spectrum.grid_ghz().to_vec(),
            mag2: spectrum.values().iter().map(|v| v.norm_sqr()).collect(),
        };
        let span_mhz = (spectrum.grid_ghz()[spectrum.len() - 1] - spectrum.grid_ghz()[0]) / MHZ;
        let result = levenberg_marquardt(
            &problem,
            &[f_c0, abs_beta0, loaded0],
            &[spectrum.grid_ghz()[0], 0.0, 0.0],
            &[
                spectrum.grid_ghz()[spectrum.len() - 1],
                span_mhz,
                100.0 * span_mhz,
            ],
            &LmOptions::default(),
        );
        let kappa_sum = 2.0 * (result.params[2] - beta0_mhz);
        let fit = BareCavityFit::AmplitudeOnly {
            f_c_ghz: result.params[0],
            abs_beta_mhz: result.params[1],
            kappa_sum_mhz: kappa_sum,
        };
        let report = FitReport::from_lm(&result, &["f_c_ghz", "abs_beta_mhz", "loaded_mhz"])
            .with_warning(
                "amplitude-only data: kappa_cL and kappa_cR are identifiable only through \
                 |beta| and their sum"
                    .to_string(),
            );
        return Ok((fit, report));
    }

    let problem = ComplexProblem {
        f: spectrum.grid_ghz().to_vec(),
        data: spectrum.values().to_vec(),
        beta0_mhz,
    };

    // The inverse profile pins |β| but not its sign; try both seeds and
    // keep the cheaper start (ties prefer the under-coupled branch).
    let seed_for = |beta: f64| {
        let kl = (beta + loaded0 - 2.0 * beta0_mhz).max(0.0);
        let kr = (loaded0 - beta).max(0.0);
        [f_c0, kl, kr]
    };
    let mut best_seed = seed_for(abs_beta0);
    {
        let mut r = vec![0.0; problem.residual_count()];
        problem.residuals(&best_seed, &mut r);
        let cost_plus: f64 = r.iter().map(|v| v * v).sum();
        let minus = seed_for(-abs_beta0);
        problem.residuals(&minus, &mut r);
        let cost_minus: f64 = r.iter().map(|v| v * v).sum();
        if cost_minus < cost_plus {
            best_seed = minus;
        }
    }

    let result = levenberg_marquardt(
        &problem,
        &best_seed,
        &[spectrum.grid_ghz()[0], 0.0, 0.0],
        &[
            spectrum.grid_ghz()[spectrum.len() - 1],
            f64::INFINITY,
            f64::INFINITY,
        ],
        &LmOptions::default(),
    );

    let fit = BareCavityFit::Complex {
        f_c_ghz: result.params[0],
        kappa_l_mhz: result.params[1],
        kappa_r_mhz: result.params[2],
    };
    let report = FitReport::from_lm(&result, &["f_c_ghz", "kappa_cL_mhz", "kappa_cR_mhz"]);
    Ok((fit, report))
}
