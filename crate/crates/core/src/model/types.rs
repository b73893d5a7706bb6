//! Value types for the cavity, magnon, travelling-photon link and the
//! coupled system, plus the small result types shared by the mode algebra.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{ModelError, MHZ};

fn check_finite(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

fn check_nonnegative(name: &'static str, value: f64) -> Result<(), ModelError> {
    check_finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason: "must be >= 0",
        })
    }
}

/// Effective half-loaded damping `intrinsic + kappa_L/2 - kappa_R/2` (MHz).
///
/// Applies identically to the cavity and the magnon mode. The result may
/// have any sign; a negative value marks over-coupling to the right-going
/// channel, zero marks critical coupling.
pub fn effective_damping(
    intrinsic_mhz: f64,
    kappa_l_mhz: f64,
    kappa_r_mhz: f64,
) -> Result<f64, ModelError> {
    check_nonnegative("intrinsic", intrinsic_mhz)?;
    check_finite("kappa_L", kappa_l_mhz)?;
    check_finite("kappa_R", kappa_r_mhz)?;
    Ok(intrinsic_mhz + kappa_l_mhz / 2.0 - kappa_r_mhz / 2.0)
}

/// Bare cavity resonance: frequency, intrinsic damping and the extrinsic
/// rates into the left- and right-going travelling-wave channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    f_c_ghz: f64,
    beta0_mhz: f64,
    kappa_l_mhz: f64,
    kappa_r_mhz: f64,
}

impl CavityMode {
    pub fn new(
        f_c_ghz: f64,
        beta0_mhz: f64,
        kappa_l_mhz: f64,
        kappa_r_mhz: f64,
    ) -> Result<Self, ModelError> {
        check_finite("f_c", f_c_ghz)?;
        if f_c_ghz <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "f_c",
                value: f_c_ghz,
                reason: "must be > 0",
            });
        }
        check_nonnegative("beta0", beta0_mhz)?;
        check_nonnegative("kappa_cL", kappa_l_mhz)?;
        check_nonnegative("kappa_cR", kappa_r_mhz)?;
        Ok(Self {
            f_c_ghz,
            beta0_mhz,
            kappa_l_mhz,
            kappa_r_mhz,
        })
    }

    pub fn f_c_ghz(&self) -> f64 {
        self.f_c_ghz
    }

    pub fn beta0_mhz(&self) -> f64 {
        self.beta0_mhz
    }

    pub fn kappa_l_mhz(&self) -> f64 {
        self.kappa_l_mhz
    }

    pub fn kappa_r_mhz(&self) -> f64 {
        self.kappa_r_mhz
    }

    /// Effective half-loaded damping `β = β0 + κ_L/2 − κ_R/2` (MHz, signed).
    pub fn beta_mhz(&self) -> f64 {
        self.beta0_mhz + self.kappa_l_mhz / 2.0 - self.kappa_r_mhz / 2.0
    }

    /// Fully loaded damping `β0 + κ_L/2 + κ_R/2` (MHz).
    pub fn loaded_mhz(&self) -> f64 {
        self.beta0_mhz + self.kappa_l_mhz / 2.0 + self.kappa_r_mhz / 2.0
    }

    /// Half-loaded complex resonance `ω̃_c = f_c − iβ` (GHz).
    pub fn omega_tilde_ghz(&self) -> Complex64 {
        Complex64::new(self.f_c_ghz, -self.beta_mhz() * MHZ)
    }

    pub fn with_f_c(mut self, f_c_ghz: f64) -> Result<Self, ModelError> {
        check_finite("f_c", f_c_ghz)?;
        if f_c_ghz <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "f_c",
                value: f_c_ghz,
                reason: "must be > 0",
            });
        }
        self.f_c_ghz = f_c_ghz;
        Ok(self)
    }
}

/// Magnon resonance: gyromagnetic ratio, anisotropy and bias fields,
/// intrinsic damping and extrinsic travelling-wave rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnonMode {
    gamma_e_ghz_per_t: f64,
    mu0_ha_mt: f64,
    mu0_h_mt: f64,
    alpha0_mhz: f64,
    kappa_l_mhz: f64,
    kappa_r_mhz: f64,
}

impl MagnonMode {
    pub fn new(
        gamma_e_ghz_per_t: f64,
        mu0_ha_mt: f64,
        mu0_h_mt: f64,
        alpha0_mhz: f64,
        kappa_l_mhz: f64,
        kappa_r_mhz: f64,
    ) -> Result<Self, ModelError> {
        check_finite("gamma_e", gamma_e_ghz_per_t)?;
        if gamma_e_ghz_per_t <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "gamma_e",
                value: gamma_e_ghz_per_t,
                reason: "must be > 0",
            });
        }
        check_finite("mu0_HA", mu0_ha_mt)?;
        check_finite("mu0_H", mu0_h_mt)?;
        check_nonnegative("alpha0", alpha0_mhz)?;
        check_nonnegative("kappa_mL", kappa_l_mhz)?;
        check_nonnegative("kappa_mR", kappa_r_mhz)?;
        Ok(Self {
            gamma_e_ghz_per_t,
            mu0_ha_mt,
            mu0_h_mt,
            alpha0_mhz,
            kappa_l_mhz,
            kappa_r_mhz,
        })
    }

    pub fn gamma_e_ghz_per_t(&self) -> f64 {
        self.gamma_e_ghz_per_t
    }

    pub fn mu0_ha_mt(&self) -> f64 {
        self.mu0_ha_mt
    }

    pub fn mu0_h_mt(&self) -> f64 {
        self.mu0_h_mt
    }

    pub fn alpha0_mhz(&self) -> f64 {
        self.alpha0_mhz
    }

    pub fn kappa_l_mhz(&self) -> f64 {
        self.kappa_l_mhz
    }

    pub fn kappa_r_mhz(&self) -> f64 {
        self.kappa_r_mhz
    }

    /// Field-tuned magnon frequency `f_m = γ_e · μ0(H + H_A)` (GHz).
    ///
    /// Fails when the effective field `μ0(H + H_A)` is not positive.
    pub fn frequency_ghz(&self) -> Result<f64, ModelError> {
        let field_mt = self.mu0_h_mt + self.mu0_ha_mt;
        if field_mt <= 0.0 {
            return Err(ModelError::NonPositiveEffectiveField {
                mu0_h_mt: self.mu0_h_mt,
                mu0_ha_mt: self.mu0_ha_mt,
            });
        }
        // gamma_e is GHz/T, fields are mT.
        Ok(self.gamma_e_ghz_per_t * field_mt * 1e-3)
    }

    /// Effective half-loaded damping `α = α0 + κ_L/2 − κ_R/2` (MHz, signed).
    pub fn alpha_mhz(&self) -> f64 {
        self.alpha0_mhz + self.kappa_l_mhz / 2.0 - self.kappa_r_mhz / 2.0
    }

    /// Fully loaded damping `α0 + κ_L/2 + κ_R/2` (MHz).
    pub fn loaded_mhz(&self) -> f64 {
        self.alpha0_mhz + self.kappa_l_mhz / 2.0 + self.kappa_r_mhz / 2.0
    }

    /// Half-loaded complex resonance `ω̃_m = f_m − iα` (GHz).
    pub fn omega_tilde_ghz(&self) -> Result<Complex64, ModelError> {
        Ok(Complex64::new(
            self.frequency_ghz()?,
            -self.alpha_mhz() * MHZ,
        ))
    }

    /// Bias field (mT) that places the magnon at `f_ghz`; the inversion of
    /// [`Self::frequency_ghz`] is unique.
    pub fn bias_field_for_frequency_mt(&self, f_ghz: f64) -> f64 {
        f_ghz / self.gamma_e_ghz_per_t * 1e3 - self.mu0_ha_mt
    }

    /// Copy with the bias field replaced.
    pub fn with_bias_field(mut self, mu0_h_mt: f64) -> Result<Self, ModelError> {
        check_finite("mu0_H", mu0_h_mt)?;
        self.mu0_h_mt = mu0_h_mt;
        Ok(self)
    }

    /// Copy biased so the magnon sits at `f_ghz`.
    pub fn with_frequency(self, f_ghz: f64) -> Result<Self, ModelError> {
        let field = self.bias_field_for_frequency_mt(f_ghz);
        let out = self.with_bias_field(field)?;
        out.frequency_ghz()?;
        Ok(out)
    }
}

/// Travelling-photon channel between the two microstrips: propagation
/// distance, guided wavelength and the phase-shifter offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLink {
    length_m: f64,
    wavelength_mm: f64,
    delta_phi_rad: f64,
}

impl PhaseLink {
    pub fn new(length_m: f64, wavelength_mm: f64, delta_phi_rad: f64) -> Result<Self, ModelError> {
        check_finite("length_L", length_m)?;
        if length_m < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "length_L",
                value: length_m,
                reason: "must be >= 0",
            });
        }
        check_finite("wavelength", wavelength_mm)?;
        if wavelength_mm <= 0.0 {
            return Err(ModelError::NonPositiveWavelength { wavelength_mm });
        }
        check_finite("delta_phi", delta_phi_rad)?;
        Ok(Self {
            length_m,
            wavelength_mm,
            delta_phi_rad,
        })
    }

    pub fn length_m(&self) -> f64 {
        self.length_m
    }

    pub fn wavelength_mm(&self) -> f64 {
        self.wavelength_mm
    }

    pub fn delta_phi_rad(&self) -> f64 {
        self.delta_phi_rad
    }

    /// Geometric propagation phase `Φ_L = 2πL/λ` (rad).
    pub fn geometric_phase_rad(&self) -> f64 {
        2.0 * PI * (self.length_m * 1e3) / self.wavelength_mm
    }

    /// Total travelling phase `Φ = Φ_L + ΔΦ` (rad), unreduced. Callers
    /// reduce modulo the model's own symmetry, which depends on the
    /// phase-period divisor.
    pub fn total_phase_rad(&self) -> f64 {
        self.geometric_phase_rad() + self.delta_phi_rad
    }

    /// Copy with the phase-shifter offset replaced.
    pub fn with_delta_phi(mut self, delta_phi_rad: f64) -> Result<Self, ModelError> {
        check_finite("delta_phi", delta_phi_rad)?;
        self.delta_phi_rad = delta_phi_rad;
        Ok(self)
    }
}

/// Phenomenological anomaly parameters: the phase-period divisor `η` and
/// the magnon drive/readout attenuation `δ`. `(η, δ) = (1, 1)` reproduces
/// the conventional photon-mediated coupling model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyParams {
    eta: f64,
    delta: f64,
}

impl AnomalyParams {
    pub fn new(eta: f64, delta: f64) -> Result<Self, ModelError> {
        check_finite("eta", eta)?;
        if eta <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "must be > 0",
            });
        }
        check_finite("delta", delta)?;
        if !(0.0..=1.0).contains(&delta) {
            return Err(ModelError::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self { eta, delta })
    }

    /// The conventional photon-mediated coupling model, `η = 1`, `δ = 1`.
    pub fn conventional() -> Self {
        Self {
            eta: 1.0,
            delta: 1.0,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_conventional(&self) -> bool {
        self.eta == 1.0 && self.delta == 1.0
    }
}

/// The full coupled system: cavity, magnon, travelling-photon link and
/// anomaly parameters. Derived quantities (`K`, `G0²`, phase factors) are
/// computed on demand, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSystem {
    pub cavity: CavityMode,
    pub magnon: MagnonMode,
    pub link: PhaseLink,
    pub anomaly: AnomalyParams,
}

impl CoupledSystem {
    pub fn new(
        cavity: CavityMode,
        magnon: MagnonMode,
        link: PhaseLink,
        anomaly: AnomalyParams,
    ) -> Self {
        Self {
            cavity,
            magnon,
            link,
            anomaly,
        }
    }

    /// Geometric-mean coupling budget `K = √(κ_cR κ_mR κ_cL κ_mL)` (MHz²).
    pub fn coupling_k_mhz2(&self) -> f64 {
        (self.cavity.kappa_r_mhz()
            * self.magnon.kappa_r_mhz()
            * self.cavity.kappa_l_mhz()
            * self.magnon.kappa_l_mhz())
        .sqrt()
    }

    /// Single-pass travelling phase factor `e^{iΦ/η}`.
    pub fn link_phase_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.link.total_phase_rad() / self.anomaly.eta())
    }

    /// Round-trip travelling phase factor `e^{i2Φ/η}`.
    pub fn round_trip_phase_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * self.link.total_phase_rad() / self.anomaly.eta())
    }

    /// Residual coherence term `G0²` of the transmission numerator (MHz²);
    /// identically zero in the conventional model (`δ = 1`).
    pub fn g0_squared_mhz2(&self) -> Complex64 {
        let kcr = self.cavity.kappa_r_mhz();
        let kmr = self.magnon.kappa_r_mhz();
        let kcl = self.cavity.kappa_l_mhz();
        let kml = self.magnon.kappa_l_mhz();
        let delta = self.anomaly.delta();
        let rr = kcr * kmr;
        if rr == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ratio = (kcl * kml / rr).sqrt();
        -(rr * (1.0 - delta)) * (self.round_trip_phase_factor() * ratio - delta)
    }

    /// Copy with the phase-shifter offset replaced.
    pub fn with_delta_phi(mut self, delta_phi_rad: f64) -> Result<Self, ModelError> {
        self.link = self.link.with_delta_phi(delta_phi_rad)?;
        Ok(self)
    }

    /// Copy with the magnon biased to `f_m = f_c + Δ_m` for a field
    /// detuning in MHz.
    pub fn with_detuning_mhz(mut self, delta_m_mhz: f64) -> Result<Self, ModelError> {
        let target = self.cavity.f_c_ghz() + delta_m_mhz * MHZ;
        self.magnon = self.magnon.with_frequency(target)?;
        Ok(self)
    }

    /// Copy with the magnon biased onto resonance with the cavity.
    pub fn resonant(self) -> Result<Self, ModelError> {
        self.with_detuning_mhz(0.0)
    }

    /// Copy with the anomaly parameters replaced.
    pub fn with_anomaly(mut self, anomaly: AnomalyParams) -> Self {
        self.anomaly = anomaly;
        self
    }
}

/// The two hybridized complex mode frequencies `ω̃_± = ω_± − iδ_±`, labeled
/// so that `Re(ω̃₊) ≥ Re(ω̃₋)`, ties broken by `Im(ω̃₊) ≥ Im(ω̃₋)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexModePair {
    plus: Complex64,
    minus: Complex64,
    degenerate: bool,
}

impl ComplexModePair {
    /// Relative scale below which two roots count as an exact degeneracy.
    const DEGENERACY_EPS: f64 = 1e-12;

    /// Order two roots by the labeling rule; flags a degenerate pair when
    /// the roots coincide to relative precision.
    pub fn from_unordered(a: Complex64, b: Complex64) -> Self {
        let scale = a.norm().max(b.norm()).max(1.0);
        let degenerate = (a - b).norm() <= Self::DEGENERACY_EPS * scale;
        let (plus, minus) = if a.re > b.re || (a.re == b.re && a.im >= b.im) {
            (a, b)
        } else {
            (b, a)
        };
        Self {
            plus,
            minus,
            degenerate,
        }
    }

    /// Higher-frequency mode `ω̃₊` (GHz).
    pub fn plus(&self) -> Complex64 {
        self.plus
    }

    /// Lower-frequency mode `ω̃₋` (GHz).
    pub fn minus(&self) -> Complex64 {
        self.minus
    }

    /// True when both entries are an exact double root.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Mode frequencies `(ω₊, ω₋)` (GHz).
    pub fn frequencies_ghz(&self) -> (f64, f64) {
        (self.plus.re, self.minus.re)
    }

    /// Damping rates `(δ₊, δ₋)` (MHz), positive for decaying modes.
    pub fn dampings_mhz(&self) -> (f64, f64) {
        (-self.plus.im / MHZ, -self.minus.im / MHZ)
    }

    /// Complex mode difference `ω̃₊ − ω̃₋` (GHz).
    pub fn difference_ghz(&self) -> Complex64 {
        self.plus - self.minus
    }

    /// Real-part splitting `|ω₊ − ω₋|` (MHz).
    pub fn splitting_mhz(&self) -> f64 {
        (self.plus.re - self.minus.re).abs() / MHZ
    }
}

/// Complex coupling strength `G = J + iΓ` (MHz), branch-fixed so `J ≥ 0`
/// with `Γ ≥ 0` when `J = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult {
    g: Complex64,
}

impl CouplingResult {
    /// Apply the branch rule to a raw complex square root (MHz).
    pub fn from_raw(g: Complex64) -> Self {
        let g = if g.re < 0.0 || (g.re == 0.0 && g.im < 0.0) {
            -g
        } else {
            g
        };
        Self { g }
    }

    pub fn g_mhz(&self) -> Complex64 {
        self.g
    }

    /// Coherent component `J = Re G` (MHz).
    pub fn j_mhz(&self) -> f64 {
        self.g.re
    }

    /// Dissipative component `Γ = Im G` (MHz).
    pub fn gamma_mhz(&self) -> f64 {
        self.g.im
    }

    /// Magnitude `|G|` (MHz).
    pub fn abs_mhz(&self) -> f64 {
        self.g.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_near() -> CavityMode {
        CavityMode::new(6.181, 17.0, 332.4, 370.0).unwrap()
    }

    fn table1_away() -> CavityMode {
        CavityMode::new(6.203, 17.0, 37.0, 37.0).unwrap()
    }

    #[test]
    fn effective_damping_matches_tabulated_values() {
        // Near and away columns of the calibration table, and the magnon
        // rate set; the sums are exact to well below the 1e-12 floor.
        assert!((effective_damping(17.0, 332.4, 370.0).unwrap() - (-1.8)).abs() < 1e-12);
        assert!((effective_damping(17.0, 37.0, 37.0).unwrap() - 17.0).abs() < 1e-12);
        assert!((effective_damping(0.8, 8.0, 7.0).unwrap() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn effective_damping_symmetric_channels_cancel() {
        for k in [0.0, 1.0, 37.0, 370.0, 1e6] {
            assert_eq!(effective_damping(0.0, k, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn effective_damping_rejects_bad_input() {
        assert!(effective_damping(-1.0, 0.0, 0.0).is_err());
        assert!(effective_damping(1.0, f64::NAN, 0.0).is_err());
        assert!(effective_damping(1.0, 0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn cavity_mode_derived_rates() {
        let c = table1_near();
        assert!((c.beta_mhz() + 1.8).abs() < 1e-12);
        assert!((c.loaded_mhz() - 368.2).abs() < 1e-12);
        let away = table1_away();
        assert!((away.beta_mhz() - 17.0).abs() < 1e-12);
        assert!((away.loaded_mhz() - 54.0).abs() < 1e-12);
    }

    #[test]
    fn magnon_frequency_from_calibrated_constants() {
        // 22.4 GHz/T * (283.0 - 7.1) mT = 6.18016 GHz, frozen from the
        // analytic product; cross-checked by a brute-force field scan below.
        let m = MagnonMode::new(22.4, -7.1, 283.0, 0.8, 8.0, 7.0).unwrap();
        assert!((m.frequency_ghz().unwrap() - 6.18016).abs() < 1e-12);

        // Brute-force scan of the field axis for f_m = 6.181 GHz.
        let mut best = (f64::MAX, 0.0);
        let mut h = 270.0_f64;
        while h < 290.0 {
            let f: f64 = 22.4 * (h - 7.1) * 1e-3;
            let miss = (f - 6.181).abs();
            if miss < best.0 {
                best = (miss, h);
            }
            h += 1e-4;
        }
        let m2 = m.with_bias_field(best.1).unwrap();
        assert!((m2.frequency_ghz().unwrap() - 6.181).abs() < 3e-6);
    }

    #[test]
    fn magnon_frequency_rejects_zero_effective_field() {
        let m = MagnonMode::new(22.4, 0.0, 0.0, 0.8, 8.0, 7.0).unwrap();
        match m.frequency_ghz() {
            Err(ModelError::NonPositiveEffectiveField { mu0_h_mt, .. }) => {
                assert_eq!(mu0_h_mt, 0.0)
            }
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn magnon_frequency_unit_slope_construction() {
        // mu0_H = 7.1 mT + 1/22.4 T puts the effective field at exactly
        // 1/gamma_e, hence f_m = 1 GHz.
        let h = 7.1 + 1e3 / 22.4;
        let m = MagnonMode::new(22.4, -7.1, h, 0.8, 8.0, 7.0).unwrap();
        assert!((m.frequency_ghz().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bias_field_inversion_is_exact() {
        let m = MagnonMode::new(22.4, -7.1, 283.0, 0.8, 8.0, 7.0).unwrap();
        let f = 6.181;
        let m2 = m.with_frequency(f).unwrap();
        assert!((m2.frequency_ghz().unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn total_phase_examples() {
        // L = 2.1 m, lambda = 32.7 mm: 2*2100/32.7 = 128.44 periods.
        let link = PhaseLink::new(2.1, 32.7, 0.0).unwrap();
        assert!((link.total_phase_rad() / PI - 2.0 * 2100.0 / 32.7).abs() < 1e-9);
        assert!(link.total_phase_rad() / PI > 128.0);

        let zero_len = PhaseLink::new(0.0, 32.7, 0.7).unwrap();
        assert!((zero_len.total_phase_rad() - 0.7).abs() < 1e-15);

        let one_wavelength = PhaseLink::new(0.0327, 32.7, 0.0).unwrap();
        assert!((one_wavelength.total_phase_rad() - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn total_phase_rejects_bad_wavelength() {
        assert!(matches!(
            PhaseLink::new(1.0, 0.0, 0.0),
            Err(ModelError::NonPositiveWavelength { .. })
        ));
        assert!(PhaseLink::new(1.0, -3.0, 0.0).is_err());
    }

    #[test]
    fn anomaly_params_bounds() {
        assert!(AnomalyParams::new(2.0, 0.996).is_ok());
        assert!(AnomalyParams::new(0.0, 0.5).is_err());
        assert!(AnomalyParams::new(1.0, 1.1).is_err());
        assert!(AnomalyParams::new(1.0, -0.1).is_err());
        assert!(AnomalyParams::conventional().is_conventional());
    }

    #[test]
    fn coupling_k_from_table_rates() {
        let sys = CoupledSystem::new(
            table1_near(),
            MagnonMode::new(22.4, -7.1, 283.0, 0.8, 8.0, 7.0).unwrap(),
            PhaseLink::new(2.0928, 32.7, PI).unwrap(),
            AnomalyParams::new(2.0, 0.996).unwrap(),
        );
        let k = sys.coupling_k_mhz2();
        assert!((k - (370.0f64 * 7.0 * 332.4 * 8.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn g0_squared_vanishes_in_conventional_model() {
        let sys = CoupledSystem::new(
            table1_near(),
            MagnonMode::new(22.4, -7.1, 283.0, 0.8, 8.0, 7.0).unwrap(),
            PhaseLink::new(2.0928, 32.7, 1.234).unwrap(),
            AnomalyParams::conventional(),
        );
        let g0 = sys.g0_squared_mhz2();
        assert_eq!(g0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mode_pair_ordering_and_degeneracy() {
        let a = Complex64::new(6.18, -0.01);
        let b = Complex64::new(6.19, -0.02);
        let pair = ComplexModePair::from_unordered(a, b);
        assert_eq!(pair.plus(), b);
        assert_eq!(pair.minus(), a);
        assert!(!pair.is_degenerate());

        // Tie on the real part breaks by imaginary part.
        let c = Complex64::new(6.18, -0.02);
        let tie = ComplexModePair::from_unordered(c, a);
        assert_eq!(tie.plus(), a);

        let degen = ComplexModePair::from_unordered(a, a);
        assert!(degen.is_degenerate());
    }

    #[test]
    fn coupling_result_branch_rule() {
        let g = CouplingResult::from_raw(Complex64::new(-3.0, 1.0));
        assert!(g.j_mhz() > 0.0);
        let g = CouplingResult::from_raw(Complex64::new(0.0, -2.0));
        assert_eq!(g.gamma_mhz(), 2.0);
        let g = CouplingResult::from_raw(Complex64::new(4.0, -1.0));
        assert_eq!(g.g_mhz(), Complex64::new(4.0, -1.0));
    }
}
