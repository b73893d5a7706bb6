//! Forward transmission formulas for the bare cavity and the coupled
//! system.
//!
//! Phase convention: returned S21 values follow the measured
//! (network-analyzer) convention, the complex conjugate at real frequency
//! of the analytic input-output expressions. Under this convention an
//! under-coupled resonance (`β > 0`) has negative on-resonance group delay
//! and the critical-coupling sign rules come out as observed. Magnitudes
//! are unaffected.

use num_complex::Complex64;

use super::types::{CavityMode, ComplexModePair, CoupledSystem, MagnonMode};
use super::{ModelError, MHZ};

/// Two-port transmission of the bare side-coupled cavity.
///
/// `|S21| = |Δ − iβ| / |Δ − iB|` with `Δ = f − f_c`, the half-loaded
/// effective damping `β` and the fully loaded `B = β0 + κ_L/2 + κ_R/2`;
/// `|S21| ≤ 1` for all frequencies. With all rates zero the transmission
/// is identically one (the on-resonance 0/0 is a removable singularity).
pub fn bare_cavity_s21(f_ghz: f64, cavity: &CavityMode) -> Complex64 {
    let loaded = cavity.loaded_mhz();
    if loaded == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let delta = f_ghz - cavity.f_c_ghz();
    let num = Complex64::new(delta, -cavity.beta_mhz() * MHZ);
    let den = Complex64::new(delta, -loaded * MHZ);
    num / den
}

/// Precomputed coupled-system response. Holds the numerator and
/// denominator quadratics of the transmission in factored form so a map
/// evaluation costs a handful of complex operations per cell.
///
/// Numerator: `(ω − z_m)(ω − ω̃_c) − G0²` where `z_m = ω̃_m − i(1−δ²)κ_mR`.
/// Denominator: `(ω − p_m)(ω − p_c) + K e^{i2Φ/η}` where
/// `p_c = ω̃_c − iκ_cR`, `p_m = ω̃_m − iκ_mR`. All entries in GHz.
#[derive(Debug, Clone, Copy)]
pub struct CoupledResponse {
    /// Half-loaded cavity resonance `ω̃_c` (numerator zero of the bare part).
    omega_c_tilde: Complex64,
    /// Magnon-side numerator zero `z_m`.
    z_m: Complex64,
    /// Residual coherence term `G0²` (GHz²).
    g0_sq: Complex64,
    /// Fully loaded cavity pole base `p_c`.
    p_c: Complex64,
    /// Fully loaded magnon pole base `p_m`.
    p_m: Complex64,
    /// `K e^{i2Φ/η}` (GHz²).
    k_phase: Complex64,
}

impl CoupledResponse {
    /// Build from raw parts. `eta` must be positive; `delta` is accepted
    /// as any finite value so optimizers can probe slightly outside the
    /// physical interval.
    pub fn from_parts(
        cavity: &CavityMode,
        magnon: &MagnonMode,
        phi_total_rad: f64,
        eta: f64,
        delta: f64,
    ) -> Result<Self, ModelError> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "must be > 0",
            });
        }
        if !delta.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "must be finite",
            });
        }
        if !phi_total_rad.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "phi",
                value: phi_total_rad,
                reason: "must be finite",
            });
        }

        let omega_c_tilde = cavity.omega_tilde_ghz();
        let omega_m_tilde = magnon.omega_tilde_ghz()?;
        let kcr = cavity.kappa_r_mhz();
        let kcl = cavity.kappa_l_mhz();
        let kmr = magnon.kappa_r_mhz();
        let kml = magnon.kappa_l_mhz();

        let round_trip = Complex64::from_polar(1.0, 2.0 * phi_total_rad / eta);
        let k_mhz2 = (kcr * kmr * kcl * kml).sqrt();

        let rr = kcr * kmr;
        let g0_sq_mhz2 = if rr == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            -(rr * (1.0 - delta)) * (round_trip * (kcl * kml / rr).sqrt() - delta)
        };

        Ok(Self {
            omega_c_tilde,
            z_m: omega_m_tilde - Complex64::new(0.0, (1.0 - delta * delta) * kmr * MHZ),
            g0_sq: g0_sq_mhz2 * (MHZ * MHZ),
            p_c: omega_c_tilde - Complex64::new(0.0, kcr * MHZ),
            p_m: omega_m_tilde - Complex64::new(0.0, kmr * MHZ),
            k_phase: round_trip * k_mhz2 * (MHZ * MHZ),
        })
    }

    /// Build from a validated coupled system.
    pub fn from_system(sys: &CoupledSystem) -> Result<Self, ModelError> {
        Self::from_parts(
            &sys.cavity,
            &sys.magnon,
            sys.link.total_phase_rad(),
            sys.anomaly.eta(),
            sys.anomaly.delta(),
        )
    }

    /// Numerator value at real frequency `f` (analytic convention).
    fn numerator(&self, f: f64) -> Complex64 {
        (f - self.z_m) * (f - self.omega_c_tilde) - self.g0_sq
    }

    /// Denominator value at real frequency `f` (analytic convention).
    fn denominator(&self, f: f64) -> Complex64 {
        (f - self.p_m) * (f - self.p_c) + self.k_phase
    }

    /// S21 at `f` (GHz) in the measured phase convention.
    pub fn s21(&self, f_ghz: f64) -> Result<Complex64, ModelError> {
        let den = self.denominator(f_ghz);
        if den.norm() == 0.0 {
            return Err(ModelError::Singularity { f_ghz });
        }
        Ok((self.numerator(f_ghz) / den).conj())
    }

    /// Monic denominator quadratic coefficients `(c1, c0)` of
    /// `ω² + c1 ω + c0` (GHz).
    pub(crate) fn denominator_coefficients(&self) -> (Complex64, Complex64) {
        (-(self.p_m + self.p_c), self.p_m * self.p_c + self.k_phase)
    }

    /// Monic numerator quadratic coefficients `(c1, c0)` (GHz).
    pub(crate) fn numerator_coefficients(&self) -> (Complex64, Complex64) {
        (
            -(self.z_m + self.omega_c_tilde),
            self.z_m * self.omega_c_tilde - self.g0_sq,
        )
    }

    /// The two poles of the transmission (roots of the denominator).
    pub fn poles(&self) -> ComplexModePair {
        let (c1, c0) = self.denominator_coefficients();
        let (a, b) = super::modes::solve_monic_quadratic(c1, c0);
        ComplexModePair::from_unordered(a, b)
    }

    /// The two transmission zeros (roots of the numerator); these are the
    /// resonances observed as dips in `|S21|`.
    pub fn zeros(&self) -> ComplexModePair {
        let (c1, c0) = self.numerator_coefficients();
        let (a, b) = super::modes::solve_monic_quadratic(c1, c0);
        ComplexModePair::from_unordered(a, b)
    }
}

/// Transmission of the coupled system at `f` (GHz), measured convention.
///
/// Reduces exactly to the conventional photon-mediated model at
/// `η = 1, δ = 1`, and to [`bare_cavity_s21`] when the magnon extrinsic
/// rates vanish in the conventional model. The denominator has no real
/// roots whenever any dissipation is positive; the fully lossless corner
/// driven at a pole reports a singularity error.
pub fn coupled_s21(f_ghz: f64, sys: &CoupledSystem) -> Result<Complex64, ModelError> {
    CoupledResponse::from_system(sys)?.s21(f_ghz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::types::{AnomalyParams, PhaseLink};
    use std::f64::consts::PI;

    fn near_cc_cavity() -> CavityMode {
        CavityMode::new(6.181, 17.0, 332.4, 370.0).unwrap()
    }

    fn away_cavity() -> CavityMode {
        CavityMode::new(6.203, 17.0, 37.0, 37.0).unwrap()
    }

    fn magnon_at(f_ghz: f64) -> MagnonMode {
        MagnonMode::new(22.4, -7.1, 283.0, 0.8, 8.0, 7.0)
            .unwrap()
            .with_frequency(f_ghz)
            .unwrap()
    }

    /// Canonical link: 64 guided wavelengths of cable, so the phase dial
    /// offset is the whole travelling phase modulo 2π.
    fn canonical_link(delta_phi: f64) -> PhaseLink {
        PhaseLink::new(64.0 * 32.7e-3, 32.7, delta_phi).unwrap()
    }

    fn near_cc_system(delta_phi: f64, eta: f64, delta: f64) -> CoupledSystem {
        CoupledSystem::new(
            near_cc_cavity(),
            magnon_at(6.181),
            canonical_link(delta_phi),
            AnomalyParams::new(eta, delta).unwrap(),
        )
    }

    #[test]
    fn bare_on_resonance_away_value() {
        // Hand algebra: S21(f_c) = beta / (beta0 + kappa_c) = 17/54.
        let s = bare_cavity_s21(6.203, &away_cavity());
        assert!((s.re - 17.0 / 54.0).abs() < 1e-12);
        assert!(s.im.abs() < 1e-15);
    }

    #[test]
    fn bare_on_resonance_critical_coupling_vanishes() {
        // beta = 0 exactly: kappa_R = 2*beta0 + kappa_L.
        let c = CavityMode::new(6.2, 17.0, 37.0, 71.0).unwrap();
        assert_eq!(c.beta_mhz(), 0.0);
        let s = bare_cavity_s21(6.2, &c);
        assert_eq!(s.norm(), 0.0);
    }

    #[test]
    fn bare_far_off_resonance_is_transparent() {
        let c = away_cavity();
        for df in [5.0, 50.0, 5000.0] {
            let s = bare_cavity_s21(6.203 + df, &c);
            assert!((s.norm() - 1.0).abs() < 1e-3 / df);
            let s = bare_cavity_s21(6.203 - df, &c);
            assert!((s.norm() - 1.0).abs() < 1e-3 / df);
        }
    }

    #[test]
    fn bare_all_zero_rates_is_identity() {
        let c = CavityMode::new(6.2, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(bare_cavity_s21(6.2, &c), Complex64::new(1.0, 0.0));
        assert_eq!(bare_cavity_s21(7.0, &c), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn bare_passivity_sample() {
        let c = near_cc_cavity();
        let mut f = 5.0;
        while f < 7.5 {
            assert!(bare_cavity_s21(f, &c).norm() <= 1.0 + 1e-15);
            f += 0.001;
        }
    }

    #[test]
    fn conventional_delta_one_kills_coherence_terms() {
        let sys = near_cc_system(1.234, 1.0, 1.0);
        let r = CoupledResponse::from_system(&sys).unwrap();
        assert_eq!(r.g0_sq, Complex64::new(0.0, 0.0));
        // (1 - delta^2) term vanishes: z_m is exactly the half-loaded magnon.
        assert_eq!(r.z_m, sys.magnon.omega_tilde_ghz().unwrap());
    }

    #[test]
    fn magnon_decoupled_reduces_to_bare_cavity() {
        let magnon = MagnonMode::new(22.4, -7.1, 283.0, 0.8, 0.0, 0.0)
            .unwrap()
            .with_frequency(6.181)
            .unwrap();
        let sys = CoupledSystem::new(
            near_cc_cavity(),
            magnon,
            canonical_link(0.77),
            AnomalyParams::conventional(),
        );
        let mut f = 6.05;
        while f < 6.31 {
            let coupled = coupled_s21(f, &sys).unwrap();
            let bare = bare_cavity_s21(f, &near_cc_cavity());
            assert!((coupled - bare).norm() < 1e-12);
            f += 0.0005;
        }
    }

    #[test]
    fn anomalous_model_splits_where_conventional_does_not() {
        // At maximum-splitting phase the anomalous model shows two dips a
        // few MHz apart; the conventional model keeps a single dip.
        let anomalous = near_cc_system(PI, 2.0, 0.996);
        let conventional = near_cc_system(PI, 1.0, 1.0);
        let ra = CoupledResponse::from_system(&anomalous).unwrap();
        let rc = CoupledResponse::from_system(&conventional).unwrap();

        let n = 4001;
        let mut mags_a = Vec::with_capacity(n);
        let mut mags_c = Vec::with_capacity(n);
        let mut grid = Vec::with_capacity(n);
        for i in 0..n {
            let f = 6.181 - 0.015 + 0.030 * i as f64 / (n - 1) as f64;
            grid.push(f);
            mags_a.push(ra.s21(f).unwrap().norm());
            mags_c.push(rc.s21(f).unwrap().norm());
        }
        let minima_a = crate::model::spectrum::local_minima(&mags_a, 5, 0.02);
        let minima_c = crate::model::spectrum::local_minima(&mags_c, 5, 0.02);
        assert_eq!(minima_a.len(), 2, "anomalous model should show two dips");
        assert_eq!(minima_c.len(), 1, "conventional model should show one dip");
        let sep_mhz = (grid[minima_a[1]] - grid[minima_a[0]]) * 1e3;
        assert!(
            sep_mhz > 2.0 && sep_mhz < 15.0,
            "few-MHz splitting, got {sep_mhz}"
        );
        // Splitting is maximal at the dial setting pi: it must shrink at
        // neighbouring phases.
        let nearby = near_cc_system(PI - 0.6, 2.0, 0.996);
        let rn = CoupledResponse::from_system(&nearby).unwrap();
        let mags_n: Vec<f64> = grid.iter().map(|f| rn.s21(*f).unwrap().norm()).collect();
        let minima_n = crate::model::spectrum::local_minima(&mags_n, 5, 0.02);
        if minima_n.len() == 2 {
            let sep_n = (grid[minima_n[1]] - grid[minima_n[0]]) * 1e3;
            assert!(sep_n < sep_mhz);
        }
    }

    #[test]
    fn erasure_numerator_zeros_sit_on_bare_modes() {
        // Conventional model, symmetric rates, resonant: the transmission
        // zeros are exactly the bare half-loaded modes.
        let cavity = CavityMode::new(6.2, 17.0, 37.0, 37.0).unwrap();
        let magnon = MagnonMode::new(22.4, -7.1, 283.0, 0.8, 8.0, 8.0)
            .unwrap()
            .with_frequency(6.2)
            .unwrap();
        let sys = CoupledSystem::new(
            cavity,
            magnon,
            canonical_link(0.93),
            AnomalyParams::conventional(),
        );
        let r = CoupledResponse::from_system(&sys).unwrap();
        let wc = cavity.omega_tilde_ghz();
        let wm = magnon.omega_tilde_ghz().unwrap();
        let nc = (wc - r.z_m) * (wc - r.omega_c_tilde) - r.g0_sq;
        let nm = (wm - r.z_m) * (wm - r.omega_c_tilde) - r.g0_sq;
        assert_eq!(nc, Complex64::new(0.0, 0.0));
        assert_eq!(nm, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lossless_pole_reports_singularity() {
        let cavity = CavityMode::new(6.2, 0.0, 0.0, 0.0).unwrap();
        let magnon = MagnonMode::new(22.4, -7.1, 283.0, 0.0, 0.0, 0.0)
            .unwrap()
            .with_frequency(6.3)
            .unwrap();
        let sys = CoupledSystem::new(
            cavity,
            magnon,
            canonical_link(0.0),
            AnomalyParams::conventional(),
        );
        assert!(matches!(
            coupled_s21(6.2, &sys),
            Err(ModelError::Singularity { .. })
        ));
        // Off the poles the lossless system is fine.
        assert!(coupled_s21(6.25, &sys).is_ok());
    }
}
