//! Normal-mode algebra: the coupled-mode drift matrix, the poles of the
//! transmission denominator, coupling-strength extraction from a mode pair
//! and the cooperativity figure of merit.

use num_complex::Complex64;

use super::transmission::CoupledResponse;
use super::types::{ComplexModePair, CoupledSystem, CouplingResult};
use super::{ModelError, MHZ};

/// Roots of the monic quadratic `x² + c1·x + c0`, computed with the
/// cancellation-safe variant of the quadratic formula.
pub fn solve_monic_quadratic(c1: Complex64, c0: Complex64) -> (Complex64, Complex64) {
    let disc = c1 * c1 - 4.0 * c0;
    let mut s = disc.sqrt();
    // Align the root with c1 so the larger-magnitude sum is formed first.
    if (c1.conj() * s).re < 0.0 {
        s = -s;
    }
    let q = -(c1 + s) / 2.0;
    if q.norm() == 0.0 {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (q, c0 / q)
    }
}

/// Eigenvalues of a complex 2×2 matrix via trace and determinant.
pub fn eigenvalues_2x2(m: &[[Complex64; 2]; 2]) -> (Complex64, Complex64) {
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    solve_monic_quadratic(-trace, det)
}

/// Coupled-mode drift matrix (GHz): fully loaded complex mode frequencies
/// on the diagonal and the travelling-photon coupling `−i e^{iΦ/η}√(κκ)`
/// off-diagonal, with the right-going rates feeding the cavity row.
pub fn drift_matrix(sys: &CoupledSystem) -> Result<[[Complex64; 2]; 2], ModelError> {
    let f_m = sys.magnon.frequency_ghz()?;
    let cavity_diag = Complex64::new(
        sys.cavity.f_c_ghz(),
        -(sys.cavity.beta0_mhz() + (sys.cavity.kappa_l_mhz() + sys.cavity.kappa_r_mhz()) / 2.0)
            * MHZ,
    );
    let magnon_diag = Complex64::new(
        f_m,
        -(sys.magnon.alpha0_mhz() + (sys.magnon.kappa_l_mhz() + sys.magnon.kappa_r_mhz()) / 2.0)
            * MHZ,
    );
    let phase = sys.link_phase_factor();
    let minus_i = Complex64::new(0.0, -1.0);
    let upper =
        minus_i * phase * (sys.cavity.kappa_r_mhz() * sys.magnon.kappa_r_mhz()).sqrt() * MHZ;
    let lower =
        minus_i * phase * (sys.cavity.kappa_l_mhz() * sys.magnon.kappa_l_mhz()).sqrt() * MHZ;
    Ok([[cavity_diag, upper], [lower, magnon_diag]])
}

/// Hybridized normal modes: eigenvalues of [`drift_matrix`], labeled per
/// the mode-pair ordering rule.
pub fn drift_modes(sys: &CoupledSystem) -> Result<ComplexModePair, ModelError> {
    let m = drift_matrix(sys)?;
    let (a, b) = eigenvalues_2x2(&m);
    Ok(ComplexModePair::from_unordered(a, b))
}

/// The two poles of the coupled transmission: roots of the denominator
/// quadratic. These carry the full right-channel loading on top of the
/// half-loaded resonances and are distinct objects from the numerator
/// zeros observed as dips.
pub fn denominator_poles(sys: &CoupledSystem) -> Result<ComplexModePair, ModelError> {
    Ok(CoupledResponse::from_system(sys)?.poles())
}

/// Complex coupling strength from a hybridized mode pair and the two
/// half-loaded bare modes: `G = √((ω̃₊−ω̃₋)² − (ω̃_c−ω̃_m)²)`, branch-fixed
/// so `J ≥ 0` (and `Γ ≥ 0` when `J = 0`). Inputs in GHz, result in MHz.
pub fn coupling_from_modes(
    pair: &ComplexModePair,
    omega_c_tilde_ghz: Complex64,
    omega_m_tilde_ghz: Complex64,
) -> CouplingResult {
    let d = pair.difference_ghz();
    let e = omega_c_tilde_ghz - omega_m_tilde_ghz;
    let g_ghz = (d * d - e * e).sqrt();
    CouplingResult::from_raw(g_ghz / MHZ)
}

/// Cooperativity `C = |G|² / |β·α|` for effective dampings in MHz.
/// Either damping exactly zero makes the figure diverge and is reported
/// as a singular-cooperativity error rather than infinity arithmetic.
pub fn cooperativity(g: &CouplingResult, alpha_mhz: f64, beta_mhz: f64) -> Result<f64, ModelError> {
    if alpha_mhz == 0.0 || beta_mhz == 0.0 {
        return Err(ModelError::SingularCooperativity);
    }
    let g2 = g.abs_mhz() * g.abs_mhz();
    Ok(g2 / (beta_mhz * alpha_mhz).abs())
}
