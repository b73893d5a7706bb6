//! Group delay from sampled spectra: phase unwrapping and numerical
//! differentiation.
//!
//! `τ_g = −∂φ/∂ω` with `φ` the unwrapped transmission phase. With the
//! grid in GHz the delay comes out in ns via `τ_ns = −(dφ/df)/2π`.
//! Uniform grids use a five-point fourth-order stencil on interior
//! points (needed to track analytic phases to 1e-6 relative on a grid
//! one-hundredth of a linewidth) with fourth/third-order one-sided
//! stencils at and next to the edges; non-uniform grids fall back to
//! second-order three-point stencils.

use std::f64::consts::PI;

use super::spectrum::Spectrum;
use super::types::CavityMode;
use super::ModelError;

/// Cumulative phase unwrap: successive differences are folded into
/// (−π, π] before accumulation, so jumps larger than π are treated as
/// wraps.
pub fn unwrap_phase(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    if raw.is_empty() {
        return out;
    }
    out.push(raw[0]);
    for i in 1..raw.len() {
        let mut d = raw[i] - raw[i - 1];
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        out.push(out[i - 1] + d);
    }
    out
}

/// Result of [`group_delay`]: one delay sample per grid point, `None`
/// where the transmission magnitude vanished and the phase is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDelayResult {
    /// Group delay per grid point (ns).
    pub tau_ns: Vec<Option<f64>>,
    /// Set when any unwrapped phase step exceeded π/2, the signature of a
    /// grid that samples the linewidth with fewer than ~20 points.
    pub undersampled: bool,
}

impl GroupDelayResult {
    /// Number of grid points flagged as phase-undefined.
    pub fn flagged_count(&self) -> usize {
        self.tau_ns.iter().filter(|t| t.is_none()).count()
    }
}

/// Numerical group delay of a sampled spectrum (ns per grid point).
///
/// Zero-magnitude samples are flagged per sample rather than failing the
/// whole spectrum; differentiation restarts on each contiguous run of
/// valid samples.
pub fn group_delay(spectrum: &Spectrum) -> Result<GroupDelayResult, ModelError> {
    let n = spectrum.len();
    if n < 3 {
        return Err(ModelError::TooFewPoints { got: n });
    }
    let grid = spectrum.grid_ghz();
    let values = spectrum.values();
    let valid: Vec<bool> = values.iter().map(|v| v.norm() > 0.0).collect();

    let mut tau = vec![None; n];
    let mut undersampled = false;

    let mut start = 0;
    while start < n {
        if !valid[start] {
            start += 1;
            continue;
        }
        let mut end = start;
        while end + 1 < n && valid[end + 1] {
            end += 1;
        }
        let run = start..=end;
        let len = end - start + 1;
        if len >= 2 {
            let raw: Vec<f64> = values[run.clone()]
                .iter()
                .map(|v| v.im.atan2(v.re))
                .collect();
            let phase = unwrap_phase(&raw);
            if phase.windows(2).any(|w| (w[1] - w[0]).abs() > PI / 2.0) {
                undersampled = true;
            }
            let x = &grid[*run.start()..=*run.end()];
            let dphi = differentiate(x, &phase);
            for (k, d) in dphi.into_iter().enumerate() {
                tau[start + k] = Some(-d / (2.0 * PI));
            }
        }
        start = end + 1;
    }

    Ok(GroupDelayResult {
        tau_ns: tau,
        undersampled,
    })
}

/// First derivative of `y` on grid `x` (at least 2 points).
fn differentiate(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let d = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![d, d];
    }

    let h0 = x[1] - x[0];
    let uniform = x
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-9 * h0);

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d = if uniform {
            if i >= 2 && i + 2 < n {
                (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h0)
            } else if i == 0 {
                if n >= 5 {
                    (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4])
                        / (12.0 * h0)
                } else if n == 4 {
                    (-11.0 * y[0] + 18.0 * y[1] - 9.0 * y[2] + 2.0 * y[3]) / (6.0 * h0)
                } else {
                    (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h0)
                }
            } else if i == n - 1 {
                if n >= 5 {
                    (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4]
                        + 3.0 * y[n - 5])
                        / (12.0 * h0)
                } else if n == 4 {
                    (11.0 * y[n - 1] - 18.0 * y[n - 2] + 9.0 * y[n - 3] - 2.0 * y[n - 4])
                        / (6.0 * h0)
                } else {
                    (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h0)
                }
            } else if i == 1 && n >= 4 {
                (-2.0 * y[0] - 3.0 * y[1] + 6.0 * y[2] - y[3]) / (6.0 * h0)
            } else if i == n - 2 && n >= 4 {
                (2.0 * y[n - 1] + 3.0 * y[n - 2] - 6.0 * y[n - 3] + y[n - 4]) / (6.0 * h0)
            } else {
                (y[i + 1] - y[i - 1]) / (2.0 * h0)
            }
        } else {
            nonuniform_three_point(x, y, i)
        };
        out.push(d);
    }
    out
}

/// Second-order three-point derivative on a non-uniform grid.
fn nonuniform_three_point(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    let (i0, i1, i2) = if i == 0 {
        (0, 1, 2)
    } else if i == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (i - 1, i, i + 1)
    };
    let (x0, x1, x2) = (x[i0], x[i1], x[i2]);
    let xi = x[i];
    // Derivative of the Lagrange interpolant through the three nodes.
    let l0 = (2.0 * xi - x1 - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (2.0 * xi - x0 - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (2.0 * xi - x0 - x1) / ((x2 - x0) * (x2 - x1));
    y[i0] * l0 + y[i1] * l1 + y[i2] * l2
}

/// Closed-form on-resonance group delay of the bare cavity (ns):
/// `τ_g(f_c) = −(10³/2π)(1/β − 1/B)` for `β`, `B` in MHz. The sign is
/// `−sign(β)`: under-coupled cavities delay negatively, over-coupled
/// positively, and exact critical coupling is a singularity.
pub fn resonance_group_delay_ns(cavity: &CavityMode) -> Result<f64, ModelError> {
    let beta = cavity.beta_mhz();
    let loaded = cavity.loaded_mhz();
    if loaded == 0.0 {
        // All rates zero: flat unit transmission.
        return Ok(0.0);
    }
    if beta == 0.0 {
        return Err(ModelError::CriticalCoupling);
    }
    Ok(-(1e3 / (2.0 * PI)) * (1.0 / beta - 1.0 / loaded))
}
