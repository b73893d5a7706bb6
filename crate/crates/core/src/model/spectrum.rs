//! Sampled complex transmission spectra and small signal-analysis helpers
//! shared by the fitting and sweep layers.

use num_complex::Complex64;

use super::ModelError;

/// Where a spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Synthetic,
    Measured,
}

/// Spectrum metadata: provenance, the noise level used when synthesizing,
/// and whether the values carry meaningful phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumMeta {
    pub provenance: Provenance,
    /// RMS of the additive complex noise, when synthetic and noisy.
    pub noise_sigma: Option<f64>,
    /// Set when the source provided magnitudes only; phases are zero.
    pub amplitude_only: bool,
}

impl SpectrumMeta {
    pub fn synthetic(noise_sigma: Option<f64>) -> Self {
        Self {
            provenance: Provenance::Synthetic,
            noise_sigma,
            amplitude_only: false,
        }
    }

    pub fn measured() -> Self {
        Self {
            provenance: Provenance::Measured,
            noise_sigma: None,
            amplitude_only: false,
        }
    }
}

/// Complex transmission sampled over a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid_ghz: Vec<f64>,
    values: Vec<Complex64>,
    meta: SpectrumMeta,
}

impl Spectrum {
    pub fn new(
        grid_ghz: Vec<f64>,
        values: Vec<Complex64>,
        meta: SpectrumMeta,
    ) -> Result<Self, ModelError> {
        if grid_ghz.len() != values.len() {
            return Err(ModelError::InvalidSpectrum(format!(
                "grid has {} samples but values has {}",
                grid_ghz.len(),
                values.len()
            )));
        }
        if grid_ghz.len() < 2 {
            return Err(ModelError::InvalidSpectrum(format!(
                "need at least 2 samples, got {}",
                grid_ghz.len()
            )));
        }
        for (i, w) in grid_ghz.windows(2).enumerate() {
            // NaN-safe: anything but a strict increase is rejected.
            if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
                return Err(ModelError::InvalidSpectrum(format!(
                    "grid not strictly increasing at index {}: {} then {}",
                    i, w[0], w[1]
                )));
            }
        }
        for (i, f) in grid_ghz.iter().enumerate() {
            if !f.is_finite() {
                return Err(ModelError::InvalidSpectrum(format!(
                    "non-finite grid value at index {i}"
                )));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(ModelError::InvalidSpectrum(format!(
                    "non-finite value at index {i}"
                )));
            }
        }
        Ok(Self {
            grid_ghz,
            values,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.grid_ghz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid_ghz.is_empty()
    }

    pub fn grid_ghz(&self) -> &[f64] {
        &self.grid_ghz
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn meta(&self) -> &SpectrumMeta {
        &self.meta
    }

    /// |S21| per sample.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Raw (wrapped) phase per sample, rad.
    pub fn phases(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im.atan2(v.re)).collect()
    }

    /// Index of the global magnitude minimum.
    pub fn min_magnitude_index(&self) -> usize {
        let mags = self.magnitudes();
        let mut best = 0;
        for (i, m) in mags.iter().enumerate() {
            if *m < mags[best] {
                best = i;
            }
        }
        best
    }

    /// Median grid step, GHz.
    pub fn grid_step_ghz(&self) -> f64 {
        let mut steps: Vec<f64> = self.grid_ghz.windows(2).map(|w| w[1] - w[0]).collect();
        steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        steps[steps.len() / 2]
    }
}

/// Boxcar smoothing with an odd window; the ends use shrinking windows.
pub fn smooth_boxcar(y: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1) | 1;
    let half = w / 2;
    let n = y.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let sum: f64 = y[lo..=hi].iter().sum();
        out.push(sum / (hi - lo + 1) as f64);
    }
    out
}

/// Local minima of an already-smoothed series with at least `threshold`
/// prominence and three samples of separation, in ascending index order.
fn minima_with_prominence(s: &[f64], threshold: f64) -> Vec<usize> {
    let n = s.len();
    let mut candidates = Vec::new();
    for i in 1..n - 1 {
        if s[i] <= s[i - 1] && s[i] < s[i + 1] {
            // Prominence: climb outward until a lower point or the edge.
            let mut left_peak = s[i];
            for j in (0..i).rev() {
                if s[j] < s[i] {
                    break;
                }
                left_peak = left_peak.max(s[j]);
            }
            let mut right_peak = s[i];
            for v in &s[i + 1..] {
                if *v < s[i] {
                    break;
                }
                right_peak = right_peak.max(*v);
            }
            let prominence = left_peak.min(right_peak) - s[i];
            if prominence >= threshold {
                candidates.push(i);
            }
        }
    }

    // Enforce the minimum spacing, keeping the deeper of close pairs.
    let mut out: Vec<usize> = Vec::new();
    for i in candidates {
        if let Some(&last) = out.last() {
            if i - last < 3 {
                if s[i] < s[last] {
                    *out.last_mut().unwrap() = i;
                }
                continue;
            }
        }
        out.push(i);
    }
    out
}

/// Indices of local minima of `y` after boxcar smoothing, filtered by a
/// prominence threshold relative to the smoothed dynamic range.
/// Deterministic; returns indices in ascending order.
pub fn local_minima(y: &[f64], window: usize, prominence_frac: f64) -> Vec<usize> {
    if y.len() < 3 {
        return Vec::new();
    }
    let s = smooth_boxcar(y, window);
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for v in &s {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let range = (hi - lo).max(f64::MIN_POSITIVE);
    minima_with_prominence(&s, prominence_frac * range)
}

/// Resonance-dip detection on magnitude data: smoothed linear scale with
/// a prominence threshold that adapts to the measured noise level
/// (median absolute successive difference), so noisy single-dip spectra
/// are not misread as multi-mode.
pub fn magnitude_dips(mags: &[f64], window: usize) -> Vec<usize> {
    if mags.len() < 3 {
        return Vec::new();
    }
    let s = smooth_boxcar(mags, window);
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for v in &s {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let range = (hi - lo).max(f64::MIN_POSITIVE);

    let mut diffs: Vec<f64> = mags.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let noise = diffs[diffs.len() / 2] / std::f64::consts::SQRT_2 / 0.6745;
    let w = (window.max(1) | 1) as f64;
    let threshold = (0.02 * range).max(6.0 * noise / w.sqrt());
    minima_with_prominence(&s, threshold)
}

/// Resonance-dip detection for noiseless model maps: smoothed log scale,
/// which resolves deep narrow notches riding a broad envelope. Zero
/// magnitudes are clamped to the smallest positive double.
pub fn log_magnitude_dips(mags: &[f64], window: usize) -> Vec<usize> {
    if mags.len() < 3 {
        return Vec::new();
    }
    let logs: Vec<f64> = mags.iter().map(|m| m.max(f64::MIN_POSITIVE).ln()).collect();
    let s = smooth_boxcar(&logs, window);
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for v in &s {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let range = (hi - lo).max(f64::MIN_POSITIVE);
    minima_with_prominence(&s, 0.02 * range)
}
