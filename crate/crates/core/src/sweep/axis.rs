//! Sweep axes, 2D result maps and the detuning bookkeeping used by the
//! field experiment.

use crate::model::{MagnonMode, MHZ};

use super::SweepError;

/// What an axis parameterizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    SpacingMm,
    DeltaPhiRad,
    DetuningMhz,
    FrequencyGhz,
}

impl AxisKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SpacingMm => "spacing_d",
            Self::DeltaPhiRad => "delta_phi",
            Self::DetuningMhz => "bias_field",
            Self::FrequencyGhz => "frequency",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Self::SpacingMm => "mm",
            Self::DeltaPhiRad => "rad",
            Self::DetuningMhz => "MHz",
            Self::FrequencyGhz => "GHz",
        }
    }
}

/// A strictly monotone sampled axis with at least two points.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    kind: AxisKind,
    samples: Vec<f64>,
}

impl SweepAxis {
    pub fn new(kind: AxisKind, samples: Vec<f64>) -> Result<Self, SweepError> {
        if samples.len() < 2 {
            return Err(SweepError::InvalidAxis(format!(
                "{} axis needs at least 2 samples, got {}",
                kind.name(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(SweepError::InvalidAxis(format!(
                "{} axis contains non-finite samples",
                kind.name()
            )));
        }
        let increasing = samples.windows(2).all(|w| w[1] > w[0]);
        let decreasing = samples.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(SweepError::InvalidAxis(format!(
                "{} axis is not strictly monotone",
                kind.name()
            )));
        }
        Ok(Self { kind, samples })
    }

    /// Evenly spaced axis from `lo` to `hi` inclusive.
    pub fn linear(kind: AxisKind, lo: f64, hi: f64, n: usize) -> Result<Self, SweepError> {
        if n < 2 {
            return Err(SweepError::InvalidAxis(format!(
                "{} axis needs at least 2 samples, got {n}",
                kind.name()
            )));
        }
        let samples = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        Self::new(kind, samples)
    }

    pub fn kind(&self) -> AxisKind {
        self.kind
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Map payload kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Amplitude,
    GroupDelay,
    InverseAmplitude,
}

impl MapKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Amplitude => "amplitude",
            Self::GroupDelay => "group_delay",
            Self::InverseAmplitude => "inverse_amplitude",
        }
    }
}

/// A dense 2D result map over `axis1 × axis2` (row-major, axis1 indexes
/// rows). Cells where the value is undefined (transmission zeros) are
/// flagged rather than silently non-finite; every unflagged cell is
/// finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMap {
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    pub kind: MapKind,
    values: Vec<f64>,
    flagged: Vec<(usize, usize)>,
}

impl SweepMap {
    pub fn from_rows(
        axis1: SweepAxis,
        axis2: SweepAxis,
        kind: MapKind,
        rows: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, SweepError> {
        if rows.len() != axis1.len() {
            return Err(SweepError::InvalidAxis(format!(
                "map has {} rows but axis1 has {} samples",
                rows.len(),
                axis1.len()
            )));
        }
        let mut values = Vec::with_capacity(axis1.len() * axis2.len());
        let mut flagged = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != axis2.len() {
                return Err(SweepError::InvalidAxis(format!(
                    "row {i} has {} cells but axis2 has {} samples",
                    row.len(),
                    axis2.len()
                )));
            }
            for (j, cell) in row.into_iter().enumerate() {
                match cell {
                    Some(v) if v.is_finite() => values.push(v),
                    _ => {
                        flagged.push((i, j));
                        values.push(0.0);
                    }
                }
            }
        }
        Ok(Self {
            axis1,
            axis2,
            kind,
            values,
            flagged,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.len() + j]
    }

    pub fn is_flagged(&self, i: usize, j: usize) -> bool {
        self.flagged.contains(&(i, j))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.axis2.len()..(i + 1) * self.axis2.len()]
    }

    pub fn flagged_cells(&self) -> &[(usize, usize)] {
        &self.flagged
    }

    /// Number of singular/flagged cells, reported with every map.
    pub fn flagged_count(&self) -> usize {
        self.flagged.len()
    }
}

/// Detuning bookkeeping for the field experiment: the field detuning
/// `Δ_m = f_m(H) − f_c` and the probe detuning `Δ = f − f_c`, both in
/// MHz of linear frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningSpec {
    pub delta_m_mhz: f64,
    pub delta_mhz: f64,
}

impl DetuningSpec {
    /// The unique bias field (mT) that realizes this field detuning for
    /// the given magnon constants and cavity frequency.
    pub fn implied_bias_field_mt(&self, magnon: &MagnonMode, f_c_ghz: f64) -> f64 {
        magnon.bias_field_for_frequency_mt(f_c_ghz + self.delta_m_mhz * MHZ)
    }
}
