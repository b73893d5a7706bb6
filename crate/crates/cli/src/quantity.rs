//! Unit-suffixed quantity parsing for config values.
//!
//! Every dimensioned value in a config file carries an explicit unit
//! ("332.4 MHz", "-7.1 mT", "1 pi") so GHz/MHz mix-ups are caught at
//! validation time instead of producing silently wrong spectra.

use std::f64::consts::PI;

use crate::CliError;

/// Target dimension (and internal unit) of a config value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    /// Absolute frequency, stored in GHz.
    FrequencyGhz,
    /// Damping/coupling rate, stored in MHz.
    RateMhz,
    /// Magnetic field, stored in mT.
    FieldMt,
    /// Propagation length, stored in m.
    LengthM,
    /// Guided wavelength, stored in mm.
    WavelengthMm,
    /// Angle, stored in rad; the unit `pi` scales by π.
    AngleRad,
    /// Gyromagnetic ratio, stored in GHz/T.
    GyromagneticGhzPerT,
}

impl Dim {
    fn scale(&self, unit: &str) -> Option<f64> {
        let unit_lower = unit.to_ascii_lowercase();
        match self {
            Dim::FrequencyGhz => match unit_lower.as_str() {
                "hz" => Some(1e-9),
                "khz" => Some(1e-6),
                "mhz" => Some(1e-3),
                "ghz" => Some(1.0),
                _ => None,
            },
            Dim::RateMhz => match unit_lower.as_str() {
                "hz" => Some(1e-6),
                "khz" => Some(1e-3),
                "mhz" => Some(1.0),
                "ghz" => Some(1e3),
                _ => None,
            },
            Dim::FieldMt => match unit.trim() {
                "mT" => Some(1.0),
                "T" => Some(1e3),
                _ => match unit_lower.as_str() {
                    "mt" => Some(1.0),
                    "t" => Some(1e3),
                    _ => None,
                },
            },
            Dim::LengthM => match unit_lower.as_str() {
                "mm" => Some(1e-3),
                "cm" => Some(1e-2),
                "m" => Some(1.0),
                _ => None,
            },
            Dim::WavelengthMm => match unit_lower.as_str() {
                "mm" => Some(1.0),
                "cm" => Some(10.0),
                "m" => Some(1e3),
                _ => None,
            },
            Dim::AngleRad => match unit_lower.as_str() {
                "rad" => Some(1.0),
                "deg" => Some(PI / 180.0),
                "pi" => Some(PI),
                _ => None,
            },
            Dim::GyromagneticGhzPerT => match unit_lower.as_str() {
                "ghz/t" => Some(1.0),
                "mhz/mt" => Some(1.0),
                _ => None,
            },
        }
    }

    fn expected(&self) -> &'static str {
        match self {
            Dim::FrequencyGhz => "Hz|kHz|MHz|GHz",
            Dim::RateMhz => "Hz|kHz|MHz|GHz",
            Dim::FieldMt => "mT|T",
            Dim::LengthM => "mm|cm|m",
            Dim::WavelengthMm => "mm|cm|m",
            Dim::AngleRad => "rad|deg|pi",
            Dim::GyromagneticGhzPerT => "GHz/T|MHz/mT",
        }
    }
}

/// Parse `"<number> <unit>"` into the dimension's internal unit; `path`
/// names the config key in error messages.
pub fn parse_quantity(raw: &str, dim: Dim, path: &str) -> Result<f64, CliError> {
    let mut parts = raw.split_whitespace();
    let number = parts.next().unwrap_or("");
    let unit = parts.next();
    if parts.next().is_some() {
        return Err(CliError::Validation(format!(
            "{path}: expected '<number> <unit>', got '{raw}'"
        )));
    }
    let value: f64 = number.parse().map_err(|_| {
        CliError::Validation(format!("{path}: '{number}' is not a number (in '{raw}')"))
    })?;
    if !value.is_finite() {
        return Err(CliError::Validation(format!(
            "{path}: value must be finite (got '{raw}')"
        )));
    }
    let Some(unit) = unit else {
        return Err(CliError::Validation(format!(
            "{path}: missing unit in '{raw}'; expected one of {}",
            dim.expected()
        )));
    };
    let Some(scale) = dim.scale(unit) else {
        return Err(CliError::Validation(format!(
            "{path}: unit '{unit}' is not valid here; expected one of {}",
            dim.expected()
        )));
    };
    Ok(value * scale)
}
