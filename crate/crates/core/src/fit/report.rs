//! Fit reports: named parameters with standard errors plus convergence
//! diagnostics, shared by every fitting operation.

use super::lm::LmResult;

/// One fitted parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

/// Outcome of a fit: parameter map, iteration count, convergence flag and
/// the root-mean-square residual. Deterministic: repeated identical fits
/// produce bit-identical reports.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub parameters: Vec<FitParameter>,
    pub iterations: usize,
    pub converged: bool,
    pub residual_rms: f64,
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn from_lm(result: &LmResult, names: &[&str]) -> Self {
        let parameters = names
            .iter()
            .zip(result.params.iter().zip(&result.std_errors))
            .map(|(name, (value, std_error))| FitParameter {
                name: (*name).to_string(),
                value: *value,
                std_error: *std_error,
            })
            .collect();
        Self {
            parameters,
            iterations: result.iterations,
            converged: result.converged,
            residual_rms: result.residual_rms,
            warnings: Vec::new(),
        }
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warnings.push(warning.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Value of a named parameter; panics when absent (test convenience).
    pub fn value(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("no parameter named {name}"))
            .value
    }
}
