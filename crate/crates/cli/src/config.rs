//! Config loading: TOML file, dotted-path `--set` overrides (flags win),
//! unit-checked conversion into domain objects, and the canonical
//! effective-config echo that gets digested into every result file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use cavimag_core::io::{fnv1a64_hex, ColumnMap};
use cavimag_core::model::{AnomalyParams, CavityMode, CoupledSystem, MagnonMode, PhaseLink};

use crate::quantity::{parse_quantity, Dim};
use crate::CliError;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Option<RawSystem>,
    grid: Option<RawGrid>,
    simulate: Option<RawSimulate>,
    experiment: Option<RawExperiment>,
    fit: Option<RawFit>,
    run: Option<RawRun>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    cavity: Option<RawCavity>,
    magnon: Option<RawMagnon>,
    link: Option<RawLink>,
    anomaly: Option<RawAnomaly>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    f_c: Option<String>,
    beta0: Option<String>,
    #[serde(rename = "kappa_cL")]
    kappa_cl: Option<String>,
    #[serde(rename = "kappa_cR")]
    kappa_cr: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMagnon {
    gamma_e: Option<String>,
    #[serde(rename = "mu0_HA")]
    mu0_ha: Option<String>,
    #[serde(rename = "mu0_H")]
    mu0_h: Option<String>,
    alpha0: Option<String>,
    #[serde(rename = "kappa_mL")]
    kappa_ml: Option<String>,
    #[serde(rename = "kappa_mR")]
    kappa_mr: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    length: Option<String>,
    wavelength: Option<String>,
    delta_phi: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnomaly {
    eta: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    f_center: Option<String>,
    f_halfspan: Option<String>,
    f_points: Option<usize>,
    phi_points: Option<usize>,
    detuning_halfspan: Option<String>,
    detuning_points: Option<usize>,
    spacing_lo: Option<String>,
    spacing_hi: Option<String>,
    spacing_points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    model: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: Option<String>,
    calibration: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFit {
    pipeline: Option<String>,
    beta0: Option<String>,
    input: Option<PathBuf>,
    format: Option<String>,
    csv_columns: Option<RawColumns>,
    inputs: Option<Vec<RawFitInput>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColumns {
    frequency: String,
    re: Option<String>,
    im: Option<String>,
    magnitude: Option<String>,
    phase_deg: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFitInput {
    path: PathBuf,
    delta_phi: Option<String>,
    detuning: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    seed: Option<u64>,
    noise_sigma: Option<f64>,
    out_dir: Option<PathBuf>,
    jobs: Option<usize>,
    csv: Option<bool>,
}

/// Frequency-grid settings (internal units).
#[derive(Debug, Clone)]
pub struct GridConfig {
    pub f_center_ghz: Option<f64>,
    pub f_halfspan_mhz: Option<f64>,
    pub f_points: usize,
    pub phi_points: usize,
    pub detuning_halfspan_mhz: f64,
    pub detuning_points: usize,
    pub spacing_lo_mm: Option<f64>,
    pub spacing_hi_mm: Option<f64>,
    pub spacing_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Bare,
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Spacing,
    Phase,
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitPipeline {
    Bare,
    Lorentzian,
    TwoMode,
    CouplingVsPhase,
    Anomaly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Touchstone,
    Csv,
}

/// One labeled fit input.
#[derive(Debug, Clone)]
pub struct FitInput {
    pub path: PathBuf,
    pub delta_phi_rad: Option<f64>,
    pub detuning_mhz: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub pipeline: FitPipeline,
    pub beta0_mhz: Option<f64>,
    pub input: Option<PathBuf>,
    pub format: InputFormat,
    pub columns: ColumnMap,
    pub inputs: Vec<FitInput>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub calibration: Option<PathBuf>,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub cavity: Option<CavityMode>,
    pub magnon: Option<MagnonMode>,
    pub magnon_bias_given: bool,
    pub link: Option<PhaseLink>,
    pub anomaly: AnomalyParams,
    pub grid: GridConfig,
    pub simulate_model: Option<ModelKind>,
    pub experiment: Option<ExperimentConfig>,
    pub fit: Option<FitConfig>,
    pub seed: u64,
    pub noise_sigma: f64,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub csv: bool,
    /// Canonical echo of the effective config (sorted dotted keys).
    pub canonical: String,
    /// FNV-1a digest of the canonical echo.
    pub digest: String,
}

/// Flag-level overrides that win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub set: Vec<String>,
    pub seed: Option<u64>,
    pub noise_sigma: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

fn toml_literal(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.to_string())
}

fn apply_set(root: &mut toml::Value, spec: &str) -> Result<(), CliError> {
    let (path, raw_value) = spec.split_once('=').ok_or_else(|| {
        CliError::Validation(format!("--set '{spec}': expected '<dotted.path>=<value>'"))
    })?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.is_empty() || keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Validation(format!(
            "--set '{spec}': empty key in path"
        )));
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let table = node.as_table_mut().ok_or_else(|| {
            CliError::Validation(format!("--set '{spec}': '{key}' is not a table"))
        })?;
        node = table
            .entry((*key).to_string())
            .or_insert_with(|| toml::Value::Table(toml::map::Map::new()));
    }
    let table = node.as_table_mut().ok_or_else(|| {
        CliError::Validation(format!(
            "--set '{spec}': parent of the final key is not a table"
        ))
    })?;
    table.insert(
        keys[keys.len() - 1].to_string(),
        toml_literal(raw_value.trim()),
    );
    Ok(())
}

/// Render the effective config as sorted `dotted.path = value` lines.
fn canonicalize(value: &toml::Value) -> String {
    let mut entries = BTreeMap::new();
    flatten("", value, &mut entries);
    let mut out = String::new();
    for (key, rendered) in entries {
        out.push_str(&key);
        out.push_str(" = ");
        out.push_str(&rendered);
        out.push('\n');
    }
    out
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut BTreeMap<String, String>) {
    match value {
        toml::Value::Table(map) => {
            for (key, v) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&path, v, out);
            }
        }
        toml::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        toml::Value::String(s) => {
            out.insert(prefix.to_string(), format!("{s:?}"));
        }
        toml::Value::Float(f) => {
            out.insert(prefix.to_string(), format!("{f:.16e}"));
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

fn required<'a>(value: &'a Option<String>, path: &str) -> Result<&'a str, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Validation(format!("{path}: missing required value")))
}

impl Config {
    /// Load, override, validate.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut tree: toml::Value = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config parse error: {e}")))?;
        if !tree.is_table() {
            return Err(CliError::Validation("config root must be a table".into()));
        }
        for spec in &overrides.set {
            apply_set(&mut tree, spec)?;
        }

        let raw: RawConfig = tree
            .clone()
            .try_into()
            .map_err(|e| CliError::Validation(format!("config error: {e}")))?;

        let system = raw.system.as_ref();
        let cavity = match system.and_then(|s| s.cavity.as_ref()) {
            Some(c) => Some(
                CavityMode::new(
                    parse_quantity(
                        required(&c.f_c, "system.cavity.f_c")?,
                        Dim::FrequencyGhz,
                        "system.cavity.f_c",
                    )?,
                    parse_quantity(
                        required(&c.beta0, "system.cavity.beta0")?,
                        Dim::RateMhz,
                        "system.cavity.beta0",
                    )?,
                    parse_quantity(
                        required(&c.kappa_cl, "system.cavity.kappa_cL")?,
                        Dim::RateMhz,
                        "system.cavity.kappa_cL",
                    )?,
                    parse_quantity(
                        required(&c.kappa_cr, "system.cavity.kappa_cR")?,
                        Dim::RateMhz,
                        "system.cavity.kappa_cR",
                    )?,
                )
                .map_err(|e| CliError::Validation(format!("system.cavity: {e}")))?,
            ),
            None => None,
        };

        let mut magnon_bias_given = false;
        let magnon = match system.and_then(|s| s.magnon.as_ref()) {
            Some(m) => {
                let gamma = parse_quantity(
                    required(&m.gamma_e, "system.magnon.gamma_e")?,
                    Dim::GyromagneticGhzPerT,
                    "system.magnon.gamma_e",
                )?;
                let mu0_ha = parse_quantity(
                    required(&m.mu0_ha, "system.magnon.mu0_HA")?,
                    Dim::FieldMt,
                    "system.magnon.mu0_HA",
                )?;
                let mu0_h = match &m.mu0_h {
                    Some(h) => {
                        magnon_bias_given = true;
                        parse_quantity(h, Dim::FieldMt, "system.magnon.mu0_H")?
                    }
                    // Placeholder bias; experiments that need a specific
                    // detuning always re-bias from it.
                    None => mu0_ha.abs() + 1.0,
                };
                Some(
                    MagnonMode::new(
                        gamma,
                        mu0_ha,
                        mu0_h,
                        parse_quantity(
                            required(&m.alpha0, "system.magnon.alpha0")?,
                            Dim::RateMhz,
                            "system.magnon.alpha0",
                        )?,
                        parse_quantity(
                            required(&m.kappa_ml, "system.magnon.kappa_mL")?,
                            Dim::RateMhz,
                            "system.magnon.kappa_mL",
                        )?,
                        parse_quantity(
                            required(&m.kappa_mr, "system.magnon.kappa_mR")?,
                            Dim::RateMhz,
                            "system.magnon.kappa_mR",
                        )?,
                    )
                    .map_err(|e| CliError::Validation(format!("system.magnon: {e}")))?,
                )
            }
            None => None,
        };

        let link = match system.and_then(|s| s.link.as_ref()) {
            Some(l) => Some(
                PhaseLink::new(
                    parse_quantity(
                        required(&l.length, "system.link.length")?,
                        Dim::LengthM,
                        "system.link.length",
                    )?,
                    parse_quantity(
                        required(&l.wavelength, "system.link.wavelength")?,
                        Dim::WavelengthMm,
                        "system.link.wavelength",
                    )?,
                    parse_quantity(
                        required(&l.delta_phi, "system.link.delta_phi")?,
                        Dim::AngleRad,
                        "system.link.delta_phi",
                    )?,
                )
                .map_err(|e| CliError::Validation(format!("system.link: {e}")))?,
            ),
            None => None,
        };

        let anomaly = match system.and_then(|s| s.anomaly.as_ref()) {
            Some(a) => AnomalyParams::new(a.eta.unwrap_or(1.0), a.delta.unwrap_or(1.0))
                .map_err(|e| CliError::Validation(format!("system.anomaly: {e}")))?,
            None => AnomalyParams::conventional(),
        };

        let raw_grid = raw.grid.clone().unwrap_or_default();
        let grid = GridConfig {
            f_center_ghz: raw_grid
                .f_center
                .as_deref()
                .map(|v| parse_quantity(v, Dim::FrequencyGhz, "grid.f_center"))
                .transpose()?,
            f_halfspan_mhz: raw_grid
                .f_halfspan
                .as_deref()
                .map(|v| parse_quantity(v, Dim::RateMhz, "grid.f_halfspan"))
                .transpose()?,
            f_points: raw_grid.f_points.unwrap_or(2001),
            phi_points: raw_grid.phi_points.unwrap_or(41),
            detuning_halfspan_mhz: raw_grid
                .detuning_halfspan
                .as_deref()
                .map(|v| parse_quantity(v, Dim::RateMhz, "grid.detuning_halfspan"))
                .transpose()?
                .unwrap_or(60.0),
            detuning_points: raw_grid.detuning_points.unwrap_or(81),
            spacing_lo_mm: raw_grid
                .spacing_lo
                .as_deref()
                .map(|v| parse_quantity(v, Dim::WavelengthMm, "grid.spacing_lo"))
                .transpose()?,
            spacing_hi_mm: raw_grid
                .spacing_hi
                .as_deref()
                .map(|v| parse_quantity(v, Dim::WavelengthMm, "grid.spacing_hi"))
                .transpose()?,
            spacing_points: raw_grid.spacing_points.unwrap_or(231),
        };
        for (name, n) in [
            ("grid.f_points", grid.f_points),
            ("grid.phi_points", grid.phi_points),
            ("grid.detuning_points", grid.detuning_points),
            ("grid.spacing_points", grid.spacing_points),
        ] {
            if n < 2 {
                return Err(CliError::Validation(format!(
                    "{name}: need at least 2 points, got {n}"
                )));
            }
        }

        let simulate_model = match raw.simulate.as_ref().and_then(|s| s.model.as_deref()) {
            Some("bare") => Some(ModelKind::Bare),
            Some("coupled") => Some(ModelKind::Coupled),
            Some(other) => {
                return Err(CliError::Validation(format!(
                    "simulate.model: expected 'bare' or 'coupled', got '{other}'"
                )))
            }
            None => None,
        };

        let experiment = match raw.experiment.as_ref() {
            Some(e) => {
                let kind = match e.kind.as_deref() {
                    Some("spacing") => ExperimentKind::Spacing,
                    Some("phase") => ExperimentKind::Phase,
                    Some("field") => ExperimentKind::Field,
                    Some(other) => {
                        return Err(CliError::Validation(format!(
                            "experiment.kind: expected spacing|phase|field, got '{other}'"
                        )))
                    }
                    None => {
                        return Err(CliError::Validation(
                            "experiment.kind: missing required value".into(),
                        ))
                    }
                };
                Some(ExperimentConfig {
                    kind,
                    calibration: e.calibration.clone(),
                })
            }
            None => None,
        };

        let fit = match raw.fit.as_ref() {
            Some(f) => {
                let pipeline = match f.pipeline.as_deref() {
                    Some("bare") => FitPipeline::Bare,
                    Some("lorentzian") => FitPipeline::Lorentzian,
                    Some("two_mode") => FitPipeline::TwoMode,
                    Some("coupling_vs_phase") => FitPipeline::CouplingVsPhase,
                    Some("anomaly") => FitPipeline::Anomaly,
                    Some(other) => {
                        return Err(CliError::Validation(format!(
                            "fit.pipeline: unknown pipeline '{other}'"
                        )))
                    }
                    None => {
                        return Err(CliError::Validation(
                            "fit.pipeline: missing required value".into(),
                        ))
                    }
                };
                let format = match f.format.as_deref() {
                    Some("touchstone") | None => InputFormat::Touchstone,
                    Some("csv") => InputFormat::Csv,
                    Some(other) => {
                        return Err(CliError::Validation(format!(
                            "fit.format: expected touchstone|csv, got '{other}'"
                        )))
                    }
                };
                let columns = match &f.csv_columns {
                    Some(c) => ColumnMap {
                        frequency_ghz: c.frequency.clone(),
                        re: c.re.clone(),
                        im: c.im.clone(),
                        magnitude: c.magnitude.clone(),
                        phase_deg: c.phase_deg.clone(),
                    },
                    None => ColumnMap::complex_default(),
                };
                let mut inputs = Vec::new();
                for (i, input) in f.inputs.iter().flatten().enumerate() {
                    inputs.push(FitInput {
                        path: input.path.clone(),
                        delta_phi_rad: input
                            .delta_phi
                            .as_deref()
                            .map(|v| {
                                parse_quantity(
                                    v,
                                    Dim::AngleRad,
                                    &format!("fit.inputs[{i}].delta_phi"),
                                )
                            })
                            .transpose()?,
                        detuning_mhz: input
                            .detuning
                            .as_deref()
                            .map(|v| {
                                parse_quantity(
                                    v,
                                    Dim::RateMhz,
                                    &format!("fit.inputs[{i}].detuning"),
                                )
                            })
                            .transpose()?,
                    });
                }
                Some(FitConfig {
                    pipeline,
                    beta0_mhz: f
                        .beta0
                        .as_deref()
                        .map(|v| parse_quantity(v, Dim::RateMhz, "fit.beta0"))
                        .transpose()?,
                    input: f.input.clone(),
                    format,
                    columns,
                    inputs,
                })
            }
            None => None,
        };

        let run = raw.run.clone().unwrap_or_default();
        let seed = overrides.seed.or(run.seed).unwrap_or(1);
        let noise_sigma = overrides.noise_sigma.or(run.noise_sigma).unwrap_or(0.0);
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(CliError::Validation(format!(
                "run.noise_sigma: must be finite and >= 0, got {noise_sigma}"
            )));
        }
        let out_dir = overrides
            .out_dir
            .clone()
            .or(run.out_dir)
            .or_else(|| std::env::var_os("CAVIMAG_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let jobs = overrides.jobs.or(run.jobs).unwrap_or(0);

        // Echo the fully resolved settings back into the tree so the
        // canonical text reflects what actually runs.
        {
            let table = tree.as_table_mut().unwrap();
            let run_table = table
                .entry("run".to_string())
                .or_insert_with(|| toml::Value::Table(toml::map::Map::new()))
                .as_table_mut()
                .ok_or_else(|| CliError::Validation("run: must be a table".into()))?;
            run_table.insert("seed".into(), toml::Value::Integer(seed as i64));
            run_table.insert("noise_sigma".into(), toml::Value::Float(noise_sigma));
            run_table.insert(
                "out_dir".into(),
                toml::Value::String(out_dir.display().to_string()),
            );
            run_table.insert("jobs".into(), toml::Value::Integer(jobs as i64));
        }
        let canonical = canonicalize(&tree);
        let digest = fnv1a64_hex(canonical.as_bytes());

        Ok(Self {
            cavity,
            magnon,
            magnon_bias_given,
            link,
            anomaly,
            grid,
            simulate_model,
            experiment,
            fit,
            seed,
            noise_sigma,
            out_dir,
            jobs,
            csv: run.csv.unwrap_or(true),
            canonical,
            digest,
        })
    }

    pub fn cavity_required(&self) -> Result<CavityMode, CliError> {
        self.cavity.ok_or_else(|| {
            CliError::Validation("system.cavity: section required for this command".into())
        })
    }

    /// Assemble the full coupled system from the config sections.
    pub fn coupled_system(&self) -> Result<CoupledSystem, CliError> {
        let cavity = self.cavity_required()?;
        let magnon = self.magnon.ok_or_else(|| {
            CliError::Validation("system.magnon: section required for this command".into())
        })?;
        let link = self.link.ok_or_else(|| {
            CliError::Validation("system.link: section required for this command".into())
        })?;
        // Without an explicit bias field the magnon sits on the cavity.
        let magnon = if self.magnon_bias_given {
            magnon
        } else {
            magnon
                .with_frequency(cavity.f_c_ghz())
                .map_err(|e| CliError::Validation(format!("system.magnon: {e}")))?
        };
        Ok(CoupledSystem::new(cavity, magnon, link, self.anomaly))
    }
}
