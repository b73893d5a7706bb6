//! `cavimag fit`: the inverse pipelines over measured or synthetic
//! spectra. The exit code is 0 only when every fit converged; partial
//! reports are still written on failure.

use std::path::Path;

use cavimag_core::fit::{
    extract_coupling_vs_phase, fit_anomaly_params, fit_bare_cavity, fit_inverse_lorentzian,
    fit_two_resonances, AnomalyAxis, AnomalyDataset, BareCavityFit, FitReport,
};
use cavimag_core::io::{
    parse_spectrum_csv, parse_touchstone, ColumnSpec, NamedTable, ResultEnvelope,
};
use cavimag_core::model::Spectrum;

use crate::config::{Config, FitConfig, FitPipeline, InputFormat};
use crate::output::{new_envelope, write_results};
use crate::CliError;

fn load_spectrum(path: &Path, fit: &FitConfig) -> Result<Spectrum, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    match fit.format {
        InputFormat::Touchstone => Ok(parse_touchstone(&bytes)?.to_spectrum()?),
        InputFormat::Csv => Ok(parse_spectrum_csv(&bytes, &fit.columns)?),
    }
}

fn report_into_envelope(env: &mut ResultEnvelope, prefix: &str, report: &FitReport) {
    for p in &report.parameters {
        env.set_parameter(format!("{prefix}.{}", p.name), p.value);
        env.set_parameter(format!("{prefix}.{}_stderr", p.name), p.std_error);
    }
    env.set_parameter(format!("{prefix}.iterations"), report.iterations as i64);
    env.set_parameter(format!("{prefix}.converged"), report.converged);
    env.set_parameter(format!("{prefix}.residual_rms"), report.residual_rms);
    for (i, w) in report.warnings.iter().enumerate() {
        env.set_parameter(format!("{prefix}.warning.{i}"), w.as_str());
    }
}

pub fn run(config: &Config, dry_run: bool) -> Result<(), CliError> {
    let fit = config.fit.clone().ok_or_else(|| {
        CliError::Validation("fit.pipeline: section required for this command".into())
    })?;

    if dry_run {
        print!("{}", config.canonical);
        println!("dry run: configuration valid; nothing computed");
        return Ok(());
    }

    match fit.pipeline {
        FitPipeline::Bare => bare(config, &fit),
        FitPipeline::Lorentzian => lorentzian(config, &fit),
        FitPipeline::TwoMode => two_mode(config, &fit),
        FitPipeline::CouplingVsPhase => coupling_vs_phase(config, &fit),
        FitPipeline::Anomaly => anomaly(config, &fit),
    }
}

fn single_input(fit: &FitConfig) -> Result<&Path, CliError> {
    fit.input
        .as_deref()
        .ok_or_else(|| CliError::Validation("fit.input: an input spectrum path is required".into()))
}

fn bare(config: &Config, fit: &FitConfig) -> Result<(), CliError> {
    let beta0 = fit.beta0_mhz.ok_or_else(|| {
        CliError::Validation(
            "fit.beta0: the independently calibrated intrinsic damping is required".into(),
        )
    })?;
    let spectrum = load_spectrum(single_input(fit)?, fit)?;
    let (outcome, report) = fit_bare_cavity(&spectrum, beta0)?;

    let mut env = new_envelope(config);
    env.set_parameter("pipeline", "bare");
    match &outcome {
        BareCavityFit::Complex {
            f_c_ghz,
            kappa_l_mhz,
            kappa_r_mhz,
        } => {
            env.set_parameter("fit.kind", "complex");
            env.set_parameter(
                "fit.beta_mhz",
                beta0 + kappa_l_mhz / 2.0 - kappa_r_mhz / 2.0,
            );
            println!(
                "fit bare: f_c = {f_c_ghz:.6} GHz, kappa_cL = {kappa_l_mhz:.3} MHz, \
                 kappa_cR = {kappa_r_mhz:.3} MHz"
            );
        }
        BareCavityFit::AmplitudeOnly {
            f_c_ghz,
            abs_beta_mhz,
            kappa_sum_mhz,
        } => {
            env.set_parameter("fit.kind", "amplitude_only");
            println!(
                "fit bare (amplitude-only): f_c = {f_c_ghz:.6} GHz, |beta| = \
                 {abs_beta_mhz:.3} MHz, kappa_cL+kappa_cR = {kappa_sum_mhz:.3} MHz"
            );
        }
    }
    report_into_envelope(&mut env, "fit", &report);
    write_results(config, &env)?;
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Fit(format!(
            "bare-cavity fit did not converge after {} iterations (partial report written)",
            report.iterations
        )))
    }
}

fn lorentzian(config: &Config, fit: &FitConfig) -> Result<(), CliError> {
    let spectrum = load_spectrum(single_input(fit)?, fit)?;
    let (lor, report) = fit_inverse_lorentzian(&spectrum)?;

    let mut env = new_envelope(config);
    env.set_parameter("pipeline", "lorentzian");
    env.set_parameter("fit.center_ghz", lor.center_ghz);
    env.set_parameter("fit.hwhm_mhz", lor.hwhm_mhz);
    env.set_parameter("fit.amplitude", lor.amplitude);
    env.set_parameter("fit.baseline", lor.baseline);
    env.set_parameter("fit.degenerate", lor.degenerate);
    report_into_envelope(&mut env, "fit", &report);
    write_results(config, &env)?;
    println!(
        "fit lorentzian: center = {:.6} GHz, hwhm = {:.4} MHz{}",
        lor.center_ghz,
        lor.hwhm_mhz,
        if lor.degenerate { " (degenerate)" } else { "" }
    );
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Fit(
            "lorentzian fit did not converge (partial report written)".into(),
        ))
    }
}

fn two_mode(config: &Config, fit: &FitConfig) -> Result<(), CliError> {
    let spectrum = load_spectrum(single_input(fit)?, fit)?;
    let (pair, report) = fit_two_resonances(&spectrum)?;

    let mut env = new_envelope(config);
    env.set_parameter("pipeline", "two_mode");
    let (f_plus, f_minus) = pair.frequencies_ghz();
    let (d_plus, d_minus) = pair.dampings_mhz();
    env.set_parameter("fit.omega_plus_ghz", f_plus);
    env.set_parameter("fit.omega_minus_ghz", f_minus);
    env.set_parameter("fit.delta_plus_mhz", d_plus);
    env.set_parameter("fit.delta_minus_mhz", d_minus);
    env.set_parameter("fit.splitting_mhz", pair.splitting_mhz());
    env.set_parameter("fit.degenerate", pair.is_degenerate());
    report_into_envelope(&mut env, "fit", &report);
    write_results(config, &env)?;
    println!(
        "fit two_mode: omega_+ = {f_plus:.6} GHz (delta {d_plus:.3} MHz), omega_- = \
         {f_minus:.6} GHz (delta {d_minus:.3} MHz), splitting {:.4} MHz",
        pair.splitting_mhz()
    );
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Fit(
            "two-resonance fit did not converge (partial report written)".into(),
        ))
    }
}

fn coupling_vs_phase(config: &Config, fit: &FitConfig) -> Result<(), CliError> {
    if fit.inputs.is_empty() {
        return Err(CliError::Validation(
            "fit.inputs: a list of phase-labeled spectra is required".into(),
        ));
    }
    let sys = config.coupled_system()?.resonant()?;
    let omega_c = sys.cavity.omega_tilde_ghz();
    let omega_m = sys.magnon.omega_tilde_ghz()?;

    let mut dataset = Vec::with_capacity(fit.inputs.len());
    for input in &fit.inputs {
        let phi = input.delta_phi_rad.ok_or_else(|| {
            CliError::Validation(format!(
                "fit.inputs: '{}' needs a delta_phi label",
                input.path.display()
            ))
        })?;
        dataset.push((phi, load_spectrum(&input.path, fit)?));
    }

    let points = extract_coupling_vs_phase(&dataset, omega_c, omega_m);
    let gaps = points.iter().filter(|p| p.coupling.is_none()).count();

    let mut env = new_envelope(config);
    env.set_parameter("pipeline", "coupling_vs_phase");
    env.set_parameter("points", points.len() as i64);
    env.set_parameter("gaps", gaps as i64);
    env.push_table(NamedTable::new(
        "coupling_vs_phase",
        vec![
            ColumnSpec::new("delta_phi", "rad"),
            ColumnSpec::new("j", "MHz"),
            ColumnSpec::new("gamma", "MHz"),
            ColumnSpec::new("abs_g", "MHz"),
            ColumnSpec::new("ok", "1"),
        ],
        points
            .iter()
            .map(|p| match &p.coupling {
                Some(g) => vec![p.phi_rad, g.j_mhz(), g.gamma_mhz(), g.abs_mhz(), 1.0],
                None => vec![p.phi_rad, 0.0, 0.0, 0.0, 0.0],
            })
            .collect(),
    )?);
    write_results(config, &env)?;
    println!(
        "fit coupling_vs_phase: {} points, {} gap(s)",
        points.len(),
        gaps
    );
    if gaps == 0 {
        Ok(())
    } else {
        Err(CliError::Fit(format!(
            "{gaps} of {} spectra could not be fitted (partial table written)",
            points.len()
        )))
    }
}

fn anomaly(config: &Config, fit: &FitConfig) -> Result<(), CliError> {
    if fit.inputs.is_empty() {
        return Err(CliError::Validation(
            "fit.inputs: a list of labeled spectra is required".into(),
        ));
    }
    let template = config.coupled_system()?;

    let phase_labeled = fit.inputs.iter().all(|i| i.delta_phi_rad.is_some());
    let detuning_labeled = fit.inputs.iter().all(|i| i.detuning_mhz.is_some());
    let axis = if phase_labeled {
        AnomalyAxis::Phase
    } else if detuning_labeled {
        AnomalyAxis::Detuning
    } else {
        return Err(CliError::Validation(
            "fit.inputs: label every input with delta_phi, or every input with detuning".into(),
        ));
    };

    let mut points = Vec::with_capacity(fit.inputs.len());
    for input in &fit.inputs {
        let label = match axis {
            AnomalyAxis::Phase => input.delta_phi_rad.unwrap(),
            AnomalyAxis::Detuning => input.detuning_mhz.unwrap(),
        };
        points.push((label, load_spectrum(&input.path, fit)?));
    }

    let dataset = AnomalyDataset { axis, points };
    let (params, report) = fit_anomaly_params(&dataset, &template)?;

    let mut env = new_envelope(config);
    env.set_parameter("pipeline", "anomaly");
    env.set_parameter("fit.eta", params.eta());
    env.set_parameter("fit.delta", params.delta());
    report_into_envelope(&mut env, "fit", &report);
    write_results(config, &env)?;
    println!(
        "fit anomaly: eta = {:.4}, delta = {:.6}",
        params.eta(),
        params.delta()
    );
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Fit(
            "anomaly fit did not converge (partial report written)".into(),
        ))
    }
}
