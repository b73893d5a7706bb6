//! `cavimag simulate`: forward-model a transmission spectrum and its
//! group delay, with optional reproducible synthetic noise.

use cavimag_core::io::{ColumnSpec, NamedTable};
use cavimag_core::model::{bare_cavity_s21, coupled_s21, group_delay};
use cavimag_core::sweep::{synthesize_spectrum, AxisKind, ForwardModel, SweepAxis};

use crate::config::{Config, ModelKind};
use crate::output::{new_envelope, write_results};
use crate::CliError;

pub fn frequency_axis(
    config: &Config,
    center_ghz: f64,
    linewidth_mhz: f64,
) -> Result<SweepAxis, CliError> {
    let center = config.grid.f_center_ghz.unwrap_or(center_ghz);
    let half_mhz = config
        .grid
        .f_halfspan_mhz
        .unwrap_or_else(|| 10.0 * linewidth_mhz.abs().max(2.0));
    SweepAxis::linear(
        AxisKind::FrequencyGhz,
        center - half_mhz * 1e-3,
        center + half_mhz * 1e-3,
        config.grid.f_points,
    )
    .map_err(Into::into)
}

pub fn run(config: &Config, dry_run: bool) -> Result<(), CliError> {
    let model = config.simulate_model.ok_or_else(|| {
        CliError::Validation("simulate.model: missing required value (bare|coupled)".into())
    })?;

    // Validate everything the run needs before touching the filesystem.
    let cavity = config.cavity_required()?;
    let coupled = match model {
        ModelKind::Coupled => Some(config.coupled_system()?),
        ModelKind::Bare => None,
    };
    let linewidth = match &coupled {
        Some(sys) => sys
            .cavity
            .beta_mhz()
            .abs()
            .max(sys.magnon.alpha_mhz().abs()),
        None => cavity.beta_mhz().abs(),
    };
    let freqs = frequency_axis(config, cavity.f_c_ghz(), linewidth)?;

    if dry_run {
        print!("{}", config.canonical);
        println!("dry run: configuration valid; nothing computed");
        return Ok(());
    }

    let forward = match &coupled {
        Some(sys) => ForwardModel::Coupled(sys),
        None => ForwardModel::Bare(&cavity),
    };
    let spectrum = synthesize_spectrum(forward, &freqs, config.noise_sigma, config.seed)?;
    let delay = group_delay(&spectrum)?;

    // Exact on-resonance transmission of the clean model.
    let s21_at_fc = match &coupled {
        Some(sys) => coupled_s21(cavity.f_c_ghz(), sys)?,
        None => bare_cavity_s21(cavity.f_c_ghz(), &cavity),
    };

    let mut env = new_envelope(config);
    env.set_parameter(
        "model",
        match model {
            ModelKind::Bare => "bare",
            ModelKind::Coupled => "coupled",
        },
    );
    env.set_parameter("f_c_ghz", cavity.f_c_ghz());
    env.set_parameter("beta_mhz", cavity.beta_mhz());
    env.set_parameter("s21_at_fc_abs", s21_at_fc.norm());
    env.set_parameter("group_delay_flagged", delay.flagged_count() as i64);
    env.set_parameter("group_delay_undersampled", delay.undersampled);

    let spectrum_rows: Vec<Vec<f64>> = spectrum
        .grid_ghz()
        .iter()
        .zip(spectrum.values())
        .map(|(f, v)| vec![*f, v.re, v.im, v.norm(), v.im.atan2(v.re)])
        .collect();
    env.push_table(NamedTable::new(
        "spectrum",
        vec![
            ColumnSpec::new("f", "GHz"),
            ColumnSpec::new("re", "1"),
            ColumnSpec::new("im", "1"),
            ColumnSpec::new("abs", "1"),
            ColumnSpec::new("arg", "rad"),
        ],
        spectrum_rows,
    )?);

    let delay_rows: Vec<Vec<f64>> = spectrum
        .grid_ghz()
        .iter()
        .zip(&delay.tau_ns)
        .map(|(f, tau)| match tau {
            Some(tau) => vec![*f, *tau, 1.0],
            None => vec![*f, 0.0, 0.0],
        })
        .collect();
    env.push_table(NamedTable::new(
        "group_delay",
        vec![
            ColumnSpec::new("f", "GHz"),
            ColumnSpec::new("tau", "ns"),
            ColumnSpec::new("valid", "1"),
        ],
        delay_rows,
    )?);

    write_results(config, &env)?;
    println!(
        "simulate: {} model, {} points, |S21(f_c)| = {:.6e} -> {}",
        match model {
            ModelKind::Bare => "bare",
            ModelKind::Coupled => "coupled",
        },
        spectrum.len(),
        s21_at_fc.norm(),
        config.out_dir.join("results.json").display()
    );
    Ok(())
}
