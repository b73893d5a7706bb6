//! `cavimag experiment`: the three protocol reproductions — spacing
//! sweep with critical-coupling search, phase sweep at zero detuning,
//! and field sweep at fixed phase with anti-crossing extraction.

use cavimag_core::fit::find_critical_spacing;
use cavimag_core::io::{load_calibration, ColumnSpec, NamedTable};
use cavimag_core::sweep::{field_sweep, phase_sweep, spacing_sweep, AxisKind, SweepAxis, SweepMap};

use crate::config::{Config, ExperimentKind};
use crate::output::{new_envelope, write_results};
use crate::CliError;

use super::simulate::frequency_axis;

fn map_table(name: &str, map: &SweepMap) -> Result<NamedTable, CliError> {
    let mut rows = Vec::with_capacity(map.axis1.len() * map.axis2.len());
    for (i, a1) in map.axis1.samples().iter().enumerate() {
        for (j, a2) in map.axis2.samples().iter().enumerate() {
            let flagged = map.is_flagged(i, j);
            rows.push(vec![
                *a1,
                *a2,
                if flagged { 0.0 } else { map.get(i, j) },
                if flagged { 0.0 } else { 1.0 },
            ]);
        }
    }
    NamedTable::new(
        name,
        vec![
            ColumnSpec::new(map.axis1.kind().name(), map.axis1.kind().unit()),
            ColumnSpec::new(map.axis2.kind().name(), map.axis2.kind().unit()),
            ColumnSpec::new(
                map.kind.name(),
                if map.kind.name() == "group_delay" {
                    "ns"
                } else {
                    "1"
                },
            ),
            ColumnSpec::new("valid", "1"),
        ],
        rows,
    )
    .map_err(Into::into)
}

pub fn run(config: &Config, dry_run: bool) -> Result<(), CliError> {
    let experiment = config.experiment.clone().ok_or_else(|| {
        CliError::Validation("experiment.kind: section required for this command".into())
    })?;
    match experiment.kind {
        ExperimentKind::Spacing => spacing(config, dry_run),
        ExperimentKind::Phase => phase(config, dry_run),
        ExperimentKind::Field => field(config, dry_run),
    }
}

fn spacing(config: &Config, dry_run: bool) -> Result<(), CliError> {
    let path = config
        .experiment
        .as_ref()
        .and_then(|e| e.calibration.clone())
        .ok_or_else(|| {
            CliError::Validation(
                "experiment.calibration: a calibration CSV is required for the spacing \
                 experiment"
                    .into(),
            )
        })?;
    let bytes = std::fs::read(&path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let table = load_calibration(&bytes)?;

    let (d_lo, d_hi) = table.d_range_mm();
    let spacings = SweepAxis::linear(
        AxisKind::SpacingMm,
        config.grid.spacing_lo_mm.unwrap_or(d_lo),
        config.grid.spacing_hi_mm.unwrap_or(d_hi),
        config.grid.spacing_points,
    )?;
    let f_c_mid = 0.5
        * (table
            .rows()
            .iter()
            .map(|r| r.f_c_ghz)
            .fold(f64::MAX, f64::min)
            + table
                .rows()
                .iter()
                .map(|r| r.f_c_ghz)
                .fold(f64::MIN, f64::max));
    let freqs = frequency_axis(config, f_c_mid, 200.0)?;

    if dry_run {
        print!("{}", config.canonical);
        println!("dry run: configuration valid; nothing computed");
        return Ok(());
    }

    let sweep = spacing_sweep(&table, &spacings, &freqs)?;
    let search = find_critical_spacing(&table)?;

    let mut env = new_envelope(config);
    env.set_parameter("experiment", "spacing");
    env.set_parameter("critical_count", search.roots.len() as i64);
    env.set_parameter("min_abs_beta_mhz", search.min_abs_beta.1);
    env.set_parameter("min_abs_beta_d_mm", search.min_abs_beta.0);
    if search.roots.is_empty() {
        env.set_parameter("summary", "no critical coupling found");
    } else {
        env.set_parameter(
            "summary",
            format!(
                "critical coupling at d = {} mm",
                search
                    .roots
                    .iter()
                    .map(|r| format!("{:.4}", r.d_mm))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
            .as_str(),
        );
    }

    env.push_table(map_table("amplitude_map", &sweep.amplitude)?);
    env.push_table(NamedTable::new(
        "beta_trace",
        vec![ColumnSpec::new("d", "mm"), ColumnSpec::new("beta", "MHz")],
        sweep.beta_trace.iter().map(|(d, b)| vec![*d, *b]).collect(),
    )?);
    env.push_table(NamedTable::new(
        "tau_g_trace",
        vec![
            ColumnSpec::new("d", "mm"),
            ColumnSpec::new("tau_g_at_fc", "ns"),
            ColumnSpec::new("valid", "1"),
        ],
        sweep
            .tau_g_trace
            .iter()
            .map(|(d, t)| match t {
                Some(t) => vec![*d, *t, 1.0],
                None => vec![*d, 0.0, 0.0],
            })
            .collect(),
    )?);
    env.push_table(NamedTable::new(
        "s21_at_fc",
        vec![ColumnSpec::new("d", "mm"), ColumnSpec::new("abs", "1")],
        sweep.s21_at_fc.iter().map(|(d, v)| vec![*d, *v]).collect(),
    )?);
    env.push_table(NamedTable::new(
        "critical_spacings",
        vec![
            ColumnSpec::new("d", "mm"),
            ColumnSpec::new("bracket_lo", "mm"),
            ColumnSpec::new("bracket_hi", "mm"),
        ],
        search
            .roots
            .iter()
            .map(|r| vec![r.d_mm, r.bracket_mm.0, r.bracket_mm.1])
            .collect(),
    )?);

    write_results(config, &env)?;
    println!(
        "experiment spacing: {} critical condition(s); min |beta| = {:.3e} MHz at d = {:.4} mm",
        search.roots.len(),
        search.min_abs_beta.1,
        search.min_abs_beta.0
    );
    Ok(())
}

fn phase(config: &Config, dry_run: bool) -> Result<(), CliError> {
    // The phase protocol runs at zero field detuning: re-bias the magnon
    // onto the cavity regardless of any configured bias field.
    let sys = config.coupled_system()?.resonant()?;
    let linewidth = sys
        .cavity
        .beta_mhz()
        .abs()
        .max(sys.magnon.alpha_mhz().abs());
    let freqs = frequency_axis(config, sys.cavity.f_c_ghz(), linewidth)?;
    let phis = SweepAxis::linear(
        AxisKind::DeltaPhiRad,
        0.0,
        2.0 * std::f64::consts::PI,
        config.grid.phi_points,
    )?;

    if dry_run {
        print!("{}", config.canonical);
        println!("dry run: configuration valid; nothing computed");
        return Ok(());
    }

    let sweep = phase_sweep(&sys, &phis, &freqs)?;

    let mut env = new_envelope(config);
    env.set_parameter("experiment", "phase");
    env.set_parameter("amplitude_flagged", sweep.amplitude.flagged_count() as i64);
    env.set_parameter(
        "group_delay_flagged",
        sweep.group_delay.flagged_count() as i64,
    );
    match sweep.max_splitting() {
        Some((phi, s)) => {
            env.set_parameter("max_splitting_mhz", s);
            env.set_parameter("max_splitting_delta_phi_rad", phi);
        }
        None => {
            env.set_parameter("summary", "no resolvable splitting at any phase");
        }
    }

    env.push_table(map_table("amplitude_map", &sweep.amplitude)?);
    env.push_table(map_table("group_delay_map", &sweep.group_delay)?);
    env.push_table(NamedTable::new(
        "on_resonance_inverse",
        vec![
            ColumnSpec::new("delta_phi", "rad"),
            ColumnSpec::new("inv_abs_s21_at_fc", "1"),
            ColumnSpec::new("valid", "1"),
        ],
        sweep
            .on_resonance_inverse
            .iter()
            .map(|(phi, v)| match v {
                Some(v) => vec![*phi, *v, 1.0],
                None => vec![*phi, 0.0, 0.0],
            })
            .collect(),
    )?);
    env.push_table(NamedTable::new(
        "splitting",
        vec![
            ColumnSpec::new("delta_phi", "rad"),
            ColumnSpec::new("splitting", "MHz"),
            ColumnSpec::new("resolved", "1"),
        ],
        sweep
            .splitting_mhz
            .iter()
            .map(|(phi, s)| match s {
                Some(s) => vec![*phi, *s, 1.0],
                None => vec![*phi, 0.0, 0.0],
            })
            .collect(),
    )?);

    write_results(config, &env)?;
    match sweep.max_splitting() {
        Some((phi, s)) => {
            println!("experiment phase: maximum splitting {s:.3} MHz at delta_phi = {phi:.4} rad")
        }
        None => println!("experiment phase: no resolvable splitting at any phase"),
    }
    Ok(())
}

fn field(config: &Config, dry_run: bool) -> Result<(), CliError> {
    let sys = config.coupled_system()?;
    let linewidth = sys
        .cavity
        .beta_mhz()
        .abs()
        .max(sys.magnon.alpha_mhz().abs());
    let half_mhz = config
        .grid
        .f_halfspan_mhz
        .unwrap_or(config.grid.detuning_halfspan_mhz + 10.0 * linewidth.max(2.0));
    let center = config.grid.f_center_ghz.unwrap_or(sys.cavity.f_c_ghz());
    let freqs = SweepAxis::linear(
        AxisKind::FrequencyGhz,
        center - half_mhz * 1e-3,
        center + half_mhz * 1e-3,
        config.grid.f_points,
    )?;
    let detunings = SweepAxis::linear(
        AxisKind::DetuningMhz,
        -config.grid.detuning_halfspan_mhz,
        config.grid.detuning_halfspan_mhz,
        config.grid.detuning_points,
    )?;

    if dry_run {
        print!("{}", config.canonical);
        println!("dry run: configuration valid; nothing computed");
        return Ok(());
    }

    let sweep = field_sweep(&sys, &detunings, &freqs)?;

    let mut env = new_envelope(config);
    env.set_parameter("experiment", "field");
    env.set_parameter("delta_phi_rad", sys.link.delta_phi_rad());
    match &sweep.coupling {
        Some(summary) => {
            env.set_parameter("g_abs_mhz", summary.g_abs_mhz);
            env.set_parameter("alpha_mhz", summary.alpha_mhz);
            env.set_parameter("beta_mhz", summary.beta_mhz);
            match summary.cooperativity {
                Some(c) => env.set_parameter("cooperativity", c),
                None => env.set_parameter(
                    "cooperativity_note",
                    "singular: an effective damping is exactly zero",
                ),
            }
        }
        None => {
            env.set_parameter("summary", "no anti-crossing resolved at zero detuning");
        }
    }

    env.push_table(map_table("amplitude_map", &sweep.amplitude)?);
    env.push_table(NamedTable::new(
        "branches",
        vec![
            ColumnSpec::new("delta_m", "MHz"),
            ColumnSpec::new("lower", "GHz"),
            ColumnSpec::new("lower_resolved", "1"),
            ColumnSpec::new("upper", "GHz"),
            ColumnSpec::new("upper_resolved", "1"),
            ColumnSpec::new("separation", "MHz"),
            ColumnSpec::new("separation_resolved", "1"),
        ],
        sweep
            .branches
            .iter()
            .map(|b| {
                vec![
                    b.delta_m_mhz,
                    b.lower_ghz.unwrap_or(0.0),
                    b.lower_ghz.is_some() as i32 as f64,
                    b.upper_ghz.unwrap_or(0.0),
                    b.upper_ghz.is_some() as i32 as f64,
                    b.separation_mhz().unwrap_or(0.0),
                    b.separation_mhz().is_some() as i32 as f64,
                ]
            })
            .collect(),
    )?);

    write_results(config, &env)?;
    match &sweep.coupling {
        Some(summary) => println!(
            "experiment field: |G| = {:.3} MHz, C = {}",
            summary.g_abs_mhz,
            summary
                .cooperativity
                .map(|c| format!("{c:.3}"))
                .unwrap_or_else(|| "singular".to_string())
        ),
        None => println!("experiment field: no anti-crossing resolved at zero detuning"),
    }
    Ok(())
}
