//! `cavimag parse`: inspect and validate a data file without running any
//! computation.

use std::path::Path;

use cavimag_core::io::{load_calibration, parse_spectrum_csv, parse_touchstone, ColumnMap};

use crate::config::Config;
use crate::CliError;

fn inferred_kind(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("s2p") | Some("S2P") => "touchstone",
        _ => "spectrum",
    }
}

pub fn run(
    config: &Config,
    file: &Path,
    kind: Option<&str>,
    _dry_run: bool,
) -> Result<(), CliError> {
    let kind = kind.unwrap_or_else(|| inferred_kind(file));
    let bytes = std::fs::read(file)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", file.display())))?;

    match kind {
        "touchstone" => {
            let rec = parse_touchstone(&bytes)?;
            let (f_lo, f_hi) = (rec.freq_ghz[0], rec.freq_ghz[rec.freq_ghz.len() - 1]);
            println!("touchstone v1 two-port: OK");
            println!("  points:    {}", rec.freq_ghz.len());
            println!("  range:     {f_lo} .. {f_hi} GHz");
            println!("  format:    {}", rec.format.token());
            println!("  impedance: {} ohm", rec.impedance_ohm);
            println!("  comments:  {}", rec.comments.len());
            let s21 = rec.s21();
            let min = s21.iter().map(|v| v.norm()).fold(f64::MAX, f64::min);
            println!("  min |S21|: {min:.6e}");
        }
        "spectrum" => {
            let columns = config
                .fit
                .as_ref()
                .map(|f| f.columns.clone())
                .unwrap_or_else(ColumnMap::complex_default);
            let s = parse_spectrum_csv(&bytes, &columns)?;
            println!("spectrum CSV: OK");
            println!("  points:         {}", s.len());
            println!(
                "  range:          {} .. {} GHz",
                s.grid_ghz()[0],
                s.grid_ghz()[s.len() - 1]
            );
            println!("  amplitude-only: {}", s.meta().amplitude_only);
        }
        "calibration" => {
            let table = load_calibration(&bytes)?;
            let (lo, hi) = table.d_range_mm();
            println!("calibration table: OK");
            println!("  rows:  {}", table.rows().len());
            println!("  d:     {lo} .. {hi} mm");
            let betas: Vec<f64> = table.rows().iter().map(|r| r.beta_mhz()).collect();
            let (bmin, bmax) = betas
                .iter()
                .fold((f64::MAX, f64::MIN), |(lo, hi), b| (lo.min(*b), hi.max(*b)));
            println!("  beta:  {bmin} .. {bmax} MHz");
        }
        other => {
            return Err(CliError::Validation(format!(
                "--kind '{other}': expected touchstone|spectrum|calibration"
            )))
        }
    }
    Ok(())
}
