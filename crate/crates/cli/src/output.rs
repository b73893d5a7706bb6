//! Result writing: one envelope JSON per run plus optional flat CSVs
//! per table for plotting tools. Output is deterministic: identical
//! configs and inputs produce byte-identical files.

use std::path::Path;

use cavimag_core::io::{NamedTable, ResultEnvelope};

use crate::config::Config;
use crate::CliError;

pub fn tool_tag() -> String {
    format!("cavimag {}", env!("CARGO_PKG_VERSION"))
}

/// Start an envelope tagged with the effective config and its digest.
pub fn new_envelope(config: &Config) -> ResultEnvelope {
    let mut env = ResultEnvelope::new(tool_tag(), config.digest.clone());
    env.set_parameter("effective_config", config.canonical.as_str());
    env.set_parameter("seed", config.seed as i64);
    env.set_parameter("noise_sigma", config.noise_sigma);
    env
}

fn table_csv(table: &NamedTable) -> String {
    let mut out = String::new();
    let header: Vec<String> = table
        .columns
        .iter()
        .map(|c| {
            if c.unit.is_empty() || c.unit == "1" {
                c.name.clone()
            } else {
                format!("{}_{}", c.name, c.unit)
            }
        })
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Write `results.json` (and per-table CSVs when enabled) into the
/// configured output directory.
pub fn write_results(config: &Config, env: &ResultEnvelope) -> Result<(), CliError> {
    std::fs::create_dir_all(&config.out_dir).map_err(|e| {
        CliError::Io(format!(
            "cannot create output directory {}: {e}",
            config.out_dir.display()
        ))
    })?;
    let json_path = config.out_dir.join("results.json");
    let bytes = env.save_bytes()?;
    write_file(&json_path, &bytes)?;
    if config.csv {
        for table in &env.tables {
            let path = config.out_dir.join(format!("{}.csv", table.name));
            write_file(&path, table_csv(table).as_bytes())?;
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
