//! CSV ingestion: measured spectra with a caller-supplied column map and
//! spacing-calibration tables.
//!
//! Dialect: comma separator, '.' decimal point, '#'-prefixed comment
//! lines, UTF-8, one header row naming the columns.

use num_complex::Complex64;

use crate::fit::{CalibrationRow, CalibrationTable};
use crate::model::{Provenance, Spectrum, SpectrumMeta};

use super::IoError;

/// Mapping from spectrum quantities to CSV column names. Either the
/// `re`/`im` pair or `magnitude` (optionally with `phase_deg`) must be
/// given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub frequency_ghz: String,
    pub re: Option<String>,
    pub im: Option<String>,
    pub magnitude: Option<String>,
    pub phase_deg: Option<String>,
}

impl ColumnMap {
    /// Conventional complex export: `f_GHz, re, im`.
    pub fn complex_default() -> Self {
        Self {
            frequency_ghz: "f_GHz".to_string(),
            re: Some("re".to_string()),
            im: Some("im".to_string()),
            magnitude: None,
            phase_deg: None,
        }
    }

    /// Conventional polar export: `f_GHz, magnitude, phase_deg`.
    pub fn polar_default() -> Self {
        Self {
            frequency_ghz: "f_GHz".to_string(),
            re: None,
            im: None,
            magnitude: Some("magnitude".to_string()),
            phase_deg: Some("phase_deg".to_string()),
        }
    }

    fn validate(&self) -> Result<(), IoError> {
        let cartesian = self.re.is_some() && self.im.is_some();
        let polar = self.magnitude.is_some();
        if cartesian == polar {
            return Err(IoError::Format(
                "column map must name either re+im or magnitude(+phase_deg)".to_string(),
            ));
        }
        Ok(())
    }
}

struct CsvReader<'a> {
    headers: Vec<String>,
    rows: Vec<(usize, Vec<&'a str>)>,
}

fn split_csv_line(line: &str) -> Vec<&str> {
    line.split(',').map(|c| c.trim()).collect()
}

fn read_csv(text: &str) -> Result<CsvReader<'_>, IoError> {
    let mut headers = None;
    let mut rows = Vec::new();
    let mut data_row = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if headers.is_none() {
            headers = Some(split_csv_line(line).into_iter().map(String::from).collect());
            continue;
        }
        data_row += 1;
        let cells = split_csv_line(line);
        let headers_len = headers.as_ref().map(|h: &Vec<String>| h.len()).unwrap();
        if cells.len() != headers_len {
            return Err(IoError::Parse {
                line: idx + 1,
                message: format!(
                    "expected {headers_len} cells per the header, got {}",
                    cells.len()
                ),
            });
        }
        rows.push((data_row, cells));
    }
    let headers = headers.ok_or_else(|| IoError::Format("no header row found".to_string()))?;
    Ok(CsvReader { headers, rows })
}

fn column_index(reader: &CsvReader<'_>, name: &str) -> Result<usize, IoError> {
    reader
        .headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| IoError::MissingColumn {
            name: name.to_string(),
        })
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64, IoError> {
    let v: f64 = cell.parse().map_err(|_| IoError::Cell {
        row,
        column: column.to_string(),
        message: format!("'{cell}' is not a number"),
    })?;
    if !v.is_finite() {
        return Err(IoError::Cell {
            row,
            column: column.to_string(),
            message: format!("non-finite value '{cell}'"),
        });
    }
    Ok(v)
}

/// Parse a measured spectrum per the column map. Phase columns are in
/// degrees and converted to radians; magnitude-only input is accepted
/// and marked `amplitude_only`.
pub fn parse_spectrum_csv(bytes: &[u8], map: &ColumnMap) -> Result<Spectrum, IoError> {
    map.validate()?;
    let text =
        std::str::from_utf8(bytes).map_err(|e| IoError::Format(format!("not valid UTF-8: {e}")))?;
    let reader = read_csv(text)?;

    let f_idx = column_index(&reader, &map.frequency_ghz)?;
    let mut grid = Vec::with_capacity(reader.rows.len());
    let mut values = Vec::with_capacity(reader.rows.len());
    let mut amplitude_only = false;

    if let (Some(re_name), Some(im_name)) = (&map.re, &map.im) {
        let re_idx = column_index(&reader, re_name)?;
        let im_idx = column_index(&reader, im_name)?;
        for (row, cells) in &reader.rows {
            grid.push(parse_cell(cells[f_idx], *row, &map.frequency_ghz)?);
            let re = parse_cell(cells[re_idx], *row, re_name)?;
            let im = parse_cell(cells[im_idx], *row, im_name)?;
            values.push(Complex64::new(re, im));
        }
    } else {
        let mag_name = map.magnitude.as_ref().unwrap();
        let mag_idx = column_index(&reader, mag_name)?;
        let phase_idx = match &map.phase_deg {
            Some(name) => Some((name.clone(), column_index(&reader, name)?)),
            None => None,
        };
        amplitude_only = phase_idx.is_none();
        for (row, cells) in &reader.rows {
            grid.push(parse_cell(cells[f_idx], *row, &map.frequency_ghz)?);
            let mag = parse_cell(cells[mag_idx], *row, mag_name)?;
            let value = match &phase_idx {
                Some((name, idx)) => {
                    let deg = parse_cell(cells[*idx], *row, name)?;
                    Complex64::from_polar(mag, deg.to_radians())
                }
                None => Complex64::new(mag, 0.0),
            };
            values.push(value);
        }
    }

    Spectrum::new(
        grid,
        values,
        SpectrumMeta {
            provenance: Provenance::Measured,
            noise_sigma: None,
            amplitude_only,
        },
    )
    .map_err(|e| IoError::Format(e.to_string()))
}

const CALIBRATION_COLUMNS: [&str; 5] = [
    "d_mm",
    "f_c_GHz",
    "kappa_cL_MHz",
    "kappa_cR_MHz",
    "beta0_MHz",
];

/// Load a spacing-calibration table. Expects the canonical unit-suffixed
/// headers `d_mm, f_c_GHz, kappa_cL_MHz, kappa_cR_MHz, beta0_MHz`
/// (case-insensitive); rows are sorted by spacing and all validation
/// violations are reported together.
pub fn load_calibration(bytes: &[u8]) -> Result<CalibrationTable, IoError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| IoError::Format(format!("not valid UTF-8: {e}")))?;
    let reader = read_csv(text)?;
    let mut idx = [0usize; 5];
    for (k, name) in CALIBRATION_COLUMNS.iter().enumerate() {
        idx[k] = column_index(&reader, name)?;
    }
    let mut rows = Vec::with_capacity(reader.rows.len());
    for (row, cells) in &reader.rows {
        let mut v = [0.0; 5];
        for (k, name) in CALIBRATION_COLUMNS.iter().enumerate() {
            v[k] = parse_cell(cells[idx[k]], *row, name)?;
        }
        rows.push(CalibrationRow {
            d_mm: v[0],
            f_c_ghz: v[1],
            kappa_l_mhz: v[2],
            kappa_r_mhz: v[3],
            beta0_mhz: v[4],
        });
    }
    CalibrationTable::new(rows).map_err(|e| match e {
        crate::fit::FitError::InvalidTable { violations } => IoError::Validation { violations },
        other => IoError::Format(other.to_string()),
    })
}

/// Serialize a calibration table with the canonical headers (17
/// significant digits, deterministic).
pub fn write_calibration(table: &CalibrationTable) -> String {
    let mut out = String::from("d_mm,f_c_GHz,kappa_cL_MHz,kappa_cR_MHz,beta0_MHz\n");
    for r in table.rows() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.d_mm, r.f_c_ghz, r.kappa_l_mhz, r.kappa_r_mhz, r.beta0_mhz
        ));
    }
    out
}
