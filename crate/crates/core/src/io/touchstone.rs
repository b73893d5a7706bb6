//! Touchstone v1 two-port reader and writer.
//!
//! Accepted files carry an option line `# <freq-unit> S <format> R <Z0>`,
//! optional `!` comments (preserved as metadata) and data rows of nine
//! whitespace-separated reals: frequency then S11, S21, S12, S22 as
//! value pairs in the declared format. Version-2 documents are rejected
//! explicitly.

use num_complex::Complex64;

use crate::model::{Provenance, Spectrum, SpectrumMeta};

use super::IoError;

/// Value-pair encodings of Touchstone v1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TouchstoneFormat {
    /// real, imaginary
    Ri,
    /// magnitude, angle in degrees
    Ma,
    /// 20·log10 magnitude in dB, angle in degrees
    Db,
}

impl TouchstoneFormat {
    fn decode(&self, a: f64, b: f64) -> Complex64 {
        match self {
            Self::Ri => Complex64::new(a, b),
            Self::Ma => Complex64::from_polar(a, b.to_radians()),
            Self::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(&self, v: Complex64) -> (f64, f64) {
        match self {
            Self::Ri => (v.re, v.im),
            Self::Ma => (v.norm(), v.arg().to_degrees()),
            Self::Db => {
                // A true zero has no dB representation; write a floor far
                // below any physical dynamic range.
                let mag = v.norm();
                let db = if mag > 0.0 {
                    20.0 * mag.log10()
                } else {
                    -400.0
                };
                (db, v.arg().to_degrees())
            }
        }
    }

    pub fn token(&self) -> &'static str {
        match self {
            Self::Ri => "RI",
            Self::Ma => "MA",
            Self::Db => "DB",
        }
    }
}

/// Parsed two-port network: frequencies in GHz and the four S-parameters
/// per sample in v1 column order (S11, S21, S12, S22).
#[derive(Debug, Clone, PartialEq)]
pub struct TouchstoneRecord {
    pub freq_ghz: Vec<f64>,
    pub s: Vec<[Complex64; 4]>,
    pub format: TouchstoneFormat,
    pub impedance_ohm: f64,
    pub comments: Vec<String>,
}

impl TouchstoneRecord {
    /// S21 per sample (port 2 from port 1).
    pub fn s21(&self) -> Vec<Complex64> {
        self.s.iter().map(|row| row[1]).collect()
    }

    /// View the S21 trace as a measured spectrum.
    pub fn to_spectrum(&self) -> Result<Spectrum, IoError> {
        Spectrum::new(
            self.freq_ghz.clone(),
            self.s21(),
            SpectrumMeta {
                provenance: Provenance::Measured,
                noise_sigma: None,
                amplitude_only: false,
            },
        )
        .map_err(|e| IoError::Format(e.to_string()))
    }
}

fn parse_finite(token: &str, line: usize) -> Result<f64, IoError> {
    let v: f64 = token.parse().map_err(|_| IoError::Parse {
        line,
        message: format!("'{token}' is not a number"),
    })?;
    if !v.is_finite() {
        return Err(IoError::Parse {
            line,
            message: format!("non-finite value '{token}'"),
        });
    }
    Ok(v)
}

/// Parse Touchstone v1 two-port content.
pub fn parse_touchstone(bytes: &[u8]) -> Result<TouchstoneRecord, IoError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| IoError::Format(format!("not valid UTF-8: {e}")))?;

    let mut format = None;
    let mut freq_scale_to_ghz = None;
    let mut impedance = 50.0;
    let mut comments = Vec::new();
    let mut freq_ghz: Vec<f64> = Vec::new();
    let mut s: Vec<[Complex64; 4]> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        // Strip trailing comments, preserving them.
        let (content, trailing) = match raw.find('!') {
            Some(pos) => (&raw[..pos], Some(raw[pos + 1..].trim().to_string())),
            None => (raw, None),
        };
        if let Some(c) = trailing {
            if !c.is_empty() {
                comments.push(c);
            }
        }
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            return Err(IoError::Format(format!(
                "line {line_no}: keyword '{content}' found; only Touchstone v1 is supported \
                 (v2 documents are rejected)"
            )));
        }
        if let Some(option) = content.strip_prefix('#') {
            if format.is_some() {
                return Err(IoError::Parse {
                    line: line_no,
                    message: "duplicate option line".to_string(),
                });
            }
            let tokens: Vec<String> = option
                .split_whitespace()
                .map(|t| t.to_ascii_uppercase())
                .collect();
            if tokens.len() != 5 || tokens[1] != "S" || tokens[3] != "R" {
                return Err(IoError::Parse {
                    line: line_no,
                    message: format!(
                        "malformed option line '#{option}'; expected '# <freq-unit> S <RI|MA|DB> R <Z0>'"
                    ),
                });
            }
            freq_scale_to_ghz = Some(match tokens[0].as_str() {
                "HZ" => 1e-9,
                "KHZ" => 1e-6,
                "MHZ" => 1e-3,
                "GHZ" => 1.0,
                other => {
                    return Err(IoError::Parse {
                        line: line_no,
                        message: format!("unknown frequency unit '{other}'"),
                    })
                }
            });
            format = Some(match tokens[2].as_str() {
                "RI" => TouchstoneFormat::Ri,
                "MA" => TouchstoneFormat::Ma,
                "DB" => TouchstoneFormat::Db,
                other => {
                    return Err(IoError::Parse {
                        line: line_no,
                        message: format!("unknown format '{other}'"),
                    })
                }
            });
            impedance = parse_finite(&tokens[4], line_no)?;
            continue;
        }

        // Data row.
        let Some(fmt) = format else {
            return Err(IoError::Parse {
                line: line_no,
                message: "data before the '#' option line".to_string(),
            });
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(IoError::Parse {
                line: line_no,
                message: format!("expected 9 values for a two-port row, got {}", fields.len()),
            });
        }
        let mut values = [0.0; 9];
        for (k, token) in fields.iter().enumerate() {
            values[k] = parse_finite(token, line_no)?;
        }
        let f = values[0] * freq_scale_to_ghz.unwrap();
        if let Some(last) = freq_ghz.last() {
            if f <= *last {
                return Err(IoError::Parse {
                    line: line_no,
                    message: format!("frequency not strictly increasing: {f} GHz after {last} GHz"),
                });
            }
        }
        freq_ghz.push(f);
        s.push([
            fmt.decode(values[1], values[2]),
            fmt.decode(values[3], values[4]),
            fmt.decode(values[5], values[6]),
            fmt.decode(values[7], values[8]),
        ]);
    }

    let Some(format) = format else {
        return Err(IoError::Format(
            "no '#' option line found; not a Touchstone v1 document".to_string(),
        ));
    };
    if freq_ghz.is_empty() {
        return Err(IoError::Format("no data rows found".to_string()));
    }
    Ok(TouchstoneRecord {
        freq_ghz,
        s,
        format,
        impedance_ohm: impedance,
        comments,
    })
}

/// Serialize a record in the requested value format (frequencies in GHz).
pub fn write_touchstone(record: &TouchstoneRecord, format: TouchstoneFormat) -> String {
    let mut out = String::new();
    for c in &record.comments {
        out.push_str("! ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(&format!(
        "# GHz S {} R {}\n",
        format.token(),
        record.impedance_ohm
    ));
    for (f, row) in record.freq_ghz.iter().zip(&record.s) {
        out.push_str(&format!("{f:.12e}"));
        for v in row {
            let (a, b) = format.encode(*v);
            out.push_str(&format!(" {a:.12e} {b:.12e}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_transmission_row() {
        let text = "# GHz S RI R 50\n6.2 0 0 1 0 0 0 0 0\n6.3 0 0 1 0 0 0 0 0\n";
        let rec = parse_touchstone(text.as_bytes()).unwrap();
        assert_eq!(rec.format, TouchstoneFormat::Ri);
        assert_eq!(rec.freq_ghz, vec![6.2, 6.3]);
        assert_eq!(rec.s21()[0], Complex64::new(1.0, 0.0));
        assert_eq!(rec.impedance_ohm, 50.0);
    }

    #[test]
    fn db_half_amplitude() {
        // Oracle: |S21| = 10^(dB/20); −6.0206 dB is amplitude 0.5.
        let text =
            "# GHz S DB R 50\n6.2 -40 0 -6.0206 0 -40 0 -40 0\n6.3 -40 0 -6.0206 0 -40 0 -40 0\n";
        let rec = parse_touchstone(text.as_bytes()).unwrap();
        assert!((rec.s21()[0].norm() - 0.5).abs() < 1e-4);
        assert!(rec.s21()[0].im.abs() < 1e-12);
    }

    #[test]
    fn ma_angle_conversion() {
        let text = "# MHz S MA R 50\n6200 1 0 0.5 90 0 0 0 0\n6300 1 0 0.5 90 0 0 0 0\n";
        let rec = parse_touchstone(text.as_bytes()).unwrap();
        assert!((rec.freq_ghz[0] - 6.2).abs() < 1e-12);
        let s21 = rec.s21()[0];
        assert!(s21.re.abs() < 1e-12);
        assert!((s21.im - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wrong_column_count_names_the_line() {
        let text = "# GHz S RI R 50\n6.2 0 0 1 0 0 0 0 0\n6.3 0 0 1 0\n";
        match parse_touchstone(text.as_bytes()) {
            Err(IoError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("9 values"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_monotone_frequency_names_the_line() {
        let text = "# GHz S RI R 50\n6.3 0 0 1 0 0 0 0 0\n6.2 0 0 1 0 0 0 0 0\n";
        match parse_touchstone(text.as_bytes()) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn v2_documents_are_rejected_with_a_clear_message() {
        let text = "[Version] 2.0\n# GHz S RI R 50\n";
        match parse_touchstone(text.as_bytes()) {
            Err(IoError::Format(msg)) => assert!(msg.contains("v1")),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn comments_are_preserved() {
        let text =
            "! VNA export\n# GHz S RI R 50\n6.2 0 0 1 0 0 0 0 0 ! cal run\n6.3 0 0 1 0 0 0 0 0\n";
        let rec = parse_touchstone(text.as_bytes()).unwrap();
        assert_eq!(rec.comments, vec!["VNA export", "cal run"]);
    }

    #[test]
    fn malformed_option_line_is_rejected() {
        for bad in [
            "# GHz Y RI R 50\n6.2 0 0 1 0 0 0 0 0\n",
            "# GHz S XX R 50\n6.2 0 0 1 0 0 0 0 0\n",
            "# furlongs S RI R 50\n6.2 0 0 1 0 0 0 0 0\n",
            "# GHz S RI 50\n6.2 0 0 1 0 0 0 0 0\n",
        ] {
            assert!(parse_touchstone(bad.as_bytes()).is_err(), "accepted: {bad}");
        }
    }

    #[test]
    fn cross_format_round_trip_agrees() {
        // The three encodings of one network must parse back to the same
        // complex values within 1e-9 relative.
        let rec = TouchstoneRecord {
            freq_ghz: (0..40).map(|i| 6.0 + 0.01 * i as f64).collect(),
            s: (0..40)
                .map(|i| {
                    let t = i as f64 * 0.37;
                    [
                        Complex64::from_polar(0.9, t),
                        Complex64::from_polar(0.4 + 0.01 * i as f64, -1.3 * t),
                        Complex64::from_polar(0.02, 2.0 * t),
                        Complex64::from_polar(0.7, 0.5 * t),
                    ]
                })
                .collect(),
            format: TouchstoneFormat::Ri,
            impedance_ohm: 50.0,
            comments: vec![],
        };
        let reference =
            parse_touchstone(write_touchstone(&rec, TouchstoneFormat::Ri).as_bytes()).unwrap();
        for fmt in [TouchstoneFormat::Ma, TouchstoneFormat::Db] {
            let other = parse_touchstone(write_touchstone(&rec, fmt).as_bytes()).unwrap();
            for (a_row, b_row) in reference.s.iter().zip(&other.s) {
                for (a, b) in a_row.iter().zip(b_row) {
                    assert!(
                        (a - b).norm() <= 1e-9 * a.norm().max(1e-12),
                        "{fmt:?}: {a} vs {b}"
                    );
                }
            }
        }
    }
}
