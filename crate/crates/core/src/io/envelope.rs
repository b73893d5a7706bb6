//! Deterministic result envelope: one self-describing JSON document per
//! run, carrying the schema version, the configuration digest, the full
//! parameter set and named numeric tables with units.
//!
//! Serialization is canonical: stable key order and floats written with
//! 17 significant digits, so identical results are byte-identical files
//! and every finite double (including negative zero) survives a
//! save-load-save round trip bit-exactly.

use std::collections::BTreeMap;

use super::IoError;

/// Schema tag written into every envelope.
pub const SCHEMA: &str = "cavimag-results/1";

/// A scalar run parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        Self::Int(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

/// One table column: name plus the physical unit of its values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub unit: String,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// A named numeric table (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct NamedTable {
    pub name: String,
    pub columns: Vec<ColumnSpec>,
    pub rows: Vec<Vec<f64>>,
}

impl NamedTable {
    pub fn new(
        name: impl Into<String>,
        columns: Vec<ColumnSpec>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, IoError> {
        let name = name.into();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(IoError::Format(format!(
                    "table '{name}' row {i} has {} cells for {} columns",
                    row.len(),
                    columns.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(IoError::Format(format!(
                        "table '{name}' row {i}, column {j}: non-finite value"
                    )));
                }
            }
        }
        Ok(Self {
            name,
            columns,
            rows,
        })
    }
}

/// The full result document.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultEnvelope {
    pub schema: String,
    /// Creation metadata: the producing tool and version. Deliberately
    /// excludes wall-clock time so identical runs produce identical bytes.
    pub tool: String,
    /// Digest of the effective configuration that produced this result.
    pub config_digest: String,
    pub parameters: BTreeMap<String, ParamValue>,
    pub tables: Vec<NamedTable>,
}

impl ResultEnvelope {
    pub fn new(tool: impl Into<String>, config_digest: impl Into<String>) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            tool: tool.into(),
            config_digest: config_digest.into(),
            parameters: BTreeMap::new(),
            tables: Vec::new(),
        }
    }

    pub fn set_parameter(&mut self, name: impl Into<String>, value: impl Into<ParamValue>) {
        self.parameters.insert(name.into(), value.into());
    }

    pub fn push_table(&mut self, table: NamedTable) {
        self.tables.push(table);
    }

    pub fn table(&self, name: &str) -> Option<&NamedTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Canonical serialization.
    pub fn save_bytes(&self) -> Result<Vec<u8>, IoError> {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"schema\": {},\n", json_string(&self.schema)));
        out.push_str(&format!("  \"tool\": {},\n", json_string(&self.tool)));
        out.push_str(&format!(
            "  \"config_digest\": {},\n",
            json_string(&self.config_digest)
        ));
        out.push_str("  \"parameters\": {");
        let mut first = true;
        for (key, value) in &self.parameters {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str("\n    ");
            out.push_str(&json_string(key));
            out.push_str(": ");
            out.push_str(&param_json(value)?);
        }
        if !self.parameters.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("},\n");
        out.push_str("  \"tables\": [");
        for (t_idx, table) in self.tables.iter().enumerate() {
            if t_idx > 0 {
                out.push(',');
            }
            out.push_str("\n    {\n");
            out.push_str(&format!("      \"name\": {},\n", json_string(&table.name)));
            out.push_str("      \"columns\": [");
            for (c_idx, c) in table.columns.iter().enumerate() {
                if c_idx > 0 {
                    out.push(',');
                }
                out.push_str(&format!(
                    "{{\"name\": {}, \"unit\": {}}}",
                    json_string(&c.name),
                    json_string(&c.unit)
                ));
            }
            out.push_str("],\n");
            out.push_str("      \"rows\": [");
            for (r_idx, row) in table.rows.iter().enumerate() {
                if r_idx > 0 {
                    out.push(',');
                }
                out.push_str("\n        [");
                for (v_idx, v) in row.iter().enumerate() {
                    if v_idx > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&float_json(*v)?);
                }
                out.push(']');
            }
            if !table.rows.is_empty() {
                out.push_str("\n      ");
            }
            out.push_str("]\n    }");
        }
        if !self.tables.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("]\n}\n");
        Ok(out.into_bytes())
    }

    /// Parse an envelope produced by [`Self::save_bytes`].
    pub fn load_bytes(bytes: &[u8]) -> Result<Self, IoError> {
        let value: serde_json::Value = serde_json::from_slice(bytes)
            .map_err(|e| IoError::Format(format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| IoError::Format("top level is not an object".to_string()))?;

        let get_str = |key: &str| -> Result<String, IoError> {
            obj.get(key)
                .and_then(|v| v.as_str())
                .map(String::from)
                .ok_or_else(|| IoError::Format(format!("missing string field '{key}'")))
        };
        let schema = get_str("schema")?;
        if schema != SCHEMA {
            return Err(IoError::Format(format!(
                "unsupported schema '{schema}' (expected '{SCHEMA}')"
            )));
        }

        let mut parameters = BTreeMap::new();
        let params_obj = obj
            .get("parameters")
            .and_then(|v| v.as_object())
            .ok_or_else(|| IoError::Format("missing object field 'parameters'".to_string()))?;
        for (key, v) in params_obj {
            parameters.insert(key.clone(), json_to_param(key, v)?);
        }

        let mut tables = Vec::new();
        let tables_arr = obj
            .get("tables")
            .and_then(|v| v.as_array())
            .ok_or_else(|| IoError::Format("missing array field 'tables'".to_string()))?;
        for t in tables_arr {
            let t_obj = t
                .as_object()
                .ok_or_else(|| IoError::Format("table entry is not an object".to_string()))?;
            let name = t_obj
                .get("name")
                .and_then(|v| v.as_str())
                .ok_or_else(|| IoError::Format("table without a name".to_string()))?
                .to_string();
            let mut columns = Vec::new();
            for c in t_obj
                .get("columns")
                .and_then(|v| v.as_array())
                .ok_or_else(|| IoError::Format(format!("table '{name}' has no columns")))?
            {
                let c_obj = c.as_object().ok_or_else(|| {
                    IoError::Format(format!("table '{name}': column is not an object"))
                })?;
                columns.push(ColumnSpec::new(
                    c_obj.get("name").and_then(|v| v.as_str()).ok_or_else(|| {
                        IoError::Format(format!("table '{name}': unnamed column"))
                    })?,
                    c_obj
                        .get("unit")
                        .and_then(|v| v.as_str())
                        .unwrap_or_default(),
                ));
            }
            let mut rows = Vec::new();
            for r in t_obj
                .get("rows")
                .and_then(|v| v.as_array())
                .ok_or_else(|| IoError::Format(format!("table '{name}' has no rows array")))?
            {
                let cells = r.as_array().ok_or_else(|| {
                    IoError::Format(format!("table '{name}': row is not an array"))
                })?;
                let mut row = Vec::with_capacity(cells.len());
                for cell in cells {
                    row.push(cell.as_f64().ok_or_else(|| {
                        IoError::Format(format!("table '{name}': non-numeric cell"))
                    })?);
                }
                rows.push(row);
            }
            tables.push(NamedTable::new(name, columns, rows)?);
        }

        Ok(Self {
            schema,
            tool: get_str("tool")?,
            config_digest: get_str("config_digest")?,
            parameters,
            tables,
        })
    }
}

fn json_to_param(key: &str, v: &serde_json::Value) -> Result<ParamValue, IoError> {
    match v {
        serde_json::Value::Bool(b) => Ok(ParamValue::Bool(*b)),
        serde_json::Value::String(s) => Ok(ParamValue::Text(s.clone())),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                // Integers are written without a decimal point or exponent.
                if !n.to_string().contains(['.', 'e', 'E']) {
                    return Ok(ParamValue::Int(i));
                }
            }
            n.as_f64().map(ParamValue::Float).ok_or_else(|| {
                IoError::Format(format!("parameter '{key}': unrepresentable number"))
            })
        }
        other => Err(IoError::Format(format!(
            "parameter '{key}': unsupported value {other}"
        ))),
    }
}

/// JSON string escaping (control characters, quote, backslash).
fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical float encoding: 17 significant digits in scientific
/// notation, which identifies every finite double uniquely.
fn float_json(v: f64) -> Result<String, IoError> {
    if !v.is_finite() {
        return Err(IoError::Format(
            "non-finite floats cannot be serialized".to_string(),
        ));
    }
    Ok(format!("{v:.16e}"))
}

fn param_json(value: &ParamValue) -> Result<String, IoError> {
    Ok(match value {
        ParamValue::Float(v) => float_json(*v)?,
        ParamValue::Int(v) => v.to_string(),
        ParamValue::Text(s) => json_string(s),
        ParamValue::Bool(b) => b.to_string(),
    })
}
