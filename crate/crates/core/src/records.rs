//! Record streams (JSON lines or CSV) and run manifests.
//!
//! Floats are written with 17 significant digits so every binary64 value
//! survives a round trip; fields keep their insertion order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub type Record = Map<String, Value>;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("internal error: record {index} has fields [{found}] but the stream uses [{expected}]")]
    MixedSchema { index: usize, expected: String, found: String },
    #[error("internal error: value is not a JSON object")]
    NotAnObject,
    #[error("internal error: {0}")]
    Serialize(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format {s:?} (jsonl, csv)")),
        }
    }
}

/// Converts any serializable struct into a record.
pub fn to_record<T: Serialize>(v: &T) -> Result<Record, RecordError> {
    match serde_json::to_value(v).map_err(|e| RecordError::Serialize(e.to_string()))? {
        Value::Object(m) => Ok(m),
        _ => Err(RecordError::NotAnObject),
    }
}

/// Builds a record from `(key, value)` pairs in order.
#[macro_export]
macro_rules! record {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = $crate::records::Record::new();
        $( m.insert($k.to_string(), serde_json::json!($v)); )*
        m
    }};
}

/// Scientific notation with 17 significant digits; parses back to `x`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

fn write_json(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(out, x);
            }
            out.push(']');
        }
        Value::Object(m) => {
            out.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_json(out, x);
            }
            out.push('}');
        }
    }
}

/// One value rendered as JSON text with full-precision floats.
pub fn json_text(v: &Value) -> String {
    let mut s = String::new();
    write_json(&mut s, v);
    s
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => json_text(other),
    }
}

fn keys(r: &Record) -> Vec<&str> {
    r.keys().map(String::as_str).collect()
}

/// Serializes a homogeneous record stream.
pub fn emit_records(records: &[Record], format: Format) -> Result<Vec<u8>, RecordError> {
    if let Some(first) = records.first() {
        let want = keys(first);
        for (index, r) in records.iter().enumerate() {
            let got = keys(r);
            if got != want {
                return Err(RecordError::MixedSchema {
                    index,
                    expected: want.join(","),
                    found: got.join(","),
                });
            }
        }
    }
    match format {
        Format::Jsonl => {
            let mut out = String::new();
            for r in records {
                write_json(&mut out, &Value::Object(r.clone()));
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| RecordError::Serialize(e.to_string());
            if let Some(first) = records.first() {
                w.write_record(keys(first)).map_err(err)?;
            }
            for r in records {
                w.write_record(r.values().map(csv_cell)).map_err(err)?;
            }
            w.into_inner().map_err(|e| RecordError::Serialize(e.to_string()))
        }
    }
}

/// Parses a JSON-lines stream back into records.
pub fn parse_jsonl(text: &str) -> Result<Vec<Record>, RecordError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| match serde_json::from_str(l) {
            Ok(Value::Object(m)) => Ok(m),
            Ok(_) => Err(RecordError::NotAnObject),
            Err(e) => Err(RecordError::Serialize(e.to_string())),
        })
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance written next to every output stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub timestamp: String,
    pub command: String,
    pub arguments: Vec<String>,
    pub precision: String,
    pub format: Format,
    pub config: Value,
    /// Digest of the echoed config.
    pub input_digest: String,
    /// Digest of each output stream, keyed by its name.
    pub output_digests: BTreeMap<String, String>,
    /// Aggregate results of the run.
    pub summary: Value,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_default();
        s.push('\n');
        s
    }
}
