//! Versioned certificates and their canonical, atomically written JSON form.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub schema_version: u32,
    pub claim: String,
    pub parameters: Value,
    pub witness: Value,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
}

impl Certificate {
    pub fn new(claim: &str, parameters: Value, witness: Value, failure: Option<String>, seed: Option<u64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            claim: claim.to_string(),
            parameters,
            witness,
            verified: failure.is_none(),
            failure,
            seed,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    /// Pretty JSON with keys sorted at every level and a trailing newline.
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("certificate serializes");
        let mut s = serde_json::to_string_pretty(&sorted(v)).expect("value serializes");
        s.push('\n');
        s
    }
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect::<Map<_, _>>())
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(sorted).collect()),
        other => other,
    }
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn emit_certificate(cert: &Certificate, path: &Path) -> std::io::Result<()> {
    write_atomic(path, cert.canonical_json().as_bytes())
}

/// A CSV table; cells are written verbatim, so callers keep them free of commas and quotes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}
