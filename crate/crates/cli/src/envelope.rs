use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// One contract check: `value` against `tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Verdict {
    /// Passes when `value <= tolerance`.
    pub fn within(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Verdict { name: name.into(), pass: value <= tolerance, value, tolerance }
    }

    /// A yes/no check reported as 0 (pass) or 1.
    pub fn check(name: impl Into<String>, ok: bool) -> Self {
        Verdict { name: name.into(), pass: ok, value: if ok { 0.0 } else { 1.0 }, tolerance: 0.0 }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: String,
    pub config: Value,
    /// SHA-256 of the compact JSON of `command` and `config`.
    pub config_hash: String,
    /// Seconds since the Unix epoch; not part of the hash.
    pub timestamp: u64,
    pub results: Value,
    pub diagnostics: Value,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

impl Envelope {
    pub fn new(command: String, config: Value, results: Value, diagnostics: Value, verdicts: Vec<Verdict>) -> Self {
        let config_hash = config_hash(&command, &config);
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let pass = verdicts.iter().all(|v| v.pass);
        Envelope { command, config, config_hash, timestamp, results, diagnostics, verdicts, pass }
    }
}

pub fn config_hash(command: &str, config: &Value) -> String {
    let canonical = json!({ "command": command, "config": config }).to_string();
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// A number with its absolute error bound or convergence estimate.
pub fn quantity(value: f64, error: f64) -> Value {
    json!({ "value": value, "error": error })
}
