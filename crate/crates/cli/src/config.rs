//! TOML config files and their merge with command-line flags.
//!
//! A config file has one optional table per command plus `[run]` for the
//! global options:
//!
//! ```toml
//! [run]
//! units = "gaussian"
//! seed = 7
//!
//! [ring]
//! kappa = 10.0
//! phi1 = 1.5
//! steps = 64
//! ```
//!
//! Keys mirror the long flag names with `-` written as `_`. A flag given on
//! the command line replaces the file value; boolean flags can only switch a
//! setting on.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cli::{EquivArgs, FieldArgs, GammaArgs, GlobalArgs, LoopArgs, PhaseArgs, RingArgs};
use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub run: GlobalArgs,
    pub phase: PhaseArgs,
    #[serde(rename = "loop")]
    pub loop_: LoopArgs,
    pub equiv: EquivArgs,
    pub gamma: GammaArgs,
    pub ring: RingArgs,
    pub field: FieldArgs,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// `flags` on top of `file`: every flag that is set (not absent, not `false`)
/// wins.
pub fn overlay<T: Serialize + DeserializeOwned>(file: &T, flags: &T) -> Result<T, CliError> {
    let to_value = |v: &T| serde_json::to_value(v).map_err(|e| CliError::Usage(e.to_string()));
    let mut base = to_value(file)?;
    if let (Value::Object(base), Value::Object(top)) = (&mut base, to_value(flags)?) {
        for (k, v) in top {
            if !matches!(v, Value::Null | Value::Bool(false)) {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(base).map_err(|e| CliError::Usage(e.to_string()))
}
