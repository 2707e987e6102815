// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Layering of built-in defaults, a JSON config file and explicit flags.

use std::fmt;
use std::path::Path;

use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// A run failure and its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or parameter values.
    Invalid(String),
    /// A fit did not converge.
    Fit(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Fit(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Fit(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<spinmem_core::Error> for Failure {
    fn from(e: spinmem_core::Error) -> Self {
        match e {
            spinmem_core::Error::FitFailure { .. } => Failure::Fit(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub type RunResult<T> = std::result::Result<T, Failure>;

pub fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

/// Reads a config object. A sidecar from an earlier run is accepted and
/// its `config` member used.
pub fn load(path: &Path) -> RunResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| invalid(format!("malformed config {}: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(invalid(format!("config {} must be a JSON object", path.display())));
    };
    if obj.contains_key("tool") {
        match obj.remove("config") {
            Some(Value::Object(inner)) => return Ok(inner),
            _ => return Err(invalid(format!("sidecar {} has no config object", path.display()))),
        }
    }
    Ok(obj)
}

/// Parsed flags, overlaid with config values wherever the flag was not
/// given explicitly.
pub fn merge<T: Serialize + DeserializeOwned + Clone>(
    parsed: &T,
    matches: &ArgMatches,
    config: Option<&Map<String, Value>>,
    command: &str,
) -> RunResult<T> {
    let Some(config) = config else {
        return Ok(parsed.clone());
    };
    let mut value = serde_json::to_value(parsed).expect("arguments serialize");
    let obj = value.as_object_mut().expect("arguments are a struct");
    for (key, v) in config {
        if key == "command" {
            if v.as_str() != Some(command) {
                return Err(invalid(format!("config is for command {v}, not {command}")));
            }
            continue;
        }
        if !obj.contains_key(key) {
            return Err(invalid(format!("unknown config key `{key}` for {command}")));
        }
        if !explicit(matches, key) {
            obj.insert(key.clone(), v.clone());
        }
    }
    serde_json::from_value(value).map_err(|e| invalid(format!("malformed config: {e}")))
}

fn explicit(matches: &ArgMatches, id: &str) -> bool {
    matches.ids().any(|i| i.as_str() == id) && matches.value_source(id) == Some(ValueSource::CommandLine)
}

/// Config echo written into the sidecar; feeding it back reproduces the run.
pub fn echo<T: Serialize>(command: &str, args: &T) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    v.as_object_mut().expect("arguments are a struct").insert("command".into(), Value::String(command.into()));
    v
}
