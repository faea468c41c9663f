//! `key = value` run configuration with per-command schemas.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::CliError;

/// One accepted key. `default: None` marks a required key.
#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn key(name: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        default: Some(default),
        help,
    }
}

pub const fn required(name: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        default: None,
        help,
    }
}

/// Fully resolved settings for one subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: String,
    values: BTreeMap<String, String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Splits `key = value` lines, dropping `#` comments and blank lines.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(config_err(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Resolves a configuration: schema defaults, then the file, then overrides.
pub fn parse_config(
    command: &str,
    schema: &[KeySpec],
    text: &str,
    overrides: &[(String, String)],
) -> Result<RunConfig, CliError> {
    let known = |k: &str| schema.iter().any(|s| s.name == k);
    let mut values = BTreeMap::new();
    for s in schema {
        if let Some(d) = s.default {
            values.insert(s.name.to_string(), d.to_string());
        }
    }
    let mut seen = Vec::new();
    for (k, v) in parse_pairs(text)? {
        if !known(&k) {
            return Err(config_err(format!("unknown key '{k}' for {command}")));
        }
        if seen.contains(&k) {
            return Err(config_err(format!("key '{k}' set twice in config file")));
        }
        seen.push(k.clone());
        values.insert(k, v);
    }
    for (k, v) in overrides {
        if !known(k) {
            return Err(config_err(format!("option '{k}' does not apply to {command}")));
        }
        values.insert(k.clone(), v.clone());
    }
    for s in schema {
        if !values.contains_key(s.name) {
            return Err(config_err(format!("missing required key '{}'", s.name)));
        }
    }
    Ok(RunConfig {
        command: command.to_string(),
        values,
    })
}

impl RunConfig {
    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("key '{key}' not in schema"))
    }

    pub fn string(&self, key: &str) -> String {
        self.raw(key).to_string()
    }

    /// `None` for an empty value.
    pub fn optional(&self, key: &str) -> Option<&str> {
        Some(self.raw(key)).filter(|v| !v.is_empty())
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| config_err(format!("malformed value '{v}' for '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let x: f64 = self.parse(key)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(config_err(format!("'{key}' must be finite")))
        }
    }

    /// A finite value satisfying `ok`, else a range error naming `rule`.
    pub fn f64_where(&self, key: &str, rule: &str, ok: impl Fn(f64) -> bool) -> Result<f64, CliError> {
        let x = self.f64(key)?;
        if ok(x) {
            Ok(x)
        } else {
            Err(config_err(format!("'{key}' = {x} out of range: must be {rule}")))
        }
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        self.f64_where(key, "> 0", |x| x > 0.0)
    }

    pub fn count(&self, key: &str, min: usize) -> Result<usize, CliError> {
        let n: usize = self.parse(key)?;
        if n < min {
            return Err(config_err(format!("'{key}' = {n} out of range: must be >= {min}")));
        }
        Ok(n)
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            v => Err(config_err(format!("'{key}' must be true or false, got '{v}'"))),
        }
    }

    /// Comma-separated finite numbers.
    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        parse_list(self.raw(key)).map_err(|m| config_err(format!("'{key}': {m}")))
    }

    pub fn vec3(&self, key: &str) -> Result<[f64; 3], CliError> {
        let v = self.list(key)?;
        <[f64; 3]>::try_from(v.as_slice())
            .map_err(|_| config_err(format!("'{key}' needs three components, got {}", v.len())))
    }

    /// The resolved configuration as `key = value` lines, loadable with
    /// `--config`.
    pub fn manifest(&self) -> String {
        let mut out = format!("# resolved configuration for `geoecon {}`\n", self.command);
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(format!("malformed number '{s}'")),
        })
        .collect()
}
