//! Flat key-value configuration with strict key checking.
//!
//! A run is described by a single flat TOML file plus command-line overrides;
//! overrides win. Every command consumes exactly the keys it understands and
//! anything left over is a hard error, so typos never silently fall back to
//! defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// Key-value store with take-semantics: reading a key removes it, and
/// [`ConfigMap::finish`] rejects whatever was never read.
pub struct ConfigMap {
    values: BTreeMap<String, toml::Value>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            let table: toml::Table = text
                .parse()
                .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
            for (key, value) in table {
                match value {
                    toml::Value::Table(_) => {
                        return Err(CliError::Config(format!(
                            "config key `{key}`: nested tables are not supported (flat keys only)"
                        )));
                    }
                    other => {
                        values.insert(key, other);
                    }
                }
            }
        }
        Ok(Self { values })
    }

    /// Apply a command-line override on top of the file contents.
    pub fn set(&mut self, key: &str, value: toml::Value) {
        self.values.insert(key.to_string(), value);
    }

    pub fn set_f64(&mut self, key: &str, value: Option<f64>) {
        if let Some(v) = value {
            self.set(key, toml::Value::Float(v));
        }
    }

    pub fn set_i64(&mut self, key: &str, value: Option<i64>) {
        if let Some(v) = value {
            self.set(key, toml::Value::Integer(v));
        }
    }

    pub fn set_string(&mut self, key: &str, value: Option<&str>) {
        if let Some(v) = value {
            self.set(key, toml::Value::String(v.to_string()));
        }
    }

    fn take(&mut self, key: &str) -> Option<toml::Value> {
        self.values.remove(key)
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(v)),
            Some(toml::Value::Integer(v)) => Ok(Some(v as f64)),
            Some(other) => Err(type_error(key, "a number", &other)),
        }
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if v >= 0 => Ok(Some(v as usize)),
            Some(other) => Err(type_error(key, "a non-negative integer", &other)),
        }
    }

    pub fn take_i64(&mut self, key: &str) -> Result<Option<i64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) => Ok(Some(v)),
            Some(other) => Err(type_error(key, "an integer", &other)),
        }
    }

    pub fn take_string(&mut self, key: &str) -> Result<Option<String>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::String(v)) => Ok(Some(v)),
            Some(other) => Err(type_error(key, "a string", &other)),
        }
    }

    pub fn take_f64_array(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        toml::Value::Float(v) => out.push(v),
                        toml::Value::Integer(v) => out.push(v as f64),
                        other => return Err(type_error(key, "an array of numbers", &other)),
                    }
                }
                Ok(Some(out))
            }
            Some(other) => Err(type_error(key, "an array of numbers", &other)),
        }
    }

    /// Every key must have been consumed by now.
    pub fn finish(self) -> Result<(), CliError> {
        if let Some(key) = self.values.keys().next() {
            return Err(CliError::Config(format!("unknown config key `{key}`")));
        }
        Ok(())
    }
}

fn type_error(key: &str, expected: &str, got: &toml::Value) -> CliError {
    CliError::Config(format!(
        "config key `{key}`: expected {expected}, got {}",
        got.type_str()
    ))
}

/// Required-key helper: turns a missing optional into a config error that
/// names the key.
pub fn required<T>(key: &str, value: Option<T>) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required config key `{key}`")))
}

/// Time-grid description shared by the commands that sweep over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

pub fn parse_spacing(value: &str) -> Result<Spacing, CliError> {
    match value {
        "linear" => Ok(Spacing::Linear),
        "log" => Ok(Spacing::Log),
        other => Err(CliError::Config(format!(
            "config key `t_spacing`: expected \"linear\" or \"log\", got \"{other}\""
        ))),
    }
}

/// Materialize a strictly increasing time grid.
pub fn time_grid(
    t_min: f64,
    t_max: f64,
    steps: usize,
    spacing: Spacing,
) -> Result<Vec<f64>, CliError> {
    if !t_min.is_finite() || t_min < 0.0 {
        return Err(CliError::Config(format!(
            "config key `t_min`: must be finite and non-negative, got {t_min}"
        )));
    }
    if !t_max.is_finite() || t_max < t_min {
        return Err(CliError::Config(format!(
            "config key `t_max`: must be finite and at least t_min, got {t_max}"
        )));
    }
    if steps == 0 {
        return Err(CliError::Config(
            "config key `t_steps`: must be at least 1".into(),
        ));
    }
    if steps == 1 {
        return Ok(vec![t_max]);
    }
    if t_max == t_min {
        return Err(CliError::Config(
            "config key `t_steps`: more than one step needs t_max > t_min".into(),
        ));
    }
    let grid: Vec<f64> = match spacing {
        Spacing::Linear => (0..steps)
            .map(|i| t_min + (t_max - t_min) * i as f64 / (steps - 1) as f64)
            .collect(),
        Spacing::Log => {
            if t_min <= 0.0 {
                return Err(CliError::Config(
                    "config key `t_min`: log spacing needs t_min > 0".into(),
                ));
            }
            let ratio = (t_max / t_min).ln();
            (0..steps)
                .map(|i| t_min * (ratio * i as f64 / (steps - 1) as f64).exp())
                .collect()
        }
    };
    for pair in grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(CliError::Config(
                "config key `t_steps`: grid too dense, points collide in floating point".into(),
            ));
        }
    }
    Ok(grid)
}
