//! Merged key/value parameters: explicit flags over `--config` file over defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Clone, Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

/// Lower-case, `-` → `_`, so `N1`, `n1` and `--n-1` style keys agree.
fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Params {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn from_config(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", i + 1)))?;
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                Self::from_config(&text)
            }
        }
    }

    /// Overlay explicitly given flags.
    pub fn overlay<'a>(mut self, flags: impl IntoIterator<Item = (&'a str, Option<String>)>) -> Self {
        for (k, v) in flags {
            if let Some(v) = v {
                self.values.insert(normalize(k), v);
            }
        }
        self
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: Option<T>) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            Some(v) => v.parse::<T>().map_err(|e| CliError::Config(format!("{key} = {v:?}: {e}"))),
            None => default.ok_or_else(|| CliError::Config(format!("missing required parameter `{key}`"))),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str, default: Option<Vec<T>>) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<T>().map_err(|e| CliError::Config(format!("{key} entry {s:?}: {e}"))))
                .collect(),
            None => default.ok_or_else(|| CliError::Config(format!("missing required parameter `{key}`"))),
        }
    }
}

/// A σ given as a number, `opt`, or a multiple such as `0.5opt` / `opt/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaSpec {
    Value(f64),
    OptTimes(f64),
}

impl SigmaSpec {
    pub fn resolve(self, opt: f64) -> f64 {
        match self {
            SigmaSpec::Value(v) => v,
            SigmaSpec::OptTimes(f) => f * opt,
        }
    }
}

impl FromStr for SigmaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("expected a positive number, `opt`, `<f>opt` or `opt/<d>`, got {s:?}");
        let spec = if let Some(rest) = s.strip_prefix("opt") {
            match rest.strip_prefix('/') {
                Some(d) => SigmaSpec::OptTimes(1.0 / d.parse::<f64>().map_err(|_| bad())?),
                None if rest.is_empty() => SigmaSpec::OptTimes(1.0),
                None => return Err(bad()),
            }
        } else if let Some(f) = s.strip_suffix("opt") {
            SigmaSpec::OptTimes(f.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?)
        } else {
            SigmaSpec::Value(s.parse::<f64>().map_err(|_| bad())?)
        };
        let v = match spec {
            SigmaSpec::Value(v) | SigmaSpec::OptTimes(v) => v,
        };
        if v > 0.0 && v.is_finite() {
            Ok(spec)
        } else {
            Err(bad())
        }
    }
}
