//! Flat `key = value` configuration files and flag/config/default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::failure::Failure;

/// Every key a configuration file may set. Dashes and underscores are interchangeable.
pub const KNOWN_KEYS: &[&str] = &[
    "gamma",
    "delta",
    "tau",
    "key",
    "z_threshold",
    "entropy_temperature",
    "temperature",
    "top_p",
    "max_tokens",
    "seed",
    "model",
    "vocab",
    "testbed",
    "tokenizer",
    "corpus",
    "order",
    "alpha",
    "backoff",
    "partitions",
    "calibration_seed",
    "grid_points",
    "taus",
    "gammas",
    "deltas",
    "n_machine",
    "n_human",
    "harness_seed",
    "fpr_cap",
    "rhos",
    "rename_seeds",
    "resamples",
    "level",
    "bootstrap_seed",
    "tau_spike",
];

fn normalise(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// Lines are `key = value`. `#` and `;` start comments; `[section]` headers are ignored.
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Failure::config(format!("config line {}: expected key = value", n + 1)))?;
            let key = normalise(k);
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Failure::config(format!("config line {}: unknown key {key:?}", n + 1)));
            }
            let value = v.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(Failure::config(format!("config line {}: duplicate key {key:?}", n + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Resolves settings as flag, then config file, then default, and records the
/// effective value of each for the output metadata.
#[derive(Debug, Default)]
pub struct Resolver {
    file: ConfigFile,
    effective: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Self { file, effective: BTreeMap::new() }
    }

    fn file_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|s| s.parse::<T>().map_err(|e| Failure::config(format!("config key {key}: {e}"))))
            .transpose()
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, Failure>
    where
        T: FromStr + Clone + Into<Value>,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.effective.insert(key.to_string(), v.clone().into());
        Ok(v)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure>
    where
        T: FromStr + Clone + Into<Value>,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        self.effective.insert(key.to_string(), v.clone().map_or(Value::Null, Into::into));
        Ok(v)
    }

    /// Raw text of a setting, for values with their own parsers.
    pub fn text(&mut self, key: &str, flag: Option<String>, default: &str) -> String {
        let v = flag.or_else(|| self.file.get(key).map(str::to_string)).unwrap_or_else(|| default.to_string());
        self.effective.insert(key.to_string(), Value::String(v.clone()));
        v
    }

    pub fn optional_text(&mut self, key: &str, flag: Option<String>) -> Option<String> {
        let v = flag.or_else(|| self.file.get(key).map(str::to_string));
        self.effective.insert(key.to_string(), v.clone().map_or(Value::Null, Value::String));
        v
    }

    /// The secret key is recorded by fingerprint only. Returns the key and
    /// whether it fell back to the default.
    pub fn secret_key(&mut self, flag: Option<String>) -> Result<(u64, bool), Failure> {
        let (raw, defaulted) = match flag.or_else(|| self.file.get("key").map(str::to_string)) {
            Some(s) => (s, false),
            None => ("0".to_string(), true),
        };
        let key = parse_key(&raw)?;
        self.effective.insert(
            "key_fingerprint".into(),
            Value::String(sweetmark::params::key_fingerprint(key)),
        );
        Ok((key, defaulted))
    }

    pub fn record(&mut self, key: &str, value: Value) {
        self.effective.insert(key.to_string(), value);
    }

    pub fn effective(&self) -> Value {
        Value::Object(self.effective.clone().into_iter().collect())
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_key(s: &str) -> Result<u64, Failure> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    parsed.map_err(|_| Failure::config("key must be a 64-bit integer (decimal or 0x hex)"))
}

/// `none` (or `off`, or empty) disables gating.
pub fn parse_tau(s: &str) -> Result<Option<f64>, Failure> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "none" | "off" => Ok(None),
        t => t.parse::<f64>().map(Some).map_err(|_| Failure::config(format!("bad tau {s:?}"))),
    }
}

pub fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|_| Failure::config(format!("bad {what} value {x:?}"))))
        .collect()
}

pub fn parse_tau_list(s: &str) -> Result<Vec<Option<f64>>, Failure> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(parse_tau).collect()
}
