//! Flat `key = value` run configuration.
//!
//! Blank lines and everything after `#` are ignored. Keys may appear once.
//! Values given on the command line override the file and are reported as
//! line 0.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, (String, usize)>,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(config_err(line, format!("expected key = value, got {body:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(config_err(line, format!("invalid key {key:?}")));
            }
            if value.is_empty() {
                return Err(config_err(line, format!("missing value for {key}")));
            }
            if let Some((_, first)) = entries.get(key) {
                return Err(config_err(line, format!("duplicate key {key} (first set on line {first})")));
            }
            entries.insert(key.to_string(), (value.to_string(), line));
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets or overrides a value.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), (value.to_string(), 0));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    /// Line on which `key` was set, 0 when it came from the command line.
    pub fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |&(_, l)| l)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err(*line, format!("cannot parse {key} = {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some((v, line)) = self.entries.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| s.trim().parse().map_err(|_| config_err(*line, format!("cannot parse {key} entry {s:?}"))))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Rejects keys outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        for (k, (_, line)) in &self.entries {
            if !known.contains(&k.as_str()) {
                return Err(config_err(*line, format!("unknown key {k}")));
            }
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, (v, _))| (k.as_str(), v.as_str()))
    }
}

pub const MODEL_KEYS: [&str; 7] = ["t1", "t2", "t3", "t4", "lambda", "mu", "q"];

/// Model couplings with the defaults of [`ModelParams::default`].
pub fn model_params(cfg: &Config) -> Result<ModelParams> {
    let d = ModelParams::default();
    let p = ModelParams {
        t1: cfg.get_or("t1", d.t1)?,
        t2: cfg.get_or("t2", d.t2)?,
        t3: cfg.get_or("t3", d.t3)?,
        t4: cfg.get_or("t4", d.t4)?,
        lambda: cfg.get_or("lambda", d.lambda)?,
        mu: cfg.get_or("mu", d.mu)?,
        q: cfg.get_or("q", d.q)?,
    };
    p.validate().map_err(|e| config_err(0, e.to_string()))?;
    Ok(p)
}

/// Canonical `key = value` form of the couplings, in field order.
pub fn params_to_pairs(p: &ModelParams) -> Vec<(&'static str, String)> {
    vec![
        ("t1", p.t1.to_string()),
        ("t2", p.t2.to_string()),
        ("t3", p.t3.to_string()),
        ("t4", p.t4.to_string()),
        ("lambda", p.lambda.to_string()),
        ("mu", p.mu.to_string()),
        ("q", p.q.to_string()),
    ]
}
