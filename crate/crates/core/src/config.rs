//! Flat key-value configuration files: `key = value` lines, `#` comments,
//! no nesting. Floating-point values are written with Rust's shortest
//! round-trip formatting, so serialize → parse is exact (beyond the 15
//! significant digits required of the format).

use crate::domain::{CuspProfile, ExponentConfig};
use crate::error::NbError;

/// Parsed config: insertion-ordered key-value pairs plus lookup helpers that
/// produce errors naming the offending key (and line, for parse errors).
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: Vec<(String, String)>,
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, NbError> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(NbError::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(NbError::Config(format!("line {}: empty key", lineno + 1)));
            }
            entries.push((key, v.trim().to_string()));
        }
        Ok(KvConfig { entries })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        if let Some(e) = self.entries.iter_mut().find(|(k, _)| k == key) {
            e.1 = value;
        } else {
            self.entries.push((key.to_string(), value));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, NbError> {
        self.get(key)
            .ok_or_else(|| NbError::Config(format!("missing required key `{key}`")))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, NbError> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| NbError::Config(format!("key `{key}`: `{v}` is not a number")))
            })
            .transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, NbError> {
        self.require(key)?;
        Ok(self.get_f64(key)?.unwrap())
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, NbError> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    NbError::Config(format!("key `{key}`: `{v}` is not a non-negative integer"))
                })
            })
            .transpose()
    }

    pub fn require_usize(&self, key: &str) -> Result<usize, NbError> {
        self.require(key)?;
        Ok(self.get_usize(key)?.unwrap())
    }

    /// Comma-separated list of floats.
    pub fn require_f64_list(&self, key: &str) -> Result<Vec<f64>, NbError> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>().map_err(|_| {
                    NbError::Config(format!("key `{key}`: `{s}` is not a number"))
                })
            })
            .collect()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

fn join_f64_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl CuspProfile {
    /// Keys `n` and `gammas` (comma-separated).
    pub fn to_kv(&self, kv: &mut KvConfig) {
        kv.set("n", self.n);
        kv.set("gammas", join_f64_list(&self.gammas));
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self, NbError> {
        let n = kv.require_usize("n")?;
        let gammas = kv.require_f64_list("gammas")?;
        CuspProfile::new(n, gammas)
    }
}

impl ExponentConfig {
    /// Keys `p`, `q`, `r`.
    pub fn to_kv(&self, kv: &mut KvConfig) {
        kv.set("p", self.p);
        kv.set("q", self.q);
        kv.set("r", self.r);
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self, NbError> {
        ExponentConfig::new(kv.require_f64("p")?, kv.require_f64("q")?, kv.require_f64("r")?)
    }
}
