//! Flat key=value experiment configuration: file values first, command-line
//! overrides on top, everything logged into the output metadata.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Config::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            cfg.values
                .insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn set_default(&mut self, key: &str, value: impl ToString) {
        self.values
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, String> {
        self.values
            .get(key)
            .ok_or_else(|| format!("missing config key {key}"))?
            .parse()
            .map_err(|_| format!("config key {key} is not a number"))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, String> {
        self.values
            .get(key)
            .ok_or_else(|| format!("missing config key {key}"))?
            .parse()
            .map_err(|_| format!("config key {key} is not an integer"))
    }

    pub fn get_u64(&self, key: &str) -> Result<u64, String> {
        self.values
            .get(key)
            .ok_or_else(|| format!("missing config key {key}"))?
            .parse()
            .map_err(|_| format!("config key {key} is not an integer"))
    }

    /// Comma-separated float list.
    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>, String> {
        self.values
            .get(key)
            .ok_or_else(|| format!("missing config key {key}"))?
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| format!("bad number in {key}: {t}"))
            })
            .collect()
    }

    /// Canonical text of the fully resolved configuration.
    pub fn canonical(&self, command: &str) -> String {
        let mut out = format!("command={command}\n");
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn hash(&self, command: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical(command).as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }
}

/// CSV assembly with the trailing metadata block every report carries.
pub struct Report {
    pub header: String,
    pub rows: Vec<String>,
    pub violations: Vec<String>,
}

impl Report {
    pub fn new(header: &str) -> Self {
        Report {
            header: header.to_string(),
            rows: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn row(&mut self, row: String) {
        self.rows.push(row);
    }

    pub fn violation(&mut self, message: impl Into<String>) {
        self.violations.push(message.into());
    }

    pub fn to_csv(&self, command: &str, cfg: &Config, extra_meta: &[(String, String)]) -> String {
        let mut out = String::new();
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out.push_str(&format!("# tool_version={}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# config_hash={}\n", cfg.hash(command)));
        for (k, v) in cfg.iter() {
            out.push_str(&format!("# cfg:{k}={v}\n"));
        }
        for (k, v) in extra_meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        for v in &self.violations {
            out.push_str(&format!("# violation:{v}\n"));
        }
        out
    }
}
