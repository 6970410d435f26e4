//! Flat `key = value` run configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use eplab_core::hyperbolic::System;

pub const KEYS: [&str; 14] =
    ["system", "eps", "delta", "gamma1", "k1", "gamma2", "k2", "L", "ncells", "cfl", "T", "a", "output_dir", "seed"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Required by `run`; sweeps and checks ignore it.
    pub system: Option<System>,
    pub eps: f64,
    pub delta: f64,
    pub gamma1: f64,
    pub k1: f64,
    pub gamma2: f64,
    pub k2: f64,
    pub length: f64,
    pub ncells: usize,
    pub cfl: f64,
    pub end_time: f64,
    pub amplitude: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: None,
            eps: 1e-2,
            delta: 1.0,
            gamma1: 2.0,
            k1: 1.0,
            gamma2: 2.0,
            k2: 1.0,
            length: 1.0,
            ncells: 200,
            cfl: 0.8,
            end_time: 0.2,
            amplitude: 0.05,
            output_dir: PathBuf::from("output"),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Resolved configuration as `(key, value)` pairs in canonical key order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let system = self.system.map_or_else(|| "unset".to_string(), |s| s.to_string());
        let values = [
            system,
            format!("{:e}", self.eps),
            format!("{:e}", self.delta),
            format!("{:e}", self.gamma1),
            format!("{:e}", self.k1),
            format!("{:e}", self.gamma2),
            format!("{:e}", self.k2),
            format!("{:e}", self.length),
            self.ncells.to_string(),
            format!("{:e}", self.cfl),
            format!("{:e}", self.end_time),
            format!("{:e}", self.amplitude),
            self.output_dir.display().to_string(),
            self.seed.to_string(),
        ];
        KEYS.iter().map(|k| k.to_string()).zip(values).collect()
    }

    fn check_ranges(&self, out: &mut Vec<Violation>) {
        let mut range = |key: &'static str, ok: bool, value: String, expected: &'static str| {
            if !ok {
                out.push(Violation::Range { key, value, expected });
            }
        };
        range("eps", self.eps > 0.0 && self.eps.is_finite(), self.eps.to_string(), "eps > 0");
        range("delta", self.delta >= 0.0 && self.delta.is_finite(), self.delta.to_string(), "delta >= 0");
        range("gamma1", self.gamma1 > 1.0 && self.gamma1.is_finite(), self.gamma1.to_string(), "gamma1 > 1");
        range("k1", self.k1 > 0.0 && self.k1.is_finite(), self.k1.to_string(), "k1 > 0");
        range("gamma2", self.gamma2 > 1.0 && self.gamma2.is_finite(), self.gamma2.to_string(), "gamma2 > 1");
        range("k2", self.k2 > 0.0 && self.k2.is_finite(), self.k2.to_string(), "k2 > 0");
        range("L", self.length > 0.0 && self.length.is_finite(), self.length.to_string(), "L > 0");
        range("ncells", (2..=1_000_000).contains(&self.ncells), self.ncells.to_string(), "2 <= ncells <= 1000000");
        range("cfl", self.cfl > 0.0 && self.cfl <= 1.0, self.cfl.to_string(), "0 < cfl <= 1");
        range("T", self.end_time > 0.0 && self.end_time.is_finite(), self.end_time.to_string(), "T > 0");
        range("a", self.amplitude.abs() <= 0.5, self.amplitude.to_string(), "|a| <= 0.5");
        if self.system == Some(System::Bep) && self.delta == 0.0 {
            out.push(Violation::Range { key: "delta", value: "0".into(), expected: "delta > 0 for system = bep" });
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Syntax { line: usize, text: String },
    UnknownKey { line: usize, key: String },
    Duplicate { line: usize, key: String, first: usize },
    Parse { line: usize, key: String, value: String },
    Range { key: &'static str, value: String, expected: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax { line, text } => write!(f, "line {line}: expected 'key = value', got '{text}'"),
            Self::UnknownKey { line, key } => write!(f, "line {line}: unknown key '{key}'"),
            Self::Duplicate { line, key, first } => {
                write!(f, "line {line}: duplicate key '{key}' (first set on line {first})")
            }
            Self::Parse { line, key, value } => write!(f, "line {line}: cannot parse '{value}' for key '{key}'"),
            Self::Range { key, value, expected } => write!(f, "{key} = {value} is out of range ({expected})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid configuration:\n{}", .violations.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

/// Parses and validates a configuration, collecting every violation.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut violations = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            violations.push(Violation::Syntax { line, text: content.to_string() });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            violations.push(Violation::UnknownKey { line, key: key.to_string() });
            continue;
        }
        if let Some(&first) = seen.get(key) {
            violations.push(Violation::Duplicate { line, key: key.to_string(), first });
            continue;
        }
        seen.insert(key.to_string(), line);
        let bad = || Violation::Parse { line, key: key.to_string(), value: value.to_string() };
        let float = |slot: &mut f64| value.parse::<f64>().map(|v| *slot = v).map_err(|_| bad());
        let parsed = match key {
            "system" => value.parse::<System>().map(|s| cfg.system = Some(s)).map_err(|_| bad()),
            "eps" => float(&mut cfg.eps),
            "delta" => float(&mut cfg.delta),
            "gamma1" => float(&mut cfg.gamma1),
            "k1" => float(&mut cfg.k1),
            "gamma2" => float(&mut cfg.gamma2),
            "k2" => float(&mut cfg.k2),
            "L" => float(&mut cfg.length),
            "cfl" => float(&mut cfg.cfl),
            "T" => float(&mut cfg.end_time),
            "a" => float(&mut cfg.amplitude),
            "ncells" => value.parse::<usize>().map(|v| cfg.ncells = v).map_err(|_| bad()),
            "seed" => value.parse::<u64>().map(|v| cfg.seed = v).map_err(|_| bad()),
            "output_dir" if !value.is_empty() => {
                cfg.output_dir = PathBuf::from(value);
                Ok(())
            }
            _ => Err(bad()),
        };
        if let Err(v) = parsed {
            violations.push(v);
        }
    }
    cfg.check_ranges(&mut violations);
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { violations })
    }
}
