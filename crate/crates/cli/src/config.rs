//! Flat `key = value` run configuration.
//!
//! Values are resolved from four layers, highest first: command-line flags,
//! `KAR_<KEY>` environment variables, the config file, built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Default,
    File,
    Env,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Default => "default",
            Origin::File => "file",
            Origin::Env => "env",
            Origin::Flag => "flag",
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Path,
    Uint,
    Float,
}

/// Every accepted key with its type and default (empty means unset).
const KEYS: &[(&str, Kind, &str)] = &[
    ("lexicon", Kind::Path, ""),
    ("word_vectors", Kind::Path, ""),
    ("train_data", Kind::Path, ""),
    ("dev_data", Kind::Path, ""),
    ("train_enriched", Kind::Path, ""),
    ("dev_enriched", Kind::Path, ""),
    ("checkpoint_dir", Kind::Path, ""),
    ("kappa", Kind::Uint, "3"),
    ("dim", Kind::Uint, "600"),
    ("word_dim", Kind::Uint, "300"),
    ("char_dim", Kind::Uint, "64"),
    ("char_width", Kind::Uint, "5"),
    ("char_channels", Kind::Uint, "100"),
    ("word_len", Kind::Uint, "16"),
    ("dropout", Kind::Float, "0.3"),
    ("learning_rate", Kind::Float, "0.0005"),
    ("batch_size", Kind::Uint, "32"),
    ("ema_decay", Kind::Float, "0.999"),
    ("epochs", Kind::Uint, "10"),
    ("seed", Kind::Uint, "1"),
    ("threads", Kind::Uint, "1"),
];

pub const ENV_PREFIX: &str = "KAR_";

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, kind, _)| *kind)
}

fn check_type(key: &str, value: &str) -> Result<(), CliError> {
    let bad = |what: &str| CliError::Config(format!("`{key}` must be {what}, got `{value}`"));
    match kind_of(key) {
        None => Err(CliError::Config(format!("unknown key `{key}`"))),
        Some(Kind::Path) => Ok(()),
        Some(Kind::Uint) => value.parse::<u64>().map(|_| ()).map_err(|_| bad("a non-negative integer")),
        Some(Kind::Float) => match value.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(()),
            _ => Err(bad("a finite number")),
        },
    }
}

/// Parses config-file text. Blank lines and `#` comments are skipped.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("config line {}: expected `key = value`", i + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        check_type(key, value).map_err(|e| CliError::Config(format!("config line {}: {}", i + 1, e.detail())))?;
        entries.push((key.to_owned(), value.to_owned()));
    }
    Ok(entries)
}

/// The fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    values: BTreeMap<String, (String, Origin)>,
}

impl RunConfig {
    /// Resolves all layers. `env` yields `(name, value)` pairs; names without
    /// the prefix or naming no known key are ignored.
    pub fn resolve(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        flags: &[(String, String)],
    ) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, (String, Origin)> = KEYS
            .iter()
            .map(|(k, _, d)| (k.to_string(), (d.to_string(), Origin::Default)))
            .collect();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            for (k, v) in parse_file(&text)? {
                values.insert(k, (v, Origin::File));
            }
        }
        for (name, value) in env {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
            let key = key.to_ascii_lowercase();
            if kind_of(&key).is_none() {
                continue;
            }
            check_type(&key, &value).map_err(|e| CliError::Config(format!("{name}: {}", e.detail())))?;
            values.insert(key, (value, Origin::Env));
        }
        for (key, value) in flags {
            check_type(key, value)?;
            values.insert(key.clone(), (value.clone(), Origin::Flag));
        }
        Ok(RunConfig { values })
    }

    fn raw(&self, key: &str) -> &str {
        &self.values.get(key).unwrap_or_else(|| panic!("undeclared key `{key}`")).0
    }

    pub fn origin(&self, key: &str) -> Origin {
        self.values[key].1
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.origin(key) != Origin::Default
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let v = self.raw(key);
        (!v.is_empty()).then(|| PathBuf::from(v))
    }

    pub fn uint(&self, key: &str) -> u64 {
        self.raw(key).parse().expect("type checked on resolve")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.uint(key) as usize
    }

    pub fn float(&self, key: &str) -> f64 {
        self.raw(key).parse().expect("type checked on resolve")
    }

    /// Fails unless every listed path key has a value.
    pub fn require(&self, keys: &[&str]) -> Result<(), CliError> {
        let missing: Vec<&str> = keys.iter().copied().filter(|k| self.path(k).is_none()).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!("missing required key(s): {}", missing.join(", "))))
        }
    }

    /// One `key = value  # origin` line per key, in key order.
    pub fn echo(&self) -> String {
        self.values
            .iter()
            .map(|(k, (v, o))| format!("{k} = {v}  # {o}\n"))
            .collect()
    }
}
