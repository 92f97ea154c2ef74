//! Flat `key = value` configuration files merged under command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}` appears twice")]
    Duplicate { key: String },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0}")]
    Range(String),
}

/// Every key the front end understands, in canonical spelling.
pub const KNOWN_KEYS: &[&str] = &[
    "N",
    "P",
    "m",
    "t",
    "tol",
    "Lambda",
    "eps",
    "mu2",
    "xi",
    "lambda_c",
    "regulator",
    "seed",
    "out",
    "format",
    "strict",
    "points",
    "samples",
    "count",
    "scale",
    "scan",
    "fit",
];

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Blank lines and `#` comments are ignored; keys are case-sensitive.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            }
            if !KNOWN_KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey(k.to_string()));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Duplicate { key: k.to_string() });
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::Value {
                    key: key.into(),
                    value: v.into(),
                    reason: e.to_string(),
                })
            })
            .transpose()
    }

    /// Flag value if given, else the file value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Boolean switch: a set flag wins, otherwise the file decides.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, ConfigError> {
        Ok(flag || self.get::<bool>(key)?.unwrap_or(false))
    }
}

/// Comma-separated list of numbers, e.g. `0.1, 0.5, 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", x.trim())))
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err("expected a non-empty list of finite numbers".into());
        }
        Ok(Grid(v))
    }
}

pub fn check_range<T: PartialOrd + std::fmt::Display>(key: &str, v: T, lo: T, hi: T) -> Result<T, ConfigError> {
    if v < lo || v > hi {
        return Err(ConfigError::Range(format!("{key} = {v} is outside [{lo}, {hi}]")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let c = FileConfig::parse("# run\nN = 5\nt = 0.1, 0.2 # grid\n\nstrict = true\n").unwrap();
        assert_eq!(c.get::<u32>("N").unwrap(), Some(5));
        assert_eq!(c.pick(Some(7u32), "N").unwrap(), Some(7));
        assert_eq!(c.get::<Grid>("t").unwrap(), Some(Grid(vec![0.1, 0.2])));
        assert!(c.switch(false, "strict").unwrap());
        assert_eq!(c.pick_or(None, "P", 8usize).unwrap(), 8);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(FileConfig::parse("N 5"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(FileConfig::parse("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(FileConfig::parse("N = 1\nN = 2"), Err(ConfigError::Duplicate { .. })));
        let c = FileConfig::parse("N = five").unwrap();
        assert!(matches!(c.get::<u32>("N"), Err(ConfigError::Value { .. })));
        assert!("0.1,,2".parse::<Grid>().is_err());
    }
}
