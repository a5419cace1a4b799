//! `key = value` defaults file. Blank lines and `#` comments are ignored;
//! keys are long flag names with or without dashes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use pbit_factor::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-").to_ascii_lowercase()
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config file {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize(key)).map(String::as_str)
    }

    /// Parsed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidInput(format!("config key {key}: {e}")))
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

impl FromStr for ConfigFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", i + 1)))?;
            let v = v.trim().trim_matches('"');
            values.insert(normalize(k), v.to_string());
        }
        Ok(Self { values })
    }
}

/// First of flag, config file, default.
pub fn resolve<T: FromStr>(flag: Option<T>, config: &ConfigFile, key: &str, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(v),
        None => Ok(config.get(key)?.unwrap_or(default)),
    }
}

/// Like [`resolve`] without a default.
pub fn resolve_opt<T: FromStr>(flag: Option<T>, config: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get(key),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let c: ConfigFile = "# defaults\nseed = 7\n--beta=0.5  # inline\nout_dir = \"runs\"\n\n".parse().unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(7));
        assert_eq!(c.get::<f64>("beta").unwrap(), Some(0.5));
        assert_eq!(c.raw("out-dir"), Some("runs"));
        assert_eq!(c.get::<u64>("workers").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!("seed 7".parse::<ConfigFile>().is_err());
        let c: ConfigFile = "seed = x".parse().unwrap();
        assert!(c.get::<u64>("seed").is_err());
    }

    #[test]
    fn flags_win() {
        let c: ConfigFile = "seed = 7".parse().unwrap();
        assert_eq!(resolve(Some(3u64), &c, "seed", 0).unwrap(), 3);
        assert_eq!(resolve(None, &c, "seed", 0u64).unwrap(), 7);
        assert_eq!(resolve(None, &c, "workers", 2usize).unwrap(), 2);
    }
}
