//! Merges command-line flags with an optional `key=value` config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rrs_core::problems::parse_key_values;
use rrs_core::Error;

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, Error> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Argument(format!("cannot read config {}: {e}", path.display())))?;
        let file = parse_key_values(&text)
            .map_err(|e| Error::Argument(format!("config {}: {e}", path.display())))?;
        Ok(Settings { file })
    }

    #[cfg(test)]
    pub fn from_map(file: BTreeMap<String, String>) -> Self {
        Settings { file }
    }

    fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T, Error> {
        raw.trim()
            .parse()
            .map_err(|_| Error::Argument(format!("config value for '{key}' is invalid: '{raw}'")))
    }

    /// Flag value, else config value, else `None`.
    pub fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Error> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self
                .file
                .get(key)
                .map(|raw| Self::parse(key, raw))
                .transpose(),
        }
    }

    pub fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Error> {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.file.get(key).map(PathBuf::from))
    }

    /// Repeated flag values, else a comma-separated config list, else `default`.
    pub fn list<T: FromStr + Clone>(
        &self,
        flag: &[T],
        key: &str,
        default: &[T],
    ) -> Result<Vec<T>, Error> {
        if !flag.is_empty() {
            return Ok(flag.to_vec());
        }
        match self.file.get(key) {
            Some(raw) => raw
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| Self::parse(key, s))
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, Error> {
        if flag {
            return Ok(true);
        }
        self.get(None, key, false)
    }
}
