//! Option resolution: command-line flags take precedence over config-file
//! entries, which take precedence over built-in defaults. The config file
//! holds `key = value` lines with `#` comments; keys use underscores
//! (`broadening_hz = 10`).

use std::collections::BTreeMap;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "solver",
    "detect",
    "broadening_hz",
    "max_cluster_size",
    "weight_threshold",
    "samples",
    "seed",
    "boson_max",
    "threads",
    "strict",
    "sizes",
    "output",
];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::parse(format!(
                    "config line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::parse(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: Option<&std::path::Path>) -> Result<ConfigFile, CliError> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::parse(format!("cannot read config {}: {e}", p.display()))
                })?;
                ConfigFile::parse(&text)
            }
        }
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::parse(format!("config key `{key}`: bad value `{raw}`: {e}"))
            }),
        }
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Three-way resolution helper.
pub fn resolve<T: Clone>(cli: Option<T>, file: Option<T>, default: T) -> T {
    cli.or(file).unwrap_or(default)
}

/// Deterministic `key=value` echo of the effective options, recorded in the
/// output metadata for reproducibility.
pub fn echo_effective(pairs: &[(&str, String)]) -> String {
    let map: BTreeMap<&str, &String> = pairs.iter().map(|(k, v)| (*k, v)).collect();
    map.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}
