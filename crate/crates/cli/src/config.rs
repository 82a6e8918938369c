//! Optional JSON config file. Keys are the long flag names in snake_case;
//! a flag given on the command line always wins over the file.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: Map<String, Value>,
}

impl FileConfig {
    /// Reads `path` (if any) and rejects keys outside `allowed`.
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let values = match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(map)) => map,
            Ok(_) => return Err(CliError::Usage(format!("config {} must hold a JSON object", path.display()))),
            Err(e) => return Err(CliError::Usage(format!("config {}: {e}", path.display()))),
        };
        if let Some(bad) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CliError::Usage(format!(
                "unknown config key `{bad}` (allowed: {})",
                allowed.join(", ")
            )));
        }
        Ok(FileConfig { values })
    }

    fn parse<T: FromStr>(key: &str, v: &Value) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(_) | Value::Bool(_) => v.to_string(),
            _ => return Err(CliError::Usage(format!("config key `{key}` must be a scalar"))),
        };
        text.parse()
            .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
    }

    pub fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.values.get(key).map(|v| Self::parse(key, v)).transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(|v| Self::parse(key, v)).collect::<Result<_, _>>().map(Some),
            Some(_) => Err(CliError::Usage(format!("config key `{key}` must be an array"))),
        }
    }

    /// Flag, else file, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.value(key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.value(key),
        }
    }

    /// Flag list (if non-empty), else file list, else `default`.
    pub fn pick_list<T: FromStr>(&self, flag: Vec<T>, key: &str, default: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        if !flag.is_empty() {
            return Ok(flag);
        }
        Ok(self.list(key)?.unwrap_or(default))
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.value::<bool>(key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_win_over_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"seed": 7, "epsilon": 0.004, "backend": "statevector", "eps_sweep": [0.01, 0.005]}}"#).unwrap();
        let cfg = FileConfig::load(Some(f.path()), &["seed", "epsilon", "backend", "eps_sweep"]).unwrap();
        assert_eq!(cfg.pick(Some(3u64), "seed", 0).unwrap(), 3);
        assert_eq!(cfg.pick(None, "seed", 0u64).unwrap(), 7);
        assert_eq!(cfg.pick(None, "epsilon", 0.1f64).unwrap(), 0.004);
        assert_eq!(cfg.pick(None, "alpha", 0.05f64).unwrap(), 0.05);
        assert_eq!(cfg.pick_list::<f64>(vec![], "eps_sweep", vec![]).unwrap(), vec![0.01, 0.005]);
        let backend: String = cfg.pick(None, "backend", "analytic".into()).unwrap();
        assert_eq!(backend, "statevector");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"sede": 7}}"#).unwrap();
        assert!(matches!(FileConfig::load(Some(f.path()), &["seed"]), Err(CliError::Usage(_))));
    }
}
