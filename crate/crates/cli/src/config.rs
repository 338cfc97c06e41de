//! Plain-text configuration files: one `key = value` pair per line, `#`
//! comments. Every key can be overridden by the command-line flag of the
//! same name.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let mut values: HashMap<String, Vec<String>> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::input(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    i + 1
                ))
            })?;
            values
                .entry(key.trim().to_string())
                .or_default()
                .push(value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values
            .get(key)
            .and_then(|v| v.last())
            .map(String::as_str)
    }

    /// All values given for a repeatable key, in file order.
    pub fn get_all(&self, key: &str) -> &[String] {
        self.values.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.get_str(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::input(format!("config key `{key}`: {e}"))),
        }
    }
}

/// Flag value, else config-file value, else default.
pub fn resolve<T: FromStr>(
    cli: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    Ok(cli.or(file.get(key)?).unwrap_or(default))
}

/// Flag value, else config-file value.
pub fn resolve_opt<T: FromStr>(
    cli: Option<T>,
    file: &FileConfig,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: fmt::Display,
{
    Ok(cli.or(file.get(key)?))
}
