//! Shared plumbing: error kinds, config-file merging and value parsers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Why a command did not succeed. Usage problems exit with 2, failed
/// checks and solves with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<maxsurf::Error> for CliError {
    fn from(e: maxsurf::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("I/O error: {e}"))
    }
}

pub type CmdResult = Result<bool, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Loads a JSON config file, which must hold a single object.
pub fn load_config(path: &Path) -> Result<Value, CliError> {
    let file = File::open(path).map_err(|e| usage(format!("cannot open config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !value.is_object() {
        return Err(usage("config file must contain a JSON object"));
    }
    Ok(value)
}

/// Fills flags that were not given on the command line from the config
/// object. Keys are the long flag names; unknown keys are rejected.
pub fn merge<T: Serialize + DeserializeOwned>(cli: T, config: Option<&Value>) -> Result<T, CliError> {
    let Some(config) = config else { return Ok(cli) };
    let mut merged = config.clone();
    let given = serde_json::to_value(&cli).map_err(|e| usage(e.to_string()))?;
    let (Value::Object(target), Value::Object(flags)) = (&mut merged, given) else {
        return Err(usage("config file must contain a JSON object"));
    };
    for (k, v) in flags {
        if !v.is_null() {
            target.insert(k, v);
        }
    }
    serde_json::from_value(merged).map_err(|e| usage(format!("invalid config: {e}")))
}

pub fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| usage(format!("'{s}' is not a number")))
}

/// `a:b` with `a < b`.
pub fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s.split_once(':').ok_or_else(|| usage(format!("range '{s}' must look like a:b")))?;
    let (a, b) = (parse_f64(a)?, parse_f64(b)?);
    if !(a < b) {
        return Err(usage(format!("range '{s}' is empty")));
    }
    Ok((a, b))
}

/// `NUxNV`.
pub fn parse_res(s: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = s.split_once('x').ok_or_else(|| usage(format!("resolution '{s}' must look like 128x64")))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|_| usage(format!("bad resolution '{s}'")));
    Ok((n(a)?, n(b)?))
}

/// Comma-separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_f64).collect()
}

/// `r0:r1:n` log-spaced radii.
pub fn parse_radii(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(usage(format!("radii '{s}' must look like r0:r1:n"))) };
    let (a, b) = (parse_f64(a)?, parse_f64(b)?);
    let n: usize = n.trim().parse().map_err(|_| usage(format!("bad radius count in '{s}'")))?;
    if !(a > 0.0 && a < b) || n < 2 {
        return Err(usage(format!("radii '{s}' need 0 < r0 < r1 and n ≥ 2")));
    }
    Ok(maxsurf::asymptotics::log_radii(a, b, n))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    let file = File::create(path).map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

pub fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(BufReader::new(file))
}

/// Prints one JSON line on stdout.
pub fn emit<T: Serialize>(value: &T) -> Result<(), CliError> {
    let line = serde_json::to_string(value).map_err(|e| usage(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}")?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, value).map_err(|e| usage(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct Flags {
        tol: Option<f64>,
        max_iters: Option<usize>,
    }

    #[test]
    fn flags_override_config() {
        let cfg = serde_json::json!({"tol": 1e-3, "max-iters": 7});
        let m = merge(Flags { tol: Some(0.5), max_iters: None }, Some(&cfg)).unwrap();
        assert_eq!(m, Flags { tol: Some(0.5), max_iters: Some(7) });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cfg = serde_json::json!({"tolerance": 1e-3});
        assert!(matches!(merge(Flags { tol: None, max_iters: None }, Some(&cfg)), Err(CliError::Usage(_))));
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_range("-2.5:6.75").unwrap(), (-2.5, 6.75));
        assert!(parse_range("1:1").is_err());
        assert_eq!(parse_res("256x128").unwrap(), (256, 128));
        assert_eq!(parse_list("1,10,100").unwrap(), vec![1.0, 10.0, 100.0]);
        assert_eq!(parse_radii("1:100:3").unwrap().len(), 3);
    }
}
