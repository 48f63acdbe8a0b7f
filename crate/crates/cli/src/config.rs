//! Flat `key = value` run configuration.
//!
//! Keys are the solver parameter names: `M`, `D`, `N`, `k`, `A`, `nu`,
//! `cfl`, `t_end`, `q`, `m`, `eps0`, plus `closure` (`regularized` or
//! `grad`). `M`, `N`, `k` and `t_end` are required. Blank lines and text
//! after `#` are ignored.

use std::collections::HashSet;
use std::path::Path;

use hermite_vlasov::{Closure, SimConfig};
use thiserror::Error;

pub const KEYS: [&str; 12] = ["M", "D", "N", "k", "A", "nu", "cfl", "t_end", "q", "m", "eps0", "closure"];
const REQUIRED: [&str; 4] = ["M", "N", "k", "t_end"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("unknown key `{0}`")]
    UnknownOverride(String),
    #[error(transparent)]
    Invalid(#[from] hermite_vlasov::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: value.to_string() })
}

/// Sets one parameter from its textual value. Does not validate the result.
pub fn apply(config: &mut SimConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    match key {
        "M" => config.order = number(key, value)?,
        "D" => config.dim = number(key, value)?,
        "N" => config.cells = number(key, value)?,
        "k" => config.k = number(key, value)?,
        "A" => config.amplitude = number(key, value)?,
        "nu" => config.nu = number(key, value)?,
        "cfl" => config.cfl = number(key, value)?,
        "t_end" => config.t_end = number(key, value)?,
        "q" => config.charge.q = number(key, value)?,
        "m" => config.charge.m = number(key, value)?,
        "eps0" => config.charge.eps0 = number(key, value)?,
        "closure" => {
            config.closure = match value {
                "regularized" => Closure::Regularized,
                "grad" => Closure::Grad,
                _ => return Err(ConfigError::BadValue { key: key.to_string(), value: value.to_string() }),
            }
        }
        _ => return Err(ConfigError::UnknownOverride(key.to_string())),
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<SimConfig, ConfigError> {
    let mut config = SimConfig::default();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Duplicate { line, key: key.to_string() });
        }
        apply(&mut config, key, value)?;
    }
    for key in REQUIRED {
        if !seen.contains(key) {
            return Err(ConfigError::Missing(key));
        }
    }
    config.validate()?;
    Ok(config)
}

pub fn load(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

/// Renders `config` in the format [`parse`] reads.
pub fn render(config: &SimConfig) -> String {
    let closure = match config.closure {
        Closure::Regularized => "regularized",
        Closure::Grad => "grad",
    };
    format!(
        "M = {}\nD = {}\nN = {}\nk = {:?}\nA = {:?}\nnu = {:?}\ncfl = {:?}\nt_end = {:?}\nq = {:?}\nm = {:?}\neps0 = {:?}\nclosure = {closure}\n",
        config.order,
        config.dim,
        config.cells,
        config.k,
        config.amplitude,
        config.nu,
        config.cfl,
        config.t_end,
        config.charge.q,
        config.charge.m,
        config.charge.eps0,
    )
}
