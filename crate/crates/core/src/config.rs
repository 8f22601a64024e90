//! `key = value` model files.
//!
//! ```text
//! # reference plate
//! slope_te = 1.2
//! slope_tm = 0.8
//! intercept_te = 0     # optional, default 0
//! intercept_tm = 0     # optional, default 0
//! psi_in = z           # optional: z, x, 1, 2 or "re1 im1 re2 im2"
//! psi_f = z
//! ```
//!
//! Explicit states are normalized on load. `z` is `|1>`, `x` is `|2>`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::algebra::{Complex, Vec2C};
use crate::error::{Error, Result};
use crate::waveplate::{DispersionModel, Scenario};

const KEYS: [&str; 6] = [
    "slope_te",
    "slope_tm",
    "intercept_te",
    "intercept_tm",
    "psi_in",
    "psi_f",
];

pub fn parse_state(text: &str) -> Result<Vec2C> {
    match text.trim() {
        "z" | "1" => return Ok(Vec2C::basis1()),
        "x" | "2" => return Ok(Vec2C::basis2()),
        _ => {}
    }
    let parts: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("state {text:?} is not z, x, 1, 2 or four numbers")))?;
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "state {text:?} needs four numbers (re1 im1 re2 im2), found {}",
            parts.len()
        )));
    }
    Vec2C::new(
        Complex::new(parts[0], parts[1]),
        Complex::new(parts[2], parts[3]),
    )
    .normalized()
    .map_err(|e| Error::Config(format!("state {text:?}: {e}")))
}

pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut values: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`",
                k + 1
            )));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!(
                "line {}: unknown key `{key}`",
                k + 1
            )));
        }
        if values.insert(key, value.trim()).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key `{key}`",
                k + 1
            )));
        }
    }
    let number = |key: &str, default: Option<f64>| -> Result<f64> {
        match values.get(key) {
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    Error::Config(format!("`{key}` must be a finite number (got {v:?})"))
                }),
            None => default.ok_or_else(|| Error::Config(format!("missing required key `{key}`"))),
        }
    };
    let model = DispersionModel::new(
        number("slope_te", None)?,
        number("intercept_te", Some(0.0))?,
        number("slope_tm", None)?,
        number("intercept_tm", Some(0.0))?,
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    let state = |key: &str| {
        values
            .get(key)
            .map_or(Ok(Vec2C::basis1()), |v| parse_state(v))
    };
    Scenario::new(model, state("psi_in")?, state("psi_f")?)
        .map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
