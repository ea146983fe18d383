//! Key-value configuration files and named presets.
//!
//! A config file holds one `key = value` per line, keys spelled like the
//! long CLI flags without the leading dashes (`r1-db = 10`). `#` starts a
//! comment. `strategy` may list several values separated by commas.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::InterferometerParams;

pub const KEYS: &[&str] = &[
    "preset",
    "r1-db",
    "r1",
    "r2-db",
    "r2",
    "mu",
    "eta",
    "n-photons",
    "g2",
    "A",
    "phi-start",
    "phi-end",
    "points",
    "strategy",
    "phi-apr",
    "format",
    "oracle-samples",
    "seed",
    "threshold",
    "exact",
    "output",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("config line {}: expected `key = value`", lineno + 1)))?;
            let key = k.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Domain(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            entries.insert(key.to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Domain(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }
}

/// The three parameter sets of the reference figure: 10 dB input squeezing
/// with `(eps, A)` = `(0, 1)`, `(0.2, 1)` and `(0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    #[value(name = "fig2-solid")]
    Fig2Solid,
    #[value(name = "fig2-dashed")]
    Fig2Dashed,
    #[value(name = "fig2-dotted")]
    Fig2Dotted,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig2Solid, Preset::Fig2Dashed, Preset::Fig2Dotted];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2Solid => "fig2-solid",
            Preset::Fig2Dashed => "fig2-dashed",
            Preset::Fig2Dotted => "fig2-dotted",
        }
    }

    /// `eps = 0.2` is realized as external loss alone: `eta = 1/1.04`.
    pub fn params(&self) -> InterferometerParams {
        let base = InterferometerParams::lossless(0.5 * 10f64.ln(), 1e6).with_noise_factor(1.0);
        match self {
            Preset::Fig2Solid => base,
            Preset::Fig2Dashed => InterferometerParams {
                eta: 1.0 / 1.04,
                ..base
            },
            Preset::Fig2Dotted => base.with_noise_factor(2.0),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown preset `{s}`")))
    }
}
