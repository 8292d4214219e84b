//! System configuration: a JSON file or a `NAME:PARAM` preset flag.

use std::collections::BTreeMap;

use derham_core::presets;
use derham_core::{DeRhamSystem, Mode, MoebiusMatrix, Scalar};
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// A matrix entry: a string (`"1/3"`, `"2"`, `"0.25"`) or a bare JSON number.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Number(serde_json::Number),
}

impl Entry {
    fn text(&self) -> String {
        match self {
            Entry::Text(s) => s.clone(),
            Entry::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: Option<u32>,
    #[serde(rename = "A0")]
    a0: Option<[Entry; 4]>,
    #[serde(rename = "A1")]
    a1: Option<[Entry; 4]>,
    preset: Option<BTreeMap<String, Entry>>,
    label: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Matrices([String; 4], [String; 4]),
    Preset { name: String, param: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub source: Source,
    pub label: Option<String>,
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))?;
        if let Some(v) = raw.schema {
            if v != SCHEMA {
                return Err(CliError::Parse(format!("unsupported config schema {v}")));
            }
        }
        let source = match (raw.a0, raw.a1, raw.preset) {
            (Some(a0), Some(a1), None) => {
                Source::Matrices(a0.map(|e| e.text()), a1.map(|e| e.text()))
            }
            (None, None, Some(p)) => {
                let mut it = p.into_iter();
                match (it.next(), it.next()) {
                    (Some((name, param)), None) => Source::Preset {
                        name,
                        param: param.text(),
                    },
                    _ => return Err(CliError::Parse("preset must have exactly one entry".into())),
                }
            }
            (None, None, None) => {
                return Err(CliError::Parse(
                    "config needs A0 and A1, or a preset".into(),
                ))
            }
            (Some(_), None, None) | (None, Some(_), None) => {
                return Err(CliError::Parse("config needs both A0 and A1".into()))
            }
            _ => {
                return Err(CliError::Parse(
                    "config has both matrices and a preset".into(),
                ))
            }
        };
        Ok(SystemConfig {
            source,
            label: raw.label,
        })
    }

    /// `lebesgue:1/3`, `walk:1`, ...
    pub fn from_preset_flag(flag: &str) -> Result<Self, CliError> {
        let (name, param) = flag
            .split_once(':')
            .ok_or_else(|| CliError::Parse(format!("preset must be NAME:PARAM, got {flag:?}")))?;
        Ok(SystemConfig {
            source: Source::Preset {
                name: name.trim().to_string(),
                param: param.trim().to_string(),
            },
            label: None,
        })
    }

    /// Builds and validates the system. Without a requested mode, rational
    /// inputs give an exact system and any decimal gives an approximate one.
    /// Requesting exact mode reads decimals as exact decimal fractions.
    pub fn build(&self, mode: Option<Mode>) -> Result<DeRhamSystem, CliError> {
        let parse = |s: &str| match mode {
            Some(Mode::Exact) => Scalar::parse_exact(s),
            _ => Scalar::parse(s),
        };
        let sys = match &self.source {
            Source::Matrices(e0, e1) => {
                let m = |e: &[String; 4]| -> Result<MoebiusMatrix, CliError> {
                    let [a, b, c, d] = e;
                    Ok(MoebiusMatrix::new(
                        parse(a)?,
                        parse(b)?,
                        parse(c)?,
                        parse(d)?,
                    ))
                };
                DeRhamSystem::validate(m(e0)?, m(e1)?)?
            }
            Source::Preset { name, param } => {
                let p = parse(param)?;
                match name.as_str() {
                    "lebesgue" => presets::lebesgue(p)?,
                    "walk" => presets::walk(p)?,
                    other => return Err(CliError::Parse(format!("unknown preset {other:?}"))),
                }
            }
        };
        match mode {
            None => Ok(sys),
            Some(m) if m == sys.mode() => Ok(sys),
            Some(Mode::Approx) => Ok(sys.to_mode(Mode::Approx)?),
            Some(Mode::Exact) => Err(CliError::Precondition {
                name: "DomainError",
                message: format!(
                    "{} has irrational entries; exact mode is unavailable",
                    self.describe()
                ),
            }),
        }
    }

    pub fn describe(&self) -> String {
        match &self.source {
            Source::Preset { name, param } => format!("{name}:{param}"),
            Source::Matrices(..) => self.label.clone().unwrap_or_else(|| "config".into()),
        }
    }
}
