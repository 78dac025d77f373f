//! Line-oriented scenario files.
//!
//! Each non-blank line is `section.key = value`; `#` starts a comment. Every
//! key has a default, and keys left out are reported in the provenance log.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("duplicate key `{key}` on lines {first} and {second}")]
    Duplicate { key: String, first: usize, second: usize },
    #[error("line {line}: `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("`{0}` is not a configuration key")]
    NoSuchKey(String),
    #[error("`{0}` is not a numeric key")]
    NotNumeric(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Number,
    Count,
    Choice(&'static [&'static str]),
    /// `auto` or a number
    Damping,
}

struct Entry {
    key: &'static str,
    default: &'static str,
    kind: Kind,
}

const fn num(key: &'static str, default: &'static str) -> Entry {
    Entry { key, default, kind: Kind::Number }
}

pub const LINE_SHAPES: &[&str] = &["homogeneous", "gaussian", "lorentzian"];
pub const RULES: &[&str] = &["auto", "standard", "adaptive"];
pub const DRIVE_MODES: &[&str] = &["clamp", "fixed"];

// Units: energies and rates in meV, dipoles in e·nm, losses in cm⁻¹ (intensity),
// density in cm⁻³, lengths in µm, phases in rad.
const SCHEMA: &[Entry] = &[
    num("levels.omega21", "1400"),
    num("levels.omega32", "98"),
    num("dipoles.d21", "0.5"),
    num("dipoles.d31", "0.5"),
    num("dipoles.d32", "2"),
    num("relaxation.gamma21", "7"),
    num("relaxation.gamma31", "7"),
    num("relaxation.gamma32", "7"),
    num("relaxation.r32", "0.5"),
    num("relaxation.r31", "0.05"),
    num("relaxation.r21", "0.3"),
    num("relaxation.pump", "5"),
    Entry { key: "drives.mode", default: "clamp", kind: Kind::Choice(DRIVE_MODES) },
    num("drives.e1", "0"),
    num("drives.e2", "0"),
    num("drives.phase1", "0"),
    num("drives.phase2", "0"),
    num("drives.detuning1", "0"),
    num("drives.detuning2", "0"),
    Entry { key: "broadening.kind", default: "homogeneous", kind: Kind::Choice(LINE_SHAPES) },
    num("broadening.u21", "0"),
    num("broadening.u31", "0"),
    num("broadening.u32", "0"),
    Entry { key: "broadening.nodes", default: "129", kind: Kind::Count },
    num("broadening.cutoff", "5"),
    Entry { key: "broadening.rule", default: "auto", kind: Kind::Choice(RULES) },
    num("medium.density", "1e18"),
    num("ir.index", "3.3"),
    num("ir.confinement", "0.1"),
    num("ir.loss", "150"),
    num("ir.detuning", "0"),
    num("opt1.index", "3.3"),
    num("opt1.confinement", "0.1"),
    num("opt1.loss", "150"),
    num("opt2.index", "3.3"),
    num("opt2.confinement", "0.1"),
    num("opt2.loss", "150"),
    num("device.length", "1000"),
    num("device.width", "10"),
    num("device.thickness", "2"),
    num("device.outcoupling", "0.08"),
    Entry { key: "solver.damping", default: "auto", kind: Kind::Damping },
    Entry { key: "solver.max_iter", default: "500", kind: Kind::Count },
    num("solver.tolerance", "1e-10"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Count(usize),
    Choice(&'static str),
    /// `None` is `auto`.
    Damping(Option<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(v) => write!(f, "{v}"),
            Value::Count(v) => write!(f, "{v}"),
            Value::Choice(s) => f.write_str(s),
            Value::Damping(None) => f.write_str("auto"),
            Value::Damping(Some(v)) => write!(f, "{v}"),
        }
    }
}

fn parse_value(kind: Kind, raw: &str) -> Result<Value, String> {
    match kind {
        Kind::Number => match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Value::Number(v)),
            _ => Err(format!("expected a finite number, got `{raw}`")),
        },
        Kind::Count => raw.parse::<usize>().map(Value::Count).map_err(|_| format!("expected a non-negative integer, got `{raw}`")),
        Kind::Choice(options) => options
            .iter()
            .find(|o| o.eq_ignore_ascii_case(raw))
            .map(|o| Value::Choice(o))
            .ok_or_else(|| format!("expected one of {}, got `{raw}`", options.join(", "))),
        Kind::Damping => {
            if raw.eq_ignore_ascii_case("auto") {
                return Ok(Value::Damping(None));
            }
            match raw.parse::<f64>() {
                Ok(v) if v > 0.0 && v <= 1.0 => Ok(Value::Damping(Some(v))),
                _ => Err(format!("expected `auto` or a number in (0, 1], got `{raw}`")),
            }
        }
    }
}

fn entry(key: &str) -> Option<(usize, &'static Entry)> {
    SCHEMA.iter().enumerate().find(|(_, e)| e.key == key)
}

/// A fully populated scenario. Values are stored in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    values: Vec<Value>,
    defaulted: Vec<&'static str>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        parse_config("").expect("schema defaults parse")
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut seen: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut values: Vec<Option<Value>> = vec![None; SCHEMA.len()];
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line, message: format!("expected `section.key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.contains('.') || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax { line, message: format!("malformed key `{key}`") });
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax { line, message: format!("missing value for `{key}`") });
        }
        let Some((slot, e)) = entry(key) else {
            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
        };
        if let Some(&first) = seen.get(e.key) {
            return Err(ConfigError::Duplicate { key: key.to_string(), first, second: line });
        }
        seen.insert(e.key, line);
        let v = parse_value(e.kind, value).map_err(|message| ConfigError::Value { line, key: key.to_string(), message })?;
        values[slot] = Some(v);
    }
    let mut defaulted = Vec::new();
    let values = values
        .into_iter()
        .zip(SCHEMA)
        .map(|(v, e)| {
            v.unwrap_or_else(|| {
                defaulted.push(e.key);
                parse_value(e.kind, e.default).expect("schema default is valid")
            })
        })
        .collect();
    Ok(ScenarioConfig { values, defaulted })
}

impl ScenarioConfig {
    pub fn keys() -> impl Iterator<Item = &'static str> {
        SCHEMA.iter().map(|e| e.key)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        entry(key).map(|(i, _)| &self.values[i])
    }

    /// Numeric value of a schema key. Panics on keys that are not numbers,
    /// which is a programming error.
    pub fn number(&self, key: &str) -> f64 {
        match self.get(key) {
            Some(Value::Number(v)) => *v,
            Some(Value::Count(v)) => *v as f64,
            other => panic!("`{key}` is not numeric: {other:?}"),
        }
    }

    pub fn count(&self, key: &str) -> usize {
        match self.get(key) {
            Some(Value::Count(v)) => *v,
            other => panic!("`{key}` is not a count: {other:?}"),
        }
    }

    pub fn choice(&self, key: &str) -> &'static str {
        match self.get(key) {
            Some(Value::Choice(v)) => v,
            other => panic!("`{key}` is not a choice: {other:?}"),
        }
    }

    pub fn damping(&self) -> Option<f64> {
        match self.get("solver.damping") {
            Some(Value::Damping(v)) => *v,
            other => panic!("`solver.damping` has the wrong type: {other:?}"),
        }
    }

    /// Overrides a numeric key. Counts accept only non-negative integers.
    pub fn set_number(&mut self, key: &str, v: f64) -> Result<(), ConfigError> {
        let (slot, e) = entry(key).ok_or_else(|| ConfigError::NoSuchKey(key.to_string()))?;
        let value = match e.kind {
            Kind::Number if v.is_finite() => Value::Number(v),
            Kind::Count if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 => Value::Count(v as usize),
            Kind::Number | Kind::Count => {
                return Err(ConfigError::Value { line: 0, key: key.to_string(), message: format!("invalid value {v}") })
            }
            _ => return Err(ConfigError::NotNumeric(key.to_string())),
        };
        self.values[slot] = value;
        self.defaulted.retain(|k| *k != e.key);
        Ok(())
    }

    /// Keys that took their default value, in schema order.
    pub fn defaulted(&self) -> &[&'static str] {
        &self.defaulted
    }

    /// One `default key = value` line per defaulted key.
    pub fn provenance(&self) -> Vec<String> {
        self.defaulted.iter().map(|k| format!("default {k} = {}", self.get(k).expect("schema key"))).collect()
    }
}
