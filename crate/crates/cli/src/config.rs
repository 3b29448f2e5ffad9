//! Sectioned `key = value` configs.
//!
//! ```text
//! # two clocks 5 apart in a harmonic trap
//! [units]
//! c = 10
//! g = 1
//!
//! [clock]
//! levels = [0, 0.1]
//! amplitudes = [0.7071067811865476, 0, 0.7071067811865476, 0]
//!
//! [potential]
//! kind = harmonic
//! omega = 1
//!
//! [grid]
//! x_min = -16
//! x_max = 16
//! n = 256
//!
//! [scenario]
//! kind = fixed_height_clocks
//! separation = 5
//! ```
//!
//! Amplitudes are a flat list of `re, im` pairs and default to an equal real
//! superposition. Text after `#` is ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use gravclock::model::{Constants, Grid1D, InternalClockSpec, PotentialSpec};
use gravclock::scenarios::{InitialState, ScenarioConfig, ScenarioKind, Tolerances};
use gravclock::Complex64;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::CliError;

/// Syntax error at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

const UNITS: &[&str] = &["c", "g", "hbar", "m"];

const SECTIONS: &[(&str, &[&str])] = &[
    ("units", UNITS),
    ("clock", &["levels", "amplitudes"]),
    ("potential", &["kind", "center", "omega", "floor"]),
    ("grid", &["x_min", "x_max", "n"]),
    ("evolution", &["dt", "steps", "record_every"]),
    (
        "scenario",
        &[
            "kind",
            "separation",
            "x0",
            "sigma",
            "p0",
            "initial",
            "eigenstates",
            "tolerance_redshift",
            "tolerance_null_shift",
            "tolerance_fidelity",
            "tolerance_mean_x_drift",
            "tolerance_frequency",
            "tolerance_visibility",
            "tolerance_zero_time",
            "tolerance_deficit",
        ],
    ),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
}

impl Entry {
    fn error(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column + offset,
            message: message.into(),
        }
    }

    fn number(&self) -> Result<f64, ParseError> {
        self.value
            .parse()
            .map_err(|_| self.error(0, format!("`{}` is not a number", self.value)))
    }

    fn count(&self) -> Result<usize, ParseError> {
        self.value
            .parse()
            .map_err(|_| self.error(0, format!("`{}` is not a non-negative integer", self.value)))
    }

    fn list<T: std::str::FromStr>(&self, what: &str) -> Result<Vec<T>, ParseError> {
        let v = &self.value;
        let inner = v
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| self.error(0, "expected a bracketed list like [a, b]"))?;
        if inner.trim().is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut offset = 1;
        for item in inner.split(',') {
            let lead = item.chars().take_while(|c| c.is_whitespace()).count();
            let trimmed = item.trim();
            let parsed = trimmed
                .parse()
                .map_err(|_| self.error(offset + lead, format!("`{trimmed}` is not {what}")))?;
            out.push(parsed);
            offset += item.chars().count() + 1;
        }
        Ok(out)
    }
}

/// Raw entries keyed by `(section, key)`.
#[derive(Debug, Default)]
struct Document {
    entries: BTreeMap<(String, String), Entry>,
}

impl Document {
    fn parse(text: &str, allowed: &[(&str, &[&str])]) -> Result<Self, ParseError> {
        let mut doc = Document::default();
        let mut section: Option<&str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let lead = content.chars().take_while(|c| c.is_whitespace()).count();
            let body = content.trim();
            if body.is_empty() {
                continue;
            }
            let at = |column: usize, message: String| ParseError { line, column, message };

            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| at(lead + 1, "unterminated section header".into()))?
                    .trim();
                section = Some(
                    allowed
                        .iter()
                        .find(|(s, _)| *s == name)
                        .map(|(s, _)| *s)
                        .ok_or_else(|| at(lead + 2, format!("unknown section [{name}]")))?,
                );
                continue;
            }

            let Some((key_part, value_part)) = body.split_once('=') else {
                return Err(at(lead + 1, "expected `key = value`".into()));
            };
            let key = key_part.trim();
            let Some(current) = section else {
                return Err(at(lead + 1, format!("`{key}` appears before any section")));
            };
            let keys = allowed.iter().find(|(s, _)| *s == current).map_or(&[][..], |(_, k)| k);
            if !keys.contains(&key) {
                return Err(at(lead + 1, format!("unknown key `{key}` in [{current}]")));
            }
            let value = value_part.trim();
            if value.is_empty() {
                return Err(at(lead + body.chars().count() + 1, format!("`{key}` has no value")));
            }
            let value_lead = value_part.chars().take_while(|c| c.is_whitespace()).count();
            let column = lead + key_part.chars().count() + 1 + value_lead + 1;
            let entry = Entry {
                value: value.to_string(),
                line,
                column,
            };
            if doc.entries.insert((current.to_string(), key.to_string()), entry).is_some() {
                return Err(at(lead + 1, format!("`{key}` is set twice in [{current}]")));
            }
        }
        Ok(doc)
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn required(&self, section: &str, key: &str) -> Result<&Entry, CliError> {
        self.get(section, key).ok_or_else(|| {
            CliError::Validation(gravclock::Error::config(format!("{section}.{key}"), "is required"))
        })
    }

    fn number_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ParseError> {
        self.get(section, key).map_or(Ok(default), Entry::number)
    }

    fn count_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ParseError> {
        self.get(section, key).map_or(Ok(default), Entry::count)
    }

    fn constants(&self) -> Result<Constants, CliError> {
        let c = self.required("units", "c")?.number()?;
        let g = self.required("units", "g")?.number()?;
        let hbar = self.number_or("units", "hbar", 1.0)?;
        let m = self.number_or("units", "m", 1.0)?;
        Ok(Constants::new(c, g, hbar, m)?)
    }
}

/// Parses and validates a scenario config.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let doc = Document::parse(text, SECTIONS)?;
    let constants = doc.constants()?;

    let levels_entry = doc.required("clock", "levels")?;
    let levels: Vec<f64> = levels_entry.list("a number")?;
    let amplitudes = match doc.get("clock", "amplitudes") {
        Some(entry) => {
            let flat: Vec<f64> = entry.list("a number")?;
            if flat.len() % 2 != 0 {
                return Err(entry
                    .error(0, format!("{} numbers do not form re,im pairs", flat.len()))
                    .into());
            }
            if flat.len() / 2 != levels.len() {
                return Err(entry
                    .error(
                        0,
                        format!(
                            "arity mismatch: {} amplitudes for {} levels",
                            flat.len() / 2,
                            levels.len()
                        ),
                    )
                    .into());
            }
            flat.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
        }
        None if levels.is_empty() => Vec::new(),
        None => vec![Complex64::new(1.0 / (levels.len() as f64).sqrt(), 0.0); levels.len()],
    };
    let clock = InternalClockSpec::new(levels, amplitudes)?;

    let potential = potential(&doc)?;
    let grid = Grid1D::new(
        doc.required("grid", "x_min")?.number()?,
        doc.required("grid", "x_max")?.number()?,
        doc.required("grid", "n")?.count()?,
    )?;

    let kind_entry = doc.required("scenario", "kind")?;
    let kind = ScenarioKind::from_name(&kind_entry.value)
        .ok_or_else(|| kind_entry.error(0, format!("unknown scenario kind `{}`", kind_entry.value)))?;

    let mut cfg = ScenarioConfig::new(kind, constants, clock, potential, grid);
    cfg.dt = doc.number_or("evolution", "dt", cfg.dt)?;
    cfg.steps = doc.count_or("evolution", "steps", cfg.steps)?;
    cfg.record_every = doc.count_or("evolution", "record_every", cfg.record_every)?;
    cfg.separation = doc.number_or("scenario", "separation", cfg.separation)?;
    cfg.x0 = doc.number_or("scenario", "x0", cfg.x0)?;
    cfg.sigma = doc.number_or("scenario", "sigma", cfg.sigma)?;
    cfg.p0 = doc.number_or("scenario", "p0", cfg.p0)?;
    if let Some(entry) = doc.get("scenario", "initial") {
        cfg.initial = InitialState::from_name(&entry.value)
            .ok_or_else(|| entry.error(0, format!("unknown initial state `{}`", entry.value)))?;
    }
    if let Some(entry) = doc.get("scenario", "eigenstates") {
        let list: Vec<usize> = entry.list("a state index")?;
        cfg.eigenstates = list
            .try_into()
            .map_err(|v: Vec<usize>| entry.error(0, format!("expected 2 state indices, got {}", v.len())))?;
    }
    let t = &mut cfg.tolerances;
    for (key, slot) in [
        ("tolerance_redshift", &mut t.redshift),
        ("tolerance_null_shift", &mut t.null_shift),
        ("tolerance_fidelity", &mut t.fidelity),
        ("tolerance_mean_x_drift", &mut t.mean_x_drift),
        ("tolerance_frequency", &mut t.frequency),
        ("tolerance_visibility", &mut t.visibility),
        ("tolerance_zero_time", &mut t.zero_time),
        ("tolerance_deficit", &mut t.deficit),
    ] {
        *slot = doc.number_or("scenario", key, *slot)?;
    }

    cfg.validate()?;
    Ok(cfg)
}

fn potential(doc: &Document) -> Result<PotentialSpec, CliError> {
    let kind = doc.required("potential", "kind")?;
    let spec = match kind.value.as_str() {
        "zero" => PotentialSpec::Zero,
        "mass_only_linear" => PotentialSpec::MassOnlyLinear,
        "cancelling_linear" => PotentialSpec::CancellingLinear,
        "harmonic" => PotentialSpec::Harmonic {
            center: doc.number_or("potential", "center", 0.0)?,
            omega: doc.required("potential", "omega")?.number()?,
        },
        "hard_floor" => PotentialSpec::HardFloor {
            floor: doc.number_or("potential", "floor", 0.0)?,
        },
        other => return Err(kind.error(0, format!("unknown potential kind `{other}`")).into()),
    };
    let used: &[&str] = match spec {
        PotentialSpec::Harmonic { .. } => &["center", "omega"],
        PotentialSpec::HardFloor { .. } => &["floor"],
        _ => &[],
    };
    for key in ["center", "omega", "floor"] {
        if doc.get("potential", key).is_some() && !used.contains(&key) {
            return Err(gravclock::Error::config(
                format!("potential.{key}"),
                format!("is not used by {}", spec.name()),
            )
            .into());
        }
    }
    Ok(spec)
}

/// Parses a file holding only a `[units]` section.
pub fn parse_units(text: &str) -> Result<Constants, CliError> {
    Document::parse(text, &[("units", UNITS)])?.constants()
}

/// One line per semantic field, floats in shortest round-trip form.
pub fn canonical_text(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let k = &cfg.constants;
    let _ = writeln!(s, "units c={:?} g={:?} hbar={:?} m={:?}", k.c, k.g, k.hbar, k.m);
    let _ = writeln!(s, "clock levels={:?}", cfg.clock.levels());
    let amps: Vec<(f64, f64)> = cfg.clock.amplitudes().iter().map(|a| (a.re, a.im)).collect();
    let _ = writeln!(s, "clock amplitudes={amps:?}");
    let _ = writeln!(s, "potential {:?}", cfg.potential);
    let g = &cfg.grid;
    let _ = writeln!(s, "grid x_min={:?} x_max={:?} n={}", g.x_min, g.x_max, g.n);
    let _ = writeln!(
        s,
        "evolution dt={:?} steps={} record_every={}",
        cfg.dt, cfg.steps, cfg.record_every
    );
    let _ = writeln!(
        s,
        "scenario kind={} separation={:?} x0={:?} sigma={:?} p0={:?} initial={} eigenstates={:?}",
        cfg.kind.name(),
        cfg.separation,
        cfg.x0,
        cfg.sigma,
        cfg.p0,
        cfg.initial.name(),
        cfg.eigenstates
    );
    let Tolerances {
        redshift,
        null_shift,
        fidelity,
        mean_x_drift,
        frequency,
        visibility,
        zero_time,
        deficit,
    } = cfg.tolerances;
    let _ = writeln!(
        s,
        "tolerances {:?}",
        [redshift, null_shift, fidelity, mean_x_drift, frequency, visibility, zero_time, deficit]
    );
    s
}

/// SHA-256 of [`canonical_text`], lowercase hex.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    Sha256::digest(canonical_text(cfg).as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut out, b| {
            let _ = write!(out, "{b:02x}");
            out
        })
}
