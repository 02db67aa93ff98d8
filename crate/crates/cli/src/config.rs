//! INI-style run configuration: `[section]` headers, `key = value` lines,
//! `#` and `;` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use twvort_core::minimizer::LineSearchOptions;
use twvort_core::{Grading, Method, MinimizeOptions, NewtonOptions, ParameterSet, RadialGrid};

pub const SECTIONS: [&str; 5] = ["params", "grid", "solver", "output", "scan"];

const GRID_KEYS: [&str; 4] = ["r_max", "cells", "grading", "ratio"];
const SOLVER_KEYS: [&str; 14] = [
    "method",
    "grad_tol",
    "max_iter",
    "armijo_c",
    "backtrack_ratio",
    "min_step",
    "safeguard_truncate",
    "pin_a_end",
    "precondition",
    "g_amplitude",
    "newton",
    "newton_tol",
    "max_newton",
    "damping",
];
const OUTPUT_KEYS: [&str; 1] = ["prefix"];
const SCAN_KEYS: [&str; 2] = ["key", "values"];

/// A configuration error tied to a line of the input.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits the text into entries, rejecting unknown sections, lines outside
/// a section and repeated keys.
pub fn parse_ini(text: &str) -> Result<Vec<Entry>, ParseError> {
    let mut out: Vec<Entry> = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split(['#', ';']).next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, format!("unterminated section header '{body}'"));
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return err(
                    line,
                    format!(
                        "unknown section [{name}] (expected one of {})",
                        SECTIONS.join(", ")
                    ),
                );
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return err(line, format!("expected 'key = value', got '{body}'"));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return err(line, "empty key");
        }
        let Some(sec) = &section else {
            return err(
                line,
                format!("key '{key}' appears before any [section] header"),
            );
        };
        if let Some(prev) = out.iter().find(|e| &e.section == sec && e.key == key) {
            return err(
                line,
                format!(
                    "duplicate key '{key}' in [{sec}] (first on line {})",
                    prev.line
                ),
            );
        }
        out.push(Entry {
            section: sec.clone(),
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Scan,
    CheckPotential,
    CheckOde,
    FitDecay,
    GradCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Scan => "scan",
            Mode::CheckPotential => "check-potential",
            Mode::CheckOde => "check-ode",
            Mode::FitDecay => "fit-decay",
            Mode::GradCheck => "grad-check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub r_max: f64,
    pub cells: usize,
    /// `None` selects the production grading for `(r_max, cells)`.
    pub grading: Option<Grading>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_max: 30.0,
            cells: 3000,
            grading: None,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> twvort_core::Result<RadialGrid> {
        match self.grading {
            None => RadialGrid::production(self.r_max, self.cells),
            Some(g) => RadialGrid::build(self.r_max, self.cells, g),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSpec {
    pub minimize: MinimizeOptions,
    pub pin_a_end: bool,
    /// Scale of the `g` component of the default seed.
    pub g_amplitude: f64,
    /// Run Newton refinement after the minimizer.
    pub newton: bool,
    pub newton_opts: NewtonOptions,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            minimize: MinimizeOptions::default(),
            pin_a_end: false,
            g_amplitude: twvort_core::fields::DEFAULT_G_AMPLITUDE,
            newton: false,
            newton_opts: NewtonOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ParameterSet,
    /// `[params]` values exactly as written in the file, in key order.
    pub params_text: BTreeMap<String, String>,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub output: PathBuf,
    pub mode: Mode,
    pub scan: Option<ScanSpec>,
}

impl RunConfig {
    /// All defaults: baseline parameters, production grid, prefix `twvort`.
    pub fn defaults(mode: Mode) -> Self {
        Self {
            params: ParameterSet::baseline(),
            params_text: BTreeMap::new(),
            grid: GridSpec::default(),
            solver: SolverSpec::default(),
            output: PathBuf::from("twvort"),
            mode,
            scan: None,
        }
    }

    pub fn parse(text: &str, mode: Mode) -> Result<Self, ParseError> {
        let entries = parse_ini(text)?;
        let mut cfg = Self::defaults(mode);
        let mut grading: Option<(String, usize)> = None;
        let mut ratio: Option<(f64, usize)> = None;
        let mut scan_key: Option<(String, usize)> = None;
        let mut scan_values: Option<(Vec<f64>, usize)> = None;

        for e in &entries {
            let line = e.line;
            let known: &[&str] = match e.section.as_str() {
                "params" => &ParameterSet::KEYS,
                "grid" => &GRID_KEYS,
                "solver" => &SOLVER_KEYS,
                "output" => &OUTPUT_KEYS,
                _ => &SCAN_KEYS,
            };
            if !known.contains(&e.key.as_str()) {
                return err(
                    line,
                    format!(
                        "unknown key '{}' in [{}] (expected one of {})",
                        e.key,
                        e.section,
                        known.join(", ")
                    ),
                );
            }
            match (e.section.as_str(), e.key.as_str()) {
                ("params", key) => {
                    let v: f64 = number(e)?;
                    cfg.params = cfg
                        .params
                        .with_field(key, v)
                        .or_else(|x| err(line, x.to_string()))?;
                    cfg.params_text.insert(key.to_string(), e.value.clone());
                }
                ("grid", "r_max") => cfg.grid.r_max = number(e)?,
                ("grid", "cells") => cfg.grid.cells = number(e)?,
                ("grid", "grading") => grading = Some((e.value.to_ascii_lowercase(), line)),
                ("grid", "ratio") => ratio = Some((number(e)?, line)),
                ("solver", key) => apply_solver(&mut cfg.solver, key, e)?,
                ("output", _) => cfg.output = PathBuf::from(&e.value),
                ("scan", "key") => scan_key = Some((e.value.clone(), line)),
                ("scan", _) => {
                    let values = e
                        .value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.parse::<f64>()
                                .or_else(|_| err(line, format!("cannot parse scan value '{s}'")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if values.is_empty() {
                        return err(line, "scan values list is empty");
                    }
                    scan_values = Some((values, line));
                }
                _ => unreachable!("keys are checked against the section lists"),
            }
        }

        cfg.grid.grading = match (grading, ratio) {
            (None, None) => None,
            (None, Some((r, _))) => Some(Grading::Geometric { ratio: r }),
            (Some((g, line)), r) => match (g.as_str(), r) {
                ("uniform", None) => Some(Grading::Uniform),
                ("uniform", Some((_, rl))) => {
                    return err(rl, "ratio is only meaningful for geometric grading")
                }
                ("geometric", None) => None,
                ("geometric", Some((r, _))) => Some(Grading::Geometric { ratio: r }),
                (other, _) => {
                    return err(
                        line,
                        format!("unknown grading '{other}' (expected geometric or uniform)"),
                    )
                }
            },
        };

        cfg.scan = match (scan_key, scan_values) {
            (None, None) => None,
            (Some((key, line)), Some((values, _))) => {
                if !ParameterSet::KEYS.contains(&key.as_str()) {
                    return err(
                        line,
                        format!(
                            "scan key '{key}' is not a parameter (expected one of {})",
                            ParameterSet::KEYS.join(", ")
                        ),
                    );
                }
                Some(ScanSpec { key, values })
            }
            (Some((_, line)), None) => return err(line, "[scan] needs a values list"),
            (None, Some((_, line))) => return err(line, "[scan] needs a key"),
        };
        if mode == Mode::Scan && cfg.scan.is_none() {
            let last = text.lines().count().max(1);
            return err(
                last,
                "scan mode requires a [scan] section with key and values",
            );
        }
        Ok(cfg)
    }
}

fn number<T: FromStr>(e: &Entry) -> Result<T, ParseError> {
    e.value.parse().or_else(|_| {
        err(
            e.line,
            format!("cannot parse value '{}' for {}", e.value, e.key),
        )
    })
}

fn boolean(e: &Entry) -> Result<bool, ParseError> {
    match e.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => err(
            e.line,
            format!("expected a boolean for {}, got '{}'", e.key, e.value),
        ),
    }
}

fn apply_solver(s: &mut SolverSpec, key: &str, e: &Entry) -> Result<(), ParseError> {
    let ls: &mut LineSearchOptions = &mut s.minimize.line_search;
    match key {
        "method" => {
            s.minimize.method = e
                .value
                .parse::<Method>()
                .or_else(|x| err(e.line, x.to_string()))?
        }
        "grad_tol" => s.minimize.grad_tol = number(e)?,
        "max_iter" => s.minimize.max_iter = number(e)?,
        "armijo_c" => ls.armijo_c = number(e)?,
        "backtrack_ratio" => ls.backtrack_ratio = number(e)?,
        "min_step" => ls.min_step = number(e)?,
        "safeguard_truncate" => s.minimize.safeguard_truncate = boolean(e)?,
        "precondition" => s.minimize.precondition = boolean(e)?,
        "pin_a_end" => s.pin_a_end = boolean(e)?,
        "g_amplitude" => s.g_amplitude = number(e)?,
        "newton" => s.newton = boolean(e)?,
        "newton_tol" => s.newton_opts.tol = number(e)?,
        "max_newton" => s.newton_opts.max_newton = number(e)?,
        _ => s.newton_opts.damping = number(e)?,
    }
    Ok(())
}
