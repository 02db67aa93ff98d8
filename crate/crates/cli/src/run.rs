//! Subcommand drivers. Each returns the JSON or files it produced, or a
//! [`Failure`] that maps to the process exit status.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use twvort_core::asymptotics::decay_report;
use twvort_core::energy::finite_difference_check;
use twvort_core::fields::{check_bounds, initial_profile_with_amplitude, truncate};
use twvort_core::io::{fmt_float, read_profile, write_history, write_profile};
use twvort_core::minimizer::{continuation_sweep_from, minimize};
use twvort_core::odecheck::{newton_refine, residuals};
use twvort_core::potential::analyze;
use twvort_core::{
    DecayReport, Error, FieldConfiguration, FitWindows, ParameterSet, RadialGrid, ResidualReport,
    SolveResult,
};

use crate::config::{RunConfig, SolverSpec};
use crate::summary::{build_summary, summary_schema, validate, NewtonRecord, RunRecord};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_CHECK_FAILED: u8 = 4;

/// Lattice used for the potential's sign scan in summaries.
pub const POTENTIAL_SCAN: (f64, f64, usize) = (2.0, 2.0, 512);

#[derive(Clone, Debug, PartialEq)]
pub enum Failure {
    /// Unreadable or malformed input, or an I/O error.
    Input(String),
    /// Parameters outside the admissible set.
    Invalid(String),
    NotConverged(String),
    CheckFailed(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::NotConverged(_) => EXIT_NOT_CONVERGED,
            Failure::CheckFailed(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m)
            | Failure::Invalid(m)
            | Failure::NotConverged(m)
            | Failure::CheckFailed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(m) => Failure::Invalid(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn ensure_valid(p: &ParameterSet) -> Result<(), Failure> {
    let report = p.validate();
    if report.valid {
        Ok(())
    } else {
        Err(Failure::Invalid(report.to_string().trim_end().to_string()))
    }
}

/// Creates the prefix's directory if needed and checks a file can be
/// written there.
pub fn check_writable(prefix: &Path) -> Result<(), Failure> {
    let dir = match prefix.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| io_fail(&dir, e))?;
    let probe = dir.join(format!(".twvort-probe-{}", std::process::id()));
    File::create(&probe).map_err(|e| {
        Failure::Input(format!(
            "output directory {} not writable: {e}",
            dir.display()
        ))
    })?;
    let _ = fs::remove_file(&probe);
    Ok(())
}

pub fn output_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_fail(path, e))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| Failure::Input(e.to_string()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| io_fail(path, e))
}

pub fn seed_for(p: &ParameterSet, grid: &RadialGrid, solver: &SolverSpec) -> FieldConfiguration {
    let mut seed = initial_profile_with_amplitude(p, grid, solver.g_amplitude);
    seed.pins = seed.pins.with_a_end(solver.pin_a_end);
    seed.apply_pins(p);
    if solver.minimize.safeguard_truncate {
        seed = truncate(&seed, p);
    }
    seed
}

/// A finished solve with its post-processing.
#[derive(Clone, Debug)]
pub struct Solved {
    pub params: ParameterSet,
    pub minimizer: SolveResult,
    pub newton: Option<NewtonRecord>,
    pub residuals: ResidualReport,
    pub decay: DecayReport,
    pub summary: Value,
}

impl Solved {
    pub fn final_result(&self) -> &SolveResult {
        self.newton
            .as_ref()
            .map(|n| &n.result)
            .unwrap_or(&self.minimizer)
    }

    pub fn converged(&self) -> bool {
        self.minimizer.converged && self.newton.as_ref().is_none_or(|n| n.result.converged)
    }
}

fn post_process(
    cfg: &RunConfig,
    p: &ParameterSet,
    grid: &RadialGrid,
    minimizer: SolveResult,
) -> Result<Solved, Failure> {
    let newton = if cfg.solver.newton {
        let result = newton_refine(p, grid, &minimizer.config, &cfg.solver.newton_opts)?;
        Some(NewtonRecord {
            options: cfg.solver.newton_opts,
            profile_change: result.config.sup_distance(&minimizer.config),
            result,
        })
    } else {
        None
    };
    let config = &newton
        .as_ref()
        .map(|n| &n.result)
        .unwrap_or(&minimizer)
        .config;
    let res = residuals(p, grid, config)?;
    let bounds = check_bounds(config, p);
    let decay = decay_report(p, config, grid, &FitWindows::default());
    let (xm, ym, n) = POTENTIAL_SCAN;
    let potential = analyze(p, xm, ym, n)?;
    let summary = build_summary(&RunRecord {
        config: cfg,
        params: p,
        grid,
        minimize: &cfg.solver.minimize,
        minimizer: &minimizer,
        newton: newton.as_ref(),
        residuals: &res,
        bounds: &bounds,
        decay: &decay,
        potential: &potential,
    });
    if let Err(errs) = validate(&summary, &summary_schema()) {
        return Err(Failure::CheckFailed(format!(
            "summary does not match its schema: {}",
            errs.join("; ")
        )));
    }
    Ok(Solved {
        params: *p,
        minimizer,
        newton,
        residuals: res,
        decay,
        summary,
    })
}

/// Solves one parameter set from the configured seed.
pub fn solve_params(
    cfg: &RunConfig,
    p: &ParameterSet,
    grid: &RadialGrid,
) -> Result<Solved, Failure> {
    ensure_valid(p)?;
    let seed = seed_for(p, grid, &cfg.solver);
    let result = minimize(p, grid, &seed, &cfg.solver.minimize)?;
    post_process(cfg, p, grid, result)
}

/// Writes `<prefix>_profile.csv`, `<prefix>_summary.json` and
/// `<prefix>_history.csv`.
pub fn write_outputs(
    prefix: &Path,
    grid: &RadialGrid,
    s: &Solved,
) -> Result<[PathBuf; 3], Failure> {
    let paths = ["_profile.csv", "_summary.json", "_history.csv"].map(|x| output_path(prefix, x));
    write_profile(create(&paths[0])?, grid, &s.final_result().config)?;
    write_json(&paths[1], &s.summary)?;
    write_history(create(&paths[2])?, &s.minimizer.history)?;
    Ok(paths)
}

/// `solve`: exit 0 only if the run converged.
pub fn solve(cfg: &RunConfig) -> Result<Solved, Failure> {
    ensure_valid(&cfg.params)?;
    let grid = cfg.grid.build()?;
    check_writable(&cfg.output)?;
    let s = solve_params(cfg, &cfg.params, &grid)?;
    write_outputs(&cfg.output, &grid, &s)?;
    if !s.converged() {
        let why = s.final_result().diagnostic.clone().unwrap_or_else(|| {
            format!(
                "gradient norm {:e} above tolerance",
                s.final_result().grad_inf_norm
            )
        });
        return Err(Failure::NotConverged(why));
    }
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub value: f64,
    pub outcome: Result<Solved, Failure>,
}

pub const SCAN_HEADER: [&str; 18] = [
    "index",
    "key",
    "value",
    "status",
    "iterations",
    "energy",
    "grad_inf_norm",
    "a_end",
    "b_origin",
    "rate_a_origin",
    "rate_b_origin",
    "rate_f_origin",
    "rate_g_origin",
    "rate_a_inf",
    "rate_b_inf",
    "rate_f_inf",
    "rate_g_inf",
    "prefix",
];

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// `scan`: one solve per value. With `jobs == 1` each entry warm-starts from
/// the previous converged profile; otherwise entries are independent cold
/// starts on `jobs` threads. Rows always follow input order.
pub fn scan(cfg: &RunConfig, jobs: usize) -> Result<Vec<ScanRow>, Failure> {
    let spec = cfg
        .scan
        .as_ref()
        .ok_or_else(|| Failure::Input("scan mode requires a [scan] section".into()))?;
    let params: Vec<ParameterSet> = spec
        .values
        .iter()
        .map(|&v| cfg.params.with_field(&spec.key, v))
        .collect::<Result<_, _>>()?;
    let reports: Vec<String> = params
        .iter()
        .zip(&spec.values)
        .filter_map(|(p, v)| {
            ensure_valid(p)
                .err()
                .map(|e| format!("{} = {v}: {e}", spec.key))
        })
        .collect();
    if !reports.is_empty() {
        return Err(Failure::Invalid(reports.join("\n")));
    }
    let grid = cfg.grid.build()?;
    check_writable(&cfg.output)?;

    let outcomes: Vec<Result<Solved, Failure>> = if jobs <= 1 {
        continuation_sweep_from(&params, &grid, &cfg.solver.minimize, |p| {
            seed_for(p, &grid, &cfg.solver)
        })
        .into_iter()
        .zip(&params)
        .map(|(r, p)| {
            r.map_err(Failure::from)
                .and_then(|r| post_process(cfg, p, &grid, r))
        })
        .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure::Input(e.to_string()))?;
        pool.install(|| {
            params
                .par_iter()
                .map(|p| solve_params(cfg, p, &grid))
                .collect()
        })
    };

    let agg_path = output_path(&cfg.output, "_scan.csv");
    let mut agg = csv::Writer::from_writer(create(&agg_path)?);
    let csv_fail = |e: csv::Error| Failure::Input(format!("{}: {e}", agg_path.display()));
    agg.write_record(SCAN_HEADER).map_err(csv_fail)?;
    let mut rows = Vec::with_capacity(outcomes.len());
    for (i, (value, outcome)) in spec.values.iter().copied().zip(outcomes).enumerate() {
        let prefix = output_path(&cfg.output, &format!("_{i:03}"));
        let mut rec = vec![i.to_string(), spec.key.clone(), fmt_float(value)];
        match &outcome {
            Ok(s) => {
                write_outputs(&prefix, &grid, s)?;
                let r = s.final_result();
                let d = &s.decay;
                rec.push(
                    if s.converged() {
                        "converged"
                    } else {
                        "not_converged"
                    }
                    .into(),
                );
                rec.push(s.minimizer.iterations.to_string());
                rec.extend(
                    [
                        r.energy.total,
                        r.grad_inf_norm,
                        r.emergent.a_end,
                        r.emergent.b_origin,
                    ]
                    .map(fmt_float),
                );
                rec.extend(
                    [
                        d.origin.a.value(),
                        d.origin.b.value(),
                        d.origin.f.value(),
                        d.origin.g.value(),
                        d.infinity.a.value(),
                        d.infinity.b.value(),
                        d.infinity.f.value(),
                        d.infinity.g.value(),
                    ]
                    .map(opt),
                );
                rec.push(prefix.display().to_string());
            }
            Err(e) => {
                rec.push(format!("error: {e}"));
                rec.resize(SCAN_HEADER.len(), String::new());
            }
        }
        agg.write_record(&rec).map_err(csv_fail)?;
        rows.push(ScanRow { value, outcome });
    }
    agg.flush().map_err(|e| io_fail(&agg_path, e))?;
    Ok(rows)
}

/// Exit status for a finished scan: the most severe entry wins.
pub fn scan_status(rows: &[ScanRow]) -> u8 {
    rows.iter()
        .map(|r| match &r.outcome {
            Ok(s) if s.converged() => EXIT_OK,
            Ok(_) => EXIT_NOT_CONVERGED,
            Err(Failure::NotConverged(_)) => EXIT_NOT_CONVERGED,
            Err(e) => e.exit_code(),
        })
        .max_by_key(|&c| match c {
            EXIT_OK => 0,
            EXIT_NOT_CONVERGED => 1,
            EXIT_CHECK_FAILED => 2,
            EXIT_INVALID => 3,
            _ => 4,
        })
        .unwrap_or(EXIT_OK)
}

pub fn check_potential(
    p: &ParameterSet,
    x_max: f64,
    y_max: f64,
    resolution: usize,
) -> Result<Value, Failure> {
    ensure_valid(p)?;
    if !(x_max > 0.0 && y_max > 0.0) || resolution < 16 {
        return Err(Failure::Input(
            "scan needs x_max, y_max > 0 and resolution >= 16".into(),
        ));
    }
    let report = analyze(p, x_max, y_max, resolution)?;
    Ok(serde_json::to_value(report).expect("report serializes"))
}

pub fn load_profile(path: &Path) -> Result<(RadialGrid, FieldConfiguration), Failure> {
    let file = File::open(path).map_err(|e| io_fail(path, e))?;
    read_profile(BufReader::new(file))
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn profile_for(
    p: &ParameterSet,
    profile: &Path,
    pin_a_end: bool,
) -> Result<(RadialGrid, FieldConfiguration), Failure> {
    ensure_valid(p)?;
    let (grid, mut config) = load_profile(profile)?;
    config.pins = config.pins.with_a_end(pin_a_end);
    Ok((grid, config))
}

pub fn check_ode(cfg: &RunConfig, profile: &Path) -> Result<ResidualReport, Failure> {
    let (grid, config) = profile_for(&cfg.params, profile, cfg.solver.pin_a_end)?;
    Ok(residuals(&cfg.params, &grid, &config)?)
}

pub fn fit_decay(
    cfg: &RunConfig,
    profile: &Path,
    windows: &FitWindows,
) -> Result<DecayReport, Failure> {
    let (grid, config) = profile_for(&cfg.params, profile, cfg.solver.pin_a_end)?;
    Ok(decay_report(&cfg.params, &config, &grid, windows))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckOptions {
    pub cells: usize,
    pub samples: usize,
    pub perturbations: usize,
    pub amplitude: f64,
    pub step: f64,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            cells: 200,
            samples: 50,
            perturbations: 20,
            amplitude: 0.1,
            step: 1e-6,
            seed: 2024,
            threshold: 1e-6,
        }
    }
}

/// Finite-difference check of the gradient on the default seed and on
/// random perturbations of it.
pub fn grad_check(cfg: &RunConfig, opts: &GradCheckOptions) -> Result<Value, Failure> {
    ensure_valid(&cfg.params)?;
    let p = &cfg.params;
    let grid = RadialGrid::production(cfg.grid.r_max, opts.cells)?;
    let seed = seed_for(p, &grid, &cfg.solver);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    let mut per_config = Vec::with_capacity(opts.perturbations + 1);
    for k in 0..=opts.perturbations {
        let mut c = seed.clone();
        if k > 0 {
            for v in
                c.a.iter_mut()
                    .chain(c.b.iter_mut())
                    .chain(c.f.iter_mut())
                    .chain(c.g.iter_mut())
            {
                *v += rng.gen_range(-opts.amplitude..opts.amplitude);
            }
            c.apply_pins(p);
        }
        let n_free = c.free_dofs().len();
        let dofs: Vec<usize> = (0..opts.samples)
            .map(|_| rng.gen_range(0..n_free))
            .collect();
        let check = finite_difference_check(p, &grid, &c, &dofs, opts.step)?;
        worst = worst.max(check.max_rel_error);
        per_config.push(check.max_rel_error);
    }
    let passed = worst < opts.threshold;
    let out = json!({
        "max_rel_error": worst,
        "threshold": opts.threshold,
        "passed": passed,
        "cells": opts.cells,
        "r_max": cfg.grid.r_max,
        "samples_per_config": opts.samples,
        "configs": per_config.len(),
        "per_config": per_config,
    });
    if passed {
        Ok(out)
    } else {
        Err(Failure::CheckFailed(format!(
            "max relative gradient error {worst:e} is not below {:e}\n{out}",
            opts.threshold
        )))
    }
}
