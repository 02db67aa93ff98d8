use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use twvort_cli::config::{Mode, RunConfig};
use twvort_cli::run::{self, Failure, GradCheckOptions, EXIT_OK};
use twvort_cli::summary::summary_schema;
use twvort_core::asymptotics::TailWindow;
use twvort_core::{FitWindows, Method};

#[derive(Parser)]
#[command(
    name = "twvort",
    version,
    about = "Twisted-vortex profiles of two-component Ginzburg-Landau theory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct SolverFlags {
    /// nonlinear_cg or gradient_descent.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Pin a(r_max) = 1/e1 instead of leaving it free.
    #[arg(long)]
    pin_a_end: bool,
    /// Clamp a and f into their bounds after every step.
    #[arg(long)]
    safeguard_truncate: bool,
    /// Refine the minimizer's output with Newton's method.
    #[arg(long)]
    newton: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy and write profile, summary and history.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_prefix: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Solve once per value of the [scan] parameter.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_prefix: Option<PathBuf>,
        /// Worker threads; TWVORT_JOBS overrides this.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Critical point and sign scan of the potential, as JSON.
    CheckPotential {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = run::POTENTIAL_SCAN.0)]
        x_max: f64,
        #[arg(long, default_value_t = run::POTENTIAL_SCAN.1)]
        y_max: f64,
        #[arg(long, default_value_t = run::POTENTIAL_SCAN.2)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strong-form residuals of a profile CSV, as JSON.
    CheckOde {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fail with status 4 if any interior sup-norm exceeds this.
        #[arg(long)]
        max_residual: Option<f64>,
    },
    /// Decay-rate fits of a profile CSV, as JSON.
    FitDecay {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Origin fit window in r, "LO,HI".
        #[arg(long, value_parser = parse_window)]
        origin_window: Option<(f64, f64)>,
        /// Tail fit window in r, "LO,HI".
        #[arg(long, value_parser = parse_window)]
        tail_window: Option<(f64, f64)>,
    },
    /// Compare the analytic gradient with finite differences.
    GradCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = GradCheckOptions::default().cells)]
        cells: usize,
        #[arg(long, default_value_t = GradCheckOptions::default().samples)]
        samples: usize,
        #[arg(long, default_value_t = GradCheckOptions::default().perturbations)]
        perturbations: usize,
        #[arg(long, default_value_t = GradCheckOptions::default().seed)]
        seed: u64,
    },
    /// Print the JSON layout of run summaries.
    Schema,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad number '{lo}'"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad number '{hi}'"))?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err("window needs LO < HI".into())
    }
}

fn load(path: Option<&Path>, mode: Mode) -> Result<RunConfig, Failure> {
    let Some(path) = path else {
        return Ok(RunConfig::defaults(mode));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text, mode).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn apply_flags(cfg: &mut RunConfig, out_prefix: Option<PathBuf>, f: SolverFlags) {
    if let Some(p) = out_prefix {
        cfg.output = p;
    }
    let m = &mut cfg.solver.minimize;
    if let Some(v) = f.method {
        m.method = v;
    }
    if let Some(v) = f.grad_tol {
        m.grad_tol = v;
    }
    if let Some(v) = f.max_iter {
        m.max_iter = v;
    }
    m.safeguard_truncate |= f.safeguard_truncate;
    cfg.solver.pin_a_end |= f.pin_a_end;
    cfg.solver.newton |= f.newton;
}

fn jobs(flag: usize) -> Result<usize, Failure> {
    match std::env::var("TWVORT_JOBS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Failure::Input(format!(
                "TWVORT_JOBS must be a positive integer, got '{s}'"
            ))),
        },
        Err(_) => Ok(flag.max(1)),
    }
}

fn emit(v: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("JSON serializes");
    match out {
        Some(p) => std::fs::write(p, text + "\n")
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve {
            config,
            out_prefix,
            solver,
        } => {
            let mut cfg = load(config.as_deref(), Mode::Solve)?;
            apply_flags(&mut cfg, out_prefix, solver);
            let s = run::solve(&cfg)?;
            let r = s.final_result();
            eprintln!(
                "converged in {} iterations: energy {}, grad {:e}, a_end {}, b_origin {}",
                s.minimizer.iterations,
                r.energy.total,
                r.grad_inf_norm,
                r.emergent.a_end,
                r.emergent.b_origin
            );
            Ok(EXIT_OK)
        }
        Command::Scan {
            config,
            out_prefix,
            jobs: flag,
            solver,
        } => {
            let mut cfg = load(Some(&config), Mode::Scan)?;
            apply_flags(&mut cfg, out_prefix, solver);
            let rows = run::scan(&cfg, jobs(flag)?)?;
            for (i, row) in rows.iter().enumerate() {
                match &row.outcome {
                    Ok(s) => eprintln!(
                        "[{i}] {} = {}: energy {}, converged {}",
                        cfg.scan.as_ref().map(|s| s.key.as_str()).unwrap_or("?"),
                        row.value,
                        s.final_result().energy.total,
                        s.converged()
                    ),
                    Err(e) => eprintln!("[{i}] value {}: {e}", row.value),
                }
            }
            Ok(run::scan_status(&rows))
        }
        Command::CheckPotential {
            config,
            x_max,
            y_max,
            resolution,
            out,
        } => {
            let cfg = load(config.as_deref(), Mode::CheckPotential)?;
            emit(
                &run::check_potential(&cfg.params, x_max, y_max, resolution)?,
                out.as_deref(),
            )?;
            Ok(EXIT_OK)
        }
        Command::CheckOde {
            config,
            profile,
            out,
            max_residual,
        } => {
            let cfg = load(config.as_deref(), Mode::CheckOde)?;
            let rep = run::check_ode(&cfg, &profile)?;
            emit(
                &serde_json::to_value(&rep).expect("report serializes"),
                out.as_deref(),
            )?;
            match max_residual {
                Some(limit) if rep.max_interior_sup() >= limit => {
                    Err(Failure::CheckFailed(format!(
                        "interior residual {:e} is not below {limit:e}",
                        rep.max_interior_sup()
                    )))
                }
                _ => Ok(EXIT_OK),
            }
        }
        Command::FitDecay {
            config,
            profile,
            out,
            origin_window,
            tail_window,
        } => {
            let cfg = load(config.as_deref(), Mode::FitDecay)?;
            let mut windows = FitWindows::default();
            windows.origin = origin_window.or(windows.origin);
            if let Some((lo, hi)) = tail_window {
                windows.infinity = TailWindow::Explicit { lo, hi };
            }
            let rep = run::fit_decay(&cfg, &profile, &windows)?;
            emit(
                &serde_json::to_value(&rep).expect("report serializes"),
                out.as_deref(),
            )?;
            Ok(EXIT_OK)
        }
        Command::GradCheck {
            config,
            cells,
            samples,
            perturbations,
            seed,
        } => {
            let cfg = load(config.as_deref(), Mode::GradCheck)?;
            let opts = GradCheckOptions {
                cells,
                samples,
                perturbations,
                seed,
                ..Default::default()
            };
            let v = run::grad_check(&cfg, &opts)?;
            println!(
                "max relative gradient error {:e}",
                v["max_rel_error"].as_f64().unwrap_or(f64::NAN)
            );
            emit(&v, None)?;
            Ok(EXIT_OK)
        }
        Command::Schema => {
            emit(&summary_schema(), None)?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
