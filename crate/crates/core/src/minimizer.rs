//! Descent minimization of the discrete energy over the admissible profiles.
//!
//! The default method is Polak–Ribière nonlinear conjugate gradient with
//! Armijo backtracking and a restart whenever the conjugate direction fails
//! to descend. Both methods can be preconditioned by the energy Hessian at
//! the vacuum `(1/e₁, 0, 1, 0)`, which is block-tridiagonal and positive
//! definite under the parameter conditions, so it is factored once per run.
//! Convergence is declared on the gradient sup-norm.

use serde::{Deserialize, Serialize};

use crate::energy::{
    cell_delta, energy_gradient_cells, hessian_interleaved, sup_norm, total_energy, Couplings,
    EnergyReport,
};
use crate::error::{Error, Result};
use crate::fields::{initial_profile, FieldConfiguration, FIELDS};
use crate::linalg::BlockCholesky;
use crate::mesh::RadialGrid;
use crate::params::ParameterSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GradientDescent,
    NonlinearCg,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient_descent" | "gd" => Ok(Method::GradientDescent),
            "nonlinear_cg" | "cg" => Ok(Method::NonlinearCg),
            other => Err(Error::InvalidOption(format!(
                "unknown method '{other}' (expected nonlinear_cg or gradient_descent)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSearchOptions {
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
    /// Smallest trial step before the search is declared failed.
    pub min_step: f64,
}

impl Default for LineSearchOptions {
    fn default() -> Self {
        Self {
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
            min_step: 1e-16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub line_search: LineSearchOptions,
    /// Clamp `a` and `f` into their bounds after every step.
    pub safeguard_truncate: bool,
    pub method: Method,
    /// Precondition with the vacuum Hessian.
    pub precondition: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            grad_tol: 1e-8,
            line_search: LineSearchOptions::default(),
            safeguard_truncate: false,
            method: Method::NonlinearCg,
            precondition: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistorySample {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

/// Limits read off the solved profile: `a(r_max)` and `b(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Emergent {
    pub a_end: f64,
    pub b_origin: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub config: FieldConfiguration,
    pub energy: EnergyReport,
    pub iterations: usize,
    pub converged: bool,
    pub grad_inf_norm: f64,
    pub history: Vec<HistorySample>,
    pub emergent: Emergent,
    /// Why the run stopped without converging, if it did.
    pub diagnostic: Option<String>,
    /// Set by Newton refinement when a gradient step replaced a Newton step.
    pub fallback_used: bool,
}

impl SolveResult {
    pub(crate) fn assemble(
        params: &ParameterSet,
        grid: &RadialGrid,
        config: FieldConfiguration,
        iterations: usize,
        converged: bool,
        history: Vec<HistorySample>,
        diagnostic: Option<String>,
    ) -> Result<Self> {
        let energy = total_energy(params, grid, &config)?;
        let emergent = Emergent {
            a_end: *config.a.last().unwrap(),
            b_origin: config.b[0],
        };
        Ok(Self {
            grad_inf_norm: energy.grad_norm,
            energy,
            config,
            iterations,
            converged,
            history,
            emergent,
            diagnostic,
            fallback_used: false,
        })
    }
}

/// Applies the inverse of the vacuum Hessian, or the identity.
pub(crate) struct Preconditioner {
    factor: Option<BlockCholesky>,
}

impl Preconditioner {
    pub(crate) fn vacuum(params: &ParameterSet, grid: &RadialGrid, free: &[bool]) -> Result<Self> {
        let vac = FieldConfiguration::vacuum(params, grid.node_count());
        let h = hessian_interleaved(&Couplings::new(params), grid, &vac.to_interleaved(), free);
        let factor = h.cholesky().ok_or_else(|| {
            Error::InvalidParams("vacuum Hessian is not positive definite".into())
        })?;
        Ok(Self {
            factor: Some(factor),
        })
    }

    fn identity() -> Self {
        Self { factor: None }
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        match &self.factor {
            Some(f) => f.solve(g),
            None => g.to_vec(),
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn clamp_bounds(x: &mut [f64], a_max: f64) {
    for node in x.chunks_exact_mut(FIELDS) {
        node[0] = node[0].clamp(0.0, a_max);
        node[2] = node[2].clamp(0.0, 1.0);
    }
}

/// Energy change of a trial step. The cell-wise difference is used while it
/// exceeds its own rounding error; below that, the trapezoidal integral of
/// the directional derivative along the step takes over.
fn decrease_estimate(new: &[f64], old: &[f64], t: f64, slope0: f64, grad_new: &[f64], dir: &[f64]) -> f64 {
    let delta = cell_delta(new, old);
    let scale: f64 = new.iter().map(|e| e.abs()).sum();
    if delta.abs() > 64.0 * f64::EPSILON * scale {
        delta
    } else {
        0.5 * t * (slope0 + dot(grad_new, dir))
    }
}

/// Minimizes the discrete energy from `seed`.
pub fn minimize(
    params: &ParameterSet,
    grid: &RadialGrid,
    seed: &FieldConfiguration,
    opts: &MinimizeOptions,
) -> Result<SolveResult> {
    params.ensure_valid()?;
    seed.check_grid(grid)?;
    if !(opts.grad_tol > 0.0) {
        return Err(Error::InvalidOption(format!(
            "grad_tol must be positive, got {}",
            opts.grad_tol
        )));
    }
    let ls = opts.line_search;
    if !(ls.armijo_c > 0.0 && ls.armijo_c < 1.0 && ls.backtrack_ratio > 0.0 && ls.backtrack_ratio < 1.0)
    {
        return Err(Error::InvalidOption(
            "line search needs 0 < armijo_c < 1 and 0 < backtrack_ratio < 1".into(),
        ));
    }

    let c = Couplings::new(params);
    let free = seed.free_mask();
    let mut config = seed.clone();
    config.apply_pins(params);
    let mut x = config.to_interleaved();
    let n = x.len();
    let a_max = 1.0 / params.e1;

    let precond = if opts.precondition {
        Preconditioner::vacuum(params, grid, &free)?
    } else {
        Preconditioner::identity()
    };

    let mut grad = vec![0.0; n];
    let mut cells = vec![0.0; grid.cells()];
    let mut cells_trial = vec![0.0; grid.cells()];
    let mut energy = energy_gradient_cells(&c, grid, &x, &free, &mut grad, Some(&mut cells));
    if !energy.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let mut gnorm = sup_norm(&grad);
    let mut history = vec![HistorySample {
        iteration: 0,
        energy,
        grad_norm: gnorm,
    }];

    let mut z = precond.apply(&grad);
    let mut dir: Vec<f64> = z.iter().map(|v| -v).collect();
    let mut gz_old = dot(&grad, &z);
    let mut prev_step = 1.0f64;

    let mut x_trial = vec![0.0; n];
    let mut grad_trial = vec![0.0; n];
    let mut iterations = 0;
    let mut diagnostic = None;

    while gnorm > opts.grad_tol && iterations < opts.max_iter {
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            // Not a descent direction: restart along the preconditioned gradient.
            dir.iter_mut().zip(&z).for_each(|(d, zi)| *d = -zi);
            slope = -gz_old;
        }

        let mut accepted = None;
        for attempt in 0..2 {
            let mut t = (2.0 * prev_step).min(1.0);
            while t >= ls.min_step {
                for i in 0..n {
                    x_trial[i] = x[i] + t * dir[i];
                }
                if opts.safeguard_truncate {
                    clamp_bounds(&mut x_trial, a_max);
                }
                let e = energy_gradient_cells(&c, grid, &x_trial, &free, &mut grad_trial, Some(&mut cells_trial));
                if !e.is_finite() {
                    return Err(Error::NonFinite {
                        iteration: iterations + 1,
                    });
                }
                let delta = decrease_estimate(&cells_trial, &cells, t, slope, &grad_trial, &dir);
                if delta <= ls.armijo_c * t * slope && delta < 0.0 && e <= energy {
                    accepted = Some((t, e));
                    break;
                }
                t *= ls.backtrack_ratio;
            }
            if accepted.is_some() || attempt == 1 {
                break;
            }
            // Second chance along the preconditioned steepest-descent direction.
            dir.iter_mut().zip(&z).for_each(|(d, zi)| *d = -zi);
            slope = -gz_old;
        }

        let Some((t, e_new)) = accepted else {
            diagnostic = Some(format!(
                "line search failed at iteration {} (no decrease down to step {:e}); grad norm {:e}",
                iterations + 1,
                ls.min_step,
                gnorm
            ));
            break;
        };

        prev_step = t;
        std::mem::swap(&mut x, &mut x_trial);
        std::mem::swap(&mut grad, &mut grad_trial);
        std::mem::swap(&mut cells, &mut cells_trial);
        energy = e_new;
        gnorm = sup_norm(&grad);
        iterations += 1;
        history.push(HistorySample {
            iteration: iterations,
            energy,
            grad_norm: gnorm,
        });

        let z_new = precond.apply(&grad);
        let gz_new = dot(&grad, &z_new);
        let beta = match opts.method {
            Method::GradientDescent => 0.0,
            Method::NonlinearCg => {
                // PR+: β = max(0, gₖ₊₁·(zₖ₊₁ − zₖ) / gₖ·zₖ)
                let num = gz_new - dot(&grad, &z);
                if gz_old > 0.0 {
                    (num / gz_old).max(0.0)
                } else {
                    0.0
                }
            }
        };
        for i in 0..n {
            dir[i] = -z_new[i] + beta * dir[i];
        }
        z = z_new;
        gz_old = gz_new;
    }

    if diagnostic.is_none() && gnorm > opts.grad_tol {
        diagnostic = Some(format!(
            "reached max_iter={} with grad norm {:e} > {:e}",
            opts.max_iter, gnorm, opts.grad_tol
        ));
    }
    config.set_from_interleaved(&x);
    SolveResult::assemble(
        params,
        grid,
        config,
        iterations,
        gnorm <= opts.grad_tol,
        history,
        diagnostic,
    )
}

/// Solves each parameter set in order, warm-starting from the previous
/// converged profile. A failed entry is recorded and the sweep continues
/// from the last good profile.
pub fn continuation_sweep(
    params_list: &[ParameterSet],
    grid: &RadialGrid,
    opts: &MinimizeOptions,
) -> Vec<Result<SolveResult>> {
    continuation_sweep_from(params_list, grid, opts, |p| initial_profile(p, grid))
}

/// [`continuation_sweep`] with a caller-supplied cold-start seed, used until
/// the first entry converges.
pub fn continuation_sweep_from<S>(
    params_list: &[ParameterSet],
    grid: &RadialGrid,
    opts: &MinimizeOptions,
    mut cold_seed: S,
) -> Vec<Result<SolveResult>>
where
    S: FnMut(&ParameterSet) -> FieldConfiguration,
{
    let mut out = Vec::with_capacity(params_list.len());
    let mut warm: Option<FieldConfiguration> = None;
    for p in params_list {
        let seed = match &warm {
            Some(c) => {
                let mut s = c.clone();
                s.apply_pins(p);
                s
            }
            None => cold_seed(p),
        };
        let res = minimize(p, grid, &seed, opts);
        if let Ok(r) = &res {
            if r.converged {
                warm = Some(r.config.clone());
            }
        }
        out.push(res);
    }
    out
}
