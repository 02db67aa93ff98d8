//! Strong-form residuals of the radial field equations and Newton
//! refinement of the discrete stationarity condition.
//!
//! Residuals use three-point central differences with exact weights for the
//! local (possibly graded) spacing:
//!
//! ```text
//! u′  ≈ [h₋²(u₊−u₀) + h₊²(u₀−u₋)] / (h₋h₊(h₋+h₊))
//! u″  ≈ 2[h₋(u₊−u₀) − h₊(u₀−u₋)] / (h₋h₊(h₋+h₊))
//! ```
//!
//! Both are written in terms of differences so that constant profiles give
//! exactly zero.

use serde::{Deserialize, Serialize};

use crate::energy::{
    energy_gradient_interleaved, energy_interleaved, hessian_interleaved, sup_norm, Couplings,
};
use crate::error::{Error, Result};
use crate::fields::{Field, FieldConfiguration};
use crate::mesh::RadialGrid;
use crate::minimizer::{HistorySample, SolveResult};
use crate::params::ParameterSet;

/// Fraction of nodes at each end left out of the sup-norms.
pub const EDGE_EXCLUSION: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    /// `(Σ res² r h̄)^{1/2}` over interior nodes, `h̄` the dual cell width.
    pub weighted_l2: f64,
    /// Max |res| over interior nodes away from both ends.
    pub interior_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Radii of the interior nodes the residuals live on.
    pub r: Vec<f64>,
    pub res_a: Vec<f64>,
    pub res_b: Vec<f64>,
    pub res_f: Vec<f64>,
    pub res_g: Vec<f64>,
    pub norms: [ResidualNorms; 4],
    /// Node index range `[lo, hi)` used for the sup-norms.
    pub sup_range: (usize, usize),
}

impl ResidualReport {
    pub fn residual(&self, field: Field) -> &[f64] {
        match field {
            Field::A => &self.res_a,
            Field::B => &self.res_b,
            Field::F => &self.res_f,
            Field::G => &self.res_g,
        }
    }

    pub fn norms(&self, field: Field) -> ResidualNorms {
        self.norms[field as usize]
    }

    pub fn max_interior_sup(&self) -> f64 {
        self.norms.iter().map(|n| n.interior_sup).fold(0.0, f64::max)
    }
}

/// Residual `LHS − RHS` of each field equation at every interior node.
pub fn residuals(
    params: &ParameterSet,
    grid: &RadialGrid,
    config: &FieldConfiguration,
) -> Result<ResidualReport> {
    config.check_grid(grid)?;
    let nodes = grid.nodes();
    let count = nodes.len();
    if count < 3 {
        return Err(Error::InvalidGrid(format!(
            "residuals need at least 3 nodes, got {count}"
        )));
    }
    let (n, m) = (params.n(), params.m());
    let (e1, e2) = (params.e1, params.e2);
    let w2 = params.omega * params.omega;
    let (a, b, f, g) = (&config.a, &config.b, &config.f, &config.g);

    let interior = count - 2;
    let mut res = [
        Vec::with_capacity(interior),
        Vec::with_capacity(interior),
        Vec::with_capacity(interior),
        Vec::with_capacity(interior),
    ];
    for i in 1..count - 1 {
        let r = nodes[i];
        let hm = r - nodes[i - 1];
        let hp = nodes[i + 1] - r;
        let denom = hm * hp * (hm + hp);
        let d1 = |u: &[f64]| (hm * hm * (u[i + 1] - u[i]) + hp * hp * (u[i] - u[i - 1])) / denom;
        let d2 = |u: &[f64]| 2.0 * (hm * (u[i + 1] - u[i]) - hp * (u[i] - u[i - 1])) / denom;
        let (ai, bi, fi, gi) = (a[i], b[i], f[i], g[i]);
        let (f2, g2) = (fi * fi, gi * gi);
        let inv_r2 = 1.0 / (r * r);

        let rhs_a = 2.0 * f2 * e1 * (e1 * ai - 1.0) + 2.0 * g2 * e2 * (e2 * ai - m / n);
        res[0].push(d2(a) - d1(a) / r - rhs_a);

        let rhs_b = 2.0 * bi * (e1 * e1 * f2 + e2 * e2 * g2) - 2.0 * e2 * g2;
        res[1].push(d2(b) + d1(b) / r - rhs_b);

        let u = 1.0 - e1 * ai;
        let rhs_f = fi
            * (u * u * n * n * inv_r2
                + e1 * e1 * w2 * bi * bi
                + params.beta1 * (fi - 1.0) * (fi + 1.0)
                + params.beta_prime * g2);
        res[2].push(d2(f) + d1(f) / r - rhs_f);

        let v = e2 * n * ai - m;
        let q = 1.0 - e2 * bi;
        let rhs_g = gi
            * (v * v * inv_r2 + w2 * q * q + params.beta2 * g2 - params.alpha
                + params.beta_prime * f2);
        res[3].push(d2(g) + d1(g) / r - rhs_g);
    }

    let skip = ((EDGE_EXCLUSION * count as f64).ceil() as usize).max(1);
    let sup_range = (skip, (count - skip).max(skip));
    let norms = res.each_ref().map(|rv| {
        let mut l2 = 0.0;
        for (j, v) in rv.iter().enumerate() {
            let i = j + 1;
            let dual = 0.5 * (nodes[i + 1] - nodes[i - 1]);
            l2 += v * v * nodes[i] * dual;
        }
        let interior_sup = (sup_range.0..sup_range.1)
            .map(|i| rv[i - 1].abs())
            .fold(0.0, f64::max);
        ResidualNorms {
            weighted_l2: l2.sqrt(),
            interior_sup,
        }
    });
    let [res_a, res_b, res_f, res_g] = res;
    Ok(ResidualReport {
        r: nodes[1..count - 1].to_vec(),
        res_a,
        res_b,
        res_f,
        res_g,
        norms,
        sup_range,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Target gradient sup-norm.
    pub tol: f64,
    pub max_newton: usize,
    /// Backtracking factor applied to the Newton step when the gradient
    /// norm does not drop.
    pub damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_newton: 20,
            damping: 0.5,
        }
    }
}

/// Damped Newton iteration on the discrete energy gradient.
///
/// Each step solves with the exact block-tridiagonal Hessian. If the
/// Hessian is not positive definite the step falls back to the negative
/// gradient and `fallback_used` is set. Steps are accepted when the
/// gradient 2-norm decreases; `iterations` counts Newton steps taken.
pub fn newton_refine(
    params: &ParameterSet,
    grid: &RadialGrid,
    seed: &FieldConfiguration,
    opts: &NewtonOptions,
) -> Result<SolveResult> {
    seed.check_grid(grid)?;
    if !(opts.damping > 0.0 && opts.damping < 1.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidOption(
            "newton needs tol > 0 and 0 < damping < 1".into(),
        ));
    }
    let c = Couplings::new(params);
    let free = seed.free_mask();
    let mut config = seed.clone();
    let mut x = config.to_interleaved();
    let mut grad = vec![0.0; x.len()];
    let mut energy = energy_gradient_interleaved(&c, grid, &x, &free, &mut grad);
    let mut gnorm = sup_norm(&grad);
    let mut g2 = l2(&grad);
    let mut history = vec![HistorySample {
        iteration: 0,
        energy,
        grad_norm: gnorm,
    }];
    let mut steps = 0;
    let mut fallback = false;
    let mut diagnostic = None;
    let mut trial = vec![0.0; x.len()];
    let mut grad_trial = vec![0.0; x.len()];

    while gnorm > opts.tol && steps < opts.max_newton {
        if !energy.is_finite() {
            return Err(Error::NonFinite { iteration: steps });
        }
        let hess = hessian_interleaved(&c, grid, &x, &free);
        let newton_dir = hess.cholesky().map(|ch| {
            let mut d = ch.solve(&grad);
            d.iter_mut().for_each(|v| *v = -*v);
            d
        });
        let dir = match newton_dir {
            Some(d) if d.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>() < 0.0 => d,
            _ => {
                fallback = true;
                grad.iter().map(|v| -v).collect()
            }
        };

        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            for i in 0..x.len() {
                trial[i] = x[i] + t * dir[i];
            }
            let e = energy_gradient_interleaved(&c, grid, &trial, &free, &mut grad_trial);
            let g2_trial = l2(&grad_trial);
            if e.is_finite() && g2_trial < (1.0 - 1e-4 * t) * g2 {
                energy = e;
                g2 = g2_trial;
                accepted = true;
                break;
            }
            t *= opts.damping;
        }
        if !accepted {
            diagnostic = Some(format!(
                "damped Newton stalled at step {} with grad norm {:e}",
                steps + 1,
                gnorm
            ));
            break;
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut grad, &mut grad_trial);
        gnorm = sup_norm(&grad);
        steps += 1;
        history.push(HistorySample {
            iteration: steps,
            energy,
            grad_norm: gnorm,
        });
    }
    let converged = gnorm <= opts.tol;
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!(
            "no convergence after {} Newton steps (grad norm {:e})",
            steps, gnorm
        ));
    }
    debug_assert!(energy_interleaved(&c, grid, &x).is_finite());
    config.set_from_interleaved(&x);
    let mut out = SolveResult::assemble(params, grid, config, steps, converged, history, diagnostic)?;
    out.fallback_used = fallback;
    Ok(out)
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
