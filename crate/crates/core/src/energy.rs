//! Discrete radial energy, its exact gradient and Hessian.
//!
//! Profiles are piecewise linear between nodes. On each cell the slope
//! `(u_{i+1}−u_i)/h_i` is exact, all other factors (including `1/r` and
//! `1/r²`) are sampled at the cell midpoint, and the cell contributes
//! `2π r_mid 𝓔_mid h_i`. The origin node therefore never produces a
//! division by zero. Because the discrete Euler–Lagrange equations are the
//! gradient of this sum, the minimizer and the Newton refinement share one
//! discretization.
//!
//! Cell contributions are reduced serially in cell order with compensated
//! (Neumaier) summation; that order is the canonical one.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldConfiguration, FIELDS};
use crate::linalg::BlockTridiagonal;
use crate::mesh::RadialGrid;
use crate::params::ParameterSet;

/// Per-term breakdown; every entry except `potential` is nonnegative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerms {
    /// `∫ π N² (a′)²/r dr`
    pub gauge_a: f64,
    /// `∫ π ω² r (b′)² dr`
    pub gauge_b: f64,
    pub grad_f: f64,
    pub grad_g: f64,
    /// `N²(1−e₁a)² f²/r²`
    pub cov_a_f: f64,
    /// `(e₂Na−M)² g²/r²`
    pub cov_a_g: f64,
    /// `ω²(e₁²b²f² + (1−e₂b)²g²)`
    pub twist: f64,
    pub potential: f64,
}

impl EnergyTerms {
    pub fn sum(&self) -> f64 {
        let mut acc = Neumaier::default();
        for v in self.as_array() {
            acc.add(v);
        }
        acc.value()
    }

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.gauge_a,
            self.gauge_b,
            self.grad_f,
            self.grad_g,
            self.cov_a_f,
            self.cov_a_g,
            self.twist,
            self.potential,
        ]
    }

    pub const NAMES: [&'static str; 8] = [
        "gauge_a",
        "gauge_b",
        "grad_f",
        "grad_g",
        "cov_a_f",
        "cov_a_g",
        "twist",
        "potential",
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    pub terms: EnergyTerms,
    /// `∫ 2π r α g² dr`, the only destabilizing piece of the potential.
    /// Already contained in `potential`; reported for diagnostics.
    pub alpha_term: f64,
    /// Sup-norm of the gradient over free degrees of freedom.
    pub grad_norm: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Parameter combinations reused on every cell.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Couplings {
    n2: f64,
    n: f64,
    m: f64,
    e1: f64,
    e2: f64,
    w2: f64,
    beta1: f64,
    beta2: f64,
    beta_prime: f64,
    alpha: f64,
}

impl Couplings {
    pub(crate) fn new(p: &ParameterSet) -> Self {
        let n = p.n();
        Self {
            n2: n * n,
            n,
            m: p.m(),
            e1: p.e1,
            e2: p.e2,
            w2: p.omega * p.omega,
            beta1: p.beta1,
            beta2: p.beta2,
            beta_prime: p.beta_prime,
            alpha: p.alpha,
        }
    }
}

/// Midpoint values and slopes of one cell, field order `a, b, f, g`.
#[derive(Clone, Copy, Debug)]
struct CellState {
    mid: [f64; 4],
    slope: [f64; 4],
    r: f64,
    h: f64,
}

impl CellState {
    fn new(left: &[f64], right: &[f64], r: f64, h: f64) -> Self {
        let mut mid = [0.0; 4];
        let mut slope = [0.0; 4];
        for k in 0..FIELDS {
            mid[k] = 0.5 * (left[k] + right[k]);
            slope[k] = (right[k] - left[k]) / h;
        }
        Self { mid, slope, r, h }
    }

    fn weight(&self) -> f64 {
        2.0 * PI * self.r * self.h
    }

    fn terms(&self, c: &Couplings) -> (EnergyTerms, f64) {
        let [a, b, f, g] = self.mid;
        let [sa, sb, sf, sg] = self.slope;
        let w = self.weight();
        let inv_r2 = 1.0 / (self.r * self.r);
        let u = 1.0 - c.e1 * a;
        let v = c.e2 * c.n * a - c.m;
        let q = 1.0 - c.e2 * b;
        let (f2, g2) = (f * f, g * g);
        let fm = (f - 1.0) * (f + 1.0);
        let potential = 0.5 * c.beta1 * fm * fm + 0.5 * c.beta2 * g2 * g2 + c.beta_prime * f2 * g2
            - c.alpha * g2;
        let terms = EnergyTerms {
            gauge_a: w * 0.5 * c.n2 * sa * sa * inv_r2,
            gauge_b: w * 0.5 * c.w2 * sb * sb,
            grad_f: w * sf * sf,
            grad_g: w * sg * sg,
            cov_a_f: w * c.n2 * u * u * f2 * inv_r2,
            cov_a_g: w * v * v * g2 * inv_r2,
            twist: w * c.w2 * (c.e1 * c.e1 * b * b * f2 + q * q * g2),
            potential: w * potential,
        };
        (terms, w * c.alpha * g2)
    }

    fn total(&self, c: &Couplings) -> f64 {
        self.terms(c).0.sum()
    }

    /// Derivatives with respect to the midpoint values and the slopes.
    fn first_derivatives(&self, c: &Couplings) -> ([f64; 4], [f64; 4]) {
        let [a, b, f, g] = self.mid;
        let [sa, sb, sf, sg] = self.slope;
        let w = self.weight();
        let inv_r2 = 1.0 / (self.r * self.r);
        let u = 1.0 - c.e1 * a;
        let v = c.e2 * c.n * a - c.m;
        let q = 1.0 - c.e2 * b;
        let (f2, g2) = (f * f, g * g);
        let fm = (f - 1.0) * (f + 1.0);
        let dm = [
            w * 2.0 * (c.e2 * c.n * v * g2 - c.e1 * c.n2 * u * f2) * inv_r2,
            w * 2.0 * c.w2 * (c.e1 * c.e1 * b * f2 - c.e2 * q * g2),
            w * 2.0
                * f
                * (c.n2 * u * u * inv_r2 + c.w2 * c.e1 * c.e1 * b * b + c.beta1 * fm + c.beta_prime * g2),
            w * 2.0
                * g
                * (v * v * inv_r2 + c.w2 * q * q + c.beta2 * g2 + c.beta_prime * f2 - c.alpha),
        ];
        let ds = [
            w * c.n2 * sa * inv_r2,
            w * c.w2 * sb,
            w * 2.0 * sf,
            w * 2.0 * sg,
        ];
        (dm, ds)
    }

    /// Hessian in the midpoint values and the (diagonal) slope curvatures.
    fn second_derivatives(&self, c: &Couplings) -> (Matrix4<f64>, [f64; 4]) {
        let [a, b, f, g] = self.mid;
        let w = self.weight();
        let inv_r2 = 1.0 / (self.r * self.r);
        let u = 1.0 - c.e1 * a;
        let v = c.e2 * c.n * a - c.m;
        let q = 1.0 - c.e2 * b;
        let (f2, g2) = (f * f, g * g);
        let e1sq = c.e1 * c.e1;
        let haa = 2.0 * c.n2 * (e1sq * f2 + c.e2 * c.e2 * g2) * inv_r2;
        let haf = -4.0 * c.e1 * c.n2 * u * f * inv_r2;
        let hag = 4.0 * c.e2 * c.n * v * g * inv_r2;
        let hbb = 2.0 * c.w2 * (e1sq * f2 + c.e2 * c.e2 * g2);
        let hbf = 4.0 * c.w2 * e1sq * b * f;
        let hbg = -4.0 * c.w2 * c.e2 * q * g;
        let hff = 2.0 * c.n2 * u * u * inv_r2
            + 2.0 * c.w2 * e1sq * b * b
            + 2.0 * c.beta1 * (3.0 * f2 - 1.0)
            + 2.0 * c.beta_prime * g2;
        let hfg = 4.0 * c.beta_prime * f * g;
        let hgg = 2.0 * v * v * inv_r2 + 2.0 * c.w2 * q * q + 6.0 * c.beta2 * g2
            + 2.0 * c.beta_prime * f2
            - 2.0 * c.alpha;
        #[rustfmt::skip]
        let hm = Matrix4::new(
            haa, 0.0, haf, hag,
            0.0, hbb, hbf, hbg,
            haf, hbf, hff, hfg,
            hag, hbg, hfg, hgg,
        ) * w;
        let hs = [w * c.n2 * inv_r2, w * c.w2, 2.0 * w, 2.0 * w];
        (hm, hs)
    }
}

fn cell_state(grid: &RadialGrid, x: &[f64], i: usize) -> CellState {
    let r = grid.nodes();
    CellState::new(
        &x[FIELDS * i..FIELDS * i + FIELDS],
        &x[FIELDS * (i + 1)..FIELDS * (i + 1) + FIELDS],
        0.5 * (r[i] + r[i + 1]),
        grid.widths()[i],
    )
}

/// Energy of an interleaved state vector.
pub(crate) fn energy_interleaved(c: &Couplings, grid: &RadialGrid, x: &[f64]) -> f64 {
    let mut acc = Neumaier::default();
    for i in 0..grid.cells() {
        acc.add(cell_state(grid, x, i).total(c));
    }
    acc.value()
}

/// Energy and full interleaved gradient; entries at pinned DOFs are zeroed.
pub(crate) fn energy_gradient_interleaved(
    c: &Couplings,
    grid: &RadialGrid,
    x: &[f64],
    free: &[bool],
    grad: &mut [f64],
) -> f64 {
    energy_gradient_cells(c, grid, x, free, grad, None)
}

/// As [`energy_gradient_interleaved`], also storing per-cell energies.
pub(crate) fn energy_gradient_cells(
    c: &Couplings,
    grid: &RadialGrid,
    x: &[f64],
    free: &[bool],
    grad: &mut [f64],
    mut cells: Option<&mut [f64]>,
) -> f64 {
    grad.iter_mut().for_each(|v| *v = 0.0);
    let mut acc = Neumaier::default();
    for i in 0..grid.cells() {
        let cell = cell_state(grid, x, i);
        let e = cell.total(c);
        acc.add(e);
        if let Some(out) = cells.as_deref_mut() {
            out[i] = e;
        }
        let (dm, ds) = cell.first_derivatives(c);
        let inv_h = 1.0 / cell.h;
        for k in 0..FIELDS {
            grad[FIELDS * i + k] += 0.5 * dm[k] - ds[k] * inv_h;
            grad[FIELDS * (i + 1) + k] += 0.5 * dm[k] + ds[k] * inv_h;
        }
    }
    for (g, &fr) in grad.iter_mut().zip(free) {
        if !fr {
            *g = 0.0;
        }
    }
    acc.value()
}

pub(crate) fn hessian_interleaved(
    c: &Couplings,
    grid: &RadialGrid,
    x: &[f64],
    free: &[bool],
) -> BlockTridiagonal {
    let mut h = BlockTridiagonal::zeros(grid.node_count());
    for i in 0..grid.cells() {
        let cell = cell_state(grid, x, i);
        let (hm, hs) = cell.second_derivatives(c);
        let inv_h2 = 1.0 / (cell.h * cell.h);
        let stiff = Matrix4::from_diagonal(&nalgebra::Vector4::from(hs)) * inv_h2;
        let quarter = hm * 0.25;
        h.diag[i] += quarter + stiff;
        h.diag[i + 1] += quarter + stiff;
        h.upper[i] += quarter - stiff;
    }
    h.pin(free);
    h
}

/// `Σ (new − old)` over cells, free of the cancellation in `E(new) − E(old)`.
pub(crate) fn cell_delta(new: &[f64], old: &[f64]) -> f64 {
    let mut acc = Neumaier::default();
    for (a, b) in new.iter().zip(old) {
        acc.add(a - b);
    }
    acc.value()
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Total energy with per-term breakdown and gradient sup-norm.
pub fn total_energy(
    params: &ParameterSet,
    grid: &RadialGrid,
    config: &FieldConfiguration,
) -> Result<EnergyReport> {
    config.check_grid(grid)?;
    let c = Couplings::new(params);
    let x = config.to_interleaved();
    let mut accs = [Neumaier::default(); 8];
    let mut alpha = Neumaier::default();
    for i in 0..grid.cells() {
        let (t, al) = cell_state(grid, &x, i).terms(&c);
        for (acc, v) in accs.iter_mut().zip(t.as_array()) {
            acc.add(v);
        }
        alpha.add(al);
    }
    let v: Vec<f64> = accs.iter().map(Neumaier::value).collect();
    let terms = EnergyTerms {
        gauge_a: v[0],
        gauge_b: v[1],
        grad_f: v[2],
        grad_g: v[3],
        cov_a_f: v[4],
        cov_a_g: v[5],
        twist: v[6],
        potential: v[7],
    };
    let mut grad = vec![0.0; x.len()];
    energy_gradient_interleaved(&c, grid, &x, &config.free_mask(), &mut grad);
    Ok(EnergyReport {
        total: terms.sum(),
        terms,
        alpha_term: alpha.value(),
        grad_norm: sup_norm(&grad),
    })
}

/// Energy only, in the canonical reduction order.
pub fn energy_value(
    params: &ParameterSet,
    grid: &RadialGrid,
    config: &FieldConfiguration,
) -> Result<f64> {
    config.check_grid(grid)?;
    Ok(energy_interleaved(
        &Couplings::new(params),
        grid,
        &config.to_interleaved(),
    ))
}

/// Contribution of each cell to the total.
pub fn cell_energies(
    params: &ParameterSet,
    grid: &RadialGrid,
    config: &FieldConfiguration,
) -> Result<Vec<f64>> {
    config.check_grid(grid)?;
    let c = Couplings::new(params);
    let x = config.to_interleaved();
    Ok((0..grid.cells())
        .map(|i| cell_state(grid, &x, i).total(&c))
        .collect())
}

/// Partial derivatives of the discrete energy with respect to the free
/// nodal values, ordered as [`FieldConfiguration::free_dofs`].
pub fn energy_gradient(
    params: &ParameterSet,
    grid: &RadialGrid,
    config: &FieldConfiguration,
) -> Result<Vec<f64>> {
    let free = config.free_mask();
    let full = full_gradient(params, grid, config)?;
    Ok(full
        .into_iter()
        .zip(free)
        .filter_map(|(g, f)| f.then_some(g))
        .collect())
}

/// Interleaved gradient over all nodes with zeros at pinned entries.
pub fn full_gradient(
    params: &ParameterSet,
    grid: &RadialGrid,
    config: &FieldConfiguration,
) -> Result<Vec<f64>> {
    config.check_grid(grid)?;
    let x = config.to_interleaved();
    let mut grad = vec![0.0; x.len()];
    energy_gradient_interleaved(
        &Couplings::new(params),
        grid,
        &x,
        &config.free_mask(),
        &mut grad,
    );
    Ok(grad)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub max_rel_error: f64,
    /// Index into [`FieldConfiguration::free_dofs`] of the worst entry.
    pub worst_dof: usize,
    pub samples: usize,
    /// Denominator floor, `1e-3·‖∇E‖∞`; entries far below the largest are
    /// dominated by the `O(step²)` truncation of the quotient.
    pub floor: f64,
}

/// Compares the analytic gradient with central differences of step `step`
/// at the given free DOFs. The differences are summed cell by cell, so
/// neither the gradient code nor the rounding of the total enters.
pub fn finite_difference_check(
    params: &ParameterSet,
    grid: &RadialGrid,
    config: &FieldConfiguration,
    dofs: &[usize],
    step: f64,
) -> Result<GradientCheck> {
    let grad = energy_gradient(params, grid, config)?;
    let free = config.free_dofs();
    let floor = 1e-3 * sup_norm(&grad);
    let mut worst = (0.0f64, 0usize);
    for &dof in dofs {
        let (field, node) = *free.get(dof).ok_or_else(|| {
            Error::InvalidOption(format!("dof {dof} out of range ({} free)", free.len()))
        })?;
        let mut plus = config.clone();
        plus.field_mut(field)[node] += step;
        let mut minus = config.clone();
        minus.field_mut(field)[node] -= step;
        let ep = cell_energies(params, grid, &plus)?;
        let em = cell_energies(params, grid, &minus)?;
        let fd = cell_delta(&ep, &em) / (2.0 * step);
        let err = (grad[dof] - fd).abs() / grad[dof].abs().max(fd.abs()).max(floor);
        if err >= worst.0 {
            worst = (err, dof);
        }
    }
    Ok(GradientCheck {
        max_rel_error: worst.0,
        worst_dof: worst.1,
        samples: dofs.len(),
        floor,
    })
}

/// Exact second derivative of the discrete energy, block-tridiagonal in node
/// order. Pinned rows and columns are replaced by the identity.
pub fn energy_hessian(
    params: &ParameterSet,
    grid: &RadialGrid,
    config: &FieldConfiguration,
) -> Result<BlockTridiagonal> {
    config.check_grid(grid)?;
    Ok(hessian_interleaved(
        &Couplings::new(params),
        grid,
        &config.to_interleaved(),
        &config.free_mask(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{initial_profile, truncate, Field, PinSet};
    use crate::mesh::Grading;
    use rand::{Rng, SeedableRng};

    fn uniform(r_max: f64, cells: usize) -> RadialGrid {
        RadialGrid::build(r_max, cells, Grading::Uniform).unwrap()
    }

    #[test]
    fn vacuum_energy_and_gradient_vanish() {
        let p = ParameterSet::baseline();
        let grid = uniform(30.0, 300);
        let c = FieldConfiguration::vacuum(&p, grid.node_count());
        let rep = total_energy(&p, &grid, &c).unwrap();
        assert_eq!(rep.total, 0.0);
        assert!(rep.terms.as_array().iter().all(|&t| t == 0.0));
        assert!(energy_gradient(&p, &grid, &c).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn zero_configuration_matches_area_integral() {
        let p = ParameterSet::baseline();
        let grid = uniform(7.0, 1000);
        let rep = total_energy(&p, &grid, &FieldConfiguration::zero(grid.node_count())).unwrap();
        let exact = PI * p.beta1 * 49.0 / 2.0;
        assert!(((rep.total - exact) / exact).abs() < 1e-3);
    }

    #[test]
    fn dimension_mismatch_refused() {
        let p = ParameterSet::baseline();
        let grid = uniform(1.0, 10);
        let c = FieldConfiguration::zero(5);
        assert!(total_energy(&p, &grid, &c).is_err());
        assert!(energy_gradient(&p, &grid, &c).is_err());
    }

    #[test]
    fn terms_sum_and_signs() {
        let p = ParameterSet::baseline();
        let grid = RadialGrid::production(20.0, 400).unwrap();
        let c = initial_profile(&p, &grid);
        let rep = total_energy(&p, &grid, &c).unwrap();
        let s: f64 = rep.terms.as_array().iter().sum();
        assert!(((rep.total - s) / rep.total).abs() < 1e-12);
        let arr = rep.terms.as_array();
        assert!(arr[..7].iter().all(|&t| t >= 0.0));
        assert!(rep.alpha_term > 0.0);
    }

    #[test]
    fn single_bump_in_g_at_vacuum() {
        // Linearizing at the vacuum, only the quadratic g-terms survive:
        // grad_g(i) = 2ε Σ_adjacent w (c_cell/4 + 1/h²) where
        // c_cell = (e₂N/e₁−M)²/r² + ω² + β′ − α.
        let p = ParameterSet::baseline();
        let grid = uniform(10.0, 100);
        let mut c = FieldConfiguration::vacuum(&p, grid.node_count());
        let i = 40;
        let eps = 1e-3;
        c.g[i] = eps;
        let grad = full_gradient(&p, &grid, &c).unwrap();
        let r = grid.nodes();
        let h = grid.widths()[0];
        let mut expected = 0.0;
        for rm in [0.5 * (r[i - 1] + r[i]), 0.5 * (r[i] + r[i + 1])] {
            let w = 2.0 * PI * rm * h;
            let coeff = 1.0 / (rm * rm) + p.omega.powi(2) + p.beta_prime - p.alpha;
            expected += w * (0.5 * coeff + 2.0 / (h * h)) * eps;
        }
        let got = grad[4 * i + 3];
        assert!(got > 0.0);
        assert!(((got - expected) / expected).abs() < 1e-5, "{got} vs {expected}");
    }

    #[test]
    fn derivative_terms_exact_for_linear_fields() {
        // β₁ = 0 bypasses validation; only used to isolate the quadrature.
        let p = ParameterSet {
            beta1: 0.0,
            ..ParameterSet::baseline()
        };
        let grid = RadialGrid::production(3.0, 16).unwrap();
        let r = grid.nodes();
        let lin = |s: f64, o: f64| r.iter().map(|&x| s * x + o).collect::<Vec<_>>();
        let c = FieldConfiguration::new(lin(0.0, 0.0), lin(0.7, 0.1), lin(1.3, 0.2), lin(-0.4, 0.5), PinSet::none()).unwrap();
        let t = total_energy(&p, &grid, &c).unwrap().terms;
        let r2 = 9.0;
        assert!((t.gauge_b - PI * p.omega.powi(2) * 0.49 * r2 / 2.0).abs() < 1e-12);
        assert!((t.grad_f - 2.0 * PI * 1.69 * r2 / 2.0).abs() < 1e-12);
        assert!((t.grad_g - 2.0 * PI * 0.16 * r2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let p = ParameterSet::baseline();
        let grid = RadialGrid::production(8.0, 40).unwrap();
        let mut c = initial_profile(&p, &grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for v in c.g.iter_mut().chain(c.b.iter_mut()) {
            *v += rng.gen_range(-0.05..0.05);
        }
        c.apply_pins(&p);
        let hess = energy_hessian(&p, &grid, &c).unwrap();
        let free = c.free_mask();
        let x0 = c.to_interleaved();
        let step = 1e-6;
        for j in (0..x0.len()).filter(|&j| free[j]).step_by(7) {
            let mut e = vec![0.0; x0.len()];
            e[j] = 1.0;
            let col = hess.mul_vec(&e);
            let mut cp = c.clone();
            let mut xp = x0.clone();
            xp[j] += step;
            cp.set_from_interleaved(&xp);
            let gp = full_gradient(&p, &grid, &cp).unwrap();
            xp[j] -= 2.0 * step;
            cp.set_from_interleaved(&xp);
            let gm = full_gradient(&p, &grid, &cp).unwrap();
            let col_max = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for k in (0..x0.len()).filter(|&k| free[k]) {
                let fd = (gp[k] - gm[k]) / (2.0 * step);
                assert!((fd - col[k]).abs() < 1e-6 * col_max, "H[{k},{j}] {} vs {fd}", col[k]);
            }
        }
    }

    #[test]
    fn truncation_does_not_raise_f_potential_or_slopes() {
        let p = ParameterSet::baseline();
        let grid = uniform(6.0, 60);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let mut c = initial_profile(&p, &grid);
            for i in 1..grid.node_count() - 1 {
                c.f[i] += rng.gen_range(-0.8..0.8);
                c.a[i] += rng.gen_range(-0.8..0.8);
            }
            let t = truncate(&c, &p);
            let only_f_pot = ParameterSet {
                beta2: 0.0,
                beta_prime: 0.0,
                alpha: 0.0,
                ..p
            };
            let pot = |c: &FieldConfiguration| total_energy(&only_f_pot, &grid, c).unwrap().terms.potential;
            assert!(pot(&t) <= pot(&c) + 1e-12);
            let rep_c = total_energy(&p, &grid, &c).unwrap().terms;
            let rep_t = total_energy(&p, &grid, &t).unwrap().terms;
            assert!(rep_t.grad_f <= rep_c.grad_f + 1e-12);
            assert!(rep_t.gauge_a <= rep_c.gauge_a + 1e-12);
            assert_eq!(t.field(Field::G), c.field(Field::G));
        }
    }

    #[test]
    fn finite_difference_check_passes_on_seed() {
        let p = ParameterSet::baseline();
        let grid = RadialGrid::production(30.0, 200).unwrap();
        let c = initial_profile(&p, &grid);
        let n = c.free_dofs().len();
        let dofs: Vec<usize> = (0..50).map(|k| k * n / 50).collect();
        let chk = finite_difference_check(&p, &grid, &c, &dofs, 1e-6).unwrap();
        assert_eq!(chk.samples, 50);
        assert!(chk.max_rel_error < 1e-6, "{chk:?}");
        assert!(finite_difference_check(&p, &grid, &c, &[n], 1e-6).is_err());
    }
}
