use std::f64::consts::PI;

use twvort_core::energy::energy_value;
use twvort_core::{FieldConfiguration, Grading, ParameterSet, PinSet, RadialGrid};

const R_MAX: f64 = 10.0;

// Smooth profile with the right behaviour at both ends; the derivatives are
// written out by hand so the oracle shares no code with the discretization.
fn a(r: f64) -> f64 {
    1.0 - (-r * r).exp()
}
fn da(r: f64) -> f64 {
    2.0 * r * (-r * r).exp()
}
fn b(r: f64) -> f64 {
    0.3 * (-r * r / 4.0).exp()
}
fn db(r: f64) -> f64 {
    -0.15 * r * (-r * r / 4.0).exp()
}
fn f(r: f64) -> f64 {
    r.tanh()
}
fn df(r: f64) -> f64 {
    1.0 / r.cosh().powi(2)
}
fn g(r: f64) -> f64 {
    r * r * (-r).exp()
}
fn dg(r: f64) -> f64 {
    (2.0 * r - r * r) * (-r).exp()
}

fn density(p: &ParameterSet, r: f64) -> f64 {
    let n = p.n();
    let m = p.m();
    let w2 = p.omega * p.omega;
    let (av, bv, fv, gv) = (a(r), b(r), f(r), g(r));
    let v = p.beta1 * (fv * fv - 1.0).powi(2) / 2.0 + p.beta2 * gv.powi(4) / 2.0 + p.beta_prime * fv * fv * gv * gv
        - p.alpha * gv * gv;
    0.5 * (n * n * da(r).powi(2) / (r * r) + w2 * db(r).powi(2))
        + df(r).powi(2)
        + dg(r).powi(2)
        + n * n * (1.0 - p.e1 * av).powi(2) * fv * fv / (r * r)
        + (p.e2 * n * av - m).powi(2) * gv * gv / (r * r)
        + w2 * (p.e1 * p.e1 * bv * bv * fv * fv + (1.0 - p.e2 * bv).powi(2) * gv * gv)
        + v
}

/// `2π ∫₀^R r·𝓔 dr` by composite five-point Gauss–Legendre.
fn continuum_energy(p: &ParameterSet) -> f64 {
    let xs = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    let ws = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let panels = 4000;
    let h = R_MAX / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (x, w) in xs.iter().zip(&ws) {
            let r = mid + 0.5 * h * x;
            total += 0.5 * h * w * r * density(p, r);
        }
    }
    2.0 * PI * total
}

fn discrete_energy(p: &ParameterSet, grid: &RadialGrid) -> f64 {
    let r = grid.nodes();
    let c = FieldConfiguration::new(
        r.iter().map(|&x| a(x)).collect(),
        r.iter().map(|&x| b(x)).collect(),
        r.iter().map(|&x| f(x)).collect(),
        r.iter().map(|&x| g(x)).collect(),
        PinSet::none(),
    )
    .unwrap();
    energy_value(p, grid, &c).unwrap()
}

#[test]
fn energy_converges_at_second_order_to_the_continuum_value() {
    let p = ParameterSet::baseline();
    let exact = continuum_energy(&p);
    let errors: Vec<f64> = [200, 400, 800]
        .iter()
        .map(|&n| (discrete_energy(&p, &RadialGrid::build(R_MAX, n, Grading::Uniform).unwrap()) - exact).abs())
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}, errors {errors:?}");
    }
}

#[test]
fn graded_mesh_also_converges_at_second_order() {
    let p = ParameterSet { omega: 1.5, ..ParameterSet::baseline() };
    let exact = continuum_energy(&p);
    let errors: Vec<f64> = [200, 400, 800]
        .iter()
        .map(|&n| {
            let grid = RadialGrid::build(R_MAX, n, Grading::Geometric { ratio: 1.003f64.powf(400.0 / n as f64) }).unwrap();
            (discrete_energy(&p, &grid) - exact).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}, errors {errors:?}");
    }
}

#[test]
fn richardson_ratio_near_four() {
    let p = ParameterSet::baseline();
    let e: Vec<f64> = [250, 500, 1000]
        .iter()
        .map(|&n| discrete_energy(&p, &RadialGrid::build(R_MAX, n, Grading::Uniform).unwrap()))
        .collect();
    let ratio = (e[0] - e[1]).abs() / (e[1] - e[2]).abs();
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}
