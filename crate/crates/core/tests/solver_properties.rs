use twvort_core::fields::{check_bounds, initial_profile, initial_profile_with_amplitude};
use twvort_core::minimizer::minimize;
use twvort_core::odecheck::{newton_refine, residuals};
use twvort_core::{Field, MinimizeOptions, NewtonOptions, ParameterSet, RadialGrid};

fn solve(p: &ParameterSet, grid: &RadialGrid, g_amp: f64, tol: f64) -> twvort_core::SolveResult {
    let seed = initial_profile_with_amplitude(p, grid, g_amp);
    let opts = MinimizeOptions { grad_tol: tol, ..Default::default() };
    minimize(p, grid, &seed, &opts).unwrap()
}

#[test]
fn seed_independence_at_baseline() {
    let p = ParameterSet::baseline();
    let grid = RadialGrid::production(30.0, 3000).unwrap();
    let one = solve(&p, &grid, 1.0, 1e-8);
    let two = solve(&p, &grid, 2.0, 1e-8);
    assert!(one.converged && two.converged);
    let rel = (one.energy.total - two.energy.total).abs() / one.energy.total.abs();
    assert!(rel < 1e-6, "energies differ by {rel:e}");
    assert!(one.config.sup_distance(&two.config) < 1e-4);
}

#[test]
fn converged_profile_respects_bounds_and_pins() {
    let p = ParameterSet { e1: 1.25, ..ParameterSet::baseline() };
    let grid = RadialGrid::production(20.0, 800).unwrap();
    let r = solve(&p, &grid, 1.0, 1e-8);
    assert!(r.converged);
    assert!(r.grad_inf_norm <= 1e-8);
    let c = &r.config;
    let k = grid.node_count() - 1;
    let bounds = check_bounds(c, &p);
    assert!(bounds.holds, "{:?}", bounds.first_violation);
    assert_eq!((c.a[0], c.f[0], c.g[0]), (0.0, 0.0, 0.0));
    assert_eq!((c.b[k], c.f[k], c.g[k]), (0.0, 1.0, 0.0));
    assert!((r.emergent.a_end - 1.0 / p.e1).abs() < 1e-6);
}

#[test]
fn newton_keeps_pins_and_does_not_climb() {
    let p = ParameterSet::baseline();
    let grid = RadialGrid::production(20.0, 600).unwrap();
    let m = solve(&p, &grid, 1.0, 1e-8);
    let n = newton_refine(&p, &grid, &m.config, &NewtonOptions::default()).unwrap();
    let k = grid.node_count() - 1;
    let c = &n.config;
    assert_eq!((c.a[0], c.f[0], c.g[0]), (0.0, 0.0, 0.0));
    assert_eq!((c.b[k], c.f[k], c.g[k]), (0.0, 1.0, 0.0));
    assert!(n.energy.total <= m.energy.total * (1.0 + 1e-10));
    assert!(n.grad_inf_norm < m.grad_inf_norm);
}

#[test]
fn residuals_shrink_under_joint_refinement() {
    let p = ParameterSet::baseline();
    let mut previous = [f64::INFINITY; 4];
    for (cells, tol) in [(300, 1e-6), (600, 1e-7), (1200, 1e-8)] {
        let grid = RadialGrid::production(20.0, cells).unwrap();
        let r = solve(&p, &grid, 1.0, tol);
        assert!(r.converged);
        let rep = residuals(&p, &grid, &r.config).unwrap();
        for (k, field) in Field::ALL.into_iter().enumerate() {
            let norm = rep.norms(field).weighted_l2;
            assert!(norm <= previous[k], "{} residual grew: {norm:e} > {:e}", field.name(), previous[k]);
            previous[k] = norm;
        }
    }
}

#[test]
fn unrefined_seed_is_not_stationary() {
    let p = ParameterSet::baseline();
    let grid = RadialGrid::production(30.0, 300).unwrap();
    let seed = initial_profile(&p, &grid);
    let rep = residuals(&p, &grid, &seed).unwrap();
    assert!(rep.max_interior_sup() > 1e-2);
}
