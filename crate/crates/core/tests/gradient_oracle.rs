use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twvort_core::energy::{cell_energies, energy_gradient, energy_value};
use twvort_core::fields::initial_profile;
use twvort_core::{FieldConfiguration, ParameterSet, RadialGrid};

/// Central difference of the energy along one free DOF, accumulated from
/// per-cell differences so the total's rounding does not enter.
fn fd_partial(p: &ParameterSet, grid: &RadialGrid, c: &FieldConfiguration, dof: usize, step: f64) -> f64 {
    let (field, node) = c.free_dofs()[dof];
    let mut plus = c.clone();
    plus.field_mut(field)[node] += step;
    let mut minus = c.clone();
    minus.field_mut(field)[node] -= step;
    let ep = cell_energies(p, grid, &plus).unwrap();
    let em = cell_energies(p, grid, &minus).unwrap();
    let diff: f64 = ep.iter().zip(&em).map(|(a, b)| a - b).sum();
    diff / (2.0 * step)
}

fn max_rel_error(p: &ParameterSet, grid: &RadialGrid, c: &FieldConfiguration, rng: &mut ChaCha8Rng) -> f64 {
    let g = energy_gradient(p, grid, c).unwrap();
    // Entries far below the largest are dominated by the O(step²) truncation
    // of the difference quotient, so they are measured against a floor.
    let floor = 1e-3 * g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let dof = rng.gen_range(0..g.len());
        let fd = fd_partial(p, grid, c, dof, 1e-6);
        let err = (g[dof] - fd).abs() / g[dof].abs().max(fd.abs()).max(floor);
        worst = worst.max(err);
    }
    worst
}

fn perturbed(c: &FieldConfiguration, p: &ParameterSet, rng: &mut ChaCha8Rng) -> FieldConfiguration {
    let mut out = c.clone();
    for v in out.a.iter_mut().chain(out.b.iter_mut()).chain(out.f.iter_mut()).chain(out.g.iter_mut()) {
        *v += rng.gen_range(-0.1..0.1);
    }
    out.apply_pins(p);
    out
}

#[test]
fn gradient_matches_finite_differences_on_seed_and_perturbations() {
    let p = ParameterSet::baseline();
    let grid = RadialGrid::production(30.0, 200).unwrap();
    let seed = initial_profile(&p, &grid);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = max_rel_error(&p, &grid, &seed, &mut rng);
    for _ in 0..20 {
        let c = perturbed(&seed, &p, &mut rng);
        worst = worst.max(max_rel_error(&p, &grid, &c, &mut rng));
    }
    assert!(worst < 1e-6, "max relative gradient error {worst:e}");
}

#[test]
fn directional_derivative_converges() {
    let p = ParameterSet {
        e1: 1.3,
        e2: 0.7,
        omega: 1.4,
        ..ParameterSet::baseline()
    };
    let grid = RadialGrid::production(12.0, 150).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let c = perturbed(&initial_profile(&p, &grid), &p, &mut rng);
    let g = energy_gradient(&p, &grid, &c).unwrap();
    let dofs = c.free_dofs();
    let delta: Vec<f64> = (0..dofs.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let exact: f64 = g.iter().zip(&delta).map(|(a, b)| a * b).sum();
    let e0 = energy_value(&p, &grid, &c).unwrap();

    let mut errors = Vec::new();
    for t in [1e-4, 1e-5, 1e-6] {
        let mut moved = c.clone();
        for ((field, node), d) in dofs.iter().zip(&delta) {
            moved.field_mut(*field)[*node] += t * d;
        }
        let quotient = (energy_value(&p, &grid, &moved).unwrap() - e0) / t;
        errors.push((quotient - exact).abs());
    }
    // One-sided quotients are first order until rounding takes over.
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
    assert!(errors[2] < 1e-4 * exact.abs().max(1.0));
}

#[test]
fn gradient_covers_every_parameter_direction() {
    let base = ParameterSet::baseline();
    let grid = RadialGrid::production(10.0, 80).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cases = [
        ParameterSet { beta1: 3.1, ..base },
        ParameterSet { beta2: 1.7, alpha: 1.4, ..base },
        ParameterSet { e1: 0.8, e2: 1.6, ..base },
        ParameterSet { n_wind: 2, m_wind: 4, ..base },
        ParameterSet { omega: -1.3, ..base },
    ];
    for p in cases {
        assert!(p.validate().valid, "{p:?}");
        let c = perturbed(&initial_profile(&p, &grid), &p, &mut rng);
        let worst = max_rel_error(&p, &grid, &c, &mut rng);
        assert!(worst < 1e-6, "{p:?}: {worst:e}");
    }
}
