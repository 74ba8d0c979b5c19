mod common;

use common::*;
use kirchhoff::audit::golden_max;
use kirchhoff::functionals::log_space;
use kirchhoff::projection::{reduced_energy, reduced_gradient, Objective};
use kirchhoff::solver::{solve_ground_state, Optimizer, SolverOptions, Status};
use kirchhoff::{Error, Fibering, Potential, RadialFunction};

fn solve(ps: &kirchhoff::ProblemSpec, r_max: f64, n: usize) -> kirchhoff::solver::SolveResult {
    solve_ground_state(ps, &SolverOptions::uniform(r_max, n).unwrap()).unwrap()
}

#[test]
fn converged_state_is_nontrivial_and_critical() {
    let ps = gap_problem();
    let r = solve(&ps, 150.0, 2001);
    assert_eq!(r.status, Status::Converged);
    assert!(r.m > 0.0 && r.grad_norm > 0.0);
    assert!(r.pohozaev_residual <= 1e-6);
    assert!((r.final_dilation - 1.0).abs() < 1e-12);
}

#[test]
fn dilation_orbit_peaks_at_the_ground_state() {
    for ps in [power(1.0, 0.25, constant(), 4.0), gap_problem()] {
        let r_max = if ps.potential.is_constant() {
            430.0
        } else {
            150.0
        };
        let r = solve(&ps, r_max, 2001);
        let fib = Fibering::new(&r.u_hat, &ps);
        let ts = log_space(0.1, 10.0, 801);
        let k = (0..ts.len())
            .max_by(|&i, &j| fib.value(ts[i]).total_cmp(&fib.value(ts[j])))
            .unwrap();
        let (_, peak) = golden_max(|t| fib.value(t), ts[k - 1], ts[k + 1]);
        assert!((peak - r.m).abs() <= 1e-8, "{peak} vs {}", r.m);
    }
}

#[test]
fn variable_potential_lowers_the_level() {
    let ps = gap_problem();
    let limit = solve_ground_state(
        &ps,
        &SolverOptions::uniform(150.0, 2001)
            .unwrap()
            .with_objective(Objective::limit()),
    )
    .unwrap();
    let warm = solve_ground_state(
        &ps,
        &SolverOptions::uniform(150.0, 2001)
            .unwrap()
            .with_initial(limit.u_hat.clone()),
    )
    .unwrap();
    let cold = solve(&ps, 150.0, 2001);
    assert!(warm.m <= limit.m + 1e-6);
    assert!(cold.m <= limit.m + 1e-6);
    assert!(rel(warm.m, cold.m) < 1e-6);
}

#[test]
fn envelope_gradient_matches_finite_differences() {
    let g = grid(20.0, 801);
    let ps = gap_problem();
    let u = gaussian(&g, 4.0, 1.5);
    let grad = reduced_gradient(&u, &ps).unwrap();
    for (k, (c, w)) in [(0.0, 0.5), (1.0, 1.0), (2.0, 0.7), (0.5, 2.0), (3.0, 1.2)]
        .into_iter()
        .enumerate()
    {
        let phi: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&r| (-((r - c) / w).powi(2)).exp() * if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let exact: f64 = grad.values().iter().zip(&phi).map(|(a, b)| a * b).sum();
        let eps = 1e-4;
        let shifted = |s: f64| {
            let v: Vec<f64> = u
                .values()
                .iter()
                .zip(&phi)
                .map(|(a, b)| a + s * b)
                .collect();
            reduced_energy(&RadialFunction::new(g.clone(), v).unwrap(), &ps).unwrap()
        };
        let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
        assert!(rel(fd, exact) <= 1e-4, "direction {k}: {fd} vs {exact}");
    }
}

#[test]
fn refinement_is_stable() {
    let cases = [
        (power(1.0, 0.25, constant(), 4.0), 430.0),
        (power(1.0, 1.0, constant(), 3.5), 2500.0),
        (power(2.0, 0.5, constant(), 4.5), 600.0),
        (gap_problem(), 150.0),
    ];
    for (ps, r_max) in cases {
        let coarse = solve(&ps, r_max, 2001);
        let fine = solve(&ps, 2.0 * r_max, 4001);
        assert!(rel(coarse.m, fine.m) < 1e-4, "{} vs {}", coarse.m, fine.m);
    }
}

#[test]
fn solves_are_deterministic() {
    let ps = gap_problem();
    let a = solve(&ps, 150.0, 2001);
    let b = solve(&ps, 150.0, 2001);
    assert_eq!(a.m.to_bits(), b.m.to_bits());
    assert_eq!(a.u_hat.values(), b.u_hat.values());
    assert_eq!(a.trace_csv(), b.trace_csv());
}

#[test]
fn unit_lambda_objective_is_the_energy() {
    let ps = gap_problem();
    let opts = SolverOptions::uniform(150.0, 2001).unwrap();
    let plain = solve_ground_state(&ps, &opts).unwrap();
    let weighted = solve_ground_state(
        &ps,
        &opts
            .clone()
            .with_objective(Objective::default().with_lambda(1.0)),
    )
    .unwrap();
    assert_eq!(plain.m, weighted.m);
}

#[test]
fn gaussian_mixture_fallback_reaches_the_level() {
    let ps = power(1.0, 0.25, constant(), 4.0);
    let mut opts = SolverOptions::uniform(430.0, 2001).unwrap();
    opts.optimizer = Optimizer::GaussianMixture;
    let r = solve_ground_state(&ps, &opts).unwrap();
    let direct = solve(&ps, 430.0, 2001);
    assert!(r.m >= direct.m - 1e-6 * direct.m);
    assert!(rel(r.m, direct.m) < 1e-2, "{} vs {}", r.m, direct.m);
}

#[test]
fn hypothesis_violations_are_config_errors() {
    let ps = power(
        1.0,
        1.0,
        Potential::InversePoly {
            alpha: 1.0,
            beta: 2.0,
            sigma: 2.0,
        },
        4.0,
    );
    let err = solve_ground_state(&ps, &SolverOptions::uniform(40.0, 801).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}
