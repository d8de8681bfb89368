mod common;

use common::Gen;
use horses_core::oracle::{flsa_1d, grid_solve_2d, oracle_solve, OracleConfig, StepRule};
use horses_core::solver::{kkt_residual, objective};
use horses_core::{solve, Dataset, Matrix, PenaltySpec, SolverConfig};

const LAMBDAS: [f64; 4] = [0.0, 0.1, 0.5, 2.0];

#[test]
fn solver_matches_oracle_on_random_instances() {
    let mut g = Gen::new(2024);
    for case in 0..40 {
        let p = g.int(1, 8);
        let n = g.int(p + 2, 30);
        let data = g.dataset(n, p);
        let pen = PenaltySpec::from_lambdas(g.pick(&LAMBDAS), g.pick(&LAMBDAS)).unwrap();
        let fit = solve(&data, &pen, &SolverConfig::default()).unwrap();
        let oracle = oracle_solve(&data, &pen, &OracleConfig::default()).unwrap();
        let rel = (fit.objective - oracle.objective).abs() / oracle.objective.max(1e-12);
        assert!(rel <= 1e-6, "case {case} n={n} p={p}: {} vs {}", fit.objective, oracle.objective);
        assert!(fit.kkt_residual <= 1e-6);
    }
}

#[test]
fn solver_not_worse_than_grid_at_p2() {
    let mut g = Gen::new(77);
    for case in 0..10 {
        let n = g.int(4, 30);
        let data = g.dataset(n, 2);
        let pen = PenaltySpec::from_lambdas(g.pick(&LAMBDAS), g.pick(&LAMBDAS)).unwrap();
        let fit = solve(&data, &pen, &SolverConfig::default()).unwrap();
        let (_, grid_f) = grid_solve_2d(&data, &pen, -5.0, 5.0, 2e-3).unwrap();
        assert!(fit.objective <= grid_f + 1e-5, "case {case}: {} vs {grid_f}", fit.objective);
    }
}

#[test]
fn subgradient_oracle_agrees_loosely() {
    let mut g = Gen::new(5);
    let data = g.dataset(20, 4);
    let pen = PenaltySpec::from_lambdas(0.5, 0.1).unwrap();
    let fit = solve(&data, &pen, &SolverConfig::default()).unwrap();
    let cfg = OracleConfig {
        step_rule: StepRule::DiminishingSubgradient,
        max_iters: 200_000,
        ..OracleConfig::default()
    };
    let sub = match oracle_solve(&data, &pen, &cfg) {
        Ok(f) => f,
        Err(e) => e.partial_fit().unwrap().clone(),
    };
    assert!(sub.objective >= fit.objective - 1e-9);
    assert!(sub.objective - fit.objective <= 1e-3 * fit.objective);
}

#[test]
fn identity_design_matches_flsa() {
    let mut g = Gen::new(9);
    for case in 0..8 {
        let len = g.int(2, 30);
        let y: Vec<f64> = (0..len).map(|_| 2.0 * g.normal()).collect();
        let (l1, l2) = (g.pick(&LAMBDAS), g.pick(&[0.05, 0.1, 0.5]));
        let data = Dataset::new(Matrix::identity(len), y.clone()).unwrap();
        let pen = PenaltySpec::from_lambdas(l1, l2).unwrap();
        let fit = solve(&data, &pen, &SolverConfig::default()).unwrap();
        let flsa = flsa_1d(&y, l1, l2).unwrap();
        let f_flsa = objective(&data, &flsa, &pen).unwrap();
        assert!(
            (fit.objective - f_flsa).abs() <= 1e-6 * f_flsa.max(1.0),
            "case {case}: {} vs {f_flsa}",
            fit.objective
        );
        assert!(kkt_residual(&data, &fit.beta, &pen).unwrap() <= 1e-6);
    }
}

#[test]
fn constant_signal_soft_thresholds_jointly() {
    let y = vec![1.7; 6];
    let b = flsa_1d(&y, 0.4, 0.3).unwrap();
    assert!(b.iter().all(|v| (v - 1.3).abs() < 1e-7), "{b:?}");
}
