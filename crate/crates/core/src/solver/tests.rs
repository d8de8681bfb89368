use super::*;
use crate::baselines;
use crate::data::standardize;
use crate::linalg::Matrix;
use crate::test_util::{random_dataset, Rng};

fn pen(l1: f64, l2: f64) -> PenaltySpec {
    PenaltySpec::from_lambdas(l1, l2).unwrap()
}

/// Minimizer of a 1-D convex function by a dense scan then golden-section
/// refinement around the best cell.
fn scan_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let cells = ((hi - lo) / step) as usize;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=cells {
        let x = lo + i as f64 * step;
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn ols(data: &Dataset) -> Vec<f64> {
    data.x().gram().solve_spd(&data.x().t_mul_vec(data.y())).unwrap()
}

#[test]
fn objective_examples() {
    let mut rng = Rng::new(1);
    let data = random_dataset(&mut rng, 12, 5);
    let y2: f64 = data.y().iter().map(|v| v * v).sum();
    let f0 = objective(&data, &[0.0; 5], &pen(0.7, 0.9)).unwrap();
    assert!((f0 - 0.5 * y2).abs() < 1e-12);

    let c = -0.37;
    let f = objective(&data, &[c; 5], &pen(0.4, 123.0)).unwrap();
    let expect = 0.5 * data.rss(&[c; 5]) + 0.4 * 5.0 * c.abs();
    assert!((f - expect).abs() < 1e-12);

    let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let d = Dataset::new(x, vec![1.0, 1.0]).unwrap();
    let f = objective(&d, &[1.0, 0.0], &pen(0.1, 0.2)).unwrap();
    assert!((f - 0.8).abs() < 1e-15);

    assert!(objective(&d, &[1.0], &pen(0.1, 0.2)).is_err());
}

#[test]
fn objective_pairwise_sum_matches_double_loop() {
    let mut rng = Rng::new(2);
    let data = random_dataset(&mut rng, 10, 7);
    let beta: Vec<f64> = (0..7).map(|_| rng.normal()).collect();
    let mut pairs = 0.0;
    for j in 0..7 {
        for k in j + 1..7 {
            pairs += (beta[j] - beta[k]).abs();
        }
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let expect = 0.5 * data.rss(&beta) + 0.3 * l1 + 0.45 * pairs;
    let f = objective(&data, &beta, &pen(0.3, 0.45)).unwrap();
    assert!((f - expect).abs() < 1e-12 * expect);
}

#[test]
fn descent_soft_thresholds_without_fusion() {
    // one unit column, x_kᵀy = 2
    let x = Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
    let d = Dataset::new(x, vec![2.0, 0.0]).unwrap();
    let (b, improved) = descent_step(&d, &[0.0], 0, &pen(0.5, 0.0)).unwrap();
    assert!((b - 1.5).abs() < 1e-15 && improved);
    let (b, improved) = descent_step(&d, &[0.0], 0, &pen(2.5, 0.0)).unwrap();
    assert_eq!((b, improved), (0.0, false));
    let (b, _) = descent_step(&d, &[4.0], 0, &pen(2.0, 0.0)).unwrap();
    assert_eq!(b, 0.0);
}

#[test]
fn descent_matches_scan_oracle() {
    for seed in 0..8 {
        let mut rng = Rng::new(100 + seed);
        let data = random_dataset(&mut rng, 10, 4);
        let beta: Vec<f64> = (0..4).map(|_| 0.5 * rng.normal()).collect();
        let p = pen(0.3, 0.3);
        for k in 0..4 {
            let (b, _) = descent_step(&data, &beta, k, &p).unwrap();
            // ½‖r − v x_k‖² + λ₁|v| + λ₂ Σ_{j≠k} |v − β_j| up to constants
            let xk = data.x().col(k);
            let mut r = data.y().to_vec();
            for j in (0..4).filter(|&j| j != k) {
                for (ri, xj) in r.iter_mut().zip(data.x().col(j)) {
                    *ri -= beta[j] * xj;
                }
            }
            let xr: f64 = xk.iter().zip(&r).map(|(a, b)| a * b).sum();
            let xx: f64 = xk.iter().map(|a| a * a).sum();
            let others: Vec<f64> = (0..4).filter(|&j| j != k).map(|j| beta[j]).collect();
            let f = |v: f64| {
                0.5 * xx * v * v - xr * v
                    + 0.3 * v.abs()
                    + 0.3 * others.iter().map(|o| (v - o).abs()).sum::<f64>()
            };
            let oracle = scan_min(f, -10.0, 10.0, 1e-5);
            assert!((b - oracle).abs() < 1e-4, "seed {seed} k {k}: {b} vs {oracle}");
            assert!(f(b) <= f(oracle) + 1e-12);
            let mut t = beta.clone();
            t[k] = b;
            let full = objective(&data, &t, &p).unwrap();
            t[k] = oracle;
            assert!(full <= objective(&data, &t, &p).unwrap() + 1e-12);
        }
    }
}

#[test]
fn descent_never_increases() {
    let mut rng = Rng::new(3);
    let data = random_dataset(&mut rng, 15, 6);
    let p = pen(0.2, 0.1);
    let mut beta: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
    for sweep in 0..20 {
        for k in 0..6 {
            let before = objective(&data, &beta, &p).unwrap();
            let (b, improved) = descent_step(&data, &beta, k, &p).unwrap();
            beta[k] = b;
            let after = objective(&data, &beta, &p).unwrap();
            assert!(after <= before + 1e-12, "sweep {sweep}");
            if improved {
                assert!(after < before);
            }
        }
    }
}

fn duplicated() -> Dataset {
    let mut rng = Rng::new(4);
    let n = 12;
    let a: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let y: Vec<f64> = (0..n).map(|i| 2.0 * a[i] - b[i] + 0.3 * rng.normal()).collect();
    let x = Matrix::from_columns(&[a.clone(), a, b]).unwrap();
    standardize(&x, &y).unwrap().0
}

#[test]
fn fusion_joins_duplicated_columns() {
    let data = duplicated();
    let p = pen(0.05, 0.2);
    // unequal split of the shared effect; descent alone is stuck here
    let mut beta = vec![0.0; 3];
    let fit = solve(&data, &p, &SolverConfig::default()).unwrap();
    let s = fit.beta[0] + fit.beta[1];
    beta[0] = 0.8 * s;
    beta[1] = 0.2 * s;
    beta[2] = fit.beta[2];
    let before = objective(&data, &beta, &p).unwrap();
    let (after_beta, accepted) =
        fusion_step(&data, &beta, &p, FusionPairStrategy::AllPairs).unwrap();
    assert!(accepted);
    assert_eq!(after_beta[0], after_beta[1]);
    assert!(objective(&data, &after_beta, &p).unwrap() < before);
    assert!((fit.beta[0] - fit.beta[1]).abs() <= 1e-10);
}

#[test]
fn fusion_rejects_when_all_equal_and_optimal() {
    let x = Matrix::from_columns(&[vec![1.0, -1.0, 0.0], vec![1.0, -1.0, 0.0]]).unwrap();
    let data = standardize(&x, &[1.0, -1.0, 0.5]).unwrap().0;
    let p = pen(0.1, 0.1);
    let fit = solve(&data, &p, &SolverConfig::default()).unwrap();
    assert_eq!(fit.beta[0], fit.beta[1]);
    let (b, accepted) = fusion_step(&data, &fit.beta, &p, FusionPairStrategy::AllPairs).unwrap();
    assert!(!accepted);
    assert_eq!(b, fit.beta.0);
}

#[test]
fn fusion_gamma_matches_scan_oracle() {
    for seed in 0..6 {
        let mut rng = Rng::new(200 + seed);
        let data = random_dataset(&mut rng, 10, 3);
        let beta: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
        let p = pen(0.25, 0.4);
        for (k, l) in [(0, 1), (0, 2), (1, 2)] {
            let g = fusion_gamma(&data, &beta, &p, k, l).unwrap().unwrap();
            let f = |v: f64| {
                let mut t = beta.clone();
                t[k] = v;
                t[l] = v;
                objective(&data, &t, &p).unwrap()
            };
            let oracle = scan_min(f, -5.0, 5.0, 1e-5);
            assert!((g - oracle).abs() < 1e-4, "seed {seed} ({k},{l}): {g} vs {oracle}");
        }
    }
    let mut rng = Rng::new(9);
    let data = random_dataset(&mut rng, 10, 3);
    assert!(fusion_gamma(&data, &[0.0; 3], &pen(0.1, 0.1), 1, 1).is_err());
}

#[test]
fn zero_penalty_is_ols() {
    for seed in 0..4 {
        let mut rng = Rng::new(300 + seed);
        let data = random_dataset(&mut rng, 30, 6);
        let fit = solve(&data, &pen(0.0, 0.0), &SolverConfig::default()).unwrap();
        let b = ols(&data);
        for (a, e) in fit.beta.iter().zip(&b) {
            assert!((a - e).abs() < 1e-8, "{a} vs {e}");
        }
    }
}

#[test]
fn no_fusion_weight_matches_lasso() {
    for seed in 0..4 {
        let mut rng = Rng::new(400 + seed);
        let data = random_dataset(&mut rng, 25, 6);
        let lambda = 0.3 * baselines::lasso_lambda_max(&data);
        let fit = solve(&data, &pen(lambda, 0.0), &SolverConfig::default()).unwrap();
        let lasso = baselines::fit_lasso(&data, lambda).unwrap();
        assert!((fit.objective - lasso.objective).abs() <= 1e-8 * lasso.objective.max(1.0));
    }
}

#[test]
fn trace_is_monotone_and_kkt_small() {
    let mut rng = Rng::new(5);
    let data = random_dataset(&mut rng, 20, 8);
    let cfg = SolverConfig {
        record_trace: true,
        ..SolverConfig::default()
    };
    let fit = solve(&data, &pen(0.2, 0.15), &cfg).unwrap();
    assert!(fit.trace.len() >= 2);
    for w in fit.trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
    }
    assert!(fit.converged);
    assert!(fit.kkt_residual <= 1e-6);
    let kkt = kkt_residual(&data, &fit.beta, &pen(0.2, 0.15)).unwrap();
    assert!(kkt <= 1e-6);
}

#[test]
fn sorted_adjacent_strategy_reaches_same_optimum() {
    let mut rng = Rng::new(6);
    let data = random_dataset(&mut rng, 20, 7);
    let p = pen(0.1, 0.2);
    let a = solve(&data, &p, &SolverConfig::default()).unwrap();
    let cfg = SolverConfig {
        fusion_pair_strategy: FusionPairStrategy::SortedAdjacent,
        ..SolverConfig::default()
    };
    let b = solve(&data, &p, &cfg).unwrap();
    assert!((a.objective - b.objective).abs() <= 1e-8 * a.objective);
}

#[test]
fn huge_penalty_gives_zero() {
    let mut rng = Rng::new(7);
    let data = random_dataset(&mut rng, 15, 5);
    let alpha = 0.5;
    let lmax = lambda_max(&data, alpha);
    let p = PenaltySpec::new(alpha, lmax, 2.0).unwrap();
    let fit = solve(&data, &p, &SolverConfig::default()).unwrap();
    assert!(fit.beta.iter().all(|&b| b == 0.0));
    assert_eq!(fit.df, 0);
}

#[test]
fn sweep_cap_returns_partial_fit() {
    let mut rng = Rng::new(8);
    let data = random_dataset(&mut rng, 20, 8);
    let cfg = SolverConfig {
        max_sweeps: 1,
        ..SolverConfig::default()
    };
    match solve(&data, &pen(0.01, 0.01), &cfg) {
        Err(Error::MaxSweepsExceeded(fit)) => {
            assert!(!fit.converged);
            assert_eq!(fit.beta.len(), 8);
        }
        other => panic!("expected MaxSweepsExceeded, got {other:?}"),
    }
}

#[test]
fn constraint_conversion_examples() {
    let mut rng = Rng::new(10);
    let data = random_dataset(&mut rng, 25, 5);
    let alpha = 0.6;
    let b = ols(&data);
    let t_ols = constraint_value(&b, alpha);
    let spec = constraint_to_lagrangian(&data, alpha, t_ols * 1.01).unwrap();
    assert_eq!(spec.lambda(), 0.0);
    let spec = constraint_to_lagrangian(&data, alpha, 0.0).unwrap();
    assert_eq!(spec.lambda(), lambda_max(&data, alpha));
    assert_eq!(
        constraint_to_lagrangian(&data, alpha, -1.0).unwrap_err(),
        Error::InfeasibleT
    );

    let t = 0.5 * t_ols;
    let spec = constraint_to_lagrangian(&data, alpha, t).unwrap();
    let fit = solve(&data, &spec, &SolverConfig::default()).unwrap();
    let v = constraint_value(&fit.beta, alpha);
    assert!((v - t).abs() <= 1e-5 * t, "{v} vs {t}");
}

#[test]
fn grouping_bound_examples() {
    assert_eq!(grouping_bound(5.0, 1.0, 0.3).unwrap(), 0.0);
    assert!((grouping_bound(1.0, 0.5, 0.5).unwrap() - 2.0).abs() < 1e-15);
    assert!((grouping_bound(3.0, -1.0, 0.5).unwrap() - 12.0).abs() < 1e-14);
    assert_eq!(grouping_bound(1.0, 0.5, 1.0).unwrap_err(), Error::AlphaOne);
}

#[test]
fn grouping_bound_is_respected() {
    // two highly correlated columns plus noise columns
    for seed in 0..5 {
        let mut rng = Rng::new(500 + seed);
        let n = 30;
        let z: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let c1: Vec<f64> = z.iter().map(|v| v + 0.2 * rng.normal()).collect();
        let c2: Vec<f64> = z.iter().map(|v| v + 0.2 * rng.normal()).collect();
        let c3: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let y: Vec<f64> = (0..n).map(|i| z[i] + 0.5 * c3[i] + rng.normal()).collect();
        let x = Matrix::from_columns(&[c1, c2, c3]).unwrap();
        let data = standardize(&x, &y).unwrap().0;
        let rho = data.column_correlation(0, 1);
        let alpha = 0.5;
        let bound = grouping_bound(data.y_norm(), rho, alpha).unwrap();
        let p = PenaltySpec::new(alpha, bound * 1.01, 2.0).unwrap();
        let fit = solve(&data, &p, &SolverConfig::default()).unwrap();
        assert!((fit.beta[0] - fit.beta[1]).abs() <= 1e-8, "seed {seed}: {:?}", fit.beta);
    }
}

#[test]
fn path_is_warm_started_and_ordered() {
    let mut rng = Rng::new(11);
    let data = random_dataset(&mut rng, 20, 6);
    let alpha = 0.5;
    let lmax = lambda_max(&data, alpha);
    let lambdas: Vec<f64> = (0..8).map(|i| lmax * 0.5f64.powi(i)).collect();
    let path = solve_path(&data, alpha, 2.0, &lambdas, &SolverConfig::default()).unwrap();
    assert_eq!(path.len(), 8);
    assert!(path[0].beta.iter().all(|&b| b == 0.0));
    for (fit, &l) in path.iter().zip(&lambdas) {
        let cold = solve(&data, &PenaltySpec::new(alpha, l, 2.0).unwrap(), &SolverConfig::default()).unwrap();
        assert!((fit.objective - cold.objective).abs() <= 1e-8 * cold.objective);
    }
}
