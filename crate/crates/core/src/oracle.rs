//! Slow, independent solvers for validating the coordinate-descent solver on
//! small instances.
//!
//! None of these use coordinate moves or fusion moves. The proximal route is
//! accelerated proximal gradient where the prox of
//! `λ₁‖β‖₁ + λ₂ Σ_{j<k} |β_j − β_k|` is evaluated exactly: the all-pairs
//! penalty is linear on each ordering cone, so its prox is an isotonic
//! regression of the shifted sorted input (pool adjacent violators),
//! followed by soft-thresholding.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Dataset, FitResult};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::penalty::PenaltySpec;
use crate::solver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// Subgradient steps of size `1/(L√i)`, keeping the best iterate.
    DiminishingSubgradient,
    /// Accelerated proximal gradient with step `1/L` and adaptive restart.
    #[default]
    ProximalFixedStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Stop once the best objective improves by at most
    /// `tol·max(1, f)` over 1000 iterations.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_iters: 2_000_000,
            step_rule: StepRule::ProximalFixedStep,
            tol: 1e-9,
        }
    }
}

pub const MAX_ORACLE_N: usize = 100;
pub const MAX_ORACLE_P: usize = 20;
pub const MAX_FLSA_LEN: usize = 50;
const WINDOW: usize = 1000;

/// Smooth part `½‖y − Xβ‖²` from sufficient statistics.
struct Quadratic {
    gram: Matrix,
    xty: Vec<f64>,
    yty: f64,
    lipschitz: f64,
}

impl Quadratic {
    fn new(x: &Matrix, y: &[f64]) -> Self {
        let gram = x.gram();
        let lipschitz = gram.largest_eigenvalue();
        Quadratic {
            xty: x.t_mul_vec(y),
            yty: dot(y, y),
            gram,
            lipschitz,
        }
    }

    fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        let gb = self.gram.mul_vec(beta);
        gb.iter().zip(&self.xty).map(|(a, b)| a - b).collect()
    }

    fn value(&self, beta: &[f64]) -> f64 {
        let gb = self.gram.mul_vec(beta);
        (0.5 * self.yty - dot(beta, &self.xty) + 0.5 * dot(beta, &gb)).max(0.0)
    }
}

fn penalty_value(beta: &[f64], l1: f64, l2: f64) -> f64 {
    let mut fuse = 0.0;
    for (j, &a) in beta.iter().enumerate() {
        for &b in &beta[j + 1..] {
            fuse += (a - b).abs();
        }
    }
    l1 * beta.iter().map(|b| b.abs()).sum::<f64>() + l2 * fuse
}

/// Pool-adjacent-violators: least-squares nondecreasing fit to `z`.
fn isotonic(z: &[f64]) -> Vec<f64> {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(z.len());
    for &v in z {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s2, c2) = blocks[blocks.len() - 1];
            let (s1, c1) = blocks[blocks.len() - 2];
            if s1 / c1 as f64 > s2 / c2 as f64 {
                blocks.pop();
                let last = blocks.len() - 1;
                blocks[last] = (s1 + s2, c1 + c2);
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(z.len());
    for (s, c) in blocks {
        let mean = s / c as f64;
        out.extend(core::iter::repeat_n(mean, c));
    }
    out
}

/// Exact prox of `l1‖β‖₁ + l2 Σ_{j<k} |β_j − β_k|` at `v`.
pub fn prox_penalty(v: &[f64], l1: f64, l2: f64) -> Vec<f64> {
    let p = v.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let shifted: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(i, &j)| v[j] - l2 * (2.0 * i as f64 - p as f64 + 1.0))
        .collect();
    let fused = isotonic(&shifted);
    let mut out = vec![0.0; p];
    for (&j, &u) in order.iter().zip(&fused) {
        out[j] = u.signum() * (u.abs() - l1).max(0.0);
    }
    out
}

fn subgradient(beta: &[f64], grad: &[f64], l1: f64, l2: f64) -> Vec<f64> {
    // sgn(0) = 0 throughout
    let sgn = |x: f64| {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    beta.iter()
        .enumerate()
        .map(|(k, &bk)| {
            let fuse: f64 = beta.iter().map(|&bj| sgn(bk - bj)).sum();
            grad[k] + l1 * sgn(bk) + l2 * fuse
        })
        .collect()
}

struct Outcome {
    beta: Vec<f64>,
    iterations: usize,
    converged: bool,
    /// Best objective seen, sampled every iteration (only when requested).
    history: Vec<f64>,
}

fn minimize(
    quad: &Quadratic,
    l1: f64,
    l2: f64,
    p: usize,
    config: &OracleConfig,
    keep_history: bool,
) -> Outcome {
    let f = |b: &[f64]| quad.value(b) + penalty_value(b, l1, l2);
    let lip = quad.lipschitz.max(f64::MIN_POSITIVE);
    let mut best = vec![0.0; p];
    let mut best_f = f(&best);
    let mut history = Vec::new();
    let mut window_start = best_f;
    let mut converged = false;
    let mut iterations = 0;

    match config.step_rule {
        StepRule::ProximalFixedStep => {
            let step = 1.0 / lip;
            let mut x = best.clone();
            let mut x_prev = x.clone();
            let mut fx = best_f;
            let mut momentum = 1.0f64;
            for it in 1..=config.max_iters {
                iterations = it;
                let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * momentum * momentum));
                let w = (momentum - 1.0) / t_next;
                let yk: Vec<f64> = x.iter().zip(&x_prev).map(|(a, b)| a + w * (a - b)).collect();
                let grad = quad.gradient(&yk);
                let v: Vec<f64> = yk.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
                let next = prox_penalty(&v, step * l1, step * l2);
                let fn_ = f(&next);
                if fn_ > fx {
                    // function-value restart
                    momentum = 1.0;
                    x_prev = x.clone();
                } else {
                    momentum = t_next;
                    x_prev = core::mem::replace(&mut x, next.clone());
                    fx = fn_;
                }
                if fn_ < best_f {
                    best_f = fn_;
                    best = next;
                }
                if keep_history {
                    history.push(best_f);
                }
                if it % WINDOW == 0 {
                    if window_start - best_f <= config.tol * best_f.max(1.0) {
                        converged = true;
                        break;
                    }
                    window_start = best_f;
                }
            }
        }
        StepRule::DiminishingSubgradient => {
            let c = 1.0 / lip;
            let mut x = best.clone();
            for it in 1..=config.max_iters {
                iterations = it;
                let grad = quad.gradient(&x);
                let g = subgradient(&x, &grad, l1, l2);
                let step = c / libm::sqrt(it as f64);
                for (xi, gi) in x.iter_mut().zip(&g) {
                    *xi -= step * gi;
                }
                let fx = f(&x);
                if fx < best_f {
                    best_f = fx;
                    best.copy_from_slice(&x);
                }
                if keep_history {
                    history.push(best_f);
                }
                if it % WINDOW == 0 {
                    if window_start - best_f <= config.tol * best_f.max(1.0) {
                        converged = true;
                        break;
                    }
                    window_start = best_f;
                }
            }
        }
    }
    Outcome {
        beta: best,
        iterations,
        converged,
        history,
    }
}

fn to_fit(data: &Dataset, penalty: &PenaltySpec, out: Outcome) -> Result<FitResult> {
    let objective =
        0.5 * data.rss(&out.beta) + penalty_value(&out.beta, penalty.lambda1(), penalty.lambda2());
    let kkt = solver::kkt_residual(data, &out.beta, penalty)?;
    let mut fit = FitResult::new(out.beta, objective, out.iterations, out.converged);
    fit.kkt_residual = kkt;
    fit.trace = out.history;
    Ok(fit)
}

/// Minimises the HORSES objective without coordinate descent. Limited to
/// `n ≤ 100`, `p ≤ 20`.
pub fn oracle_solve(
    data: &Dataset,
    penalty: &PenaltySpec,
    config: &OracleConfig,
) -> Result<FitResult> {
    oracle_run(data, penalty, config, false)
}

/// As [`oracle_solve`], also recording the best-so-far objective at every
/// iteration in `FitResult::trace`.
pub fn oracle_solve_traced(
    data: &Dataset,
    penalty: &PenaltySpec,
    config: &OracleConfig,
) -> Result<FitResult> {
    oracle_run(data, penalty, config, true)
}

fn oracle_run(
    data: &Dataset,
    penalty: &PenaltySpec,
    config: &OracleConfig,
    history: bool,
) -> Result<FitResult> {
    if data.n() > MAX_ORACLE_N || data.p() > MAX_ORACLE_P {
        return Err(Error::InstanceTooLarge {
            n: data.n(),
            p: data.p(),
        });
    }
    if config.max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1"));
    }
    let quad = Quadratic::new(data.x(), data.y());
    let out = minimize(
        &quad,
        penalty.lambda1(),
        penalty.lambda2(),
        data.p(),
        config,
        history,
    );
    let fit = to_fit(data, penalty, out)?;
    if fit.converged {
        Ok(fit)
    } else {
        Err(Error::MaxItersExceeded(alloc::boxed::Box::new(fit)))
    }
}

/// All-pairs fused signal approximator: minimises
/// `½Σ(y_i − β_i)² + λ₁Σ|β_i| + λ₂Σ_{i<j}|β_i − β_j|`, i.e. the objective with
/// `X = I`. Signals up to length 50.
pub fn flsa_1d(y_signal: &[f64], lambda1: f64, lambda2: f64) -> Result<Vec<f64>> {
    let n = y_signal.len();
    if n > MAX_FLSA_LEN {
        return Err(Error::InstanceTooLarge { n, p: n });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) {
        return Err(Error::InvalidPenalty("lambda1 and lambda2 must be nonnegative"));
    }
    let quad = Quadratic::new(&Matrix::identity(n), y_signal);
    let out = minimize(&quad, lambda1, lambda2, n, &OracleConfig::default(), false);
    Ok(out.beta)
}

/// Exhaustive evaluation of the objective on the square grid
/// `{lo + i·step}²` for a two-predictor dataset. Returns the grid argmin and
/// its objective.
pub fn grid_solve_2d(
    data: &Dataset,
    penalty: &PenaltySpec,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<(Vec<f64>, f64)> {
    if data.p() != 2 {
        return Err(Error::WrongDimension(data.p()));
    }
    if !(step > 0.0 && hi >= lo) {
        return Err(Error::InvalidArgument("grid needs step > 0 and hi >= lo"));
    }
    let cells = libm::floor((hi - lo) / step);
    if cells > 1e5 {
        return Err(Error::InvalidArgument("at most 1e5 grid steps per axis"));
    }
    let m = cells as usize + 1;
    let g = data.x().gram();
    let a = data.x().t_mul_vec(data.y());
    let (g11, g12, g22) = (g.get(0, 0), g.get(0, 1), g.get(1, 1));
    let (l1, l2) = (penalty.lambda1(), penalty.lambda2());
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..m {
        let b1 = lo + i as f64 * step;
        let c1 = 0.5 * g11 * b1 * b1 - a[0] * b1 + l1 * b1.abs();
        let h = g12 * b1 - a[1];
        for j in 0..m {
            let b2 = lo + j as f64 * step;
            let v = c1 + b2 * (h + 0.5 * g22 * b2) + l1 * b2.abs() + l2 * (b1 - b2).abs();
            if v < best.0 {
                best = (v, b1, b2);
            }
        }
    }
    let beta = vec![best.1, best.2];
    let f = solver::objective(data, &beta, penalty)?;
    Ok((beta, f))
}
