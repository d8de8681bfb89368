//! The HORSES objective and its modified pathwise coordinate descent.
//!
//! A fit alternates full cyclic coordinate sweeps (each coordinate minimised
//! exactly) with fusion moves that pull a pair of coefficients to a common
//! value when the sweeps stall. Because the fusion penalty couples every
//! pair, coordinate moves alone can stall away from the optimum; the fusion
//! step and the group step below move several coordinates at once.

mod line;
mod workspace;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{CoefficientVector, Dataset, FitResult};
use crate::error::{Error, Result};
use crate::penalty::PenaltySpec;

pub use workspace::Problem;
use workspace::{kkt_from_corr, pairwise_sum_sorted, Workspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FusionPairStrategy {
    /// Every pair `(k, l)`, `O(p²)` candidates per fusion step.
    #[default]
    AllPairs,
    /// Only pairs adjacent in the sorted order of the current coefficients.
    SortedAdjacent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_sweeps: usize,
    /// Relative objective decrease over a sweep below which the sweep counts
    /// as stalled.
    pub objective_tol: f64,
    /// Coordinate-wise KKT residual required before declaring convergence.
    pub kkt_tol: f64,
    pub fusion_pair_strategy: FusionPairStrategy,
    pub initial_beta: Option<CoefficientVector>,
    /// Record the objective after every sweep and every accepted move.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_sweeps: 10_000,
            objective_tol: 1e-9,
            kkt_tol: 1e-6,
            fusion_pair_strategy: FusionPairStrategy::AllPairs,
            initial_beta: None,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be at least 1"));
        }
        if !(self.objective_tol > 0.0 && self.kkt_tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must be positive"));
        }
        Ok(())
    }
}

fn check_len(data: &Dataset, beta: &[f64]) -> Result<()> {
    if beta.len() != data.p() {
        return Err(Error::DimensionMismatch {
            what: "coefficient length",
            expected: data.p(),
            found: beta.len(),
        });
    }
    Ok(())
}

/// `½‖y − Xβ‖² + λ₁ Σ|β_j| + λ₂ Σ_{j<k} |β_j − β_k|`
pub fn objective(data: &Dataset, beta: &[f64], penalty: &PenaltySpec) -> Result<f64> {
    check_len(data, beta)?;
    Ok(0.5 * data.rss(beta) + penalty_terms(beta, penalty.lambda1(), penalty.lambda2()))
}

fn penalty_terms(beta: &[f64], l1: f64, l2: f64) -> f64 {
    let mut sorted = beta.to_vec();
    sorted.sort_by(f64::total_cmp);
    l1 * beta.iter().map(|b| b.abs()).sum::<f64>() + l2 * pairwise_sum_sorted(&sorted)
}

/// Constraint-form penalty `α Σ|β_j| + (1 − α) Σ_{j<k} |β_j − β_k|`.
pub fn constraint_value(beta: &[f64], alpha: f64) -> f64 {
    penalty_terms(beta, alpha, 1.0 - alpha)
}

/// Minimises the objective over coordinate `k` with the others fixed.
/// Returns the new value and whether the objective strictly decreased.
pub fn descent_step(
    data: &Dataset,
    beta: &[f64],
    k: usize,
    penalty: &PenaltySpec,
) -> Result<(f64, bool)> {
    check_len(data, beta)?;
    if k >= data.p() {
        return Err(Error::InvalidArgument("coordinate index out of range"));
    }
    let xk = data.x().col(k);
    let mut partial = data.y().to_vec();
    for (j, &bj) in beta.iter().enumerate() {
        if j != k && bj != 0.0 {
            crate::linalg::axpy(-bj, data.x().col(j), &mut partial);
        }
    }
    let mut sorted = beta.to_vec();
    sorted.sort_by(f64::total_cmp);
    let excl = [(beta[k], 1)];
    let line = line::Line {
        q: crate::linalg::dot(xk, xk),
        r: crate::linalg::dot(xk, &partial),
        w0: penalty.lambda1(),
        w: penalty.lambda2(),
        sorted: &sorted,
        excluded: &excl,
    };
    let Some(x) = line.minimize() else {
        return Ok((beta[k], false));
    };
    let improved = line.value(x) < line.value(beta[k]);
    Ok(if improved { (x, true) } else { (beta[k], false) })
}

/// One fusion step: evaluates `β_k = β_l = γ` moves over the candidate pairs
/// and applies the single best strictly improving one.
pub fn fusion_step(
    data: &Dataset,
    beta: &[f64],
    penalty: &PenaltySpec,
    strategy: FusionPairStrategy,
) -> Result<(Vec<f64>, bool)> {
    check_len(data, beta)?;
    let prob = Problem::new(data);
    let mut ws = Workspace::new(&prob, penalty, beta);
    let accepted = ws.fusion(strategy).is_some();
    Ok((ws.beta, accepted))
}

/// Optimal `γ` for the constrained move `β_k = β_l = γ` at `beta`.
pub fn fusion_gamma(
    data: &Dataset,
    beta: &[f64],
    penalty: &PenaltySpec,
    k: usize,
    l: usize,
) -> Result<Option<f64>> {
    check_len(data, beta)?;
    if k >= data.p() || l >= data.p() || k == l {
        return Err(Error::InvalidArgument("fusion pair must be two distinct valid indices"));
    }
    let prob = Problem::new(data);
    let ws = Workspace::new(&prob, penalty, beta);
    Ok(ws.pair_minimizer(k, l))
}

/// Largest distance from zero to the coordinate-wise subdifferential of the
/// objective at `beta`.
pub fn kkt_residual(data: &Dataset, beta: &[f64], penalty: &PenaltySpec) -> Result<f64> {
    check_len(data, beta)?;
    let fitted = data.predict(beta);
    let resid: Vec<f64> = data.y().iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let corr = data.x().t_mul_vec(&resid);
    let mut sorted = beta.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(kkt_from_corr(
        beta,
        &sorted,
        &corr,
        penalty.lambda1(),
        penalty.lambda2(),
    ))
}

/// Fits the HORSES estimator at one penalty.
pub fn solve(data: &Dataset, penalty: &PenaltySpec, config: &SolverConfig) -> Result<FitResult> {
    let prob = Problem::new(data);
    solve_with_problem(data, &prob, penalty, config)
}

/// As [`solve`], reusing precomputed sufficient statistics.
pub fn solve_with_problem(
    data: &Dataset,
    prob: &Problem,
    penalty: &PenaltySpec,
    config: &SolverConfig,
) -> Result<FitResult> {
    let fit = run(data, prob, penalty, config)?;
    if fit.converged {
        Ok(fit)
    } else {
        Err(Error::MaxSweepsExceeded(Box::new(fit)))
    }
}

fn run(
    data: &Dataset,
    prob: &Problem,
    penalty: &PenaltySpec,
    config: &SolverConfig,
) -> Result<FitResult> {
    config.validate()?;
    let p = data.p();
    if (0..p).any(|j| prob.gram().get(j, j) <= 0.0) {
        return Err(Error::InvalidArgument("design has an all-zero column"));
    }
    let init = match &config.initial_beta {
        Some(b) => {
            check_len(data, b)?;
            b.0.clone()
        }
        None => vec![0.0; p],
    };
    let mut ws = Workspace::new(prob, penalty, &init);
    let mut trace = Vec::new();
    let mut f = ws.objective();
    if config.record_trace {
        trace.push(f);
    }
    // Gram-form objective loses about this much to cancellation.
    let noise = 1e-15 * prob.yty().max(1.0);
    let mut sweeps = 0;
    let mut fusions = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        sweeps += 1;
        let mut dec = 0.0;
        for k in 0..p {
            dec += ws.descent(k);
        }
        ws.resync();
        f = ws.objective();
        if config.record_trace {
            trace.push(f);
        }
        let thresh = (config.objective_tol * f).max(noise);
        if dec > thresh {
            if dec <= 1e-4 * f {
                // slow linear phase: jump to the optimum of the current pattern
                if ws.polish().is_some() {
                    f = ws.objective();
                    if config.record_trace {
                        trace.push(f);
                    }
                }
            }
            continue;
        }
        if let Some(d) = ws.fusion(config.fusion_pair_strategy) {
            fusions += 1;
            ws.resync();
            f = ws.objective();
            if config.record_trace {
                trace.push(f);
            }
            if d > thresh {
                continue;
            }
        }
        if let Some(d) = ws.group_step() {
            ws.resync();
            f = ws.objective();
            if config.record_trace {
                trace.push(f);
            }
            if d > thresh {
                continue;
            }
        }
        if let Some(d) = ws.polish() {
            f = ws.objective();
            if config.record_trace {
                trace.push(f);
            }
            if d > thresh {
                continue;
            }
        }
        if dec > 0.0 {
            let exact = exact_corr(data, &ws.beta);
            if ws.kkt_residual(&exact) > config.kkt_tol {
                continue;
            }
        }
        converged = true;
        break;
    }
    let _ = f;
    let beta = ws.beta.clone();
    let exact = exact_corr(data, &beta);
    let kkt = ws.kkt_residual(&exact);
    let objective = objective(data, &beta, penalty)?;
    let mut fit = FitResult::new(beta, objective, sweeps, converged);
    fit.fusion_moves_accepted = fusions;
    fit.kkt_residual = kkt;
    fit.trace = trace;
    Ok(fit)
}

fn exact_corr(data: &Dataset, beta: &[f64]) -> Vec<f64> {
    let fitted = data.predict(beta);
    let resid: Vec<f64> = data.y().iter().zip(&fitted).map(|(y, f)| y - f).collect();
    data.x().t_mul_vec(&resid)
}

/// Smallest grid `λ` worth fitting: `2·max_j |x_jᵀy| / α`.
pub fn lambda_max(data: &Dataset, alpha: f64) -> f64 {
    let m = data
        .x()
        .t_mul_vec(data.y())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    2.0 * m / alpha
}

/// Warm-started fits over `lambdas` (fitted in the order given, normally
/// descending) at a fixed `alpha` and `d`. Fits that hit the sweep limit are
/// returned with `converged = false`.
pub fn solve_path(
    data: &Dataset,
    alpha: f64,
    d: f64,
    lambdas: &[f64],
    config: &SolverConfig,
) -> Result<Vec<FitResult>> {
    let prob = Problem::new(data);
    solve_path_with_problem(data, &prob, alpha, d, lambdas, config)
}

pub fn solve_path_with_problem(
    data: &Dataset,
    prob: &Problem,
    alpha: f64,
    d: f64,
    lambdas: &[f64],
    config: &SolverConfig,
) -> Result<Vec<FitResult>> {
    let mut cfg = config.clone();
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let penalty = PenaltySpec::new(alpha, lambda, d)?;
        let fit = run(data, prob, &penalty, &cfg)?;
        cfg.initial_beta = Some(fit.beta.clone());
        out.push(fit);
    }
    Ok(out)
}

/// Finds the Lagrangian `λ` whose solution meets the constraint
/// `α Σ|β_j| + (1 − α) Σ_{j<k} |β_j − β_k| ≤ t` with equality, by bisection
/// over `[0, λ_max]`. Uses the default threshold `d = √p`.
pub fn constraint_to_lagrangian(data: &Dataset, alpha: f64, t: f64) -> Result<PenaltySpec> {
    constraint_to_lagrangian_with_d(data, alpha, t, crate::penalty::default_d(data.p()))
}

pub fn constraint_to_lagrangian_with_d(
    data: &Dataset,
    alpha: f64,
    t: f64,
    d: f64,
) -> Result<PenaltySpec> {
    if !(t >= 0.0) {
        return Err(Error::InfeasibleT);
    }
    let lmax = lambda_max(data, alpha);
    PenaltySpec::new(alpha, lmax, d)?;
    if t == 0.0 {
        return PenaltySpec::new(alpha, lmax, d);
    }
    let prob = Problem::new(data);
    let cfg = SolverConfig::default();
    let fit_at = |lambda: f64, warm: Option<&FitResult>| -> Result<FitResult> {
        let mut c = cfg.clone();
        c.initial_beta = warm.map(|w| w.beta.clone());
        let pen = PenaltySpec::new(alpha, lambda, d)?;
        match solve_with_problem(data, &prob, &pen, &c) {
            Ok(fit) => Ok(fit),
            Err(Error::MaxSweepsExceeded(fit)) => Ok(*fit),
            Err(e) => Err(e),
        }
    };
    let unpenalized = fit_at(0.0, None)?;
    if constraint_value(&unpenalized.beta, alpha) <= t {
        return PenaltySpec::new(alpha, 0.0, d);
    }
    let (mut lo, mut hi) = (0.0, lmax);
    let mut warm = unpenalized;
    let mut best = (f64::INFINITY, lmax);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fit = fit_at(mid, Some(&warm))?;
        let value = constraint_value(&fit.beta, alpha);
        let gap = (value - t).abs();
        if gap < best.0 {
            best = (gap, mid);
        }
        if gap <= 1e-6 * t {
            break;
        }
        if value > t {
            lo = mid;
        } else {
            hi = mid;
        }
        warm = fit;
    }
    PenaltySpec::new(alpha, best.1, d)
}

/// `‖y‖ √(2(1 − ρ_kl)) / (1 − α)`: above this `λ`, the fitted coefficients
/// of predictors `k` and `l` coincide (given both differ from every other
/// coefficient).
pub fn grouping_bound(y_norm: f64, rho_kl: f64, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Err(Error::AlphaOne);
    }
    if !(-1.0..=1.0).contains(&rho_kl) {
        return Err(Error::InvalidArgument("correlation must lie in [-1, 1]"));
    }
    if !(0.0..1.0).contains(&alpha) || !(y_norm >= 0.0) {
        return Err(Error::InvalidArgument("need 0 <= alpha < 1 and y_norm >= 0"));
    }
    Ok(y_norm * libm::sqrt(2.0 * (1.0 - rho_kl)) / (1.0 - alpha))
}

#[cfg(test)]
mod tests;
