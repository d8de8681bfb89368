//! Tuning-parameter selection: K-fold cross-validation, GCV, BIC and
//! validation-set prediction error over an `(α, λ)` grid.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::baselines::{self, lasso_lambda_max};
use crate::data::{destandardize, standardize, Dataset, FitResult};
use crate::error::{Error, Result};
use crate::penalty::{default_d, PenaltySpec};
use crate::solver::{self, Problem, SolverConfig};

/// Estimator being tuned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ridge,
    Lasso,
    ElasticNet,
    Horses,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Ridge,
        Method::Lasso,
        Method::ElasticNet,
        Method::Horses,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ridge => "ridge",
            Method::Lasso => "lasso",
            Method::ElasticNet => "enet",
            Method::Horses => "horses",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ridge" => Some(Method::Ridge),
            "lasso" => Some(Method::Lasso),
            "enet" | "elasticnet" | "elastic-net" | "elastic_net" => Some(Method::ElasticNet),
            "horses" => Some(Method::Horses),
            _ => None,
        }
    }

    /// Whether the method has a mixing weight to tune.
    pub fn uses_alpha(&self) -> bool {
        matches!(self, Method::ElasticNet | Method::Horses)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    CV,
    GCV,
    BIC,
    ValidationPE,
}

/// Candidate `(α, λ)` values. `alphas` ascend, `lambdas` descend so that
/// each `α` row is a warm-started path.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningGrid {
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Thresholding parameter bounding HORSES' `α` from below.
    pub d: f64,
}

/// How to derive a grid from a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRule {
    pub n_alphas: usize,
    pub n_lambdas: usize,
    /// Smallest λ as a fraction of the largest.
    pub lambda_ratio: f64,
    /// Overrides the derived α values when set.
    pub alphas: Option<Vec<f64>>,
    /// Overrides the derived λ values when set.
    pub lambdas: Option<Vec<f64>>,
}

impl Default for GridRule {
    fn default() -> Self {
        GridRule {
            n_alphas: 10,
            n_lambdas: 30,
            lambda_ratio: 1e-4,
            alphas: None,
            lambdas: None,
        }
    }
}

/// `n` values equally spaced on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `n` values log-spaced from `hi` down to `hi·ratio`.
pub fn log_descending(hi: f64, ratio: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let step = libm::log(ratio) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == 0 { hi } else { hi * libm::exp(step * i as f64) })
                .collect()
        }
    }
}

impl TuningGrid {
    pub fn new(alphas: Vec<f64>, lambdas: Vec<f64>, d: f64) -> Result<Self> {
        if alphas.is_empty() || lambdas.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if alphas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid alphas must be strictly ascending"));
        }
        if lambdas.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::InvalidArgument("grid lambdas must be strictly descending"));
        }
        if lambdas.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidArgument("grid lambdas must be finite and nonnegative"));
        }
        Ok(TuningGrid { alphas, lambdas, d })
    }

    /// Checks HORSES' `α ∈ [1/d, 1]`.
    pub fn validate_horses(&self) -> Result<()> {
        if self
            .alphas
            .iter()
            .any(|&a| !(a >= 1.0 / self.d - 1e-12 && a <= 1.0))
        {
            return Err(Error::InvalidPenalty("grid alpha outside [1/d, 1]"));
        }
        Ok(())
    }

    /// HORSES default: α equally spaced on `[1/√p, 1]`, λ log-spaced from
    /// `λ_max = 2·max|x_jᵀy|/α_min` down to `λ_max·ratio`.
    pub fn horses_default(data: &Dataset, rule: &GridRule) -> Result<Self> {
        TuningGrid::for_method(Method::Horses, data, rule)
    }

    /// Grid for `method` derived from `data`:
    /// - HORSES as in [`TuningGrid::horses_default`];
    /// - LASSO: α = 1, λ from `max|x_jᵀy|` down;
    /// - Elastic Net: α equally spaced on `[0.1, 1]`, λ from
    ///   `max|x_jᵀy|/0.1` down;
    /// - ridge: α = 1 (unused), λ log-spaced over `[10⁻⁴, 10³]`.
    pub fn for_method(method: Method, data: &Dataset, rule: &GridRule) -> Result<Self> {
        let d = default_d(data.p());
        let alphas = match (&rule.alphas, method) {
            (_, Method::Ridge | Method::Lasso) => vec![1.0],
            (Some(a), _) => a.clone(),
            (None, Method::Horses) => {
                let mut a = linspace(1.0 / d, 1.0, rule.n_alphas);
                a.dedup();
                a
            }
            (None, Method::ElasticNet) => linspace(0.1, 1.0, rule.n_alphas),
        };
        let lambdas = match &rule.lambdas {
            Some(l) => l.clone(),
            None => {
                let amin = alphas.first().copied().unwrap_or(1.0);
                let top = match method {
                    Method::Horses => solver::lambda_max(data, amin),
                    Method::Lasso => lasso_lambda_max(data),
                    Method::ElasticNet => lasso_lambda_max(data) / amin,
                    Method::Ridge => 1e3,
                };
                let ratio = if method == Method::Ridge { 1e-7 } else { rule.lambda_ratio };
                log_descending(top.max(f64::MIN_POSITIVE), ratio, rule.n_lambdas)
            }
        };
        let grid = TuningGrid::new(alphas, lambdas, d)?;
        if method == Method::Horses {
            grid.validate_horses()?;
        }
        Ok(grid)
    }
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub best_alpha: f64,
    pub best_lambda: f64,
    /// `(alpha index, lambda index)` of the selected point.
    pub best_index: (usize, usize),
    /// `score_surface[a][l]` for `grid.alphas[a]`, `grid.lambdas[l]`;
    /// `+∞` where the criterion is undefined.
    pub score_surface: Vec<Vec<f64>>,
    pub criterion: Criterion,
    /// Fold id of every row (CV only).
    pub folds: Option<Vec<usize>>,
    pub seed: u64,
}

/// Fits every grid point on `data`, returning `fits[a][l]`. HORSES and
/// Elastic Net rows are warm-started along the descending λ path. Fits that
/// hit the iteration cap are kept (flagged `converged = false`).
pub fn fit_grid(
    method: Method,
    data: &Dataset,
    grid: &TuningGrid,
    config: &SolverConfig,
) -> Result<Vec<Vec<FitResult>>> {
    let prob = Problem::new(data);
    let mut out = Vec::with_capacity(grid.alphas.len());
    for &alpha in &grid.alphas {
        let row = match method {
            Method::Horses => {
                solver::solve_path_with_problem(data, &prob, alpha, grid.d, &grid.lambdas, config)?
            }
            Method::Ridge => grid
                .lambdas
                .iter()
                .map(|&l| baselines::fit_ridge(data, l))
                .collect::<Result<Vec<_>>>()?,
            Method::Lasso | Method::ElasticNet => {
                let a = if method == Method::Lasso { 1.0 } else { alpha };
                let mut row = Vec::with_capacity(grid.lambdas.len());
                let mut warm: Option<Vec<f64>> = None;
                for &l in &grid.lambdas {
                    let fit = keep_partial(baselines::fit_elastic_net_with(
                        data,
                        &prob,
                        l,
                        a,
                        warm.as_deref(),
                    ))?;
                    warm = Some(fit.beta.0.clone());
                    row.push(fit);
                }
                row
            }
        };
        out.push(row);
    }
    Ok(out)
}

fn keep_partial(r: Result<FitResult>) -> Result<FitResult> {
    match r {
        Err(Error::MaxSweepsExceeded(fit)) | Err(Error::MaxItersExceeded(fit)) => Ok(*fit),
        other => other,
    }
}

/// Single fit of `method` at `(alpha, lambda)` from a cold start.
pub fn fit_at(
    method: Method,
    data: &Dataset,
    alpha: f64,
    lambda: f64,
    d: f64,
    config: &SolverConfig,
) -> Result<FitResult> {
    match method {
        Method::Horses => {
            let pen = PenaltySpec::new(alpha, lambda, d)?;
            solver::solve(data, &pen, config)
        }
        Method::Ridge => baselines::fit_ridge(data, lambda),
        Method::Lasso => baselines::fit_lasso(data, lambda),
        Method::ElasticNet => baselines::fit_elastic_net(data, lambda, alpha),
    }
}

/// Grid argmin; ties go to the larger λ, then the larger α.
fn select(surface: &[Vec<f64>], grid: &TuningGrid) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_score = f64::INFINITY;
    for (a, row) in surface.iter().enumerate() {
        for (l, &s) in row.iter().enumerate() {
            let better = s < best_score
                || (s == best_score
                    && (grid.lambdas[l] > grid.lambdas[best.1]
                        || (grid.lambdas[l] == grid.lambdas[best.1]
                            && grid.alphas[a] > grid.alphas[best.0])));
            if better {
                best_score = s;
                best = (a, l);
            }
        }
    }
    best
}

fn result(
    surface: Vec<Vec<f64>>,
    grid: &TuningGrid,
    criterion: Criterion,
    folds: Option<Vec<usize>>,
    seed: u64,
) -> TuningResult {
    let (a, l) = select(&surface, grid);
    TuningResult {
        best_alpha: grid.alphas[a],
        best_lambda: grid.lambdas[l],
        best_index: (a, l),
        score_surface: surface,
        criterion,
        folds,
        seed,
    }
}

/// Fold id per row: a seeded shuffle cut into `k` contiguous blocks whose
/// sizes differ by at most one (the first `n mod k` blocks are larger).
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > n {
        return Err(Error::BadK { k, n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    let (base, extra) = (n / k, n % k);
    let mut folds = vec![0; n];
    let mut pos = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &row in &perm[pos..pos + size] {
            folds[row] = f;
        }
        pos += size;
    }
    Ok(folds)
}

/// `CV(α, λ) = Σ_folds Σ_{i ∈ fold} (y_i − ŷ_i^{(−fold)})²`. Each training
/// split is re-standardized on its own rows and its coefficients are mapped
/// back (with intercept) before predicting the held-out rows of `data`.
pub fn kfold_cv(
    data: &Dataset,
    grid: &TuningGrid,
    k: usize,
    seed: u64,
    method: Method,
    config: &SolverConfig,
) -> Result<TuningResult> {
    let n = data.n();
    let folds = fold_assignment(n, k, seed)?;
    let mut surface = vec![vec![0.0; grid.lambdas.len()]; grid.alphas.len()];
    for f in 0..k {
        let train_idx: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
        let test_idx: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
        let train_raw = data.select_rows(&train_idx);
        let test = data.select_rows(&test_idx);
        let (train, report) = standardize(train_raw.x(), train_raw.y())?;
        let fits = fit_grid(method, &train, grid, config)?;
        for (a, row) in fits.iter().enumerate() {
            for (l, fit) in row.iter().enumerate() {
                let (raw, b0) = destandardize(&fit.beta, &report)?;
                let pred = test.predict(&raw);
                surface[a][l] += test
                    .y()
                    .iter()
                    .zip(&pred)
                    .map(|(y, p)| (y - b0 - p) * (y - b0 - p))
                    .sum::<f64>();
            }
        }
    }
    Ok(result(surface, grid, Criterion::CV, Some(folds), seed))
}

/// `RSS / (n − df)`.
pub fn gcv(rss: f64, n: usize, df: usize) -> Result<f64> {
    if df >= n {
        return Err(Error::DfTooLarge { df, n });
    }
    if !(rss >= 0.0) {
        return Err(Error::InvalidArgument("rss must be nonnegative"));
    }
    Ok(rss / (n - df) as f64)
}

/// `n·ln(RSS) + ln(n)·df`.
pub fn bic(rss: f64, n: usize, df: usize) -> Result<f64> {
    if !(rss > 0.0) {
        return Err(Error::NonpositiveRss);
    }
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1"));
    }
    let nf = n as f64;
    Ok(nf * libm::log(rss) + libm::log(nf) * df as f64)
}

/// Number of distinct nonzero coefficient groups.
pub fn degrees_of_freedom(fit: &FitResult) -> usize {
    fit.groups.df()
}

/// In-sample selection by GCV or BIC. Grid points where the criterion is
/// undefined (`df ≥ n` for GCV, `RSS = 0` for BIC) score `+∞`.
pub fn select_information(
    data: &Dataset,
    grid: &TuningGrid,
    criterion: Criterion,
    method: Method,
    config: &SolverConfig,
) -> Result<TuningResult> {
    if !matches!(criterion, Criterion::GCV | Criterion::BIC) {
        return Err(Error::InvalidArgument("information criterion must be GCV or BIC"));
    }
    let fits = fit_grid(method, data, grid, config)?;
    let n = data.n();
    let surface = fits
        .iter()
        .map(|row| {
            row.iter()
                .map(|fit| {
                    let rss = data.rss(&fit.beta);
                    let df = degrees_of_freedom(fit);
                    let score = match criterion {
                        Criterion::GCV => gcv(rss, n, df),
                        _ => bic(rss, n, df),
                    };
                    score.unwrap_or(f64::INFINITY)
                })
                .collect()
        })
        .collect();
    Ok(result(surface, grid, criterion, None, 0))
}

/// Fits on `train` at every grid point and scores `‖y_valid − X_valid β̂‖²`.
/// Both sets must already be on the same scale (typically `valid` is
/// transformed with `train`'s standardization report).
pub fn validation_pe(
    train: &Dataset,
    valid: &Dataset,
    grid: &TuningGrid,
    method: Method,
    config: &SolverConfig,
) -> Result<TuningResult> {
    if train.p() != valid.p() {
        return Err(Error::DimensionMismatch {
            what: "validation predictors",
            expected: train.p(),
            found: valid.p(),
        });
    }
    let fits = fit_grid(method, train, grid, config)?;
    let surface = fits
        .iter()
        .map(|row| row.iter().map(|fit| valid.rss(&fit.beta)).collect())
        .collect();
    Ok(result(surface, grid, Criterion::ValidationPE, None, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{group_extract, DEFAULT_GROUP_TOL};
    use crate::test_util::{random_dataset, Rng};

    #[test]
    fn gcv_and_bic_formulas() {
        assert_eq!(gcv(10.0, 20, 0).unwrap(), 0.5);
        assert_eq!(gcv(10.0, 20, 10).unwrap(), 1.0);
        assert_eq!(gcv(10.0, 20, 20).unwrap_err(), Error::DfTooLarge { df: 20, n: 20 });
        assert_eq!(bic(1.0, 7, 0).unwrap(), 0.0);
        let v = bic(core::f64::consts::E, 10, 2).unwrap();
        assert!((v - (10.0 + 2.0 * libm::log(10.0))).abs() < 1e-12);
        assert!((v - 14.6052).abs() < 1e-4);
        assert_eq!(bic(0.0, 10, 1).unwrap_err(), Error::NonpositiveRss);
    }

    #[test]
    fn criteria_are_monotone() {
        for df in 0..5 {
            let mut prev_g = -1.0;
            let mut prev_b = f64::NEG_INFINITY;
            for i in 1..50 {
                let rss = 1.0 + i as f64 * 0.37;
                let g = gcv(rss, 12, df).unwrap();
                let b = bic(rss, 12, df).unwrap();
                assert!(g > prev_g && b > prev_b);
                prev_g = g;
                prev_b = b;
            }
        }
        for rss in [1.5, 3.0, 40.0] {
            for df in 1..10 {
                assert!(gcv(rss, 12, df).unwrap() > gcv(rss, 12, df - 1).unwrap());
                assert!(bic(rss, 12, df).unwrap() > bic(rss, 12, df - 1).unwrap());
            }
        }
    }

    #[test]
    fn folds_partition_and_are_balanced() {
        for (n, k) in [(10, 3), (20, 5), (7, 7), (23, 4)] {
            let f = fold_assignment(n, k, 99).unwrap();
            assert_eq!(f.len(), n);
            let mut sizes = vec![0usize; k];
            for &id in &f {
                sizes[id] += 1;
            }
            let (mn, mx) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(mx - mn <= 1 && *mn > 0);
            assert_eq!(f, fold_assignment(n, k, 99).unwrap());
        }
        assert_eq!(fold_assignment(5, 1, 0).unwrap_err(), Error::BadK { k: 1, n: 5 });
        assert_eq!(fold_assignment(5, 6, 0).unwrap_err(), Error::BadK { k: 6, n: 5 });
    }

    #[test]
    fn df_counts_groups() {
        let fit = FitResult::new(vec![0.85; 8], 0.0, 1, true);
        assert_eq!(degrees_of_freedom(&fit), 1);
        let fit = FitResult::new(vec![0.0; 8], 0.0, 1, true);
        assert_eq!(degrees_of_freedom(&fit), 0);
        assert_eq!(group_extract(&[1.0, -1.0, 1.0], DEFAULT_GROUP_TOL).df(), 2);
    }

    #[test]
    fn cv_with_zero_lambda_is_per_fold_ols() {
        let mut rng = Rng::new(31);
        let data = random_dataset(&mut rng, 24, 3);
        let grid = TuningGrid::new(vec![1.0], vec![0.0], 2.0).unwrap();
        let cfg = SolverConfig::default();
        let res = kfold_cv(&data, &grid, 4, 7, Method::Horses, &cfg).unwrap();
        // direct per-fold OLS with intercept
        let folds = res.folds.clone().unwrap();
        let mut expect = 0.0;
        for f in 0..4 {
            let tr: Vec<usize> = (0..24).filter(|&i| folds[i] != f).collect();
            let te: Vec<usize> = (0..24).filter(|&i| folds[i] == f).collect();
            let d = data.select_rows(&tr);
            // augment with a ones column and solve normal equations
            let mut cols: Vec<Vec<f64>> = (0..3).map(|j| d.x().col(j).to_vec()).collect();
            cols.push(vec![1.0; tr.len()]);
            let xa = crate::linalg::Matrix::from_columns(&cols).unwrap();
            let coef = xa.gram().solve_spd(&xa.t_mul_vec(d.y())).unwrap();
            for &i in &te {
                let row = data.x().row(i);
                let pred: f64 = row.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>() + coef[3];
                expect += (data.y()[i] - pred) * (data.y()[i] - pred);
            }
        }
        assert!((res.score_surface[0][0] - expect).abs() <= 1e-8 * expect.max(1.0));
    }

    #[test]
    fn cv_null_model_scores_centered_holdout() {
        let mut rng = Rng::new(32);
        let data = random_dataset(&mut rng, 15, 4);
        let grid = TuningGrid::new(vec![1.0], vec![1e9], 2.0).unwrap();
        let res = kfold_cv(&data, &grid, 3, 1, Method::Horses, &SolverConfig::default()).unwrap();
        let folds = res.folds.clone().unwrap();
        let mut expect = 0.0;
        for f in 0..3 {
            let tr: Vec<f64> = (0..15).filter(|&i| folds[i] != f).map(|i| data.y()[i]).collect();
            let mean = tr.iter().sum::<f64>() / tr.len() as f64;
            for i in (0..15).filter(|&i| folds[i] == f) {
                expect += (data.y()[i] - mean).powi(2);
            }
        }
        assert!((res.score_surface[0][0] - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn tie_break_prefers_larger_lambda_then_alpha() {
        let grid = TuningGrid::new(vec![0.5, 1.0], vec![2.0, 1.0], 2.0).unwrap();
        let flat = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(select(&flat, &grid), (1, 0));
        let s = vec![vec![3.0, 1.0], vec![2.0, 1.0]];
        assert_eq!(select(&s, &grid), (1, 1));
        let s = vec![vec![0.5, 1.0], vec![2.0, 1.0]];
        assert_eq!(select(&s, &grid), (0, 0));
    }

    #[test]
    fn validation_on_training_set_minimizes_rss() {
        let mut rng = Rng::new(33);
        let data = random_dataset(&mut rng, 20, 4);
        let grid = TuningGrid::horses_default(&data, &GridRule { n_alphas: 3, n_lambdas: 6, ..GridRule::default() }).unwrap();
        let cfg = SolverConfig::default();
        let res = validation_pe(&data, &data, &grid, Method::Horses, &cfg).unwrap();
        let fits = fit_grid(Method::Horses, &data, &grid, &cfg).unwrap();
        let best = res.score_surface[res.best_index.0][res.best_index.1];
        for row in &fits {
            for fit in row {
                assert!(best <= data.rss(&fit.beta) + 1e-12);
            }
        }
    }

    #[test]
    fn grids_respect_bounds() {
        let mut rng = Rng::new(34);
        let data = random_dataset(&mut rng, 20, 9);
        let g = TuningGrid::horses_default(&data, &GridRule::default()).unwrap();
        assert_eq!(g.alphas.len(), 10);
        assert_eq!(g.lambdas.len(), 30);
        assert!((g.alphas[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(*g.alphas.last().unwrap(), 1.0);
        let lmax = solver::lambda_max(&data, g.alphas[0]);
        assert!((g.lambdas[0] - lmax).abs() < 1e-12 * lmax);
        assert!((g.lambdas[29] - lmax * 1e-4).abs() < 1e-9 * lmax);
        assert!(TuningGrid::new(vec![], vec![1.0], 2.0).is_err());
        assert!(TuningGrid::new(vec![1.0], vec![1.0, 2.0], 2.0).is_err());
    }
}
