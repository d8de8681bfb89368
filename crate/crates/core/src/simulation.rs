//! Monte-Carlo comparison of HORSES with ridge, LASSO and Elastic Net on six
//! correlated-design models.
//!
//! Every replicate is driven by `ChaCha20Rng::seed_from_u64(seed)` with
//! standard normal draws taken in this order: all `2n` design rows (training
//! rows first, then validation rows; each row drawn left to right), then the
//! `2n` noise terms in the same row order. A replicate's seed is
//! `base_seed + rep_index`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::data::{destandardize, standardize, Dataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::solver::SolverConfig;
use crate::tuning::{fit_at, validation_pe, GridRule, Method, TuningGrid};

/// Population covariance of the predictors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovKind {
    /// `Σ_ij = ρ^|i−j|`
    Ar1(f64),
    /// Unit diagonal, constant off-diagonal.
    CompoundSymmetric(f64),
    /// Three blocks of five predictors sharing a latent factor plus 25
    /// independent predictors.
    ThreeBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimModelSpec {
    pub model_id: u32,
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub cov_kind: CovKind,
    pub beta_true: Vec<f64>,
    /// Population covariance `V` of the predictors.
    pub v_matrix: Matrix,
}

const BLOCK_NOISE_SD: f64 = 0.4;

fn block_scale() -> f64 {
    1.0 / libm::sqrt(1.0 + BLOCK_NOISE_SD * BLOCK_NOISE_SD)
}

fn covariance(kind: CovKind, p: usize) -> Matrix {
    let mut v = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let val = match kind {
                CovKind::Ar1(rho) => libm::pow(rho, (i as f64 - j as f64).abs()),
                CovKind::CompoundSymmetric(rho) => {
                    if i == j {
                        1.0
                    } else {
                        rho
                    }
                }
                CovKind::ThreeBlock => {
                    if i == j {
                        1.0
                    } else if i < 15 && j < 15 && i / 5 == j / 5 {
                        block_scale() * block_scale()
                    } else {
                        0.0
                    }
                }
            };
            v.set(i, j, val);
        }
    }
    v
}

/// Definition of simulation model `model_id` (1 to 6).
pub fn model_spec(model_id: u32) -> Result<SimModelSpec> {
    let (n, sigma, kind, beta): (usize, f64, CovKind, Vec<f64>) = match model_id {
        1 => (
            20,
            3.0,
            CovKind::Ar1(0.7),
            vec![3.0, 2.0, 1.5, 0.0, 0.0, 0.0, 0.0, 0.0],
        ),
        2 => (
            20,
            3.0,
            CovKind::Ar1(0.7),
            vec![3.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0, 2.0],
        ),
        3 => (20, 3.0, CovKind::Ar1(0.7), vec![0.85; 8]),
        4 => {
            let mut b = vec![0.0; 40];
            b[10..20].iter_mut().for_each(|v| *v = 2.0);
            b[30..40].iter_mut().for_each(|v| *v = 2.0);
            (100, 15.0, CovKind::CompoundSymmetric(0.5), b)
        }
        5 => {
            let mut b = vec![0.0; 40];
            b[..15].iter_mut().for_each(|v| *v = 3.0);
            (50, 15.0, CovKind::ThreeBlock, b)
        }
        6 => {
            let mut b = Vec::with_capacity(100);
            for v in [3.0, 2.0, -1.5, 1.0] {
                b.extend(core::iter::repeat_n(v, 5));
                b.extend(core::iter::repeat_n(0.0, 10));
            }
            b.resize(100, 0.0);
            (50, 3.0, CovKind::Ar1(0.7), b)
        }
        _ => return Err(Error::BadModelId(model_id)),
    };
    let p = beta.len();
    Ok(SimModelSpec {
        model_id,
        n,
        p,
        sigma,
        cov_kind: kind,
        beta_true: beta,
        v_matrix: covariance(kind, p),
    })
}

/// Draws `rows` design rows from `rng`.
fn draw_design<R: Rng>(spec: &SimModelSpec, rows: usize, rng: &mut R) -> Matrix {
    let p = spec.p;
    let mut x = Matrix::zeros(rows, p);
    match spec.cov_kind {
        CovKind::ThreeBlock => {
            let s = block_scale();
            for i in 0..rows {
                let z: [f64; 3] = core::array::from_fn(|_| rng.sample(StandardNormal));
                for j in 0..p {
                    let e: f64 = rng.sample(StandardNormal);
                    let v = if j < 15 {
                        (z[j / 5] + BLOCK_NOISE_SD * e) * s
                    } else {
                        e
                    };
                    x.set(i, j, v);
                }
            }
        }
        _ => {
            let l = spec
                .v_matrix
                .cholesky()
                .expect("model covariance is positive definite");
            let mut z = vec![0.0; p];
            for i in 0..rows {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                for j in 0..p {
                    let v: f64 = (0..=j).map(|k| l.get(j, k) * z[k]).sum();
                    x.set(i, j, v);
                }
            }
        }
    }
    x
}

/// `rows` predictor rows from the model's population, seeded by `seed`.
pub fn sample_design(spec: &SimModelSpec, rows: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    draw_design(spec, rows, &mut rng)
}

/// Raw (unstandardized) training and validation sets of `n` rows each.
pub fn generate_replicate(spec: &SimModelSpec, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = spec.n;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let x = draw_design(spec, 2 * n, &mut rng);
    let mut y = x.mul_vec(&spec.beta_true);
    for v in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *v += spec.sigma * e;
    }
    let train_idx: Vec<usize> = (0..n).collect();
    let valid_idx: Vec<usize> = (n..2 * n).collect();
    let train = Dataset::new(x.select_rows(&train_idx), y[..n].to_vec())?;
    let valid = Dataset::new(x.select_rows(&valid_idx), y[n..].to_vec())?;
    Ok((train, valid))
}

/// Model error `(β̂ − β)ᵀ V (β̂ − β)`.
pub fn mse(beta_hat: &[f64], beta_true: &[f64], v: &Matrix) -> Result<f64> {
    if beta_hat.len() != beta_true.len() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: beta_true.len(),
            found: beta_hat.len(),
        });
    }
    if v.rows() != beta_true.len() || v.cols() != beta_true.len() {
        return Err(Error::DimensionMismatch {
            what: "covariance matrix",
            expected: beta_true.len(),
            found: v.rows(),
        });
    }
    let diff: Vec<f64> = beta_hat.iter().zip(beta_true).map(|(a, b)| a - b).collect();
    Ok(v.quad_form(&diff))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    pub mse: f64,
    pub df: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub converged: bool,
    /// Coordinate-wise optimality residual of the refit (HORSES only; 0 for
    /// the baselines).
    pub kkt_residual: f64,
    /// Objective trace of the refit when `record_trace` is set.
    pub trace: Vec<f64>,
    /// Raw-scale coefficients of the selected fit.
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub model_id: u32,
    pub rep_index: usize,
    pub seed: u64,
    /// One entry per requested method; `Err` records a failed fit.
    pub outcomes: Vec<(Method, core::result::Result<MethodOutcome, Error>)>,
}

/// Tunes each method on the validation half by prediction error, refits at
/// the selected point, and scores model error on the raw scale. Ridge's
/// degrees of freedom are reported as `p`.
pub fn run_replicate(
    spec: &SimModelSpec,
    rep_index: usize,
    base_seed: u64,
    methods: &[Method],
    rule: &GridRule,
    config: &SolverConfig,
) -> ReplicateResult {
    let seed = base_seed.wrapping_add(rep_index as u64);
    let prepared = generate_replicate(spec, seed).and_then(|(train_raw, valid_raw)| {
        let (train, report) = standardize(train_raw.x(), train_raw.y())?;
        let valid = report.apply(valid_raw.x(), valid_raw.y())?;
        Ok((train, valid, report))
    });
    let outcomes = methods
        .iter()
        .map(|&m| {
            let out = prepared.clone().and_then(|(train, valid, report)| {
                let grid = TuningGrid::for_method(m, &train, rule)?;
                let tuned = validation_pe(&train, &valid, &grid, m, config)?;
                let fit = match fit_at(m, &train, tuned.best_alpha, tuned.best_lambda, grid.d, config) {
                    Err(Error::MaxSweepsExceeded(f)) | Err(Error::MaxItersExceeded(f)) => *f,
                    other => other?,
                };
                let (raw, _) = destandardize(&fit.beta, &report)?;
                let df = if m == Method::Ridge { spec.p } else { fit.df };
                Ok(MethodOutcome {
                    method: m,
                    mse: mse(&raw, &spec.beta_true, &spec.v_matrix)?,
                    df,
                    alpha: tuned.best_alpha,
                    lambda: tuned.best_lambda,
                    converged: fit.converged,
                    kkt_residual: fit.kkt_residual,
                    trace: fit.trace,
                    beta: raw,
                })
            });
            (m, out)
        })
        .collect();
    ReplicateResult {
        model_id: spec.model_id,
        rep_index,
        seed,
        outcomes,
    }
}

/// Linear-interpolation percentile of ascending `sorted` (`q ∈ [0, 1]`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model_id: u32,
    pub method: Method,
    pub mse_median: f64,
    pub mse_p10: f64,
    pub mse_p90: f64,
    pub df_median: f64,
    pub df_p10: f64,
    pub df_p90: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudySummary {
    pub rows: Vec<SummaryRow>,
}

impl StudySummary {
    pub fn get(&self, model_id: u32, method: Method) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.model_id == model_id && r.method == method)
    }
}

/// Median and 10th/90th percentiles of MSE and df per `(model, method)`,
/// skipping failed replicates. Rows follow first appearance order.
pub fn summarize(results: &[ReplicateResult]) -> StudySummary {
    let mut keys: Vec<(u32, Method)> = Vec::new();
    for r in results {
        for (m, _) in &r.outcomes {
            if !keys.contains(&(r.model_id, *m)) {
                keys.push((r.model_id, *m));
            }
        }
    }
    let rows = keys
        .into_iter()
        .map(|(model_id, method)| {
            let mut mses = Vec::new();
            let mut dfs = Vec::new();
            let mut n_failed = 0;
            for r in results.iter().filter(|r| r.model_id == model_id) {
                for (m, o) in &r.outcomes {
                    if *m != method {
                        continue;
                    }
                    match o {
                        Ok(o) => {
                            mses.push(o.mse);
                            dfs.push(o.df as f64);
                        }
                        Err(_) => n_failed += 1,
                    }
                }
            }
            mses.sort_by(f64::total_cmp);
            dfs.sort_by(f64::total_cmp);
            SummaryRow {
                model_id,
                method,
                mse_median: percentile(&mses, 0.5),
                mse_p10: percentile(&mses, 0.1),
                mse_p90: percentile(&mses, 0.9),
                df_median: percentile(&dfs, 0.5),
                df_p10: percentile(&dfs, 0.1),
                df_p90: percentile(&dfs, 0.9),
                n_ok: mses.len(),
                n_failed,
            }
        })
        .collect();
    StudySummary { rows }
}

/// Sequential study over `models × reps`.
pub fn run_study(
    models: &[u32],
    methods: &[Method],
    reps: usize,
    base_seed: u64,
    rule: &GridRule,
    config: &SolverConfig,
) -> Result<(StudySummary, Vec<ReplicateResult>)> {
    let specs = models
        .iter()
        .map(|&m| model_spec(m))
        .collect::<Result<Vec<_>>>()?;
    let mut results = Vec::with_capacity(specs.len() * reps);
    for spec in &specs {
        for rep in 0..reps {
            results.push(run_replicate(spec, rep, base_seed, methods, rule, config));
        }
    }
    Ok((summarize(&results), results))
}
