//! Ridge, LASSO and Elastic Net in the same `½`-loss Lagrangian convention as
//! the HORSES objective:
//!
//! ```text
//! ridge       ½‖y − Xβ‖² + λ‖β‖²
//! lasso       ½‖y − Xβ‖² + λ‖β‖₁
//! elastic net ½‖y − Xβ‖² + λα‖β‖₁ + λ(1 − α)‖β‖²
//! ```

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Dataset, FitResult};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, Matrix};
use crate::solver::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Ridge,
    Lasso,
    ElasticNet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineSpec {
    pub method: BaselineMethod,
    pub lambda: f64,
    /// Elastic Net mixing weight; ignored by the other methods.
    pub alpha: f64,
}

impl BaselineSpec {
    pub fn new(method: BaselineMethod, lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidPenalty("lambda must be finite and nonnegative"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidPenalty("alpha must lie in [0, 1]"));
        }
        Ok(BaselineSpec {
            method,
            lambda,
            alpha,
        })
    }

    pub fn fit(&self, data: &Dataset) -> Result<FitResult> {
        match self.method {
            BaselineMethod::Ridge => fit_ridge(data, self.lambda),
            BaselineMethod::Lasso => fit_lasso(data, self.lambda),
            BaselineMethod::ElasticNet => fit_elastic_net(data, self.lambda, self.alpha),
        }
    }
}

/// Coordinate descent stops once no coefficient moves by more than this.
pub const CD_TOL: f64 = 1e-10;
pub const CD_MAX_SWEEPS: usize = 100_000;

fn enet_objective(data: &Dataset, beta: &[f64], l1: f64, l2sq: f64) -> f64 {
    0.5 * data.rss(beta)
        + l1 * beta.iter().map(|b| b.abs()).sum::<f64>()
        + l2sq * beta.iter().map(|b| b * b).sum::<f64>()
}

/// `β̂ = (XᵀX + 2λI)⁻¹Xᵀy`, the minimiser of `½‖y − Xβ‖² + λ‖β‖²`.
/// `df` counts distinct nonzero values like every other fit (almost surely
/// `p`); see [`ridge_df`] for the hat-matrix trace.
pub fn fit_ridge(data: &Dataset, lambda: f64) -> Result<FitResult> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidPenalty("lambda must be nonnegative"));
    }
    let p = data.p();
    let mut a = data.x().gram();
    for j in 0..p {
        a.set(j, j, a.get(j, j) + 2.0 * lambda);
    }
    let l = a.cholesky()?;
    let beta = cholesky_solve(&l, &data.x().t_mul_vec(data.y()));
    let objective = enet_objective(data, &beta, 0.0, lambda);
    Ok(FitResult::new(beta, objective, 1, true))
}

fn ridge_hat_trace(x: &Matrix, l: &Matrix) -> f64 {
    // trace(X A⁻¹ Xᵀ) = trace(A⁻¹ XᵀX)
    let g = x.gram();
    (0..g.cols())
        .map(|j| cholesky_solve(l, g.col(j))[j])
        .sum()
}

/// Effective degrees of freedom of ridge at `λ`:
/// `trace(X(XᵀX + 2λI)⁻¹Xᵀ)`.
pub fn ridge_df(data: &Dataset, lambda: f64) -> Result<f64> {
    let p = data.p();
    let mut a = data.x().gram();
    for j in 0..p {
        a.set(j, j, a.get(j, j) + 2.0 * lambda);
    }
    let l = a.cholesky()?;
    Ok(ridge_hat_trace(data.x(), &l))
}

/// Cyclic coordinate descent with soft-threshold updates on
/// `½‖y − Xβ‖² + λ‖β‖₁`.
pub fn fit_lasso(data: &Dataset, lambda: f64) -> Result<FitResult> {
    fit_elastic_net(data, lambda, 1.0)
}

/// Coordinate descent on `½‖y − Xβ‖² + λα‖β‖₁ + λ(1 − α)‖β‖²` with update
/// `β_k = S(x_kᵀr̃, λα) / (x_kᵀx_k + 2λ(1 − α))`.
pub fn fit_elastic_net(data: &Dataset, lambda: f64, alpha: f64) -> Result<FitResult> {
    let prob = Problem::new(data);
    fit_elastic_net_with(data, &prob, lambda, alpha, None)
}

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Elastic Net coordinate descent from `warm` (zeros when `None`) with
/// precomputed sufficient statistics.
pub fn fit_elastic_net_with(
    data: &Dataset,
    prob: &Problem,
    lambda: f64,
    alpha: f64,
    warm: Option<&[f64]>,
) -> Result<FitResult> {
    if !(lambda >= 0.0) || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidPenalty("need lambda >= 0 and alpha in [0, 1]"));
    }
    let p = data.p();
    let l1 = lambda * alpha;
    let l2sq = lambda * (1.0 - alpha);
    let mut beta = warm.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let (sweeps, converged) = enet_sweeps(prob, &mut beta, l1, l2sq, CD_MAX_SWEEPS);
    let objective = enet_objective(data, &beta, l1, l2sq);
    let fit = FitResult::new(beta, objective, sweeps, converged);
    if converged {
        Ok(fit)
    } else {
        Err(Error::MaxSweepsExceeded(Box::new(fit)))
    }
}

/// Runs up to `max_sweeps` cyclic sweeps in place; returns the sweep count
/// and whether the largest coordinate change fell to [`CD_TOL`].
fn enet_sweeps(
    prob: &Problem,
    beta: &mut [f64],
    l1: f64,
    l2sq: f64,
    max_sweeps: usize,
) -> (usize, bool) {
    let gram = prob.gram();
    let gb = gram.mul_vec(beta);
    let mut corr: Vec<f64> = prob.xty().iter().zip(&gb).map(|(a, b)| a - b).collect();
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for k in 0..beta.len() {
            let gkk = gram.get(k, k);
            let old = beta[k];
            let z = corr[k] + gkk * old;
            let new = soft_threshold(z, l1) / (gkk + 2.0 * l2sq);
            if new != old {
                let d = new - old;
                for (c, g) in corr.iter_mut().zip(gram.col(k)) {
                    *c -= g * d;
                }
                beta[k] = new;
                max_change = max_change.max(d.abs());
            }
        }
        if max_change <= CD_TOL {
            return (sweeps, true);
        }
    }
    (sweeps, false)
}

/// Largest `|x_jᵀy|`: the LASSO null threshold.
pub fn lasso_lambda_max(data: &Dataset) -> f64 {
    data.x()
        .t_mul_vec(data.y())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_dataset, Rng};

    #[test]
    fn ridge_zero_lambda_orthonormal_is_xty() {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let data = Dataset::new(x, vec![2.0, -1.0, 5.0]).unwrap();
        let fit = fit_ridge(&data, 0.0).unwrap();
        assert_eq!(fit.beta.0, vec![2.0, -1.0]);
    }

    #[test]
    fn ridge_huge_lambda_shrinks_to_zero() {
        let mut rng = Rng::new(2);
        let data = random_dataset(&mut rng, 20, 4);
        let fit = fit_ridge(&data, 1e12).unwrap();
        let norm: f64 = fit.beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(norm <= 1e-6);
    }

    #[test]
    fn ridge_matches_hand_normal_equations() {
        let mut rng = Rng::new(8);
        let data = random_dataset(&mut rng, 5, 2);
        let lambda = 0.3;
        let g = data.x().gram();
        let a = data.x().t_mul_vec(data.y());
        // 2x2 inverse by hand
        let (m11, m12, m22) = (g.get(0, 0) + 2.0 * lambda, g.get(0, 1), g.get(1, 1) + 2.0 * lambda);
        let det = m11 * m22 - m12 * m12;
        let b0 = (m22 * a[0] - m12 * a[1]) / det;
        let b1 = (m11 * a[1] - m12 * a[0]) / det;
        let fit = fit_ridge(&data, lambda).unwrap();
        assert!((fit.beta[0] - b0).abs() < 1e-10 && (fit.beta[1] - b1).abs() < 1e-10);
    }

    #[test]
    fn ridge_singular_without_penalty() {
        let x = Matrix::from_rows(&[vec![1.0, 1.0], vec![-1.0, -1.0], vec![0.0, 0.0]]).unwrap();
        let data = Dataset::new(x, vec![1.0, -1.0, 0.0]).unwrap();
        assert_eq!(fit_ridge(&data, 0.0).unwrap_err(), Error::SingularSystem);
        assert!(fit_ridge(&data, 0.1).is_ok());
    }

    #[test]
    fn ridge_df_trace() {
        let mut rng = Rng::new(4);
        let data = random_dataset(&mut rng, 30, 5);
        assert!((ridge_df(&data, 0.0).unwrap() - 5.0).abs() < 1e-10);
        let d = ridge_df(&data, 1.0).unwrap();
        assert!(d > 0.0 && d < 5.0);
    }

    #[test]
    fn lasso_null_threshold() {
        let mut rng = Rng::new(6);
        let data = random_dataset(&mut rng, 20, 6);
        let lmax = lasso_lambda_max(&data);
        let above = fit_lasso(&data, lmax * (1.0 + 1e-9)).unwrap();
        assert!(above.beta.iter().all(|&b| b == 0.0));
        let below = fit_lasso(&data, lmax * 0.99).unwrap();
        assert!(below.beta.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn lasso_orthonormal_is_separable() {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let data = Dataset::new(x, vec![2.0, -0.3, -1.5, 9.0]).unwrap();
        let fit = fit_lasso(&data, 0.5).unwrap();
        assert_eq!(fit.beta.0, vec![1.5, 0.0, -1.0]);
    }

    #[test]
    fn elastic_net_endpoints() {
        let mut rng = Rng::new(10);
        let data = random_dataset(&mut rng, 25, 5);
        let lam = 0.4;
        let en1 = fit_elastic_net(&data, lam, 1.0).unwrap();
        let la = fit_lasso(&data, lam).unwrap();
        for (a, b) in en1.beta.iter().zip(la.beta.iter()) {
            assert!((a - b).abs() <= 1e-9);
        }
        let en0 = fit_elastic_net(&data, lam, 0.0).unwrap();
        let ri = fit_ridge(&data, lam).unwrap();
        for (a, b) in en0.beta.iter().zip(ri.beta.iter()) {
            assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn elastic_net_groups_duplicate_columns() {
        let mut rng = Rng::new(12);
        let base = random_dataset(&mut rng, 20, 3);
        // duplicate column 0 as column 3
        let mut cols: Vec<Vec<f64>> = (0..3).map(|j| base.x().col(j).to_vec()).collect();
        cols.push(base.x().col(0).to_vec());
        let data = Dataset::new(Matrix::from_columns(&cols).unwrap(), base.y().to_vec()).unwrap();
        let fit = fit_elastic_net(&data, 0.3, 0.5).unwrap();
        assert!((fit.beta[0] - fit.beta[3]).abs() <= 1e-8);
        // ridge-augmented closed form: the duplicate pair splits the single-column
        // coefficient of the reduced problem with doubled ridge weight
        assert!(fit.beta[0] != 0.0);
    }

    #[test]
    fn sweeps_do_not_increase_objective() {
        let mut rng = Rng::new(14);
        let data = random_dataset(&mut rng, 15, 6);
        let prob = Problem::new(&data);
        for (lambda, alpha) in [(0.2, 0.7), (0.5, 1.0), (0.3, 0.0)] {
            let (l1, l2sq) = (lambda * alpha, lambda * (1.0 - alpha));
            let mut beta = vec![0.0; 6];
            let mut prev = enet_objective(&data, &beta, l1, l2sq);
            for _ in 0..50 {
                enet_sweeps(&prob, &mut beta, l1, l2sq, 1);
                let f = enet_objective(&data, &beta, l1, l2sq);
                assert!(f <= prev + 1e-12 * prev.max(1.0));
                prev = f;
            }
        }
    }
}
