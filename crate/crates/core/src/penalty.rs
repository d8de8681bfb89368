use crate::error::{Error, Result};

/// Penalty parameters in Lagrangian form.
///
/// `alpha` mixes the coefficient penalty and the fusion penalty,
/// `lambda1 = lambda·alpha` and `lambda2 = lambda·(1 − alpha)`. The mixing
/// weight is restricted to `[1/d, 1]`, where `d` is the thresholding
/// parameter (default `√p`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    alpha: f64,
    lambda: f64,
    d: f64,
    lambda1: f64,
    lambda2: f64,
}

impl PenaltySpec {
    pub fn new(alpha: f64, lambda: f64, d: f64) -> Result<Self> {
        if !(d > 0.0) || d.is_nan() {
            return Err(Error::InvalidPenalty("d must be positive"));
        }
        if !(alpha >= 1.0 / d && alpha <= 1.0) {
            return Err(Error::InvalidPenalty("alpha must lie in [1/d, 1]"));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidPenalty("lambda must be finite and nonnegative"));
        }
        Ok(PenaltySpec {
            alpha,
            lambda,
            d,
            lambda1: lambda * alpha,
            lambda2: lambda * (1.0 - alpha),
        })
    }

    /// Penalty with the default threshold `d = √p`.
    pub fn with_default_d(alpha: f64, lambda: f64, p: usize) -> Result<Self> {
        PenaltySpec::new(alpha, lambda, default_d(p))
    }

    /// Builds a penalty directly from `(λ₁, λ₂)`. The implied `d` is the
    /// loosest one admitting `alpha = λ₁/(λ₁+λ₂)` (infinite when `λ₁ = 0`).
    pub fn from_lambdas(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 >= 0.0 && lambda2 >= 0.0) || !(lambda1 + lambda2).is_finite() {
            return Err(Error::InvalidPenalty("lambda1 and lambda2 must be nonnegative"));
        }
        let lambda = lambda1 + lambda2;
        let alpha = if lambda > 0.0 { lambda1 / lambda } else { 1.0 };
        let d = if alpha > 0.0 { 1.0 / alpha } else { f64::INFINITY };
        Ok(PenaltySpec {
            alpha,
            lambda,
            d,
            lambda1,
            lambda2,
        })
    }

    /// Same mixing weight and threshold, different `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        PenaltySpec::new(self.alpha, lambda, self.d)
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn d(&self) -> f64 {
        self.d
    }

    #[inline]
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    #[inline]
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
}

/// Recommended thresholding parameter `√p`.
pub fn default_d(p: usize) -> f64 {
    libm::sqrt(p as f64)
}
