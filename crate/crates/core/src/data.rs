//! Datasets, standardization, coefficient groups and fit results.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Default absolute tolerance for treating two standardized coefficients as
/// equal, and a coefficient as zero.
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;

/// A design matrix and response.
///
/// When `standardized` is set, every column of `x` has zero sum and unit sum
/// of squares and `y` has zero sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    standardized: bool,
}

impl Dataset {
    /// Wraps raw data after checking shape and finiteness. No scaling is
    /// applied; see [`standardize`].
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        validate(&x, &y)?;
        Ok(Dataset {
            x,
            y,
            standardized: false,
        })
    }

    #[inline]
    pub fn x(&self) -> &Matrix {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.x.cols()
    }

    #[inline]
    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Rows selected by index, marked unstandardized.
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            standardized: false,
        }
    }

    /// Fitted values `Xβ`.
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        self.x.mul_vec(beta)
    }

    /// Residual sum of squares `‖y − Xβ‖²`.
    pub fn rss(&self, beta: &[f64]) -> f64 {
        let fitted = self.predict(beta);
        self.y
            .iter()
            .zip(&fitted)
            .map(|(y, f)| (y - f) * (y - f))
            .sum()
    }

    pub fn y_norm(&self) -> f64 {
        libm::sqrt(dot(&self.y, &self.y))
    }

    /// Pearson correlation of predictor columns `k` and `l`.
    pub fn column_correlation(&self, k: usize, l: usize) -> f64 {
        let (a, b) = (self.x.col(k), self.x.col(l));
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma) * (x - ma);
            sbb += (y - mb) * (y - mb);
        }
        sab / libm::sqrt(saa * sbb)
    }
}

fn validate(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "response length",
            expected: x.rows(),
            found: y.len(),
        });
    }
    if x.rows() < 2 || x.cols() < 1 {
        return Err(Error::TooSmall {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    if !x.as_slice().iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Means and scales removed by [`standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationReport {
    pub y_mean: f64,
    pub col_means: Vec<f64>,
    /// `√Σ_i (x_ij − mean_j)²`
    pub col_scales: Vec<f64>,
}

impl StandardizationReport {
    /// Identity transform for `p` columns.
    pub fn identity(p: usize) -> Self {
        StandardizationReport {
            y_mean: 0.0,
            col_means: vec![0.0; p],
            col_scales: vec![1.0; p],
        }
    }

    /// Applies the stored transform to new raw data.
    pub fn apply(&self, raw_x: &Matrix, raw_y: &[f64]) -> Result<Dataset> {
        validate(raw_x, raw_y)?;
        if raw_x.cols() != self.col_means.len() {
            return Err(Error::DimensionMismatch {
                what: "column count",
                expected: self.col_means.len(),
                found: raw_x.cols(),
            });
        }
        let mut x = raw_x.clone();
        for j in 0..x.cols() {
            let (m, s) = (self.col_means[j], self.col_scales[j]);
            x.col_mut(j).iter_mut().for_each(|v| *v = (*v - m) / s);
        }
        let y = raw_y.iter().map(|v| v - self.y_mean).collect();
        Ok(Dataset {
            x,
            y,
            standardized: true,
        })
    }
}

/// Centers the response and centers/scales every column to unit sum of
/// squares (no `1/n` or `1/(n−1)` factor).
pub fn standardize(raw_x: &Matrix, raw_y: &[f64]) -> Result<(Dataset, StandardizationReport)> {
    validate(raw_x, raw_y)?;
    let n = raw_x.rows() as f64;
    let mut col_means = Vec::with_capacity(raw_x.cols());
    let mut col_scales = Vec::with_capacity(raw_x.cols());
    for j in 0..raw_x.cols() {
        let col = raw_x.col(j);
        let mean = col.iter().sum::<f64>() / n;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let scale = libm::sqrt(ss);
        let max_abs = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Relative test so that float noise in a constant column is still caught.
        if !(scale > 1e-12 * max_abs.max(f64::MIN_POSITIVE)) {
            return Err(Error::ConstantColumn(j));
        }
        col_means.push(mean);
        col_scales.push(scale);
    }
    let y_mean = raw_y.iter().sum::<f64>() / n;
    let report = StandardizationReport {
        y_mean,
        col_means,
        col_scales,
    };
    let data = report.apply(raw_x, raw_y)?;
    Ok((data, report))
}

/// Maps standardized-scale coefficients back to the raw scale, returning
/// `(raw_beta, intercept)`.
pub fn destandardize(beta: &[f64], report: &StandardizationReport) -> Result<(Vec<f64>, f64)> {
    if beta.len() != report.col_scales.len() {
        return Err(Error::DimensionMismatch {
            what: "coefficient length",
            expected: report.col_scales.len(),
            found: beta.len(),
        });
    }
    let raw: Vec<f64> = beta
        .iter()
        .zip(&report.col_scales)
        .map(|(b, s)| b / s)
        .collect();
    let intercept = report.y_mean - dot(&raw, &report.col_means);
    Ok((raw, intercept))
}

/// Coefficients on the standardized scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector(pub Vec<f64>);

impl CoefficientVector {
    pub fn zeros(p: usize) -> Self {
        CoefficientVector(vec![0.0; p])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for CoefficientVector {
    fn from(v: Vec<f64>) -> Self {
        CoefficientVector(v)
    }
}

impl core::ops::Deref for CoefficientVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// One set of coefficients sharing a (nonzero) value.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub value: f64,
    /// Sorted 0-based coefficient indices.
    pub members: Vec<usize>,
}

/// Partition of coefficient indices into equal-value groups and the zero set.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStructure {
    /// Nonzero groups in ascending order of value.
    pub groups: Vec<Group>,
    pub zero_set: Vec<usize>,
    pub tolerance: f64,
}

impl GroupStructure {
    /// Number of distinct nonzero groups.
    pub fn df(&self) -> usize {
        self.groups.len()
    }

    /// Group label per coefficient: 0 for the zero set, `g + 1` for
    /// `groups[g]`.
    pub fn labels(&self, p: usize) -> Vec<usize> {
        let mut labels = vec![0; p];
        for (g, group) in self.groups.iter().enumerate() {
            for &j in &group.members {
                labels[j] = g + 1;
            }
        }
        labels
    }
}

/// Groups coefficients by value: entries with `|β_j| ≤ tol` form the zero
/// set; the remaining values are sorted and consecutive values whose gap is
/// at most `tol` are merged (single linkage on the line).
pub fn group_extract(beta: &[f64], tolerance: f64) -> GroupStructure {
    let tolerance = tolerance.max(0.0);
    let mut zero_set = Vec::new();
    let mut nonzero = Vec::new();
    for (j, &b) in beta.iter().enumerate() {
        if b.abs() <= tolerance {
            zero_set.push(j);
        } else {
            nonzero.push(j);
        }
    }
    nonzero.sort_by(|&a, &b| beta[a].total_cmp(&beta[b]).then(a.cmp(&b)));

    let mut groups: Vec<Group> = Vec::new();
    let mut prev = f64::NAN;
    for &j in &nonzero {
        match groups.last_mut() {
            Some(g) if beta[j] - prev <= tolerance => g.members.push(j),
            _ => groups.push(Group {
                value: 0.0,
                members: vec![j],
            }),
        }
        prev = beta[j];
    }
    for g in &mut groups {
        g.members.sort_unstable();
        g.value = g.members.iter().map(|&j| beta[j]).sum::<f64>() / g.members.len() as f64;
    }
    GroupStructure {
        groups,
        zero_set,
        tolerance,
    }
}

/// Outcome of a penalized fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta: CoefficientVector,
    pub groups: GroupStructure,
    pub objective: f64,
    pub df: usize,
    /// Sweeps for coordinate solvers, iterations for the oracles.
    pub iterations: usize,
    pub fusion_moves_accepted: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    /// Objective after every sweep and every accepted non-descent move, in
    /// order. Empty unless tracing was requested.
    pub trace: Vec<f64>,
}

impl FitResult {
    /// Assembles a result, deriving groups and df from `beta`.
    pub fn new(beta: Vec<f64>, objective: f64, iterations: usize, converged: bool) -> Self {
        let groups = group_extract(&beta, DEFAULT_GROUP_TOL);
        FitResult {
            df: groups.df(),
            beta: CoefficientVector(beta),
            groups,
            objective,
            iterations,
            fusion_moves_accepted: 0,
            converged,
            kkt_residual: 0.0,
            trace: Vec::new(),
        }
    }
}
