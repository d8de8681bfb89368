//! Output documents. JSON is written by `serde_json`, whose float formatting
//! is the shortest decimal that round-trips; CSV uses Rust's `Display` for
//! `f64`, which has the same property. Non-finite scores become JSON `null`.

use std::io::Write;

use horses_core::data::{FitResult, StandardizationReport};
use horses_core::destandardize;
use horses_core::simulation::{ReplicateResult, StudySummary};
use horses_core::tuning::{Criterion, Method, TuningGrid, TuningResult};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDoc {
    pub index: usize,
    pub name: String,
    pub raw: f64,
    pub standardized: f64,
    /// 0 for zero coefficients, otherwise the 1-based group id.
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDoc {
    pub id: usize,
    /// Shared standardized-scale value.
    pub value: f64,
    pub members: Vec<usize>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDoc {
    pub estimator: String,
    pub n: usize,
    pub p: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub d: Option<f64>,
    pub intercept: f64,
    pub coefficients: Vec<CoefficientDoc>,
    pub groups: Vec<GroupDoc>,
    pub df: usize,
    /// Objective on the standardized scale.
    pub objective: f64,
    pub kkt_residual: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub fusion_moves_accepted: usize,
}

pub struct FitContext<'a> {
    pub estimator: Method,
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub d: f64,
    pub names: &'a [String],
    pub report: &'a StandardizationReport,
}

impl FitDoc {
    pub fn new(fit: &FitResult, ctx: &FitContext<'_>) -> Result<Self, CliError> {
        let (raw, intercept) = destandardize(&fit.beta, ctx.report)?;
        let p = fit.beta.len();
        let labels = fit.groups.labels(p);
        let coefficients = (0..p)
            .map(|j| CoefficientDoc {
                index: j,
                name: ctx.names[j].clone(),
                raw: raw[j],
                standardized: fit.beta[j],
                group: labels[j],
            })
            .collect();
        let groups = fit
            .groups
            .groups
            .iter()
            .enumerate()
            .map(|(g, grp)| GroupDoc {
                id: g + 1,
                value: grp.value,
                members: grp.members.clone(),
                names: grp.members.iter().map(|&j| ctx.names[j].clone()).collect(),
            })
            .collect();
        let horses = ctx.estimator == Method::Horses;
        Ok(FitDoc {
            estimator: ctx.estimator.name().to_string(),
            n: ctx.n,
            p,
            alpha: ctx.alpha,
            lambda: ctx.lambda,
            lambda1: horses.then(|| ctx.alpha * ctx.lambda),
            lambda2: horses.then(|| (1.0 - ctx.alpha) * ctx.lambda),
            d: horses.then_some(ctx.d),
            intercept,
            coefficients,
            groups,
            df: fit.df,
            objective: fit.objective,
            kkt_residual: horses.then_some(fit.kkt_residual),
            converged: fit.converged,
            iterations: fit.iterations,
            fusion_moves_accepted: fit.fusion_moves_accepted,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["term", "index", "raw", "standardized", "group"])?;
        out.write_record(["(intercept)", "", &self.intercept.to_string(), "", ""])?;
        for c in &self.coefficients {
            out.write_record([
                c.name.clone(),
                c.index.to_string(),
                c.raw.to_string(),
                c.standardized.to_string(),
                c.group.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn criterion_name(c: Criterion) -> &'static str {
    match c {
        Criterion::CV => "cv",
        Criterion::GCV => "gcv",
        Criterion::BIC => "bic",
        Criterion::ValidationPE => "validation",
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneDoc {
    pub criterion: String,
    pub estimator: String,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub best_alpha: f64,
    pub best_lambda: f64,
    pub best_index: (usize, usize),
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// `score_surface[a][l]`; `null` where the criterion is undefined.
    pub score_surface: Vec<Vec<Option<f64>>>,
    pub fold_assignment: Option<Vec<usize>>,
    pub fit: FitDoc,
}

impl TuneDoc {
    pub fn new(
        res: &TuningResult,
        grid: &TuningGrid,
        estimator: Method,
        folds: Option<usize>,
        fit: FitDoc,
    ) -> Self {
        TuneDoc {
            criterion: criterion_name(res.criterion).to_string(),
            estimator: estimator.name().to_string(),
            seed: folds.map(|_| res.seed),
            folds,
            best_alpha: res.best_alpha,
            best_lambda: res.best_lambda,
            best_index: res.best_index,
            alphas: grid.alphas.clone(),
            lambdas: grid.lambdas.clone(),
            score_surface: res
                .score_surface
                .iter()
                .map(|row| row.iter().map(|&v| finite(v)).collect())
                .collect(),
            fold_assignment: res.folds.clone(),
            fit,
        }
    }

    /// Long-format surface: `alpha,lambda,score,selected`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["alpha", "lambda", "score", "selected"])?;
        for (a, row) in self.score_surface.iter().enumerate() {
            for (l, s) in row.iter().enumerate() {
                let sel = (a, l) == self.best_index;
                out.write_record([
                    self.alphas[a].to_string(),
                    self.lambdas[l].to_string(),
                    s.map_or_else(|| "inf".to_string(), |v| v.to_string()),
                    u8::from(sel).to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    pub groups: Vec<usize>,
    pub converged: bool,
}

pub fn write_path_csv<W: Write>(points: &[PathPoint], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lambda", "coefficient_index", "value", "group_id"])?;
    for pt in points {
        for (j, (v, g)) in pt.coefficients.iter().zip(&pt.groups).enumerate() {
            out.write_record([
                pt.lambda.to_string(),
                j.to_string(),
                v.to_string(),
                g.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub model: u32,
    pub method: String,
    pub mse_median: f64,
    pub mse_p10: f64,
    pub mse_p90: f64,
    pub df_median: f64,
    pub df_p10: f64,
    pub df_p90: f64,
}

pub fn summary_docs(s: &StudySummary) -> Vec<SummaryDoc> {
    s.rows
        .iter()
        .map(|r| SummaryDoc {
            model: r.model_id,
            method: r.method.name().to_string(),
            mse_median: r.mse_median,
            mse_p10: r.mse_p10,
            mse_p90: r.mse_p90,
            df_median: r.df_median,
            df_p10: r.df_p10,
            df_p90: r.df_p90,
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(s: &StudySummary, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    for d in summary_docs(s) {
        out.serialize(d)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateDoc {
    pub model: u32,
    pub rep: usize,
    pub seed: u64,
    pub method: String,
    pub mse: Option<f64>,
    pub df: Option<usize>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

pub fn replicate_docs(results: &[ReplicateResult]) -> Vec<ReplicateDoc> {
    let mut out = Vec::new();
    for r in results {
        for (m, o) in &r.outcomes {
            let base = ReplicateDoc {
                model: r.model_id,
                rep: r.rep_index,
                seed: r.seed,
                method: m.name().to_string(),
                mse: None,
                df: None,
                alpha: None,
                lambda: None,
                converged: None,
                error: None,
            };
            out.push(match o {
                Ok(o) => ReplicateDoc {
                    mse: Some(o.mse),
                    df: Some(o.df),
                    alpha: Some(o.alpha),
                    lambda: Some(o.lambda),
                    converged: Some(o.converged),
                    ..base
                },
                Err(e) => ReplicateDoc {
                    error: Some(e.to_string()),
                    ..base
                },
            });
        }
    }
    out
}

pub fn write_replicates_csv<W: Write>(results: &[ReplicateResult], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    for d in replicate_docs(results) {
        out.serialize(d)?;
    }
    out.flush()?;
    Ok(())
}
