//! Incremental solver state.
//!
//! The workspace keeps `c = Xᵀ(y − Xβ)` and a sorted copy of `β` up to date
//! so that every move costs `O(p)` plus a binary search.

use alloc::vec;
use alloc::vec::Vec;

use super::line::Line;
use super::FusionPairStrategy;
use crate::data::Dataset;
use crate::linalg::{dot, Matrix};
use crate::penalty::PenaltySpec;

/// Sufficient statistics of a dataset: `XᵀX`, `Xᵀy` and `yᵀy`.
#[derive(Debug, Clone)]
pub struct Problem {
    p: usize,
    gram: Matrix,
    xty: Vec<f64>,
    yty: f64,
}

impl Problem {
    pub fn new(data: &Dataset) -> Self {
        Problem {
            p: data.p(),
            gram: data.x().gram(),
            xty: data.x().t_mul_vec(data.y()),
            yty: dot(data.y(), data.y()),
        }
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    #[inline]
    pub fn xty(&self) -> &[f64] {
        &self.xty
    }

    #[inline]
    pub fn yty(&self) -> f64 {
        self.yty
    }

    #[inline]
    fn g(&self, i: usize, j: usize) -> f64 {
        self.gram.get(i, j)
    }
}

/// Σ_{j<k} |β_j − β_k| for ascending `sorted`.
pub(crate) fn pairwise_sum_sorted(sorted: &[f64]) -> f64 {
    let p = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| (2.0 * i as f64 - p + 1.0) * v)
        .sum()
}

pub(crate) struct Workspace<'a> {
    prob: &'a Problem,
    l1: f64,
    l2: f64,
    pub beta: Vec<f64>,
    corr: Vec<f64>,
    sorted: Vec<f64>,
    mark: Vec<bool>,
}

impl<'a> Workspace<'a> {
    pub fn new(prob: &'a Problem, penalty: &PenaltySpec, init: &[f64]) -> Self {
        let beta = init.to_vec();
        let gb = prob.gram.mul_vec(&beta);
        let corr = prob.xty.iter().zip(&gb).map(|(a, b)| a - b).collect();
        let mut sorted = beta.clone();
        sorted.sort_by(f64::total_cmp);
        Workspace {
            prob,
            l1: penalty.lambda1(),
            l2: penalty.lambda2(),
            beta,
            corr,
            sorted,
            mark: vec![false; prob.p],
        }
    }

    /// Objective from the sufficient statistics. Subject to cancellation
    /// when the fit is near perfect; use [`super::objective`] for reporting.
    pub fn objective(&self) -> f64 {
        let loss = 0.5 * self.prob.yty
            - 0.5
                * self
                    .beta
                    .iter()
                    .zip(self.prob.xty.iter().zip(&self.corr))
                    .map(|(b, (a, c))| b * (a + c))
                    .sum::<f64>();
        let l1: f64 = self.beta.iter().map(|b| b.abs()).sum();
        loss.max(0.0) + self.l1 * l1 + self.l2 * pairwise_sum_sorted(&self.sorted)
    }

    /// Recomputes the running correlations from scratch.
    pub fn resync(&mut self) {
        let gb = self.prob.gram.mul_vec(&self.beta);
        for ((c, a), g) in self.corr.iter_mut().zip(&self.prob.xty).zip(&gb) {
            *c = a - g;
        }
    }

    fn set(&mut self, k: usize, value: f64) {
        let old = self.beta[k];
        if old == value {
            return;
        }
        let delta = value - old;
        for (c, g) in self.corr.iter_mut().zip(self.prob.gram.col(k)) {
            *c -= g * delta;
        }
        let at = self.sorted.partition_point(|&v| v < old);
        debug_assert_eq!(self.sorted[at], old);
        self.sorted.remove(at);
        let to = self.sorted.partition_point(|&v| v < value);
        self.sorted.insert(to, value);
        self.beta[k] = value;
    }

    /// Exact change of the objective if the coordinates in `idx` (distinct)
    /// took the values `new`.
    fn move_delta(&mut self, idx: &[usize], new: &[f64]) -> f64 {
        let mut loss = 0.0;
        for (a, (&i, &ni)) in idx.iter().zip(new).enumerate() {
            let di = ni - self.beta[i];
            loss -= di * self.corr[i];
            for (&j, &nj) in idx.iter().zip(new).skip(a) {
                let dj = nj - self.beta[j];
                let w = if i == j { 0.5 } else { 1.0 };
                loss += w * di * dj * self.prob.g(i, j);
            }
        }
        for &i in idx {
            self.mark[i] = true;
        }
        let mut l1 = 0.0;
        let mut fuse = 0.0;
        for (a, (&i, &ni)) in idx.iter().zip(new).enumerate() {
            let oi = self.beta[i];
            l1 += ni.abs() - oi.abs();
            for (k, &bk) in self.beta.iter().enumerate() {
                if !self.mark[k] {
                    fuse += (ni - bk).abs() - (oi - bk).abs();
                }
            }
            for (&j, &nj) in idx.iter().zip(new).skip(a + 1) {
                fuse += (ni - nj).abs() - (oi - self.beta[j]).abs();
            }
        }
        for &i in idx {
            self.mark[i] = false;
        }
        loss + self.l1 * l1 + self.l2 * fuse
    }

    fn apply(&mut self, idx: &[usize], new: &[f64]) {
        for (&i, &v) in idx.iter().zip(new) {
            self.set(i, v);
        }
    }

    /// The one-dimensional problem for coordinate `k`.
    pub fn coordinate_minimizer(&self, k: usize) -> Option<f64> {
        let b = self.beta[k];
        let q = self.prob.g(k, k);
        let excl = [(b, 1)];
        Line {
            q,
            r: self.corr[k] + q * b,
            w0: self.l1,
            w: self.l2,
            sorted: &self.sorted,
            excluded: &excl,
        }
        .minimize()
    }

    /// Exact coordinate minimisation; returns the objective decrease (0 when
    /// the coordinate does not move).
    pub fn descent(&mut self, k: usize) -> f64 {
        let Some(x) = self.coordinate_minimizer(k) else {
            return 0.0;
        };
        if x == self.beta[k] {
            return 0.0;
        }
        let delta = self.move_delta(&[k], &[x]);
        if delta < 0.0 {
            self.set(k, x);
            -delta
        } else {
            0.0
        }
    }

    /// Best `γ` for the move `β_k = β_l = γ`.
    pub fn pair_minimizer(&self, k: usize, l: usize) -> Option<f64> {
        let (bk, bl) = (self.beta[k], self.beta[l]);
        let (gkk, gll, gkl) = (self.prob.g(k, k), self.prob.g(l, l), self.prob.g(k, l));
        let excl = [(bk, 1), (bl, 1)];
        Line {
            q: gkk + gll + 2.0 * gkl,
            r: self.corr[k] + self.corr[l] + bk * (gkk + gkl) + bl * (gkl + gll),
            w0: 2.0 * self.l1,
            w: 2.0 * self.l2,
            sorted: &self.sorted,
            excluded: &excl,
        }
        .minimize()
    }

    fn candidate_pairs(&self, strategy: FusionPairStrategy) -> Vec<(usize, usize)> {
        let p = self.prob.p;
        match strategy {
            FusionPairStrategy::AllPairs => (0..p)
                .flat_map(|k| (k + 1..p).map(move |l| (k, l)))
                .collect(),
            FusionPairStrategy::SortedAdjacent => {
                let mut order: Vec<usize> = (0..p).collect();
                order.sort_by(|&a, &b| self.beta[a].total_cmp(&self.beta[b]).then(a.cmp(&b)));
                order
                    .windows(2)
                    .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
                    .collect()
            }
        }
    }

    /// Scans candidate pairs and applies the single best strictly improving
    /// fusion move. Returns the decrease if a move was accepted.
    pub fn fusion(&mut self, strategy: FusionPairStrategy) -> Option<f64> {
        let mut best: Option<(f64, usize, usize, f64)> = None;
        for (k, l) in self.candidate_pairs(strategy) {
            let Some(g) = self.pair_minimizer(k, l) else {
                continue;
            };
            if g == self.beta[k] && g == self.beta[l] {
                continue;
            }
            let delta = self.move_delta(&[k, l], &[g, g]);
            if delta < 0.0 && best.is_none_or(|b| delta < b.0) {
                best = Some((delta, k, l, g));
            }
        }
        let (delta, k, l, g) = best?;
        self.apply(&[k, l], &[g, g]);
        Some(-delta)
    }

    /// Indices ordered by value, and the runs of exactly equal values in
    /// that order as `(start, end)` half-open ranges.
    fn tie_runs(&self) -> (Vec<usize>, Vec<(usize, usize)>) {
        let p = self.prob.p;
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| self.beta[a].total_cmp(&self.beta[b]).then(a.cmp(&b)));
        let mut runs = Vec::new();
        let mut s = 0;
        for e in 1..=p {
            if e == p || self.beta[order[e]] != self.beta[order[s]] {
                runs.push((s, e));
                s = e;
            }
        }
        (order, runs)
    }

    /// Moves a subset of an equal-value group (or of the zero set) to a new
    /// common value. For each group and direction the steepest subset is a
    /// prefix of the members sorted by their directional derivative, so
    /// checking these prefixes certifies optimality when none descends.
    pub fn group_step(&mut self) -> Option<f64> {
        let p = self.prob.p;
        let (order, runs) = self.tie_runs();
        let mut best: Option<(f64, Vec<usize>, f64)> = None;
        let mut scored: Vec<(f64, usize)> = Vec::new();
        for &(s, e) in &runs {
            let v = self.beta[order[s]];
            let size = e - s;
            let (below, above) = (s as f64, (p - e) as f64);
            for sigma in [1.0f64, -1.0] {
                let l1_dir = if v != 0.0 { sigma * v.signum() } else { 1.0 };
                let shared = self.l1 * l1_dir + sigma * self.l2 * (below - above);
                scored.clear();
                scored.extend(order[s..e].iter().map(|&j| (-sigma * self.corr[j] + shared, j)));
                scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut prefix = 0.0;
                let mut best_f = 0.0;
                let mut best_s = 0;
                for (cnt, &(a, _)) in scored.iter().enumerate() {
                    prefix += a;
                    let m = (cnt + 1) as f64;
                    let f = prefix + self.l2 * m * (size as f64 - m);
                    if f < best_f {
                        best_f = f;
                        best_s = cnt + 1;
                    }
                }
                if best_s == 0 {
                    continue;
                }
                let subset: Vec<usize> = scored[..best_s].iter().map(|x| x.1).collect();
                let Some(g) = self.subset_minimizer(&subset, v) else {
                    continue;
                };
                if g == v {
                    continue;
                }
                let new = vec![g; subset.len()];
                let delta = self.move_delta(&subset, &new);
                if delta < 0.0 && best.as_ref().is_none_or(|b| delta < b.0) {
                    best = Some((delta, subset, g));
                }
            }
        }
        let (delta, subset, g) = best?;
        let new = vec![g; subset.len()];
        self.apply(&subset, &new);
        Some(-delta)
    }

    /// Best common value for `subset`, all of whose members currently equal
    /// `v`.
    fn subset_minimizer(&self, subset: &[usize], v: f64) -> Option<f64> {
        let mut q = 0.0;
        let mut csum = 0.0;
        for &i in subset {
            csum += self.corr[i];
            for &j in subset {
                q += self.prob.g(i, j);
            }
        }
        let m = subset.len();
        let excl = [(v, m)];
        Line {
            q,
            r: csum + v * q,
            w0: m as f64 * self.l1,
            w: m as f64 * self.l2,
            sorted: &self.sorted,
            excluded: &excl,
        }
        .minimize()
    }

    /// Active-set step: with the current sign and ordering pattern frozen the
    /// objective is a quadratic in the distinct nonzero group values. Moves
    /// toward its minimiser, stopping where two groups (or a group and zero)
    /// meet, in which case they are snapped together.
    pub fn polish(&mut self) -> Option<f64> {
        let (order, runs) = self.tie_runs();
        // runs in ascending order; the zero run (if any) stays fixed
        let vals: Vec<f64> = runs.iter().map(|&(s, _)| self.beta[order[s]]).collect();
        let free: Vec<usize> = (0..runs.len()).filter(|&g| vals[g] != 0.0).collect();
        if free.is_empty() {
            return None;
        }
        let m = free.len();
        let sizes: Vec<f64> = runs.iter().map(|&(s, e)| (e - s) as f64).collect();
        let total: f64 = sizes.iter().sum();
        let mut h = Matrix::zeros(m, m);
        let mut rhs = vec![0.0; m];
        let mut below = 0.0;
        let mut gi = 0;
        for (g, &(s, e)) in runs.iter().enumerate() {
            if vals[g] == 0.0 {
                below += sizes[g];
                continue;
            }
            let above = total - below - sizes[g];
            let members = &order[s..e];
            let xty: f64 = members.iter().map(|&j| self.prob.xty[j]).sum();
            rhs[gi] = xty - sizes[g] * (self.l1 * vals[g].signum() + self.l2 * (below - above));
            for (hj, &g2) in free.iter().enumerate() {
                let (s2, e2) = runs[g2];
                let mut acc = 0.0;
                for &i in members {
                    for &j in &order[s2..e2] {
                        acc += self.prob.g(i, j);
                    }
                }
                h.set(gi, hj, acc);
            }
            below += sizes[g];
            gi += 1;
        }
        let target = h.solve_spd(&rhs).ok()?;
        let dir: Vec<f64> = free
            .iter()
            .zip(&target)
            .map(|(&g, t)| t - vals[g])
            .collect();
        if dir.iter().all(|&d| d == 0.0) {
            return None;
        }

        // Ordered chain of run values with a virtual zero so signs are kept.
        let mut chain: Vec<(f64, f64, Option<usize>)> = Vec::with_capacity(runs.len() + 1);
        let mut fi = 0;
        let has_zero = vals.contains(&0.0);
        for (g, &val) in vals.iter().enumerate() {
            if !has_zero && val > 0.0 && chain.last().is_none_or(|c| c.0 < 0.0) {
                chain.push((0.0, 0.0, None));
            }
            if val == 0.0 {
                chain.push((0.0, 0.0, None));
            } else {
                chain.push((val, dir[fi], Some(g)));
                fi += 1;
            }
        }
        if !has_zero && chain.last().is_some_and(|c| c.0 < 0.0) {
            chain.push((0.0, 0.0, None));
        }
        let mut step = 1.0;
        let mut limit: Option<usize> = None;
        for (a, w) in chain.windows(2).enumerate() {
            let closing = w[0].1 - w[1].1;
            if closing > 0.0 {
                let t = (w[1].0 - w[0].0) / closing;
                if t < step {
                    step = t;
                    limit = Some(a);
                }
            }
        }
        if !(step > 0.0) {
            return None;
        }
        let mut new_vals = vals.clone();
        for &(v, d, g) in &chain {
            if let Some(g) = g {
                new_vals[g] = v + step * d;
            }
        }
        if let Some(a) = limit {
            // snap the meeting pair so the tie is exact
            let (lhs, rhs_) = (chain[a].2, chain[a + 1].2);
            match (lhs, rhs_) {
                (Some(g1), Some(g2)) => {
                    let mid = 0.5 * (new_vals[g1] + new_vals[g2]);
                    new_vals[g1] = mid;
                    new_vals[g2] = mid;
                }
                (Some(g), None) | (None, Some(g)) => new_vals[g] = 0.0,
                (None, None) => {}
            }
        }
        let mut idx = Vec::new();
        let mut new = Vec::new();
        for (g, &(s, e)) in runs.iter().enumerate() {
            if new_vals[g] != vals[g] {
                for &j in &order[s..e] {
                    idx.push(j);
                    new.push(new_vals[g]);
                }
            }
        }
        if idx.is_empty() {
            return None;
        }
        let before = self.objective();
        let saved: Vec<f64> = idx.iter().map(|&j| self.beta[j]).collect();
        self.apply(&idx, &new);
        self.resync();
        let after = self.objective();
        if after < before {
            Some(before - after)
        } else {
            self.apply(&idx, &saved);
            self.resync();
            None
        }
    }

    /// Largest distance from zero to the coordinate-wise subdifferential
    /// interval, using exact correlations computed from `corr`.
    pub fn kkt_residual(&self, corr: &[f64]) -> f64 {
        kkt_from_corr(&self.beta, &self.sorted, corr, self.l1, self.l2)
    }

}

pub(crate) fn kkt_from_corr(beta: &[f64], sorted: &[f64], corr: &[f64], l1: f64, l2: f64) -> f64 {
    let p = beta.len();
    let mut worst: f64 = 0.0;
    for (k, &v) in beta.iter().enumerate() {
        let lt = sorted.partition_point(|&s| s < v);
        let le = sorted.partition_point(|&s| s <= v);
        let tied = (le - lt - 1) as f64;
        let above = (p - le) as f64;
        let below = lt as f64;
        let mut fixed = l2 * (below - above);
        let mut free = l2 * tied;
        if v != 0.0 {
            fixed += l1 * v.signum();
        } else {
            free += l1;
        }
        let g = -corr[k] + fixed;
        let dist = if g - free > 0.0 {
            g - free
        } else if g + free < 0.0 {
            -(g + free)
        } else {
            0.0
        };
        worst = worst.max(dist);
    }
    worst
}
