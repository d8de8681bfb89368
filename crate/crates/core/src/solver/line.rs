//! Exact minimisation of the one-dimensional restriction of the objective.
//!
//! Moving a set of `m` coefficients that share a value `x` (one coordinate for
//! a descent move, two for a fusion move) leaves
//!
//! ```text
//! h(x) = ½ q x² − r x + w0 |x| + w Σ_{v ∈ K} |x − v|
//! ```
//!
//! where `K` holds the values of all coefficients outside the moving set,
//! `w0 = m λ₁` and `w = m λ₂`. The derivative is linear between the sorted
//! breakpoints `{0} ∪ K`, with a constant offset fixed by the sign pattern
//! of the interval. Because `h` is convex its right derivative is monotone
//! over the breakpoints, so the interval holding the minimiser is found by
//! binary search and the stationary point inside it has the closed form
//! `(r − offset) / q`. When no interval holds a stationary point the minimum
//! sits on a breakpoint.

/// A breakpoint multiset is represented by the sorted values of *all*
/// coefficients minus a short exclusion list (the moving coordinates).
/// Extra positions in the search are harmless: `h` is differentiable there.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Line<'a> {
    pub q: f64,
    pub r: f64,
    pub w0: f64,
    pub w: f64,
    pub sorted: &'a [f64],
    /// `(value, multiplicity)` pairs removed from `sorted`.
    pub excluded: &'a [(f64, usize)],
}

/// Curvature at or below this is treated as zero (piecewise-linear `h`).
const FLAT_Q: f64 = 1e-13;

impl<'a> Line<'a> {
    fn total(&self) -> usize {
        self.sorted.len() - self.excluded.iter().map(|e| e.1).sum::<usize>()
    }

    fn count_le(&self, x: f64) -> usize {
        let all = self.sorted.partition_point(|&v| v <= x);
        all - self
            .excluded
            .iter()
            .filter(|e| e.0 <= x)
            .map(|e| e.1)
            .sum::<usize>()
    }

    fn count_lt(&self, x: f64) -> usize {
        let all = self.sorted.partition_point(|&v| v < x);
        all - self
            .excluded
            .iter()
            .filter(|e| e.0 < x)
            .map(|e| e.1)
            .sum::<usize>()
    }

    /// Right derivative of `h` at `x`.
    pub fn d_plus(&self, x: f64) -> f64 {
        let s0 = if x >= 0.0 { 1.0 } else { -1.0 };
        let bal = 2.0 * self.count_le(x) as f64 - self.total() as f64;
        self.q * x - self.r + self.w0 * s0 + self.w * bal
    }

    /// Left derivative of `h` at `x`.
    pub fn d_minus(&self, x: f64) -> f64 {
        let s0 = if x > 0.0 { 1.0 } else { -1.0 };
        let bal = 2.0 * self.count_lt(x) as f64 - self.total() as f64;
        self.q * x - self.r + self.w0 * s0 + self.w * bal
    }

    /// `h(x)`, evaluated term by term.
    pub fn value(&self, x: f64) -> f64 {
        let mut fuse: f64 = self.sorted.iter().map(|v| (x - v).abs()).sum();
        for &(v, c) in self.excluded {
            fuse -= c as f64 * (x - v).abs();
        }
        0.5 * self.q * x * x - self.r * x + self.w0 * x.abs() + self.w * fuse
    }

    /// Number of candidate positions: every sorted value plus the zero kink.
    fn n_positions(&self) -> usize {
        self.sorted.len() + 1
    }

    fn zero_slot(&self) -> usize {
        self.sorted.partition_point(|&v| v < 0.0)
    }

    /// Ascending merged sequence of `sorted` with 0 inserted.
    fn position(&self, i: usize, zero_slot: usize) -> f64 {
        if i < zero_slot {
            self.sorted[i]
        } else if i == zero_slot {
            0.0
        } else {
            self.sorted[i - 1]
        }
    }

    /// Minimiser of `h`, or `None` when `h` is unbounded below (only possible
    /// with zero curvature).
    pub fn minimize(&self) -> Option<f64> {
        let m = self.n_positions();
        let z = self.zero_slot();
        // first position whose right derivative is nonnegative
        let (mut lo, mut hi) = (0usize, m);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.d_plus(self.position(mid, z)) < 0.0 {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let flat = self.q <= FLAT_Q;
        if lo == m {
            // stationary point to the right of every breakpoint
            if flat {
                return None;
            }
            let c = self.position(m - 1, z);
            let offset = self.d_plus(c) - self.q * c + self.r;
            return Some(((self.r - offset) / self.q).max(c));
        }
        let c = self.position(lo, z);
        let dm = self.d_minus(c);
        if dm <= 0.0 {
            if flat && self.d_plus(c) == 0.0 && c < 0.0 {
                // h is constant on [c, next breakpoint]; prefer the end nearer 0
                let next = (lo + 1..m)
                    .map(|i| self.position(i, z))
                    .find(|&v| v > c)
                    .unwrap_or(0.0);
                return Some(next.min(0.0));
            }
            return Some(c);
        }
        if flat {
            return Some(c);
        }
        let offset = dm - self.q * c + self.r;
        let mut x = (self.r - offset) / self.q;
        if x > c {
            x = c;
        }
        if lo > 0 {
            let left = self.position(lo - 1, z);
            if x < left {
                x = left;
            }
        }
        Some(x)
    }
}
