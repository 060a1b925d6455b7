//! Entropy-maximizing label bins.
//!
//! The label range `[min, max]` is cut at `k` interior breakpoints drawn from
//! the distinct observed labels. The placement minimizes `sum_j q_j ln q_j`
//! over the `k + 1` bin frequencies, which is the same as maximizing the
//! entropy of the bin histogram.

use serde::{Deserialize, Serialize};

use crate::error::{CdeError, Result};

/// `b_0 < b_1 < ... < b_k <= b_{k+1}`, stored as one vector of length `k + 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakpoints {
    points: Vec<f64>,
    degenerate: bool,
}

impl Breakpoints {
    /// Builds breakpoints from an explicit list `b_0..=b_{k+1}`.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(CdeError::InvalidParameter(
                "need at least b_0 and b_{k+1}".into(),
            ));
        }
        let k = points.len() - 2;
        let strict = points[..=k].windows(2).all(|w| w[0] < w[1]);
        if !strict || points[k] > points[k + 1] {
            return Err(CdeError::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            points,
            degenerate: false,
        })
    }

    fn point_mass(value: f64) -> Self {
        Self {
            points: vec![value, value],
            degenerate: true,
        }
    }

    /// Number of interior breakpoints.
    pub fn k(&self) -> usize {
        self.points.len() - 2
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn get(&self, j: usize) -> f64 {
        self.points[j]
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// True when every training label was identical.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Index of the bin holding `y`: the number of interior breakpoints
    /// `b_j <= y`. Values outside the range clamp to the end bins.
    pub fn bin_of(&self, y: f64) -> usize {
        let interior = &self.points[1..self.points.len() - 1];
        interior.partition_point(|&b| b <= y)
    }

    /// Fraction of `labels` falling in each of the `k + 1` bins.
    pub fn bin_fractions(&self, labels: &[f64]) -> Vec<f64> {
        let mut counts = vec![0usize; self.k() + 1];
        for &y in labels {
            counts[self.bin_of(y)] += 1;
        }
        let m = labels.len() as f64;
        counts.into_iter().map(|c| c as f64 / m).collect()
    }
}

/// `sum q ln q` with `0 ln 0 = 0`.
pub fn neg_entropy(fractions: &[f64]) -> f64 {
    fractions
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| q * q.ln())
        .sum()
}

/// Chooses `k` interior breakpoints for `labels`.
///
/// With fewer than `k + 1` distinct values every distinct value above the
/// minimum becomes a breakpoint and the returned `k()` is smaller than asked.
/// All-equal labels give a degenerate point-mass range.
pub fn compute_breakpoints(labels: &[f64], k: usize) -> Result<Breakpoints> {
    if labels.is_empty() {
        return Err(CdeError::EmptyDataset);
    }
    if k == 0 {
        return Err(CdeError::InvalidParameter("k must be at least 1".into()));
    }
    if labels.iter().any(|y| !y.is_finite()) {
        return Err(CdeError::InvalidParameter("labels must be finite".into()));
    }
    let mut sorted = labels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for y in sorted {
        if values.last() == Some(&y) {
            *counts.last_mut().unwrap() += 1;
        } else {
            values.push(y);
            counts.push(1);
        }
    }
    let d = values.len();
    if d == 1 {
        return Ok(Breakpoints::point_mass(values[0]));
    }
    let lo = values[0];
    let hi = values[d - 1];
    if d < k + 1 {
        let mut points = values.clone();
        points.push(hi);
        return Ok(Breakpoints {
            points,
            degenerate: false,
        });
    }

    let starts = optimal_partition(&counts, k + 1);
    let mut points = Vec::with_capacity(k + 2);
    points.push(lo);
    points.extend(starts[1..].iter().map(|&s| values[s]));
    points.push(hi);
    Ok(Breakpoints {
        points,
        degenerate: false,
    })
}

/// Splits the count sequence into `groups` contiguous nonempty groups
/// minimizing `sum phi(group total / m)` with `phi(q) = q ln q`; returns each
/// group's start index.
///
/// `phi` is convex, so the interval cost satisfies the quadrangle inequality
/// and the optimal split point is monotone in the right end. That lets each
/// layer be filled by divide and conquer in `O(d log d)` instead of `O(d^2)`.
fn optimal_partition(counts: &[usize], groups: usize) -> Vec<usize> {
    let d = counts.len();
    let m: usize = counts.iter().sum();
    let mut prefix = vec![0usize; d + 1];
    for i in 0..d {
        prefix[i + 1] = prefix[i] + counts[i];
    }
    let inv_m = 1.0 / m as f64;
    let cost = |l: usize, r: usize| {
        let q = (prefix[r] - prefix[l]) as f64 * inv_m;
        if q > 0.0 {
            q * q.ln()
        } else {
            0.0
        }
    };

    // dp[g][r]: best cost of covering the first r values with g + 1 groups.
    let mut dp = vec![vec![f64::INFINITY; d + 1]; groups];
    let mut arg = vec![vec![0usize; d + 1]; groups];
    for r in 1..=d {
        dp[0][r] = cost(0, r);
    }
    for g in 1..groups {
        let (prev, cur) = dp.split_at_mut(g);
        let prev = &prev[g - 1];
        let cur = &mut cur[0];
        let arg_g = &mut arg[g];
        // r ranges over [g + 1, d]; split l over [g, r - 1].
        fill_layer(g + 1, d, g, d - 1, prev, cur, arg_g, &cost);
    }

    let mut starts = vec![0usize; groups];
    let mut r = d;
    for g in (1..groups).rev() {
        let l = arg[g][r];
        starts[g] = l;
        r = l;
    }
    starts
}

#[allow(clippy::too_many_arguments)]
fn fill_layer<F: Fn(usize, usize) -> f64>(
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
    prev: &[f64],
    cur: &mut [f64],
    arg: &mut [usize],
    cost: &F,
) {
    if lo > hi {
        return;
    }
    let mid = (lo + hi) / 2;
    let mut best = f64::INFINITY;
    let mut best_l = opt_lo;
    let upper = opt_hi.min(mid - 1);
    for l in opt_lo..=upper {
        let v = prev[l] + cost(l, mid);
        if v < best {
            best = v;
            best_l = l;
        }
    }
    cur[mid] = best;
    arg[mid] = best_l;
    if mid > lo {
        fill_layer(lo, mid - 1, opt_lo, best_l, prev, cur, arg, cost);
    }
    fill_layer(mid + 1, hi, best_l, opt_hi, prev, cur, arg, cost);
}
