//! Confidence-rated decision stumps over per-breakpoint scores.

use serde::{Deserialize, Serialize};

use crate::breakpoints::Breakpoints;
use crate::data::{feature_count, Feature, LabeledExample};
use crate::error::{CdeError, Result};

/// One weak hypothesis: `above[j]` when the feature is known and at least the
/// threshold, `below[j]` when known and smaller, `unknown[j]` otherwise.
/// Index `j` runs over the interior breakpoints `b_1..=b_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub above: Vec<f64>,
    pub below: Vec<f64>,
    pub unknown: Vec<f64>,
}

impl Stump {
    pub fn zero(k: usize) -> Self {
        Self {
            feature: 0,
            threshold: 0.0,
            above: vec![0.0; k],
            below: vec![0.0; k],
            unknown: vec![0.0; k],
        }
    }

    /// The score vector this stump emits for `x`.
    pub fn block(&self, x: &[Feature]) -> &[f64] {
        match x[self.feature] {
            None => &self.unknown,
            Some(v) if v >= self.threshold => &self.above,
            Some(_) => &self.below,
        }
    }
}

/// A chosen stump together with its weighted exponential objective.
#[derive(Debug, Clone)]
pub struct StumpFit {
    pub stump: Stump,
    pub objective: f64,
}

/// Smoothed block value `a = ½ ln((u + ε)/(v + ε))`.
pub fn block_value(u: f64, v: f64, eps: f64) -> f64 {
    0.5 * ((u + eps) / (v + eps)).ln()
}

/// `u e^{-a} + v e^{a}` evaluated at the smoothed block value.
pub fn block_loss(u: f64, v: f64, eps: f64) -> f64 {
    if u == 0.0 && v == 0.0 {
        return 0.0;
    }
    let pu = u + eps;
    let pv = v + eps;
    (u * pv + v * pu) / (pu * pv).sqrt()
}

/// Per-example training quantities shared across rounds.
pub(crate) struct Searcher {
    k: usize,
    bins: Vec<usize>,
    /// Per feature, known values ascending with their example index.
    sorted: Vec<Vec<(f64, u32)>>,
    unknown: Vec<Vec<u32>>,
    max_thresholds: Option<usize>,
}

impl Searcher {
    pub(crate) fn new(
        data: &[LabeledExample],
        breakpoints: &Breakpoints,
        max_thresholds: Option<usize>,
    ) -> Result<Self> {
        let nf = feature_count(data)?;
        let k = breakpoints.k();
        let bins = data.iter().map(|ex| breakpoints.bin_of(ex.label)).collect();
        let mut sorted = vec![Vec::new(); nf];
        let mut unknown = vec![Vec::new(); nf];
        for (i, ex) in data.iter().enumerate() {
            for (f, value) in ex.features.iter().enumerate() {
                match value {
                    Some(v) if v.is_finite() => sorted[f].push((*v, i as u32)),
                    Some(_) => {
                        return Err(CdeError::InvalidParameter(format!(
                            "example {i} feature {f} is not finite"
                        )))
                    }
                    None => unknown[f].push(i as u32),
                }
            }
        }
        for col in &mut sorted {
            col.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        Ok(Self {
            k,
            bins,
            sorted,
            unknown,
            max_thresholds,
        })
    }

    pub(crate) fn bins(&self) -> &[usize] {
        &self.bins
    }

    fn add(&self, i: usize, weights: &[f64], u: &mut [f64], v: &mut [f64]) {
        let k = self.k;
        let row = &weights[i * k..(i + 1) * k];
        let bin = self.bins[i].min(k);
        for j in 0..bin {
            u[j] += row[j];
        }
        for j in bin..k {
            v[j] += row[j];
        }
    }

    /// Finds the stump minimizing `sum_{i,j} W(i,j) exp(-s_j(y_i) h(x_i, j))`.
    /// `weights` is row-major `m x k`.
    pub(crate) fn best(&self, weights: &[f64], eps: f64) -> StumpFit {
        let k = self.k;
        let m = self.bins.len();
        let mut tot_u = vec![0.0; k];
        let mut tot_v = vec![0.0; k];
        for i in 0..m {
            self.add(i, weights, &mut tot_u, &mut tot_v);
        }

        let mut best: Option<(usize, f64, f64, bool)> = None;
        let mut u_c = vec![0.0; k];
        let mut v_c = vec![0.0; k];
        let mut u_k = vec![0.0; k];
        let mut v_k = vec![0.0; k];
        let mut u_b = vec![0.0; k];
        let mut v_b = vec![0.0; k];

        for f in 0..self.sorted.len() {
            u_c.iter_mut().for_each(|x| *x = 0.0);
            v_c.iter_mut().for_each(|x| *x = 0.0);
            for &i in &self.unknown[f] {
                self.add(i as usize, weights, &mut u_c, &mut v_c);
            }
            for j in 0..k {
                u_k[j] = (tot_u[j] - u_c[j]).max(0.0);
                v_k[j] = (tot_v[j] - v_c[j]).max(0.0);
            }
            let loss_c: f64 = (0..k).map(|j| block_loss(u_c[j], v_c[j], eps)).sum();
            let col = &self.sorted[f];
            if col.is_empty() {
                consider(&mut best, f, 0.0, loss_c, true);
                continue;
            }

            // Threshold at the minimum: every known example is above.
            let loss_all: f64 = (0..k).map(|j| block_loss(u_k[j], v_k[j], eps)).sum();
            consider(&mut best, f, col[0].0, loss_all + loss_c, true);

            let distinct = count_distinct(col);
            let stride = match self.max_thresholds {
                Some(cap) if cap > 0 && distinct - 1 > cap => Some((distinct - 1, cap)),
                _ => None,
            };

            u_b.iter_mut().for_each(|x| *x = 0.0);
            v_b.iter_mut().for_each(|x| *x = 0.0);
            let mut pos = 0;
            let mut boundary = 0;
            while pos < col.len() {
                let value = col[pos].0;
                while pos < col.len() && col[pos].0 == value {
                    self.add(col[pos].1 as usize, weights, &mut u_b, &mut v_b);
                    pos += 1;
                }
                if pos == col.len() {
                    break;
                }
                boundary += 1;
                if let Some((gaps, cap)) = stride {
                    if !selected(boundary, gaps, cap) {
                        continue;
                    }
                }
                let threshold = 0.5 * (value + col[pos].0);
                let mut loss = loss_c;
                for j in 0..k {
                    let ua = (u_k[j] - u_b[j]).max(0.0);
                    let va = (v_k[j] - v_b[j]).max(0.0);
                    loss += block_loss(ua, va, eps) + block_loss(u_b[j], v_b[j], eps);
                }
                consider(&mut best, f, threshold, loss, false);
            }
        }

        let (feature, threshold, objective, b_empty) =
            best.expect("at least one feature is searched");
        let stump = self.materialize(weights, eps, feature, threshold, b_empty);
        StumpFit { stump, objective }
    }

    fn materialize(
        &self,
        weights: &[f64],
        eps: f64,
        feature: usize,
        threshold: f64,
        b_empty: bool,
    ) -> Stump {
        let k = self.k;
        let mut sums = [vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]];
        let [u_a, v_a, u_b, v_b] = &mut sums;
        for &(value, i) in &self.sorted[feature] {
            if value >= threshold {
                self.add(i as usize, weights, u_a, v_a);
            } else {
                self.add(i as usize, weights, u_b, v_b);
            }
        }
        let mut u_c = vec![0.0; k];
        let mut v_c = vec![0.0; k];
        for &i in &self.unknown[feature] {
            self.add(i as usize, weights, &mut u_c, &mut v_c);
        }
        let above: Vec<f64> = (0..k).map(|j| block_value(u_a[j], v_a[j], eps)).collect();
        let below = if b_empty {
            above.clone()
        } else {
            (0..k).map(|j| block_value(u_b[j], v_b[j], eps)).collect()
        };
        let unknown = (0..k).map(|j| block_value(u_c[j], v_c[j], eps)).collect();
        Stump {
            feature,
            threshold,
            above,
            below,
            unknown,
        }
    }
}

fn consider(
    best: &mut Option<(usize, f64, f64, bool)>,
    feature: usize,
    threshold: f64,
    loss: f64,
    b_empty: bool,
) {
    match best {
        Some((_, _, l, _)) if loss >= *l => {}
        _ => *best = Some((feature, threshold, loss, b_empty)),
    }
}

fn count_distinct(col: &[(f64, u32)]) -> usize {
    1 + col.windows(2).filter(|w| w[0].0 != w[1].0).count()
}

/// Whether boundary `b` (1-based, out of `gaps`) is one of `cap` evenly
/// spread quantile thresholds.
fn selected(b: usize, gaps: usize, cap: usize) -> bool {
    (b * (cap + 1)) / (gaps + 1) != ((b - 1) * (cap + 1)) / (gaps + 1)
}

/// Standalone stump search for one set of weights (`weights[i][j]`).
pub fn best_stump(
    weights: &[Vec<f64>],
    data: &[LabeledExample],
    breakpoints: &Breakpoints,
    eps: f64,
) -> Result<StumpFit> {
    if weights.len() != data.len() {
        return Err(CdeError::InvalidParameter(
            "one weight row per example required".into(),
        ));
    }
    let k = breakpoints.k();
    if weights.iter().any(|row| row.len() != k) {
        return Err(CdeError::InvalidParameter(format!(
            "weight rows must have {k} entries"
        )));
    }
    let searcher = Searcher::new(data, breakpoints, None)?;
    let flat: Vec<f64> = weights.iter().flatten().copied().collect();
    Ok(searcher.best(&flat, eps))
}
