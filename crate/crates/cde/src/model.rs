//! Boosted conditional density model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::breakpoints::{compute_breakpoints, Breakpoints};
use crate::data::{feature_count, Feature, LabeledExample};
use crate::error::{CdeError, Result};
use crate::stump::{Searcher, Stump};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Interior breakpoints requested.
    pub k: usize,
    /// Boosting rounds.
    pub rounds: usize,
    /// Block-value smoothing; `None` means `1/(2m)`.
    pub smoothing: Option<f64>,
    /// Evaluate at most this many thresholds per feature, spread over
    /// quantiles. `None` searches every midpoint.
    pub max_thresholds: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 50,
            rounds: 300,
            smoothing: None,
            max_thresholds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdeModel {
    pub version: u32,
    pub num_features: usize,
    pub breakpoints: Breakpoints,
    pub stumps: Vec<Stump>,
}

/// Survival probabilities `p_j` = P(y >= b_j) for `j = 0..=k+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinProbabilities {
    pub p: Vec<f64>,
}

impl BinProbabilities {
    /// Probability of bin `j`, i.e. `p_j - p_{j+1}`.
    pub fn mass(&self, j: usize) -> f64 {
        self.p[j] - self.p[j + 1]
    }

    pub fn bins(&self) -> usize {
        self.p.len() - 1
    }
}

/// Training output plus the logistic loss before each round and after the last.
#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub model: CdeModel,
    pub loss: Vec<f64>,
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

pub fn train(data: &[LabeledExample], config: &TrainConfig) -> Result<CdeModel> {
    train_with_trace(data, config).map(|t| t.model)
}

pub fn train_with_trace(data: &[LabeledExample], config: &TrainConfig) -> Result<TrainTrace> {
    let num_features = feature_count(data)?;
    if config.rounds == 0 {
        return Err(CdeError::InvalidParameter("rounds must be at least 1".into()));
    }
    if let Some(eps) = config.smoothing {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CdeError::InvalidParameter("smoothing must be positive".into()));
        }
    }
    let labels: Vec<f64> = data.iter().map(|e| e.label).collect();
    let breakpoints = compute_breakpoints(&labels, config.k)?;
    if breakpoints.is_degenerate() {
        return Ok(TrainTrace {
            model: CdeModel {
                version: MODEL_VERSION,
                num_features,
                breakpoints,
                stumps: Vec::new(),
            },
            loss: Vec::new(),
        });
    }

    let m = data.len();
    let k = breakpoints.k();
    let eps = config.smoothing.unwrap_or(1.0 / (2.0 * m as f64));
    let searcher = Searcher::new(data, &breakpoints, config.max_thresholds)?;
    let signs: Vec<f64> = searcher
        .bins()
        .iter()
        .flat_map(|&bin| (0..k).map(move |j| if bin > j { 1.0 } else { -1.0 }))
        .collect();
    let mut scores = vec![0.0; m * k];
    let mut weights = vec![0.0; m * k];
    let mut stumps = Vec::with_capacity(config.rounds);
    let mut loss = Vec::with_capacity(config.rounds + 1);

    for _ in 0..config.rounds {
        let mut total = 0.0;
        for idx in 0..m * k {
            let margin = signs[idx] * scores[idx];
            weights[idx] = logistic(-margin);
            total += softplus(-margin);
        }
        loss.push(total);
        let fit = searcher.best(&weights, eps);
        for (i, ex) in data.iter().enumerate() {
            let h = fit.stump.block(&ex.features);
            for (s, v) in scores[i * k..(i + 1) * k].iter_mut().zip(h) {
                *s += v;
            }
        }
        stumps.push(fit.stump);
    }
    loss.push(
        signs
            .iter()
            .zip(&scores)
            .map(|(s, f)| softplus(-s * f))
            .sum(),
    );

    Ok(TrainTrace {
        model: CdeModel {
            version: MODEL_VERSION,
            num_features,
            breakpoints,
            stumps,
        },
        loss,
    })
}

/// Average of the tightest nonincreasing upper and lower envelopes.
pub fn monotonize(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut upper = vec![0.0; n];
    let mut run = f64::NEG_INFINITY;
    for j in (0..n).rev() {
        run = run.max(f[j]);
        upper[j] = run;
    }
    let mut run = f64::INFINITY;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        run = run.min(f[j]);
        out.push((upper[j] + run) / 2.0);
    }
    out
}

impl CdeModel {
    pub fn k(&self) -> usize {
        self.breakpoints.k()
    }

    pub fn rounds(&self) -> usize {
        self.stumps.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.breakpoints.is_degenerate()
    }

    fn check(&self, x: &[Feature]) -> Result<()> {
        if x.len() != self.num_features {
            return Err(CdeError::FeatureLength {
                index: 0,
                expected: self.num_features,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// The raw ensemble score `f(x, j)` for each interior breakpoint.
    pub fn raw_scores(&self, x: &[Feature]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut f = vec![0.0; self.k()];
        for stump in &self.stumps {
            for (a, b) in f.iter_mut().zip(stump.block(x)) {
                *a += b;
            }
        }
        Ok(f)
    }

    pub fn predict_cdf(&self, x: &[Feature]) -> Result<BinProbabilities> {
        if self.is_degenerate() {
            self.check(x)?;
            return Ok(BinProbabilities { p: vec![1.0, 0.0] });
        }
        let f = monotonize(&self.raw_scores(x)?);
        let mut p = Vec::with_capacity(f.len() + 2);
        p.push(1.0);
        p.extend(f.iter().map(|&z| logistic(z)));
        p.push(0.0);
        Ok(BinProbabilities { p })
    }

    /// P(y <= t), linear inside each bin.
    pub fn cdf(&self, x: &[Feature], t: f64) -> Result<f64> {
        let probs = self.predict_cdf(x)?;
        Ok(cdf_from(&self.breakpoints, &probs, t))
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: &[Feature], rng: &mut R) -> Result<f64> {
        let probs = self.predict_cdf(x)?;
        Ok(sample_from(&self.breakpoints, &probs, rng))
    }

    pub fn expected_value(&self, x: &[Feature]) -> Result<f64> {
        let probs = self.predict_cdf(x)?;
        Ok(expected_from(&self.breakpoints, &probs))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: CdeModel = serde_json::from_str(text)?;
        if model.version != MODEL_VERSION {
            return Err(CdeError::UnsupportedVersion(model.version));
        }
        if model.stumps.iter().any(|s| {
            s.above.len() != model.k() || s.below.len() != model.k() || s.unknown.len() != model.k()
        }) {
            return Err(CdeError::InvalidParameter(
                "stump length does not match breakpoints".into(),
            ));
        }
        if model.stumps.iter().any(|s| s.feature >= model.num_features) {
            return Err(CdeError::InvalidParameter("stump feature out of range".into()));
        }
        Ok(model)
    }
}

pub fn expected_from(bp: &Breakpoints, probs: &BinProbabilities) -> f64 {
    if bp.is_degenerate() {
        return bp.min();
    }
    (0..probs.bins())
        .map(|j| probs.mass(j) * (bp.get(j) + bp.get(j + 1)) / 2.0)
        .sum()
}

pub fn sample_from<R: Rng + ?Sized>(bp: &Breakpoints, probs: &BinProbabilities, rng: &mut R) -> f64 {
    if bp.is_degenerate() {
        return bp.min();
    }
    let u: f64 = rng.gen();
    let bins = probs.bins();
    let mut acc = 0.0;
    let mut chosen = bins - 1;
    for j in 0..bins {
        acc += probs.mass(j);
        if u < acc {
            chosen = j;
            break;
        }
    }
    // Rounding can leave `acc` a hair under 1; fall back to the last bin
    // with positive mass.
    if u >= acc {
        chosen = (0..bins).rev().find(|&j| probs.mass(j) > 0.0).unwrap_or(0);
    }
    let lo = bp.get(chosen);
    let hi = bp.get(chosen + 1);
    lo + rng.gen::<f64>() * (hi - lo)
}

pub fn cdf_from(bp: &Breakpoints, probs: &BinProbabilities, t: f64) -> f64 {
    if t < bp.min() {
        return 0.0;
    }
    if t >= bp.max() {
        return 1.0;
    }
    let j = bp.bin_of(t);
    let lo = bp.get(j);
    let hi = bp.get(j + 1);
    let frac = if hi > lo { (t - lo) / (hi - lo) } else { 1.0 };
    (1.0 - probs.p[j]) + probs.mass(j) * frac
}
