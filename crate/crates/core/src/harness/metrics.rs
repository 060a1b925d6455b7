//! Score summaries, confidence intervals, prediction error and record checks.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::Result;
use crate::market::{Event, GameRecord, MarketConfig, GAME_MINUTES, HOTEL_ROOMS};
use crate::predictors::{Predictor, Snapshot};

pub const REPORT_COLUMNS: [&str; 8] = [
    "agent",
    "games",
    "mean_score",
    "score_se",
    "mean_relative",
    "relative_se",
    "mean_utility",
    "mean_expenditure",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AgentStats {
    pub name: String,
    pub games: usize,
    pub mean_score: f64,
    pub score_se: f64,
    pub mean_relative: f64,
    pub relative_se: f64,
    pub mean_utility: f64,
    pub mean_expenditure: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub agents: Vec<AgentStats>,
    pub games: usize,
    pub voided: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Score,
    Relative,
    Utility,
    Expenditure,
}

/// Sample mean and standard error (sample standard deviation over the
/// square root of the count).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sided Student-t interval for the mean: `(mean, half_width)`.
pub fn confidence_interval(xs: &[f64], level: f64) -> (f64, f64) {
    let (mean, se) = mean_se(xs);
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let t = StudentsT::new(0.0, 1.0, (xs.len() - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.5 + level / 2.0);
    (mean, t * se)
}

/// Per-game values of `metric` for agents named `name`, averaged within
/// each game. Games without such an agent or without scores are skipped.
pub fn per_game(records: &[GameRecord], name: &str, metric: Metric) -> Vec<Option<f64>> {
    records
        .iter()
        .map(|r| {
            let scores = r.scores();
            let agents = r.agents();
            if scores.len() != agents.len() || scores.is_empty() {
                return None;
            }
            let avg = scores.iter().map(|s| s.2).sum::<f64>() / scores.len() as f64;
            let vals: Vec<f64> = agents
                .iter()
                .zip(&scores)
                .filter(|(a, _)| a.as_str() == name)
                .map(|(_, &(u, e, s))| match metric {
                    Metric::Score => s,
                    Metric::Relative => s - avg,
                    Metric::Utility => u,
                    Metric::Expenditure => e,
                })
                .collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect()
}

/// Per-game differences `a - b` of `metric` over games with both agents.
pub fn paired_differences(records: &[GameRecord], a: &str, b: &str, metric: Metric) -> Vec<f64> {
    per_game(records, a, metric)
        .into_iter()
        .zip(per_game(records, b, metric))
        .filter_map(|(x, y)| Some(x? - y?))
        .collect()
}

/// Means and standard errors per agent name, pooling same-named agents
/// within a game first.
pub fn score_report(records: &[GameRecord]) -> MetricsReport {
    let mut names: Vec<String> = Vec::new();
    for r in records {
        for a in r.agents() {
            if !names.contains(&a) {
                names.push(a);
            }
        }
    }
    let collect = |name: &str, m| -> Vec<f64> { per_game(records, name, m).into_iter().flatten().collect() };
    let agents = names
        .into_iter()
        .map(|name| {
            let score = collect(&name, Metric::Score);
            let (mean_score, score_se) = mean_se(&score);
            let (mean_relative, relative_se) = mean_se(&collect(&name, Metric::Relative));
            let (mean_utility, _) = mean_se(&collect(&name, Metric::Utility));
            let (mean_expenditure, _) = mean_se(&collect(&name, Metric::Expenditure));
            AgentStats {
                games: score.len(),
                name,
                mean_score,
                score_se,
                mean_relative,
                relative_se,
                mean_utility,
                mean_expenditure,
            }
        })
        .collect();
    MetricsReport {
        agents,
        games: records.iter().filter(|r| !r.scores().is_empty()).count(),
        voided: 0,
    }
}

impl MetricsReport {
    pub fn get(&self, name: &str) -> Option<&AgentStats> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_COLUMNS)?;
        for a in &self.agents {
            w.write_record([
                a.name.clone(),
                a.games.to_string(),
                format!("{:.4}", a.mean_score),
                format!("{:.4}", a.score_se),
                format!("{:.4}", a.mean_relative),
                format!("{:.4}", a.relative_se),
                format!("{:.4}", a.mean_utility),
                format!("{:.4}", a.mean_expenditure),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Signed prediction errors per game, one per minute and room still open
/// at that minute's quote. `predict(record, snapshot)` gives point
/// predictions of every room's clearing price.
pub fn prediction_errors<F>(records: &[GameRecord], mut predict: F) -> Vec<Vec<f64>>
where
    F: FnMut(&GameRecord, &Snapshot) -> [f64; 8],
{
    records
        .iter()
        .filter_map(|r| {
            let closes = r.hotel_closes();
            if closes.iter().any(Option::is_none) {
                return None;
            }
            let players = r.agents().len();
            let mut errs = Vec::new();
            for q in r.quotes().filter(|q| q.minute() < GAME_MINUTES) {
                let snap = Snapshot::from_quote(q, players);
                let open: Vec<usize> = snap
                    .open_rooms()
                    .into_iter()
                    .filter(|&h| closes[h].is_some_and(|c| c.1 > snap.minute))
                    .collect();
                if open.is_empty() {
                    continue;
                }
                let pred = predict(r, &snap);
                for h in open {
                    errs.push(pred[h] - closes[h].expect("checked above").0);
                }
            }
            Some(errs)
        })
        .collect()
}

/// Errors of a predictor's point estimates, averaging `orders` sampled
/// closing orders per snapshot.
pub fn predictor_errors(records: &[GameRecord], predictor: &Predictor, orders: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    prediction_errors(records, |_, snap| predictor.expected_prices(snap, orders, &mut rng))
}

pub fn rmse(errors: &[Vec<f64>]) -> f64 {
    let (mut sq, mut n) = (0.0, 0usize);
    for e in errors.iter().flatten() {
        sq += e * e;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        (sq / n as f64).sqrt()
    }
}

pub fn eval_predictor_rmse(records: &[GameRecord], predictor: &Predictor) -> f64 {
    rmse(&predictor_errors(records, predictor, 8, 0))
}

/// Hotel closes whose price is not the one the clearing rule gives for
/// the logged unit bids.
pub fn clearing_violations(record: &GameRecord) -> usize {
    let floor = record
        .events
        .iter()
        .find_map(|e| match e {
            Event::Header { config, .. } => Some(config.hotel_min_bid),
            _ => None,
        })
        .unwrap_or(MarketConfig::default().hotel_min_bid);
    record
        .events
        .iter()
        .filter(|e| match e {
            Event::Close { price, units, .. } => {
                let mut u = units.clone();
                u.sort_by(|a, b| b.total_cmp(a));
                let expected = if u.is_empty() {
                    0.0
                } else if u.len() >= HOTEL_ROOMS {
                    u[HOTEL_ROOMS - 1]
                } else {
                    u[u.len() - 1].max(floor)
                };
                *price != expected
            }
            _ => false,
        })
        .count()
}
