//! Experiment plumbing: games, tournaments, metrics and replay checks.

pub mod config;
pub mod metrics;
pub mod tournament;

pub use config::{parse_kv, AgentSpec, TournamentConfig, TrainingWindow};
pub use metrics::{
    clearing_violations, confidence_interval, eval_predictor_rmse, mean_se, paired_differences,
    prediction_errors, predictor_errors, rmse, score_report, Metric, MetricsReport,
};
pub use tournament::{play_game, run_tournament, GameOutcome, Models, TournamentResult};

use crate::error::Result;
use crate::market::{self, GameRecord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// First differing line (1-based) with the logged and regenerated text.
    Mismatch {
        line: usize,
        original: String,
        regenerated: String,
    },
}

/// Re-simulates a record from its seed and logged actions.
pub fn verify(record: &GameRecord) -> Result<Verdict> {
    Ok(match market::replay(record)? {
        None => Verdict::Pass,
        Some((line, original, regenerated)) => Verdict::Mismatch {
            line,
            original,
            regenerated,
        },
    })
}
