//! Seeded games, tournaments with periodic retraining, and model storage.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use boostcde::TrainConfig;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{AgentSpec, TournamentConfig, TrainingWindow};
use super::metrics::{score_report, MetricsReport};
use crate::agent::{AdaptiveAgent, Agent, AgentConfig, AgentView, AssertionCounters, EarlyBidder};
use crate::error::{Result, TacError};
use crate::market::{Game, GameRecord, MarketConfig, GAME_MINUTES};
use crate::predictors::{FlightPriceModel, HistoricalPriceTable, HotelModelBank, Predictor, PredictorVariant};

/// Everything learned from past games.
#[derive(Debug, Clone)]
pub struct Models {
    pub bank: Option<Arc<HotelModelBank>>,
    pub table: Arc<HistoricalPriceTable>,
    pub flight: FlightPriceModel,
    pub tag: String,
}

impl Default for Models {
    fn default() -> Self {
        Self {
            bank: None,
            table: Arc::new(HistoricalPriceTable::default()),
            flight: FlightPriceModel::default(),
            tag: "none".into(),
        }
    }
}

impl Models {
    /// Price tables and flight slope from `records`, plus a hotel model bank
    /// when `with_bank` is set.
    pub fn train(records: &[GameRecord], config: &TrainConfig, with_bank: bool, tag: &str) -> Result<Self> {
        let bank = if with_bank {
            Some(Arc::new(HotelModelBank::train(records, config, tag)?))
        } else {
            None
        };
        let mut flight = FlightPriceModel::fit(records);
        if flight.m <= 0.0 {
            flight = FlightPriceModel::default();
        }
        Ok(Self {
            bank,
            table: Arc::new(HistoricalPriceTable::from_records(records)),
            flight,
            tag: tag.to_string(),
        })
    }

    pub fn predictor(&self, variant: PredictorVariant) -> Predictor {
        let bank = variant.needs_bank().then(|| self.bank.clone()).flatten();
        let table = variant.needs_table().then(|| self.table.clone());
        Predictor::new(variant, bank, table)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        if let Some(bank) = &self.bank {
            bank.save(&dir.join("bank"))?;
        }
        fs::write(dir.join("table.json"), serde_json::to_string(&*self.table)?)?;
        fs::write(dir.join("flight.json"), serde_json::to_string(&self.flight)?)?;
        fs::write(dir.join("tag"), &self.tag)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let bank_dir = dir.join("bank");
        let bank = if bank_dir.join("manifest.json").exists() {
            Some(Arc::new(HotelModelBank::load(&bank_dir)?))
        } else {
            None
        };
        let table: HistoricalPriceTable = serde_json::from_str(&fs::read_to_string(dir.join("table.json"))?)?;
        let flight: FlightPriceModel = serde_json::from_str(&fs::read_to_string(dir.join("flight.json"))?)?;
        let tag = fs::read_to_string(dir.join("tag")).unwrap_or_else(|_| "unnamed".into());
        Ok(Self {
            bank,
            table: Arc::new(table),
            flight,
            tag,
        })
    }
}

/// Independent seed for agent `k` of the game seeded with `seed`.
pub fn agent_seed(seed: u64, k: usize) -> u64 {
    let mut z = seed ^ (k as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn make_agent(spec: &AgentSpec, models: &Models, seed: u64) -> Box<dyn Agent> {
    match spec {
        AgentSpec::Adaptive(c) => Box::new(AdaptiveAgent::new(
            c.clone(),
            models.predictor(c.predictor),
            models.flight,
            seed,
        )),
        AgentSpec::EarlyBidder { config, entertainment } => {
            let predictor = models.predictor(PredictorVariant::SimpleEv);
            if *entertainment {
                Box::new(EarlyBidder::with_entertainment(predictor, config.clone(), seed))
            } else {
                Box::new(EarlyBidder::new(predictor, config.clone(), seed))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GameOutcome {
    pub record: GameRecord,
    pub counters: Vec<AssertionCounters>,
}

/// Plays one game. Agents act once per minute boundary in a seeded random
/// order, each seeing the effects of those before it.
pub fn play_game(seed: u64, roster: &[(String, AgentSpec)], models: &Models) -> Result<GameOutcome> {
    let names: Vec<String> = roster.iter().map(|r| r.0.clone()).collect();
    let tags: Vec<String> = roster
        .iter()
        .map(|(_, s)| match s {
            AgentSpec::Adaptive(c) if c.predictor.needs_bank() => format!("bank:{}", models.tag),
            AgentSpec::Adaptive(c) if c.predictor.needs_table() => format!("table:{}", models.tag),
            _ => "none".to_string(),
        })
        .collect();
    let mut game = Game::with_models(seed, names, tags, MarketConfig::default())?;
    let mut agents: Vec<Box<dyn Agent>> = roster
        .iter()
        .enumerate()
        .map(|(k, (_, spec))| make_agent(spec, models, agent_seed(seed, k)))
        .collect();
    let mut order_rng = ChaCha8Rng::seed_from_u64(agent_seed(seed, usize::MAX));
    let mut order: Vec<usize> = (0..agents.len()).collect();
    for m in 0..GAME_MINUTES {
        game.step(60 * m)?;
        order.shuffle(&mut order_rng);
        for &k in &order {
            let actions = agents[k].act(&AgentView::new(&game, k))?;
            for a in &actions {
                game.apply(k, a)?;
            }
        }
    }
    game.finish()?;
    Ok(GameOutcome {
        record: game.into_record(),
        counters: agents.iter().map(|a| a.counters()).collect(),
    })
}

/// Cheap agents for seeding the first training corpus.
pub fn bootstrap_roster() -> Vec<(String, AgentSpec)> {
    (0..8)
        .map(|k| {
            let c = AgentConfig {
                predictor: PredictorVariant::CurrentBid,
                hotel_scenarios: 16,
                flight_scenarios: 4,
                ent_scenarios: 4,
                ev_orders: 1,
                ..Default::default()
            };
            (format!("boot{k}"), AgentSpec::Adaptive(c))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TournamentResult {
    pub records: Vec<GameRecord>,
    /// Index and reason of games that failed and were left out.
    pub voided: Vec<(usize, String)>,
    pub counters: AssertionCounters,
    pub report: MetricsReport,
    pub models: Models,
    pub bootstrap: Vec<GameRecord>,
}

fn play_batch(
    seeds: &[(usize, u64)],
    roster: &[(String, AgentSpec)],
    models: &Models,
    parallelism: usize,
) -> Vec<(usize, Result<GameOutcome>)> {
    if parallelism <= 1 || seeds.len() <= 1 {
        return seeds
            .iter()
            .map(|&(i, s)| (i, play_game(s, roster, models)))
            .collect();
    }
    let chunk = seeds.len().div_ceil(parallelism);
    let mut out: Vec<(usize, Result<GameOutcome>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(i, s)| (i, play_game(s, roster, models)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("game thread panicked"))
            .collect()
    });
    out.sort_by_key(|r| r.0);
    out
}

fn training_slice<'a>(window: TrainingWindow, all: &'a [GameRecord]) -> &'a [GameRecord] {
    match window {
        TrainingWindow::All => all,
        TrainingWindow::Last(n) => &all[all.len().saturating_sub(n)..],
    }
}

/// Plays `config.games` games with seeds `master_seed + index`, retraining
/// between batches. Without `initial` models, starting models come from
/// bootstrap games when configured, else are empty.
pub fn run_tournament(config: &TournamentConfig, initial: Option<Models>) -> Result<TournamentResult> {
    config.validate()?;
    let needs_bank = config.roster.iter().any(|(_, s)| s.needs_bank());
    let mut corpus: Vec<GameRecord> = Vec::new();
    let mut bootstrap = Vec::new();
    let mut version = 0usize;
    let mut models = match initial {
        Some(m) => m,
        None if config.bootstrap_games > 0 => {
            let seeds: Vec<(usize, u64)> = (0..config.bootstrap_games)
                .map(|i| (i, config.master_seed.wrapping_add(1 << 40).wrapping_add(i as u64)))
                .collect();
            for (i, r) in play_batch(&seeds, &bootstrap_roster(), &Models::default(), config.parallelism) {
                match r {
                    Ok(o) => bootstrap.push(o.record),
                    Err(e) => log::warn!("bootstrap game {i} voided: {e}"),
                }
            }
            corpus.extend(bootstrap.iter().cloned());
            Models::train(&corpus, &config.train, needs_bank, "v0")?
        }
        None => Models::default(),
    };
    let batch = config.retrain_every.unwrap_or(config.games);
    let mut records = Vec::new();
    let mut voided = Vec::new();
    let mut counters = AssertionCounters::default();
    let mut start = 0;
    while start < config.games {
        let end = (start + batch).min(config.games);
        if start > 0 && config.retrain_every.is_some() {
            version += 1;
            let tag = format!("v{version}");
            log::info!("retraining {tag} on {} games", training_slice(config.window, &corpus).len());
            models = Models::train(training_slice(config.window, &corpus), &config.train, needs_bank, &tag)?;
        }
        let seeds: Vec<(usize, u64)> = (start..end)
            .map(|i| (i, config.master_seed.wrapping_add(i as u64)))
            .collect();
        for (i, r) in play_batch(&seeds, &config.roster, &models, config.parallelism) {
            match r {
                Ok(o) => {
                    for c in &o.counters {
                        counters.merge(c);
                    }
                    corpus.push(o.record.clone());
                    records.push(o.record);
                }
                Err(e) => {
                    log::warn!("game {i} voided: {e}");
                    voided.push((i, e.to_string()));
                }
            }
        }
        start = end;
    }
    if records.is_empty() {
        return Err(TacError::InvalidInput("every game was voided".into()));
    }
    let mut report = score_report(&records);
    report.voided = voided.len();
    Ok(TournamentResult {
        records,
        voided,
        counters,
        report,
        models,
        bootstrap,
    })
}
