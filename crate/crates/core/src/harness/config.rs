//! Flat `key = value` configuration files.

use boostcde::TrainConfig;

use crate::agent::AgentConfig;
use crate::error::{Result, TacError};
use crate::predictors::PredictorVariant;

/// Parses `key = value` lines in file order. Blank lines and `#` comments
/// are skipped.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| TacError::Config(format!("line {}: expected key = value", n + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(TacError::Config(format!("line {}: empty key", n + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum AgentSpec {
    Adaptive(AgentConfig),
    /// Open-loop bidder planning with `config`'s price impact;
    /// `entertainment` keeps it trading tickets.
    EarlyBidder { config: AgentConfig, entertainment: bool },
}

impl AgentSpec {
    pub fn adaptive(variant: PredictorVariant) -> Self {
        AgentSpec::Adaptive(AgentConfig {
            predictor: variant,
            ..Default::default()
        })
    }

    /// Early bidder planning at plain expected prices.
    pub fn early(entertainment: bool) -> Self {
        AgentSpec::EarlyBidder {
            config: AgentConfig {
                predictor: PredictorVariant::SimpleEv,
                price_impact: false,
                ..Default::default()
            },
            entertainment,
        }
    }

    pub fn needs_bank(&self) -> bool {
        matches!(self, AgentSpec::Adaptive(c) if c.predictor.needs_bank())
    }

    /// Parses `<kind>[:<option>] [key=value ...]` where kind is `adaptive`
    /// (option: predictor variant) or `early` (option: `ent`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut words = text.split_whitespace();
        let head = words
            .next()
            .ok_or_else(|| TacError::Config("empty agent description".into()))?;
        let (kind, variant) = match head.split_once(':') {
            Some((k, v)) => (k, Some(v)),
            None => (head, None),
        };
        let mut spec = match (kind, variant) {
            ("early", None) => AgentSpec::early(false),
            ("early", Some("ent")) => AgentSpec::early(true),
            ("early", Some(v)) => {
                return Err(TacError::Config(format!("unknown early bidder option {v:?}")))
            }
            ("adaptive", v) => {
                let mut c = AgentConfig::default();
                if let Some(v) = v {
                    c.predictor = v.parse()?;
                }
                AgentSpec::Adaptive(c)
            }
            (other, _) => return Err(TacError::Config(format!("unknown agent kind {other:?}"))),
        };
        let c = match &mut spec {
            AgentSpec::Adaptive(c) | AgentSpec::EarlyBidder { config: c, .. } => c,
        };
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| TacError::Config(format!("expected key=value, got {w:?}")))?;
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(spec)
    }

    pub fn label(&self) -> String {
        match self {
            AgentSpec::Adaptive(c) => format!("adaptive:{}", c.predictor),
            AgentSpec::EarlyBidder { entertainment: false, .. } => "early".into(),
            AgentSpec::EarlyBidder { entertainment: true, .. } => "early:ent".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingWindow {
    /// Every game played so far, bootstrap games included.
    All,
    /// The most recent games only.
    Last(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TournamentConfig {
    pub roster: Vec<(String, AgentSpec)>,
    pub games: usize,
    pub master_seed: u64,
    /// Retrain models after this many games.
    pub retrain_every: Option<usize>,
    pub window: TrainingWindow,
    /// Games of baseline self-play used to seed the first models.
    pub bootstrap_games: usize,
    pub train: TrainConfig,
    pub parallelism: usize,
}

impl Default for TournamentConfig {
    fn default() -> Self {
        Self {
            roster: Vec::new(),
            games: 1,
            master_seed: 0,
            retrain_every: Some(25),
            window: TrainingWindow::All,
            bootstrap_games: 0,
            train: TrainConfig {
                max_thresholds: Some(64),
                ..Default::default()
            },
            parallelism: 1,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| TacError::Config(format!("bad value {value:?} for {key}")))
}

impl TournamentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.roster.is_empty() || self.roster.len() > crate::market::MAX_AGENTS {
            return Err(TacError::Config(format!(
                "roster must have 1 to {} agents, got {}",
                crate::market::MAX_AGENTS,
                self.roster.len()
            )));
        }
        if self.games == 0 {
            return Err(TacError::Config("games must be at least 1".into()));
        }
        if self.retrain_every == Some(0) || self.parallelism == 0 {
            return Err(TacError::Config("retrain_every and parallelism must be positive".into()));
        }
        if self.window == TrainingWindow::Last(0) {
            return Err(TacError::Config("training window must hold at least one game".into()));
        }
        Ok(())
    }

    /// Reads a config file: `agent.<name> = <description>` lines in roster
    /// order plus `games`, `master_seed`, `retrain_every` (`never` or a
    /// count), `window` (`all` or a count), `bootstrap_games`, `train_k`,
    /// `train_rounds`, `train_max_thresholds` and `parallelism`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in parse_kv(text)? {
            if let Some(name) = k.strip_prefix("agent.") {
                c.roster.push((name.to_string(), AgentSpec::parse(&v)?));
                continue;
            }
            match k.as_str() {
                "games" => c.games = num(&k, &v)?,
                "master_seed" => c.master_seed = num(&k, &v)?,
                "retrain_every" => {
                    c.retrain_every = if v == "never" { None } else { Some(num(&k, &v)?) }
                }
                "window" => {
                    c.window = if v == "all" {
                        TrainingWindow::All
                    } else {
                        TrainingWindow::Last(num(&k, &v)?)
                    }
                }
                "bootstrap_games" => c.bootstrap_games = num(&k, &v)?,
                "train_k" => c.train.k = num(&k, &v)?,
                "train_rounds" => c.train.rounds = num(&k, &v)?,
                "train_max_thresholds" => {
                    c.train.max_thresholds = if v == "all" { None } else { Some(num(&k, &v)?) }
                }
                "parallelism" => c.parallelism = num(&k, &v)?,
                _ => return Err(TacError::Config(format!("unknown setting {k:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_tournament() {
        let text = "# demo\ngames = 3\nmaster_seed = 9\nretrain_every = never\n\
                    agent.b = adaptive:current_bid hotel_scenarios=16\nagent.a = early\n";
        let c = TournamentConfig::parse(text).unwrap();
        assert_eq!(c.games, 3);
        assert_eq!(c.retrain_every, None);
        assert_eq!(c.roster[0].0, "b");
        match &c.roster[0].1 {
            AgentSpec::Adaptive(a) => {
                assert_eq!(a.predictor, PredictorVariant::CurrentBid);
                assert_eq!(a.hotel_scenarios, 16);
            }
            _ => panic!("expected adaptive"),
        }
        assert_eq!(c.roster[1].1, AgentSpec::early(false));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(TournamentConfig::parse("games = 2").is_err());
        assert!(TournamentConfig::parse("agent.a = early\ngames = x").is_err());
        assert!(TournamentConfig::parse("agent.a = early\ncolour = red").is_err());
        assert!(TournamentConfig::parse("agent.a = adaptive flight_lookahead=0").is_err());
        assert!(parse_kv("no equals sign").is_err());
        let nine: String = (0..9).map(|k| format!("agent.a{k} = early\n")).collect();
        assert!(TournamentConfig::parse(&nine).is_err());
    }
}
