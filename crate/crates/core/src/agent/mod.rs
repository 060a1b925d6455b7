//! Bidding agents and the read-only market view they act on.

mod adaptive;
mod early;

use std::collections::BTreeMap;

pub use adaptive::{partition_budget, AdaptiveAgent, ScenarioValues};
pub use early::EarlyBidder;

use crate::error::{Result, TacError};
use crate::goods::{ClientPreferences, Good, GoodVector, NUM_HOTELS};
use crate::market::{Action, EntQuote, Game, Quote, Side, GAME_SECONDS};
use crate::predictors::{PredictorVariant, Snapshot};

/// What one agent may see of a running game.
#[derive(Clone, Copy)]
pub struct AgentView<'a> {
    game: &'a Game,
    me: usize,
}

impl<'a> AgentView<'a> {
    pub fn new(game: &'a Game, me: usize) -> Self {
        Self { game, me }
    }

    pub fn me(&self) -> usize {
        self.me
    }

    pub fn time(&self) -> u32 {
        self.game.time()
    }

    pub fn minute(&self) -> u32 {
        self.latest().minute()
    }

    pub fn num_agents(&self) -> usize {
        self.game.num_agents()
    }

    pub fn clients(&self) -> &'a [ClientPreferences] {
        self.game.clients(self.me)
    }

    pub fn holdings(&self) -> GoodVector {
        self.game.holdings(self.me)
    }

    pub fn quotes(&self) -> &'a [Quote] {
        self.game.quotes()
    }

    pub fn first(&self) -> &'a Quote {
        &self.game.quotes()[0]
    }

    pub fn latest(&self) -> &'a Quote {
        self.game.quotes().last().expect("a game always has its opening quote")
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::from_quote(self.latest(), self.num_agents())
    }

    pub fn my_hotel_bids(&self, h: usize) -> Vec<f64> {
        self.game.hotel_bids(self.me, h)
    }

    pub fn hotel_would_win(&self, h: usize) -> usize {
        self.game.hotel_would_win(self.me, h)
    }

    /// Entertainment quote from other agents' orders only.
    pub fn ent_quote(&self, e: usize) -> EntQuote {
        self.game.ent_quote_excluding(e, self.me)
    }

    pub fn my_ent_orders(&self) -> Vec<(Good, Side, f64, u32)> {
        self.game.ent_orders(self.me)
    }

    pub fn hotel_min_bid(&self) -> f64 {
        self.game.config().hotel_min_bid
    }
}

/// Counts of runtime checks on scenario values and predictions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssertionCounters {
    pub checks: u64,
    pub hotel_monotone: u64,
    pub hotel_diminishing: u64,
    pub flight_order: u64,
    pub ent_order: u64,
    pub prediction_floor: u64,
}

impl AssertionCounters {
    pub fn violations(&self) -> u64 {
        self.hotel_monotone + self.hotel_diminishing + self.flight_order + self.ent_order + self.prediction_floor
    }

    pub fn merge(&mut self, o: &AssertionCounters) {
        self.checks += o.checks;
        self.hotel_monotone += o.hotel_monotone;
        self.hotel_diminishing += o.hotel_diminishing;
        self.flight_order += o.flight_order;
        self.ent_order += o.ent_order;
        self.prediction_floor += o.prediction_floor;
    }
}

pub trait Agent {
    /// Called at every minute boundary; the returned actions are applied in
    /// order.
    fn act(&mut self, view: &AgentView) -> Result<Vec<Action>>;

    fn counters(&self) -> AssertionCounters {
        AssertionCounters::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub predictor: PredictorVariant,
    /// Minutes ahead averaged in the cost of postponing a flight.
    pub flight_lookahead: u32,
    /// Scenarios per hotel decision, split over the open hotels.
    pub hotel_scenarios: usize,
    pub flight_scenarios: usize,
    pub ent_scenarios: usize,
    /// Closing orders averaged for expected prices.
    pub ev_orders: usize,
    /// Copies valued per hotel.
    pub max_units: u32,
    pub ent_margin_start: f64,
    pub ent_margin_end: f64,
    pub price_impact: bool,
    /// Impact constants for early-cheap, early-expensive, late-cheap and
    /// late-expensive rooms.
    pub impact_c: [f64; 4],
    /// Rooms closing at or after this minute count as late.
    pub late_minute: u32,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            predictor: PredictorVariant::LearnedEv,
            flight_lookahead: 2,
            hotel_scenarios: 16,
            flight_scenarios: 8,
            ent_scenarios: 8,
            ev_orders: 8,
            max_units: 8,
            ent_margin_start: 40.0,
            ent_margin_end: 5.0,
            price_impact: true,
            impact_c: [1.35; 4],
            late_minute: 8,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| TacError::Config(format!("bad value {value:?} for {key}")))
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TacError::Config(m.to_string()));
        if self.flight_lookahead == 0 {
            return bad("flight_lookahead must be at least 1");
        }
        if self.hotel_scenarios == 0 || self.flight_scenarios == 0 || self.ent_scenarios == 0 || self.ev_orders == 0 {
            return bad("scenario budgets must be at least 1");
        }
        if self.max_units == 0 || self.max_units > 16 {
            return bad("max_units must be in 1..=16");
        }
        if self.impact_c.iter().any(|&c| !(c >= 1.0 && c.is_finite())) {
            return bad("impact constants must be finite and at least 1");
        }
        if !(self.ent_margin_start.is_finite() && self.ent_margin_end.is_finite()) {
            return bad("entertainment margins must be finite");
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "predictor" => self.predictor = value.trim().parse()?,
            "flight_lookahead" => self.flight_lookahead = parse(key, value)?,
            "hotel_scenarios" => self.hotel_scenarios = parse(key, value)?,
            "flight_scenarios" => self.flight_scenarios = parse(key, value)?,
            "ent_scenarios" => self.ent_scenarios = parse(key, value)?,
            "ev_orders" => self.ev_orders = parse(key, value)?,
            "max_units" => self.max_units = parse(key, value)?,
            "ent_margin_start" => self.ent_margin_start = parse(key, value)?,
            "ent_margin_end" => self.ent_margin_end = parse(key, value)?,
            "price_impact" => self.price_impact = parse(key, value)?,
            "late_minute" => self.late_minute = parse(key, value)?,
            "impact_c" => {
                let c: f64 = parse(key, value)?;
                self.impact_c = [c; 4];
            }
            "impact_c_early_cheap" => self.impact_c[0] = parse(key, value)?,
            "impact_c_early_expensive" => self.impact_c[1] = parse(key, value)?,
            "impact_c_late_cheap" => self.impact_c[2] = parse(key, value)?,
            "impact_c_late_expensive" => self.impact_c[3] = parse(key, value)?,
            _ => return Err(TacError::Config(format!("unknown agent setting {key:?}"))),
        }
        Ok(())
    }

    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in settings {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Entertainment profit margin at game time `t`, linear between the
    /// start and end margins.
    pub fn ent_margin(&self, t: u32) -> f64 {
        let f = t.min(GAME_SECONDS) as f64 / GAME_SECONDS as f64;
        self.ent_margin_start + (self.ent_margin_end - self.ent_margin_start) * f
    }

    /// Impact constant for hotel room `h` expected to close at `minute`.
    pub fn impact_for(&self, h: usize, minute: f64) -> f64 {
        if !self.price_impact {
            return 1.0;
        }
        let expensive = h < NUM_HOTELS / 2;
        let late = minute >= self.late_minute as f64;
        self.impact_c[2 * usize::from(late) + usize::from(expensive)]
    }
}
