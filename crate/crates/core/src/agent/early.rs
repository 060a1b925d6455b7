//! Buys everything it plans for at the first quotes and never revises.
//! Optionally keeps trading entertainment like the adaptive agent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AdaptiveAgent, Agent, AgentConfig, AgentView, AssertionCounters};
use crate::allocator::{self, PriceSchedule};
use crate::error::Result;
use crate::goods::{flight_good, hotel_good, NUM_FLIGHTS, NUM_HOTELS};
use crate::market::{Action, GAME_MINUTES};
use crate::predictors::{FlightPriceModel, Predictor};

pub const EARLY_HOTEL_BID: f64 = 1001.0;

pub struct EarlyBidder {
    predictor: Predictor,
    rng: ChaCha8Rng,
    done: bool,
    config: AgentConfig,
    trader: Option<AdaptiveAgent>,
}

impl EarlyBidder {
    /// `predictor` should be the simple-mean point predictor; `config`
    /// supplies the price impact used when planning.
    pub fn new(predictor: Predictor, config: AgentConfig, seed: u64) -> Self {
        Self {
            predictor,
            rng: ChaCha8Rng::seed_from_u64(seed),
            done: false,
            config,
            trader: None,
        }
    }

    /// Also trades entertainment every minute with the adaptive agent's
    /// entertainment step under `config`.
    pub fn with_entertainment(predictor: Predictor, config: AgentConfig, seed: u64) -> Self {
        let trader = AdaptiveAgent::new(
            config.clone(),
            predictor.clone(),
            FlightPriceModel::default(),
            seed.wrapping_add(1),
        );
        Self {
            trader: Some(trader),
            ..Self::new(predictor, config, seed)
        }
    }
}

impl Agent for EarlyBidder {
    fn act(&mut self, view: &AgentView) -> Result<Vec<Action>> {
        if self.done {
            return match &mut self.trader {
                Some(t) => t.trade_entertainment(view),
                None => Ok(Vec::new()),
            };
        }
        self.done = true;
        let snap = view.snapshot();
        let expected = self.predictor.expected_prices(&snap, 1, &mut self.rng);
        let mut y = PriceSchedule::unavailable();
        for f in 0..NUM_FLIGHTS {
            y.set(flight_good(f), snap.flights[f]);
        }
        let open = snap.open_rooms();
        let mean_close = (2 * GAME_MINUTES - open.len() as u32 - 1) as f64 / 2.0;
        for h in open {
            y.set_with_impact(hotel_good(h), expected[h], self.config.impact_for(h, mean_close));
        }
        let plan = allocator::opt(&view.holdings(), &y, view.clients())?;
        let mut actions = Vec::new();
        for f in 0..NUM_FLIGHTS {
            let good = flight_good(f);
            let q = plan.purchases.get(good);
            if q > 0 {
                actions.push(Action::BuyFlight {
                    good,
                    price: snap.flights[f],
                    qty: q,
                });
            }
        }
        for h in 0..NUM_HOTELS {
            let good = hotel_good(h);
            let q = plan.purchases.get(good);
            if q > 0 {
                actions.push(Action::HotelBid {
                    good,
                    units: vec![EARLY_HOTEL_BID; q as usize],
                });
            }
        }
        if let Some(t) = &mut self.trader {
            actions.extend(t.trade_entertainment(view)?);
        }
        Ok(actions)
    }

    fn counters(&self) -> AssertionCounters {
        self.trader.as_ref().map(|t| t.counters()).unwrap_or_default()
    }
}
