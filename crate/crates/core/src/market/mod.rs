//! The simulated travel market: 8 flight auctions with drifting asks, 8
//! hotel auctions closing one per minute from minute 4, and 12 continuous
//! double auctions for entertainment tickets.
//!
//! Time is integer seconds from 0 to 720. At each minute boundary the due
//! hotel closes, hotel asks are recomputed and a [`Quote`] is logged; agents
//! then act. Everything is driven by the game seed.

mod cda;
pub mod event;
mod hotel;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocator;
use crate::error::{Result, TacError};
use crate::goods::{
    ClientPreferences, Good, GoodVector, NUM_CLIENTS, NUM_ENT, NUM_FLIGHTS, NUM_HOTELS,
};
use cda::{Cda, Order};
pub use event::{Action, EntQuote, Event, GameRecord, HotelQuote, Quote, Side, SCHEMA_VERSION};
use hotel::HotelAuction;

pub const GAME_SECONDS: u32 = 720;
pub const GAME_MINUTES: u32 = 12;
pub const FIRST_CLOSE_MINUTE: u32 = 4;
pub const MAX_AGENTS: usize = 8;
pub const HOTEL_ROOMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub flight_initial_min: f64,
    pub flight_initial_max: f64,
    pub flight_floor: f64,
    pub flight_ceiling: f64,
    pub flight_gap_min: u32,
    pub flight_gap_max: u32,
    pub flight_y_min: f64,
    pub flight_y_max: f64,
    /// Lowest acceptable hotel unit bid and lowest clearing price.
    pub hotel_min_bid: f64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        Self {
            flight_initial_min: 250.0,
            flight_initial_max: 400.0,
            flight_floor: 150.0,
            flight_ceiling: 800.0,
            flight_gap_min: 24,
            flight_gap_max: 32,
            flight_y_min: 10.0,
            flight_y_max: 90.0,
            hotel_min_bid: 1.0,
        }
    }
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.flight_floor <= self.flight_initial_min
            && self.flight_initial_min <= self.flight_initial_max
            && self.flight_initial_max <= self.flight_ceiling
            && 0 < self.flight_gap_min
            && self.flight_gap_min <= self.flight_gap_max
            && 10.0 <= self.flight_y_min
            && self.flight_y_min <= self.flight_y_max
            && self.hotel_min_bid >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(TacError::Config(format!("inconsistent market config {self:?}")))
        }
    }
}

/// The upper end of the flight perturbation range at time `t`.
pub fn flight_x(y: f64, t: u32) -> f64 {
    10.0 + (y - 10.0) * t as f64 / GAME_SECONDS as f64
}

#[derive(Debug, Clone)]
struct FlightAuction {
    y: f64,
    ask: f64,
    next_tick: u32,
    rng: ChaCha8Rng,
}

impl FlightAuction {
    fn advance(&mut self, until: u32, cfg: &MarketConfig) {
        while self.next_tick <= until {
            let t = self.next_tick;
            let delta = self.rng.gen_range(-10.0..=flight_x(self.y, t));
            self.ask = (self.ask + delta).clamp(cfg.flight_floor, cfg.flight_ceiling);
            self.next_tick += self.rng.gen_range(cfg.flight_gap_min..=cfg.flight_gap_max);
        }
    }
}

/// Random client preferences: (arrival, departure) uniform over the ten pairs
/// with 1 <= arrival < departure <= 5, premium on 50..=150, values on 0..=200.
const STAY_PAIRS: [(u8, u8); 10] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 4),
    (3, 5),
    (4, 5),
];

pub fn random_clients<R: Rng + ?Sized>(rng: &mut R) -> Vec<ClientPreferences> {
    (0..NUM_CLIENTS)
        .map(|_| {
            let (iad, idd) = STAY_PAIRS[rng.gen_range(0..STAY_PAIRS.len())];
            let hp = rng.gen_range(50..=150);
            let ev = [
                rng.gen_range(0..=200),
                rng.gen_range(0..=200),
                rng.gen_range(0..=200),
            ];
            ClientPreferences { iad, idd, hp, ev }
        })
        .collect()
}

/// Four distinct ticket goods chosen uniformly, endowed 4, 4, 2 and 2.
pub fn random_endowment<R: Rng + ?Sized>(rng: &mut R) -> GoodVector {
    let mut ent: Vec<usize> = (16..16 + NUM_ENT).collect();
    ent.shuffle(rng);
    let mut g = GoodVector::zero();
    for (k, q) in [4, 4, 2, 2].into_iter().enumerate() {
        g[ent[k]] = q;
    }
    g
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(s);
    r
}

/// Result of applying one action.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Accepted,
    Rejected(String),
}

/// The full state of one game.
#[derive(Debug, Clone)]
pub struct Game {
    seed: u64,
    config: MarketConfig,
    t: u32,
    next_minute: u32,
    flights: Vec<FlightAuction>,
    hotels: Vec<HotelAuction>,
    ent: Vec<Cda>,
    clients: Vec<Vec<ClientPreferences>>,
    holdings: Vec<GoodVector>,
    expenditure: Vec<f64>,
    seq: u64,
    quotes: Vec<Quote>,
    record: GameRecord,
    finished: bool,
}

impl Game {
    pub fn new(seed: u64, agents: Vec<String>, config: MarketConfig) -> Result<Self> {
        Self::with_models(seed, agents, Vec::new(), config)
    }

    /// Samples clients, endowments, flight trends and the hotel closing
    /// order, and logs the minute-0 quote.
    pub fn with_models(
        seed: u64,
        agents: Vec<String>,
        models: Vec<String>,
        config: MarketConfig,
    ) -> Result<Self> {
        config.validate()?;
        let n = agents.len();
        if n == 0 || n > MAX_AGENTS {
            return Err(TacError::Config(format!("{n} agents; expected 1..={MAX_AGENTS}")));
        }
        let models = if models.is_empty() {
            vec![String::new(); n]
        } else if models.len() == n {
            models
        } else {
            return Err(TacError::Config("one model tag per agent".into()));
        };
        let mut setup = stream(seed, 0);
        let clients: Vec<Vec<ClientPreferences>> = (0..n).map(|_| random_clients(&mut setup)).collect();
        let holdings: Vec<GoodVector> = (0..n).map(|_| random_endowment(&mut setup)).collect();
        let mut order: Vec<usize> = (0..NUM_HOTELS).collect();
        order.shuffle(&mut setup);
        let mut close_minute = [0u32; NUM_HOTELS];
        for (k, &h) in order.iter().enumerate() {
            close_minute[h] = FIRST_CLOSE_MINUTE + k as u32;
        }
        let flights: Vec<FlightAuction> = (0..NUM_FLIGHTS)
            .map(|f| {
                let mut rng = stream(seed, 100 + f as u64);
                let y = rng.gen_range(config.flight_y_min..=config.flight_y_max);
                let ask = rng.gen_range(config.flight_initial_min..=config.flight_initial_max);
                let next_tick = rng.gen_range(config.flight_gap_min..=config.flight_gap_max);
                FlightAuction {
                    y,
                    ask,
                    next_tick,
                    rng,
                }
            })
            .collect();
        let hotels = (0..NUM_HOTELS)
            .map(|h| HotelAuction::new(Good::from_index(8 + h), close_minute[h]))
            .collect();

        let mut events = vec![Event::Header {
            schema: SCHEMA_VERSION,
            seed,
            agents,
            models,
            config: config.clone(),
        }];
        for a in 0..n {
            events.push(Event::Setup {
                agent: a,
                clients: clients[a].clone(),
                endowment: holdings[a],
            });
        }
        let mut flight_y = [0.0; NUM_FLIGHTS];
        for (f, fl) in flights.iter().enumerate() {
            flight_y[f] = fl.y;
        }
        events.push(Event::Hidden { flight_y });

        let mut game = Self {
            seed,
            config,
            t: 0,
            next_minute: 0,
            flights,
            hotels,
            ent: vec![Cda::default(); NUM_ENT],
            clients,
            holdings,
            expenditure: vec![0.0; n],
            seq: 0,
            quotes: Vec::new(),
            record: GameRecord { events },
            finished: false,
        };
        game.step(0)?;
        Ok(game)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &MarketConfig {
        &self.config
    }

    pub fn num_agents(&self) -> usize {
        self.clients.len()
    }

    pub fn time(&self) -> u32 {
        self.t
    }

    pub fn clients(&self, agent: usize) -> &[ClientPreferences] {
        &self.clients[agent]
    }

    pub fn holdings(&self, agent: usize) -> GoodVector {
        self.holdings[agent]
    }

    pub fn expenditure(&self, agent: usize) -> f64 {
        self.expenditure[agent]
    }

    pub fn quotes(&self) -> &[Quote] {
        &self.quotes
    }

    pub fn record(&self) -> &GameRecord {
        &self.record
    }

    pub fn into_record(self) -> GameRecord {
        self.record
    }

    pub fn flight_ask(&self, f: usize) -> f64 {
        self.flights[f].ask
    }

    pub fn hotel_ask(&self, h: usize) -> f64 {
        self.hotels[h].ask
    }

    pub fn hotel_closed(&self, h: usize) -> bool {
        self.hotels[h].closed
    }

    /// The agent's standing unit bids in hotel `h`, highest first.
    pub fn hotel_bids(&self, agent: usize, h: usize) -> Vec<f64> {
        self.hotels[h].agent_units(agent)
    }

    /// Units the agent would win if hotel `h` closed now.
    pub fn hotel_would_win(&self, agent: usize, h: usize) -> usize {
        HotelAuction::would_win(&self.hotels[h].units, HOTEL_ROOMS, agent)
    }

    pub fn ent_quote(&self, e: usize) -> EntQuote {
        EntQuote {
            bid: self.ent[e].best_bid(),
            ask: self.ent[e].best_ask(),
        }
    }

    /// Best prices among other agents' resting orders.
    pub fn ent_quote_excluding(&self, e: usize, agent: usize) -> EntQuote {
        let book = &self.ent[e];
        let others = |orders: &[Order]| orders.iter().filter(|o| o.agent != agent).map(|o| o.price).collect::<Vec<_>>();
        EntQuote {
            bid: others(&book.bids).into_iter().reduce(f64::max),
            ask: others(&book.asks).into_iter().reduce(f64::min),
        }
    }

    /// The agent's resting entertainment orders: `(good, side, price, qty)`.
    pub fn ent_orders(&self, agent: usize) -> Vec<(Good, Side, f64, u32)> {
        let mut out = Vec::new();
        for (e, book) in self.ent.iter().enumerate() {
            let good = Good::from_index(16 + e);
            for (side, orders) in [(Side::Buy, &book.bids), (Side::Sell, &book.asks)] {
                for o in orders.iter().filter(|o| o.agent == agent) {
                    out.push((good, side, o.price, o.qty));
                }
            }
        }
        out
    }

    fn snapshot(&self) -> Quote {
        let mut flights = [0.0; NUM_FLIGHTS];
        for (f, fl) in self.flights.iter().enumerate() {
            flights[f] = fl.ask;
        }
        let mut hotels = [HotelQuote {
            ask: 0.0,
            closed: false,
            close_minute: None,
        }; NUM_HOTELS];
        for (h, ho) in self.hotels.iter().enumerate() {
            hotels[h] = HotelQuote {
                ask: ho.ask,
                closed: ho.closed,
                close_minute: ho.closed.then_some(ho.close_minute),
            };
        }
        let mut ent = [EntQuote::default(); NUM_ENT];
        for (e, q) in ent.iter_mut().enumerate() {
            *q = self.ent_quote(e);
        }
        Quote {
            t: self.t,
            flights,
            hotels,
            ent,
        }
    }

    /// Advances the clock to `until`, processing flight ticks and every
    /// minute boundary reached on the way.
    pub fn step(&mut self, until: u32) -> Result<()> {
        if until > GAME_SECONDS {
            return Err(TacError::InvalidInput(format!("time {until} past game end")));
        }
        if until < self.t {
            return Err(TacError::InvalidInput(format!(
                "time {until} before current time {}",
                self.t
            )));
        }
        while self.next_minute <= GAME_MINUTES && 60 * self.next_minute <= until {
            let m = self.next_minute;
            let tm = 60 * m;
            for f in &mut self.flights {
                f.advance(tm, &self.config);
            }
            self.t = tm;
            if let Some(h) = self.hotels.iter().position(|h| !h.closed && h.close_minute == m) {
                self.close_hotel(h);
            }
            for h in &mut self.hotels {
                h.update_ask(HOTEL_ROOMS);
            }
            let q = self.snapshot();
            self.quotes.push(q.clone());
            self.record.events.push(Event::Quote(q));
            self.next_minute += 1;
        }
        for f in &mut self.flights {
            f.advance(until, &self.config);
        }
        self.t = until;
        Ok(())
    }

    fn close_hotel(&mut self, h: usize) {
        let n = self.num_agents();
        let floor = self.config.hotel_min_bid;
        let auction = &mut self.hotels[h];
        let (price, won, units) = auction.close(HOTEL_ROOMS, floor, n);
        let good = auction.good;
        self.record.events.push(Event::Close {
            t: self.t,
            good,
            price,
            units,
        });
        for (a, &q) in won.iter().enumerate() {
            if q > 0 {
                self.holdings[a].add(good, q);
                self.expenditure[a] += price * q as f64;
                self.record.events.push(Event::Trade {
                    t: self.t,
                    good,
                    buyer: Some(a),
                    seller: None,
                    price,
                    qty: q,
                });
            }
        }
    }

    /// Applies one agent action at the current time, logging it and its
    /// effects. Rejections are logged and returned, not raised.
    pub fn apply(&mut self, agent: usize, action: &Action) -> Result<Outcome> {
        if agent >= self.num_agents() {
            return Err(TacError::InvalidInput(format!("no agent {agent}")));
        }
        self.record.events.push(Event::Bid {
            t: self.t,
            agent,
            action: action.clone(),
        });
        let res = match action {
            Action::BuyFlight { good, price, qty } => self.buy_flight(agent, *good, *price, *qty),
            Action::HotelBid { good, units } => self.hotel_bid(agent, *good, units),
            Action::EntOrder {
                good,
                side,
                price,
                qty,
            } => self.ent_order(agent, *good, *side, *price, *qty),
            Action::EntWithdraw { good } => self.ent_withdraw(agent, *good),
        };
        Ok(match res {
            Ok(()) => Outcome::Accepted,
            Err(reason) => {
                self.record.events.push(Event::Reject {
                    t: self.t,
                    agent,
                    reason: reason.clone(),
                });
                Outcome::Rejected(reason)
            }
        })
    }

    fn open_check(&self) -> std::result::Result<(), String> {
        if self.t >= GAME_SECONDS || self.finished {
            Err("game over".into())
        } else {
            Ok(())
        }
    }

    fn buy_flight(&mut self, agent: usize, good: Good, price: f64, qty: u32) -> std::result::Result<(), String> {
        self.open_check()?;
        if !good.is_flight() {
            return Err(format!("{good} is not a flight"));
        }
        if qty == 0 || !price.is_finite() {
            return Err("empty or non-finite flight bid".into());
        }
        let ask = self.flights[good.index()].ask;
        if price < ask {
            return Err(format!("flight bid {price} below ask {ask}"));
        }
        self.holdings[agent].add(good, qty);
        self.expenditure[agent] += ask * qty as f64;
        self.record.events.push(Event::Trade {
            t: self.t,
            good,
            buyer: Some(agent),
            seller: None,
            price: ask,
            qty,
        });
        Ok(())
    }

    fn hotel_bid(&mut self, agent: usize, good: Good, units: &[f64]) -> std::result::Result<(), String> {
        self.open_check()?;
        if !good.is_hotel() {
            return Err(format!("{good} is not a hotel"));
        }
        let h = good.index() - 8;
        let auction = &self.hotels[h];
        if auction.closed {
            return Err(format!("{good} is closed"));
        }
        if units.len() > HOTEL_ROOMS {
            return Err(format!("{} units exceed {HOTEL_ROOMS} rooms", units.len()));
        }
        if let Some(p) = units
            .iter()
            .find(|p| !p.is_finite() || **p < self.config.hotel_min_bid)
        {
            return Err(format!("bad unit price {p}"));
        }
        let mut seq = self.seq;
        let (next, added) = auction.replaced(agent, units, &mut seq);
        if let Some(p) = added.iter().find(|&&p| p <= auction.ask) {
            return Err(format!("unit bid {p} does not beat ask {}", auction.ask));
        }
        let before = HotelAuction::would_win(&auction.units, HOTEL_ROOMS, agent);
        let after = HotelAuction::would_win(&next, HOTEL_ROOMS, agent);
        if after < before {
            return Err(format!("replacement would win {after} rooms instead of {before}"));
        }
        self.hotels[h].units = next;
        self.seq = seq;
        Ok(())
    }

    fn ent_order(
        &mut self,
        agent: usize,
        good: Good,
        side: Side,
        price: f64,
        qty: u32,
    ) -> std::result::Result<(), String> {
        self.open_check()?;
        if !good.is_ent() {
            return Err(format!("{good} is not an entertainment ticket"));
        }
        if qty == 0 || !price.is_finite() || price < 0.0 {
            return Err("empty or bad entertainment order".into());
        }
        let e = good.index() - 16;
        if side == Side::Sell {
            let free = self.holdings[agent].get(good).saturating_sub(self.ent[e].resting_sells(agent));
            if qty > free {
                return Err(format!("selling {qty} of {good} with only {free} free"));
            }
        }
        let order = Order {
            agent,
            price,
            qty,
            seq: self.seq,
        };
        self.seq += 1;
        let fills = self.ent[e].submit(side, order);
        for (buyer, seller, p, q) in fills {
            self.holdings[buyer].add(good, q);
            self.holdings[seller][good.index()] -= q;
            self.expenditure[buyer] += p * q as f64;
            self.expenditure[seller] -= p * q as f64;
            self.record.events.push(Event::Trade {
                t: self.t,
                good,
                buyer: Some(buyer),
                seller: Some(seller),
                price: p,
                qty: q,
            });
        }
        Ok(())
    }

    fn ent_withdraw(&mut self, agent: usize, good: Good) -> std::result::Result<(), String> {
        self.open_check()?;
        if !good.is_ent() {
            return Err(format!("{good} is not an entertainment ticket"));
        }
        self.ent[good.index() - 16].withdraw(agent);
        Ok(())
    }

    /// Runs to the end of the game and scores every agent: the value of the
    /// best allocation of its final holdings minus its net expenditure.
    pub fn finish(&mut self) -> Result<Vec<(f64, f64, f64)>> {
        if self.finished {
            return Ok(self.record.scores());
        }
        self.step(GAME_SECONDS)?;
        self.finished = true;
        let mut out = Vec::new();
        for a in 0..self.num_agents() {
            let utility = allocator::value(&self.holdings[a], &self.clients[a])?;
            let expenditure = self.expenditure[a];
            let score = utility - expenditure;
            self.record.events.push(Event::Score {
                agent: a,
                utility,
                expenditure,
                score,
            });
            out.push((utility, expenditure, score));
        }
        Ok(out)
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }
}

/// Re-simulates a record from its seed and logged actions and compares the
/// regenerated event stream line by line. Returns the first differing line
/// (1-based) with both versions, or `None` when identical.
pub fn replay(record: &GameRecord) -> Result<Option<(usize, String, String)>> {
    let Some(Event::Header {
        seed,
        agents,
        models,
        config,
        ..
    }) = record.events.first().cloned()
    else {
        return Err(TacError::InvalidInput("record has no header".into()));
    };
    let mut game = Game::with_models(seed, agents, models, config)?;
    let mut finished = false;
    for e in &record.events {
        match e {
            Event::Bid { t, agent, action } => {
                game.step(*t)?;
                game.apply(*agent, action)?;
            }
            Event::Score { .. } if !finished => {
                game.finish()?;
                finished = true;
            }
            _ => {}
        }
    }
    let ours = game.into_record();
    let a: Vec<String> = record.to_jsonl().lines().map(String::from).collect();
    let b: Vec<String> = ours.to_jsonl().lines().map(String::from).collect();
    for k in 0..a.len().max(b.len()) {
        let x = a.get(k).cloned().unwrap_or_default();
        let y = b.get(k).cloned().unwrap_or_default();
        if x != y {
            return Ok(Some((k + 1, x, y)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flight_ticks_respect_bounds_and_gaps() {
        let cfg = MarketConfig::default();
        for seed in 0..50 {
            let mut rng = stream(seed, 7);
            let mut f = FlightAuction {
                y: rng.gen_range(10.0..=90.0),
                ask: 800.0,
                next_tick: 24,
                rng,
            };
            let mut last = 0;
            while f.next_tick <= GAME_SECONDS {
                let tick = f.next_tick;
                f.advance(tick, &cfg);
                assert!((cfg.flight_floor..=cfg.flight_ceiling).contains(&f.ask));
                let gap = f.next_tick - tick;
                assert!((24..=32).contains(&gap), "gap {gap}");
                assert!(tick > last);
                last = tick;
            }
        }
    }

    #[test]
    fn ceiling_holds_under_upward_moves() {
        let cfg = MarketConfig {
            flight_gap_min: 1,
            flight_gap_max: 1,
            ..MarketConfig::default()
        };
        let mut f = FlightAuction {
            y: 90.0,
            ask: 800.0,
            next_tick: 700,
            rng: stream(1, 1),
        };
        f.advance(720, &cfg);
        assert!(f.ask <= 800.0);
    }

    #[test]
    fn trend_starts_at_ten() {
        for y in [10.0, 50.0, 90.0] {
            assert_eq!(flight_x(y, 0), 10.0);
            assert_eq!(flight_x(y, GAME_SECONDS), y);
        }
    }
}
