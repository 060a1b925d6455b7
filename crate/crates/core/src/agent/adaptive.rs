//! The scenario-sampling agent: flight timing, hotel marginal values and
//! entertainment trading, all from LP values over sampled hotel prices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Agent, AgentConfig, AgentView, AssertionCounters};
use crate::allocator::{Allocator, PriceSchedule};
use crate::error::Result;
use crate::goods::{ent_good, flight_good, hotel_good, Good, GoodVector, NUM_ENT, NUM_FLIGHTS, NUM_GOODS, NUM_HOTELS};
use crate::market::{Action, Side, FIRST_CLOSE_MINUTE, GAME_MINUTES, GAME_SECONDS};
use crate::predictors::{FlightPriceModel, Predictor, Snapshot};

const REL_TOL: f64 = 1e-9;
const ABS_TOL: f64 = 1e-6;

fn tol(v: f64) -> f64 {
    ABS_TOL + REL_TOL * v.abs()
}

/// `V_0..V_n` for one good in one scenario, with the scenario's price of
/// that good.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioValues {
    pub price: f64,
    pub values: Vec<f64>,
}

impl ScenarioValues {
    /// Value of ending the scenario with the units of `bids` that reach the
    /// price, each paying it.
    pub fn outcome(&self, bids: &[f64]) -> f64 {
        let won = bids.iter().filter(|&&b| b >= self.price).count();
        let v = self.values[won.min(self.values.len() - 1)];
        v - won as f64 * self.price
    }
}

/// Splits `budget` samples over `k` hotels as evenly as possible, earlier
/// hotels taking the remainder.
pub fn partition_budget(budget: usize, k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    (0..k).map(|i| budget / k + usize::from(i < budget % k)).collect()
}

fn same_units(a: &[f64], b: &[f64]) -> bool {
    let sorted = |x: &[f64]| {
        let mut v = x.to_vec();
        v.sort_by(|p, q| q.total_cmp(p));
        v
    };
    sorted(a) == sorted(b)
}

/// Whether `candidate` should replace the standing bid `existing`: only
/// when its mean outcome over the scenarios is strictly higher.
pub fn maybe_replace_bid(existing: &[f64], candidate: &[f64], scenarios: &[ScenarioValues]) -> bool {
    if same_units(existing, candidate) || scenarios.is_empty() {
        return false;
    }
    let n = scenarios.len() as f64;
    let keep: f64 = scenarios.iter().map(|s| s.outcome(existing)).sum::<f64>() / n;
    let replace: f64 = scenarios.iter().map(|s| s.outcome(candidate)).sum::<f64>() / n;
    replace > keep + tol(keep)
}

/// Hotel unit bids from mean marginal values: one unit per copy valued at
/// least $1 above the ask.
pub fn unit_bids(marginal: &[f64], ask: f64, min_bid: f64) -> Vec<f64> {
    marginal
        .iter()
        .copied()
        .take_while(|&m| m >= ask + 1.0 && m >= min_bid)
        .collect()
}

pub struct AdaptiveAgent {
    config: AgentConfig,
    predictor: Predictor,
    flight_model: FlightPriceModel,
    rng: ChaCha8Rng,
    /// Allocators for the current decision: without and with columns for
    /// entertainment tickets not held.
    allocator: Option<Allocator>,
    ent_allocator: Option<Allocator>,
    counters: AssertionCounters,
}

#[derive(Clone, Copy)]
enum Lp {
    Main,
    Ent,
}

/// Prices of one sampled scenario.
struct Scenario {
    close: [f64; NUM_HOTELS],
    prices: [f64; NUM_HOTELS],
}

impl AdaptiveAgent {
    pub fn new(config: AgentConfig, predictor: Predictor, flight_model: FlightPriceModel, seed: u64) -> Self {
        Self {
            config,
            predictor,
            flight_model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            allocator: None,
            ent_allocator: None,
            counters: AssertionCounters::default(),
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    fn sample(&mut self, snap: &Snapshot) -> Scenario {
        let (close, prices) = self.predictor.scenario(snap, &mut self.rng);
        for h in snap.open_rooms() {
            self.counters.checks += 1;
            if prices[h] < snap.hotel_price[h] - tol(snap.hotel_price[h]) {
                self.counters.prediction_floor += 1;
                log::warn!("prediction {} below ask {} for room {h}", prices[h], snap.hotel_price[h]);
            }
        }
        Scenario {
            close: close.map(f64::from),
            prices,
        }
    }

    fn schedule(&self, snap: &Snapshot, prices: &[f64; NUM_HOTELS], close: &[f64; NUM_HOTELS]) -> PriceSchedule {
        let mut y = PriceSchedule::unavailable();
        for f in 0..NUM_FLIGHTS {
            y.set(flight_good(f), snap.flights[f]);
        }
        for h in snap.open_rooms() {
            y.set_with_impact(hotel_good(h), prices[h], self.config.impact_for(h, close[h]));
        }
        y
    }

    /// Standing own unit bids that reach the given prices, counted as
    /// owned rooms.
    fn won_bids(snap: &Snapshot, bids: &[Vec<f64>], prices: &[f64; NUM_HOTELS], except: Option<usize>) -> GoodVector {
        let mut extra = GoodVector::zero();
        for h in snap.open_rooms() {
            if Some(h) == except {
                continue;
            }
            let won = bids[h].iter().filter(|&&b| b > prices[h]).count() as u32;
            extra.add(hotel_good(h), won);
        }
        extra
    }

    fn lp(&mut self, which: Lp, h: &GoodVector, y: &PriceSchedule) -> Option<f64> {
        let alloc = match which {
            Lp::Main => &mut self.allocator,
            Lp::Ent => &mut self.ent_allocator,
        };
        match alloc.as_mut().expect("allocators are built before use").lp_value(h, y) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("scenario dropped: {e}");
                None
            }
        }
    }

    /// Builds the allocators for one decision point.
    fn prepare(&mut self, view: &AgentView, snap: &Snapshot, hold: &GoodVector) {
        let buyable: [bool; NUM_GOODS] = std::array::from_fn(|g| {
            Good::from_index(g).is_flight() || (g >= 8 && g < 16 && snap.is_open(g - 8))
        });
        let obtainable: [bool; NUM_GOODS] = std::array::from_fn(|g| buyable[g] || hold[g] > 0);
        let with_ent: [bool; NUM_GOODS] = std::array::from_fn(|g| obtainable[g] || Good::from_index(g).is_ent());
        self.allocator = Some(Allocator::new(view.clients(), &obtainable, &buyable));
        self.ent_allocator = Some(Allocator::new(view.clients(), &with_ent, &buyable));
    }

    /// The entertainment step alone, as used by agents that fix their travel
    /// plans early.
    pub fn trade_entertainment(&mut self, view: &AgentView) -> Result<Vec<Action>> {
        if view.minute() >= GAME_MINUTES || view.time() >= GAME_SECONDS {
            return Ok(Vec::new());
        }
        let snap = view.snapshot();
        let hold = view.holdings();
        self.prepare(view, &snap, &hold);
        let bids: Vec<Vec<f64>> = (0..NUM_HOTELS).map(|h| view.my_hotel_bids(h)).collect();
        let mut actions = Vec::new();
        self.entertainment(view, &snap, &hold, &bids, &mut actions);
        Ok(actions)
    }

    fn flight_decisions(
        &mut self,
        view: &AgentView,
        snap: &Snapshot,
        hold: &GoodVector,
        bids: &[Vec<f64>],
        needs: &[(usize, u32)],
    ) -> Vec<(usize, u32)> {
        if needs.is_empty() {
            return Vec::new();
        }
        let mut benefit: Vec<Vec<f64>> = needs.iter().map(|&(_, n)| vec![0.0; n as usize + 1]).collect();
        let mut used = 0usize;
        for _ in 0..self.config.flight_scenarios {
            let s = self.sample(snap);
            let base = hold.plus(&Self::won_bids(snap, bids, &s.prices, None));
            let y = self.schedule(snap, &s.prices, &s.close);
            let Some(v0) = self.lp(Lp::Main, &base, &y) else { continue };
            let mut rows = Vec::with_capacity(needs.len());
            let mut ok = true;
            'goods: for &(f, n) in needs {
                let good = flight_good(f);
                let mut v = vec![v0];
                for i in 1..=n {
                    let mut h = base;
                    h.add(good, i);
                    let Some(x) = self.lp(Lp::Main, &h, &y) else {
                        ok = false;
                        break 'goods;
                    };
                    v.push(x - i as f64 * snap.flights[f]);
                }
                rows.push(v);
            }
            if !ok {
                continue;
            }
            used += 1;
            for (row, acc) in rows.iter().zip(&mut benefit) {
                for i in 1..row.len() {
                    self.counters.checks += 1;
                    if row[i] > row[i - 1] + tol(row[i - 1]) {
                        self.counters.flight_order += 1;
                        log::warn!("flight values increase: {row:?}");
                    }
                    acc[i] += row[i - 1] - row[i];
                }
            }
        }
        if used == 0 {
            return Vec::new();
        }
        let t = view.time();
        let first = view.first();
        let mut buys = Vec::new();
        for (&(f, n), acc) in needs.iter().zip(&benefit) {
            let cost = self.flight_model.postpone_cost(
                (first.t, first.flights[f]),
                (t, snap.flights[f]),
                self.config.flight_lookahead,
            );
            let k = (1..=n as usize)
                .take_while(|&i| cost >= acc[i] / used as f64 - tol(cost))
                .count() as u32;
            if k > 0 {
                buys.push((f, k));
            }
        }
        buys
    }

    #[allow(clippy::too_many_arguments)]
    fn hotel_bids(
        &mut self,
        view: &AgentView,
        snap: &Snapshot,
        hold: &GoodVector,
        bids: &[Vec<f64>],
        expected: &[f64; NUM_HOTELS],
        actions: &mut Vec<Action>,
    ) {
        let mut open = snap.open_rooms();
        open.sort_by(|&a, &b| expected[a].total_cmp(&expected[b]).then(a.cmp(&b)));
        let parts = partition_budget(self.config.hotel_scenarios, open.len());
        let n = self.config.max_units as usize;
        for (&h, &samples) in open.iter().zip(&parts) {
            let good = hotel_good(h);
            let mut scenarios = Vec::with_capacity(samples);
            for _ in 0..samples {
                let s = self.sample(snap);
                let base = hold.plus(&Self::won_bids(snap, bids, &s.prices, Some(h)));
                let mut y = self.schedule(snap, &s.prices, &s.close);
                y.remove(good);
                let Some(v0) = self.lp(Lp::Main, &base, &y) else { continue };
                let mut v = vec![v0];
                let mut ok = true;
                for i in 1..=n {
                    let prev = v[i - 1];
                    if i >= 2 && prev - v[i - 2] <= tol(prev) {
                        // concave: no further copy adds value
                        v.push(prev);
                        continue;
                    }
                    let mut hi = base;
                    hi.add(good, i as u32);
                    match self.lp(Lp::Main, &hi, &y) {
                        Some(x) => v.push(x),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                for i in 1..=n {
                    self.counters.checks += 1;
                    if v[i] < v[i - 1] - tol(v[i - 1]) {
                        self.counters.hotel_monotone += 1;
                        log::warn!("hotel values decrease: {v:?}");
                    }
                    if i >= 2 && v[i] - v[i - 1] > v[i - 1] - v[i - 2] + tol(v[i]) {
                        self.counters.hotel_diminishing += 1;
                        log::warn!("hotel value differences increase: {v:?}");
                    }
                }
                scenarios.push(ScenarioValues {
                    price: s.prices[h],
                    values: v,
                });
            }
            if scenarios.is_empty() {
                continue;
            }
            let m = scenarios.len() as f64;
            let marginal: Vec<f64> = (1..=n)
                .map(|i| scenarios.iter().map(|s| s.values[i] - s.values[i - 1]).sum::<f64>() / m)
                .collect();
            let ask = snap.hotel_price[h];
            let min_bid = view.hotel_min_bid();
            let mut candidate = unit_bids(&marginal, ask, min_bid);
            let keep_winning = view.hotel_would_win(h);
            while candidate.len() < keep_winning {
                candidate.push((ask + 1.0).max(min_bid));
            }
            for i in 1..candidate.len() {
                candidate[i] = candidate[i].min(candidate[i - 1]);
            }
            let existing = &bids[h];
            let submit = if existing.is_empty() {
                !candidate.is_empty()
            } else {
                maybe_replace_bid(existing, &candidate, &scenarios)
            };
            if submit {
                actions.push(Action::HotelBid { good, units: candidate });
            }
        }
    }

    fn entertainment(
        &mut self,
        view: &AgentView,
        snap: &Snapshot,
        hold: &GoodVector,
        bids: &[Vec<f64>],
        actions: &mut Vec<Action>,
    ) {
        let mut withdrawn = Vec::new();
        for (good, ..) in view.my_ent_orders() {
            if !withdrawn.contains(&good) {
                withdrawn.push(good);
                actions.push(Action::EntWithdraw { good });
            }
        }
        let mut scen = Vec::with_capacity(self.config.ent_scenarios);
        for _ in 0..self.config.ent_scenarios {
            let s = self.sample(snap);
            let extra = Self::won_bids(snap, bids, &s.prices, None);
            let y = self.schedule(snap, &s.prices, &s.close);
            scen.push((extra, y));
        }
        let mut work = *hold;
        let margin = self.config.ent_margin(view.time());
        let mut first = 0;
        while first < NUM_ENT {
            // Per type and scenario: (V_{n-1}, V_n, V_{n+1}) at the current holdings.
            let mut vals: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); NUM_ENT];
            for (extra, y) in &scen {
                let h = work.plus(extra);
                let Some(vn) = self.lp(Lp::Ent, &h, y) else { continue };
                for (e, out) in vals.iter_mut().enumerate().skip(first) {
                    let good = ent_good(e);
                    let mut up = h;
                    up.add(good, 1);
                    let Some(vp) = self.lp(Lp::Ent, &up, y) else { continue };
                    let vm = if work.get(good) > 0 {
                        let mut down = h;
                        down[good.index()] -= 1;
                        match self.lp(Lp::Ent, &down, y) {
                            Some(v) => v,
                            None => continue,
                        }
                    } else {
                        vn
                    };
                    self.counters.checks += 1;
                    if vm > vn + tol(vn) || vn > vp + tol(vp) {
                        self.counters.ent_order += 1;
                        log::warn!("entertainment values out of order: {vm} {vn} {vp}");
                    }
                    out.push((vm, vn, vp));
                }
            }
            let mut next = NUM_ENT;
            for (e, v) in vals.iter().enumerate().skip(first) {
                if v.is_empty() {
                    continue;
                }
                let good = ent_good(e);
                let n = work.get(good);
                let used = v.len() as f64;
                let buy = v.iter().map(|x| x.2 - x.1).sum::<f64>() / used;
                let sell = v.iter().map(|x| x.1 - x.0).sum::<f64>() / used;
                let quote = view.ent_quote(e);
                let mut changed = false;
                let bid = buy - margin;
                if bid > 0.0 {
                    actions.push(Action::EntOrder {
                        good,
                        side: Side::Buy,
                        price: bid,
                        qty: 1,
                    });
                    if quote.ask.is_some_and(|a| a <= bid) {
                        work.add(good, 1);
                        changed = true;
                    }
                }
                if n > 0 {
                    let ask = sell + margin;
                    actions.push(Action::EntOrder {
                        good,
                        side: Side::Sell,
                        price: ask,
                        qty: 1,
                    });
                    if !changed && quote.bid.is_some_and(|b| b >= ask) {
                        work[good.index()] -= 1;
                        changed = true;
                    }
                }
                if changed {
                    next = e + 1;
                    break;
                }
            }
            first = next;
        }
    }
}

impl Agent for AdaptiveAgent {
    fn act(&mut self, view: &AgentView) -> Result<Vec<Action>> {
        let minute = view.minute();
        if minute >= GAME_MINUTES || view.time() >= GAME_SECONDS {
            return Ok(Vec::new());
        }
        let snap = view.snapshot();
        let mut hold = view.holdings();
        self.prepare(view, &snap, &hold);
        let bids: Vec<Vec<f64>> = (0..NUM_HOTELS).map(|h| view.my_hotel_bids(h)).collect();
        let mut actions = Vec::new();

        let last = minute == GAME_MINUTES - 1;
        let open = snap.open_rooms();
        let hotel_phase = minute + 1 >= FIRST_CLOSE_MINUTE && !open.is_empty();
        if minute == 0 || hotel_phase || last {
            let expected = self.predictor.expected_prices(&snap, self.config.ev_orders, &mut self.rng);
            let k = open.len() as f64;
            let mean_close = (GAME_MINUTES as f64 - k + GAME_MINUTES as f64 - 1.0) / 2.0;
            let close = [mean_close; NUM_HOTELS];
            let y = self.schedule(&snap, &expected, &close);
            let h_exp = hold.plus(&Self::won_bids(&snap, &bids, &expected, None));
            let gstar = self.allocator.as_mut().expect("built above").opt(&h_exp, &y)?;
            let needs: Vec<(usize, u32)> = (0..NUM_FLIGHTS)
                .map(|f| (f, gstar.purchases.get(flight_good(f))))
                .filter(|&(_, n)| n > 0)
                .collect();
            let buys = if last {
                needs
            } else {
                self.flight_decisions(view, &snap, &hold, &bids, &needs)
            };
            for (f, q) in buys {
                let good = flight_good(f);
                actions.push(Action::BuyFlight {
                    good,
                    price: snap.flights[f],
                    qty: q,
                });
                hold.add(good, q);
            }
            if hotel_phase {
                self.hotel_bids(view, &snap, &hold, &bids, &expected, &mut actions);
            }
        }
        self.entertainment(view, &snap, &hold, &bids, &mut actions);
        Ok(actions)
    }

    fn counters(&self) -> AssertionCounters {
        self.counters
    }
}
