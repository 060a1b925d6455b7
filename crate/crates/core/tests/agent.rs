use proptest::prelude::*;
use tacbid::agent::{partition_budget, AdaptiveAgent, Agent, AgentConfig, AgentView, EarlyBidder};
use tacbid::allocator::{self, PriceSchedule};
use tacbid::goods::{flight_good, GoodVector, NUM_FLIGHTS};
use tacbid::market::{Action, Event, Game, MarketConfig, GAME_MINUTES, GAME_SECONDS};
use tacbid::predictors::{FlightPriceModel, Predictor, PredictorVariant};

fn cheap() -> AgentConfig {
    AgentConfig {
        predictor: PredictorVariant::CurrentBid,
        hotel_scenarios: 4,
        flight_scenarios: 2,
        ent_scenarios: 2,
        ev_orders: 1,
        ..Default::default()
    }
}

fn adaptive(config: AgentConfig, seed: u64) -> AdaptiveAgent {
    AdaptiveAgent::new(config, Predictor::current_bid(), FlightPriceModel::default(), seed)
}

fn new_game(seed: u64, n: usize) -> Game {
    Game::new(seed, (0..n).map(|k| format!("a{k}")).collect(), MarketConfig::default()).unwrap()
}

/// Lets every agent act at minutes `from..to`, in index order.
fn drive(game: &mut Game, agents: &mut [Box<dyn Agent>], from: u32, to: u32) {
    for m in from..to {
        game.step(60 * m).unwrap();
        for (k, a) in agents.iter_mut().enumerate() {
            for action in a.act(&AgentView::new(game, k)).unwrap() {
                game.apply(k, &action).unwrap();
            }
        }
    }
}

fn flight_buys(actions: &[Action]) -> [u32; NUM_FLIGHTS] {
    let mut q = [0; NUM_FLIGHTS];
    for a in actions {
        if let Action::BuyFlight { good, qty, .. } = a {
            q[good.index()] += qty;
        }
    }
    q
}

#[test]
fn last_minute_buys_every_flight_the_plan_needs() {
    for seed in 0..3 {
        let mut game = new_game(seed, 4);
        let mut agents: Vec<Box<dyn Agent>> = (0..4).map(|k| Box::new(adaptive(cheap(), k)) as Box<dyn Agent>).collect();
        drive(&mut game, &mut agents, 0, GAME_MINUTES - 1);
        game.step(60 * (GAME_MINUTES - 1)).unwrap();
        assert!((0..8).all(|h| game.hotel_closed(h)), "all rooms close before the last minute");
        let view = AgentView::new(&game, 0);
        let actions = agents[0].act(&view).unwrap();
        assert!(!actions.iter().any(|a| matches!(a, Action::HotelBid { .. })));

        let hold = game.holdings(0);
        let mut y = PriceSchedule::unavailable();
        for f in 0..NUM_FLIGHTS {
            y.set(flight_good(f), game.flight_ask(f));
        }
        let plan = allocator::opt(&hold, &y, game.clients(0)).unwrap();
        let bought = flight_buys(&actions);
        let mut after = hold;
        let mut cost = 0.0;
        for (f, &q) in bought.iter().enumerate() {
            after.add(flight_good(f), q);
            cost += q as f64 * game.flight_ask(f);
        }
        for a in &actions {
            if let Action::BuyFlight { good, price, .. } = a {
                assert_eq!(*price, game.flight_ask(good.index()));
            }
        }
        let reached = allocator::opt(&after, &PriceSchedule::unavailable(), game.clients(0)).unwrap();
        assert!(
            (reached.objective - cost - plan.objective).abs() < 1e-6,
            "seed {seed}: buying {bought:?} reaches {} - {cost}, plan {}",
            reached.objective,
            plan.objective
        );
    }
}

#[test]
fn longer_lookahead_never_delays_a_purchase() {
    for seed in 0..6 {
        let mut game = new_game(100 + seed, 4);
        let mut others: Vec<Box<dyn Agent>> = (0..4).map(|k| Box::new(adaptive(cheap(), 50 + k)) as Box<dyn Agent>).collect();
        let minute = (seed % 3) as u32 * 2;
        drive(&mut game, &mut others, 0, minute);
        game.step(60 * minute).unwrap();
        let act = |lookahead| {
            let config = AgentConfig {
                flight_lookahead: lookahead,
                ..cheap()
            };
            flight_buys(&adaptive(config, seed).act(&AgentView::new(&game, 0)).unwrap())
        };
        let (two, four) = (act(2), act(4));
        for f in 0..NUM_FLIGHTS {
            assert!(four[f] >= two[f], "seed {seed} flight {f}: {four:?} vs {two:?}");
        }
    }
}

#[test]
fn postpone_cost_grows_with_the_horizon() {
    let model = FlightPriceModel::default();
    for first in [250.0, 320.0, 400.0] {
        for t in [60, 240, 480] {
            for latest in [first - 30.0, first, first + 60.0] {
                let c2 = model.postpone_cost((0, first), (t, latest), 2);
                let c4 = model.postpone_cost((0, first), (t, latest), 4);
                assert!(c4 >= c2 - 1e-9, "{first} {t} {latest}: {c4} < {c2}");
            }
        }
    }
}

proptest! {
    #[test]
    fn budget_split_is_floor_or_ceiling(budget in 1usize..200, k in 1usize..9) {
        let parts = partition_budget(budget, k);
        prop_assert_eq!(parts.len(), k);
        prop_assert_eq!(parts.iter().sum::<usize>(), budget);
        for p in parts {
            prop_assert!(p == budget / k || p == budget.div_ceil(k));
        }
    }
}

#[test]
fn early_bidder_bids_once_at_1001() {
    let mut game = new_game(7, 8);
    let predictor = Predictor::new(PredictorVariant::SimpleEv, None, None);
    let config = AgentConfig {
        price_impact: false,
        ..cheap()
    };
    let mut agents: Vec<Box<dyn Agent>> = (0..8)
        .map(|k| Box::new(EarlyBidder::new(predictor.clone(), config.clone(), k)) as Box<dyn Agent>)
        .collect();
    drive(&mut game, &mut agents, 0, GAME_MINUTES);
    game.finish().unwrap();
    let mut hotel_bids = 0;
    for e in &game.record().events {
        if let Event::Bid { t, action, .. } = e {
            assert_eq!(*t, 0, "bid after the first decision: {action:?}");
            if let Action::HotelBid { units, .. } = action {
                assert!(units.iter().all(|&u| u == 1001.0));
                hotel_bids += 1;
            }
        }
    }
    assert!(hotel_bids > 0);
}

#[test]
fn adaptive_agents_keep_their_invariants() {
    let mut game = new_game(11, 6);
    let mut agents: Vec<Box<dyn Agent>> = (0..6).map(|k| Box::new(adaptive(cheap(), k)) as Box<dyn Agent>).collect();
    drive(&mut game, &mut agents, 0, GAME_MINUTES);
    game.finish().unwrap();
    for a in &agents {
        let c = a.counters();
        assert!(c.checks > 0);
        assert_eq!(c.violations(), 0, "{c:?}");
    }
    for e in &game.record().events {
        if let Event::Bid {
            action: Action::HotelBid { units, .. },
            ..
        } = e
        {
            assert!(units.windows(2).all(|w| w[0] >= w[1]), "{units:?}");
        }
    }
}

#[test]
fn entertainment_margin_reaches_its_end_value() {
    let c = AgentConfig::default();
    assert_eq!(c.ent_margin(0), c.ent_margin_start);
    assert_eq!(c.ent_margin(GAME_SECONDS), c.ent_margin_end);
    assert!(c.ent_margin(360) < c.ent_margin_start && c.ent_margin(360) > c.ent_margin_end);
}

#[test]
fn trajectories_repeat_for_equal_seeds() {
    let run = || {
        let mut game = new_game(3, 3);
        let mut agents: Vec<Box<dyn Agent>> = (0..3).map(|k| Box::new(adaptive(cheap(), 9 + k)) as Box<dyn Agent>).collect();
        drive(&mut game, &mut agents, 0, GAME_MINUTES);
        game.finish().unwrap();
        game.into_record().to_jsonl()
    };
    assert_eq!(run(), run());
}

#[test]
fn sell_orders_never_exceed_holdings() {
    let mut game = new_game(21, 4);
    let mut agents: Vec<Box<dyn Agent>> = (0..4).map(|k| Box::new(adaptive(cheap(), k)) as Box<dyn Agent>).collect();
    for m in 0..GAME_MINUTES {
        game.step(60 * m).unwrap();
        for (k, a) in agents.iter_mut().enumerate() {
            let hold: GoodVector = game.holdings(k);
            let actions = a.act(&AgentView::new(&game, k)).unwrap();
            for action in &actions {
                if let Action::EntOrder { good, side, qty, .. } = action {
                    if *side == tacbid::market::Side::Sell {
                        assert!(*qty <= hold.get(*good));
                    }
                }
                game.apply(k, action).unwrap();
            }
        }
    }
}
