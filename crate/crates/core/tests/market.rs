use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tacbid::goods::{Good, HotelType, NUM_GOODS};
use tacbid::market::*;

fn names(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("a{k}")).collect()
}

fn game(seed: u64, n: usize) -> Game {
    Game::new(seed, names(n), MarketConfig::default()).unwrap()
}

fn hotel(h: usize) -> Good {
    Good::from_index(8 + h)
}

#[test]
fn same_seed_same_game() {
    let a = game(42, 8);
    let b = game(42, 8);
    assert_eq!(a.record().to_jsonl(), b.record().to_jsonl());
    assert_ne!(a.record().to_jsonl(), game(43, 8).record().to_jsonl());
}

#[test]
fn endowments_are_four_four_two_two() {
    for seed in 0..100 {
        let g = game(seed, 8);
        for a in 0..8 {
            let h = g.holdings(a);
            let mut q: Vec<u32> = (16..NUM_GOODS).map(|i| h[i]).filter(|&x| x > 0).collect();
            q.sort();
            assert_eq!(q, vec![2, 2, 4, 4]);
            assert_eq!((0..16).map(|i| h[i]).sum::<u32>(), 0);
        }
    }
}

#[test]
fn client_parameters_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        for c in random_clients(&mut rng) {
            assert!((50..=150).contains(&c.hp));
            assert!((1..=4).contains(&c.iad) && c.idd > c.iad && c.idd <= 5);
            assert!(c.ev.iter().all(|&v| v <= 200));
        }
    }
}

#[test]
fn one_hotel_closes_each_minute() {
    for seed in 0..20 {
        let mut g = game(seed, 2);
        g.finish().unwrap();
        let closes = g.record().hotel_closes();
        let mut minutes: Vec<u32> = closes.iter().map(|c| c.unwrap().1).collect();
        minutes.sort();
        assert_eq!(minutes, (4..=11).collect::<Vec<_>>());
        for q in g.quotes() {
            let closed = q.hotels.iter().filter(|h| h.closed).count() as u32;
            assert_eq!(closed, q.minute().saturating_sub(3).min(8));
        }
    }
}

#[test]
fn flight_clears_at_ask() {
    let mut g = game(1, 2);
    g.step(90).unwrap();
    let ask = g.flight_ask(2);
    let good = Good::InFlight(3);
    let out = g.apply(0, &Action::BuyFlight { good, price: ask + 100.0, qty: 2 }).unwrap();
    assert_eq!(out, Outcome::Accepted);
    assert_eq!(g.holdings(0).get(good), 2);
    assert_eq!(g.expenditure(0), 2.0 * ask);
    let out = g.apply(1, &Action::BuyFlight { good, price: ask - 1.0, qty: 1 }).unwrap();
    assert!(matches!(out, Outcome::Rejected(_)));
    assert_eq!(g.holdings(1).get(good), 0);
}

#[test]
fn flight_quotes_stay_in_range() {
    for seed in 0..30 {
        let mut g = game(seed, 1);
        g.finish().unwrap();
        for q in g.quotes() {
            assert!(q.flights.iter().all(|&p| (150.0..=800.0).contains(&p)));
        }
        assert_eq!(g.quotes().len(), 13);
    }
}

#[test]
fn hotel_ask_moves_only_on_the_minute() {
    let mut g = game(3, 8);
    g.step(60).unwrap();
    for a in 0..8 {
        let out = g.apply(a, &Action::HotelBid { good: hotel(0), units: vec![100.0 + a as f64; 2] }).unwrap();
        assert_eq!(out, Outcome::Accepted);
    }
    assert_eq!(g.hotel_ask(0), 0.0);
    g.step(119).unwrap();
    assert_eq!(g.hotel_ask(0), 0.0);
    g.step(120).unwrap();
    assert_eq!(g.hotel_ask(0), 100.0);
}

#[test]
fn hotel_bids_must_beat_the_ask() {
    let mut g = game(4, 8);
    for a in 0..8 {
        g.apply(a, &Action::HotelBid { good: hotel(1), units: vec![150.0; 2] }).unwrap();
    }
    g.step(60).unwrap();
    assert_eq!(g.hotel_ask(1), 150.0);
    let bid = |p: f64| Action::HotelBid { good: hotel(1), units: vec![150.0, 150.0, p] };
    assert!(matches!(g.apply(0, &bid(150.0)).unwrap(), Outcome::Rejected(_)));
    assert_eq!(g.apply(0, &bid(151.0)).unwrap(), Outcome::Accepted);
}

#[test]
fn cannot_reduce_rooms_won() {
    let mut g = game(5, 2);
    g.apply(0, &Action::HotelBid { good: hotel(2), units: vec![200.0; 3] }).unwrap();
    assert_eq!(g.hotel_would_win(0, 2), 3);
    let fewer = Action::HotelBid { good: hotel(2), units: vec![200.0; 2] };
    assert!(matches!(g.apply(0, &fewer).unwrap(), Outcome::Rejected(_)));
    // lowering prices keeps all three rooms with only two bids standing
    let lower = Action::HotelBid { good: hotel(2), units: vec![120.0, 120.0, 120.0] };
    assert_eq!(g.apply(0, &lower).unwrap(), Outcome::Accepted);
    assert_eq!(g.hotel_bids(0, 2), vec![120.0; 3]);
}

#[test]
fn worked_tie_example_through_market() {
    let mut g = game(6, 3);
    g.apply(0, &Action::HotelBid { good: hotel(5), units: vec![300.0; 15] }).unwrap();
    g.apply(1, &Action::HotelBid { good: hotel(5), units: vec![150.0] }).unwrap();
    g.apply(2, &Action::HotelBid { good: hotel(5), units: vec![150.0] }).unwrap();
    g.finish().unwrap();
    let (price, _) = g.record().hotel_closes()[5].unwrap();
    assert_eq!(price, 150.0);
    assert_eq!(g.holdings(0).get(Good::Hotel(HotelType::Shanties, 2)), 15);
    assert_eq!(g.holdings(1).get(Good::Hotel(HotelType::Shanties, 2)), 1);
    assert_eq!(g.holdings(2).get(Good::Hotel(HotelType::Shanties, 2)), 0);
    assert_eq!(g.expenditure(0), 15.0 * 150.0);
}

/// An agent owning at least `q` of some ticket, and that ticket.
fn owner(g: &Game, q: u32) -> (usize, Good) {
    for a in 0..g.num_agents() {
        for i in 16..NUM_GOODS {
            if g.holdings(a)[i] >= q {
                return (a, Good::from_index(i));
            }
        }
    }
    unreachable!()
}

#[test]
fn cda_trades_at_resting_price() {
    let mut g = game(7, 2);
    let (seller, good) = owner(&g, 2);
    let buyer = 1 - seller;
    let sell = Action::EntOrder { good, side: Side::Sell, price: 40.0, qty: 1 };
    assert_eq!(g.apply(seller, &sell).unwrap(), Outcome::Accepted);
    let low = Action::EntOrder { good, side: Side::Buy, price: 35.0, qty: 1 };
    g.apply(buyer, &low).unwrap();
    let e = good.index() - 16;
    assert_eq!(g.ent_quote(e), EntQuote { bid: Some(35.0), ask: Some(40.0) });
    let high = Action::EntOrder { good, side: Side::Buy, price: 45.0, qty: 1 };
    let before = g.holdings(buyer).get(good);
    g.apply(buyer, &high).unwrap();
    assert_eq!(g.holdings(buyer).get(good), before + 1);
    assert_eq!(g.expenditure(buyer), 40.0);
    assert_eq!(g.expenditure(seller), -40.0);
    g.apply(buyer, &Action::EntWithdraw { good }).unwrap();
    assert_eq!(g.ent_quote(e), EntQuote { bid: None, ask: None });
}

#[test]
fn no_short_selling() {
    let mut g = game(8, 2);
    let (a, good) = owner(&g, 2);
    let have = g.holdings(a).get(good);
    let too_many = Action::EntOrder { good, side: Side::Sell, price: 10.0, qty: have + 1 };
    assert!(matches!(g.apply(a, &too_many).unwrap(), Outcome::Rejected(_)));
    let all = Action::EntOrder { good, side: Side::Sell, price: 10.0, qty: have };
    assert_eq!(g.apply(a, &all).unwrap(), Outcome::Accepted);
    let more = Action::EntOrder { good, side: Side::Sell, price: 10.0, qty: 1 };
    assert!(matches!(g.apply(a, &more).unwrap(), Outcome::Rejected(_)));
}

#[test]
fn own_resting_order_is_cancelled_not_crossed() {
    let mut g = game(9, 2);
    let (a, good) = owner(&g, 1);
    g.apply(a, &Action::EntOrder { good, side: Side::Sell, price: 30.0, qty: 1 }).unwrap();
    g.apply(a, &Action::EntOrder { good, side: Side::Buy, price: 35.0, qty: 1 }).unwrap();
    let e = good.index() - 16;
    assert_eq!(g.ent_quote(e), EntQuote { bid: Some(35.0), ask: None });
    assert_eq!(g.expenditure(a), 0.0);
}

#[test]
fn empty_handed_agent_scores_minus_spending() {
    let mut g = game(10, 2);
    let (seller, good) = owner(&g, 1);
    g.apply(1 - seller, &Action::EntOrder { good, side: Side::Buy, price: 25.0, qty: 1 }).unwrap();
    g.apply(seller, &Action::EntOrder { good, side: Side::Sell, price: 20.0, qty: 1 }).unwrap();
    let scores = g.finish().unwrap();
    for (a, (u, x, s)) in scores.into_iter().enumerate() {
        assert_eq!(u, 0.0);
        assert_eq!(s, -x);
        assert_eq!(x, if a == seller { -25.0 } else { 25.0 });
    }
}

#[test]
fn no_actions_after_game_end() {
    let mut g = game(11, 1);
    g.finish().unwrap();
    let out = g.apply(0, &Action::BuyFlight { good: Good::InFlight(1), price: 1000.0, qty: 1 }).unwrap();
    assert!(matches!(out, Outcome::Rejected(_)));
}

/// Plays random legal-ish actions for every agent at every minute.
fn random_game(seed: u64) -> Game {
    let mut g = game(seed, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    for m in 0..12u32 {
        g.step(60 * m).unwrap();
        for a in 0..4 {
            for _ in 0..3 {
                let good = Good::from_index(rng.gen_range(0..NUM_GOODS));
                let action = if good.is_flight() {
                    Action::BuyFlight { good, price: rng.gen_range(200.0..500.0), qty: 1 }
                } else if good.is_hotel() {
                    let n = rng.gen_range(0..5);
                    Action::HotelBid { good, units: (0..n).map(|_| rng.gen_range(1.0..300.0)).collect() }
                } else if rng.gen_bool(0.2) {
                    Action::EntWithdraw { good }
                } else {
                    let side = if rng.gen_bool(0.5) { Side::Buy } else { Side::Sell };
                    Action::EntOrder { good, side, price: rng.gen_range(0.0..150.0), qty: rng.gen_range(1..3) }
                };
                g.apply(a, &action).unwrap();
            }
        }
    }
    g.finish().unwrap();
    g
}

#[test]
fn trades_conserve_tickets_and_cash() {
    for seed in 0..10 {
        let g = random_game(seed);
        let mut cash = 0.0;
        let mut ent_net = 0i64;
        for e in &g.record().events {
            if let Event::Trade { good, buyer, seller, price, qty, .. } = e {
                if good.is_ent() {
                    assert!(buyer.is_some() && seller.is_some());
                    cash += price * *qty as f64 - price * *qty as f64;
                    ent_net += *qty as i64 - *qty as i64;
                }
            }
        }
        assert_eq!(cash, 0.0);
        assert_eq!(ent_net, 0);
        let total_exp: f64 = (0..4).map(|a| g.expenditure(a)).sum();
        let external: f64 = g
            .record()
            .events
            .iter()
            .filter_map(|e| match e {
                Event::Trade { good, price, qty, .. } if !good.is_ent() => Some(price * *qty as f64),
                _ => None,
            })
            .sum();
        assert!((total_exp - external).abs() < 1e-6);
        for i in 16..NUM_GOODS {
            let start: u32 = g.record().setups().iter().map(|s| s.1[i]).sum();
            let end: u32 = (0..4).map(|a| g.holdings(a)[i]).sum();
            assert_eq!(start, end);
        }
    }
}

#[test]
fn replay_is_byte_identical_and_detects_tampering() {
    let g = random_game(77);
    let rec = g.record().clone();
    assert_eq!(replay(&rec).unwrap(), None);
    let text = rec.to_jsonl();
    let back = GameRecord::read_jsonl(text.as_bytes()).unwrap();
    assert_eq!(back, rec);
    let mut bad = rec.clone();
    let k = bad.events.iter().position(|e| matches!(e, Event::Trade { .. })).unwrap();
    if let Event::Trade { price, .. } = &mut bad.events[k] {
        *price += 1.0;
    }
    let diff = replay(&bad).unwrap().expect("tampering must be detected");
    assert_eq!(diff.0, k + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn hotel_price_is_sixteenth_highest(
        bids in prop::collection::vec(prop::collection::vec(1u32..500, 0..8), 8),
        seed in 0u64..1000,
    ) {
        let mut g = game(seed, 8);
        for (a, units) in bids.iter().enumerate() {
            let units: Vec<f64> = units.iter().map(|&p| p as f64).collect();
            prop_assert_eq!(g.apply(a, &Action::HotelBid { good: hotel(3), units }).unwrap(), Outcome::Accepted);
        }
        g.finish().unwrap();
        let mut all: Vec<u32> = bids.concat();
        all.sort_by(|a, b| b.cmp(a));
        let close = g.record().events.iter().find_map(|e| match e {
            Event::Close { good, price, units, .. } if *good == hotel(3) => Some((*price, units.clone())),
            _ => None,
        }).unwrap();
        prop_assert_eq!(close.1, all.iter().map(|&p| p as f64).collect::<Vec<_>>());
        if all.len() >= 16 {
            prop_assert_eq!(close.0, all[15] as f64);
        }
        let sold: u32 = (0..8).map(|a| g.holdings(a).get(hotel(3))).sum();
        prop_assert_eq!(sold as usize, all.len().min(16));
    }
}
