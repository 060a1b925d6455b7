#![allow(dead_code)]

use rand::Rng;
use tacbid::allocator::{PriceEntry, PriceSchedule};
use tacbid::goods::{ClientPreferences, EntType, Good, GoodVector, HotelType, NUM_GOODS};

/// One client's choice: trip shape plus ticket goods, or nothing.
#[derive(Clone, Debug)]
struct Choice {
    goods: Vec<usize>,
    utility: f64,
}

fn choices(prefs: &ClientPreferences, usable: &[bool; NUM_GOODS]) -> Vec<Choice> {
    let mut out = vec![Choice {
        goods: vec![],
        utility: 0.0,
    }];
    for hotel in [HotelType::Towers, HotelType::Shanties] {
        for ad in 1..=4u8 {
            for dd in ad + 1..=5u8 {
                let mut goods = vec![Good::InFlight(ad).index(), Good::OutFlight(dd).index()];
                goods.extend((ad..dd).map(|n| Good::Hotel(hotel, n).index()));
                if !goods.iter().all(|&g| usable[g]) {
                    continue;
                }
                let base = 1000.0
                    - 100.0 * (ad.abs_diff(prefs.iad) as f64 + dd.abs_diff(prefs.idd) as f64)
                    + if hotel == HotelType::Towers { prefs.hp as f64 } else { 0.0 };
                // every ticket day choice per type: none or one in-town day,
                // days pairwise distinct
                let mut partial: Vec<(Vec<usize>, f64, Vec<u8>)> = vec![(goods.clone(), base, vec![])];
                for t in EntType::ALL {
                    let mut next = Vec::new();
                    for (g, u, days) in &partial {
                        next.push((g.clone(), *u, days.clone()));
                        for d in ad..dd {
                            let good = Good::Ent(t, d).index();
                            if !usable[good] || days.contains(&d) {
                                continue;
                            }
                            let mut g2 = g.clone();
                            g2.push(good);
                            let mut d2 = days.clone();
                            d2.push(d);
                            next.push((g2, u + prefs.ev[t as usize] as f64, d2));
                        }
                    }
                    partial = next;
                }
                out.extend(partial.into_iter().map(|(goods, utility, _)| Choice { goods, utility }));
            }
        }
    }
    out
}

fn purchase_cost(g: usize, q: u32, y: &PriceSchedule) -> f64 {
    if q == 0 {
        return 0.0;
    }
    match y.0[g] {
        PriceEntry::Unavailable => f64::INFINITY,
        PriceEntry::Price { p, c } => {
            if Good::from_index(g).is_hotel() {
                // q units at p, p, pc, pc^2 ... paid uniformly: q * p * c^(q-2)
                let exp = q.saturating_sub(2) as i32;
                q as f64 * p * c.powi(exp)
            } else {
                q as f64 * p
            }
        }
    }
}

/// Exhaustive `max v(G + H) - cost(G, Y)` over every joint client choice.
pub fn brute_force_opt(clients: &[ClientPreferences], h: &GoodVector, y: &PriceSchedule) -> f64 {
    let usable: [bool; NUM_GOODS] = std::array::from_fn(|g| h[g] > 0 || y.0[g] != PriceEntry::Unavailable);
    let options: Vec<Vec<Choice>> = clients.iter().map(|c| choices(c, &usable)).collect();
    let mut usage = [0u32; NUM_GOODS];
    let mut best = f64::NEG_INFINITY;
    fn rec(
        k: usize,
        options: &[Vec<Choice>],
        usage: &mut [u32; NUM_GOODS],
        utility: f64,
        h: &GoodVector,
        y: &PriceSchedule,
        best: &mut f64,
    ) {
        if k == options.len() {
            let mut cost = 0.0;
            for g in 0..NUM_GOODS {
                cost += purchase_cost(g, usage[g].saturating_sub(h[g]), y);
            }
            let v = utility - cost;
            if v > *best {
                *best = v;
            }
            return;
        }
        for ch in &options[k] {
            for &g in &ch.goods {
                usage[g] += 1;
            }
            rec(k + 1, options, usage, utility + ch.utility, h, y, best);
            for &g in &ch.goods {
                usage[g] -= 1;
            }
        }
    }
    rec(0, &options, &mut usage, 0.0, h, y, &mut best);
    best
}

pub fn random_client<R: Rng>(rng: &mut R) -> ClientPreferences {
    let iad = rng.gen_range(1..=4);
    let idd = rng.gen_range(iad + 1..=5);
    ClientPreferences::new(
        iad,
        idd,
        rng.gen_range(50..=150),
        [rng.gen_range(0..=200), rng.gen_range(0..=200), rng.gen_range(0..=200)],
    )
    .unwrap()
}

/// A small random allocation instance: up to three clients, at most two
/// entertainment types in play and at most three usable tickets.
pub fn random_instance<R: Rng>(rng: &mut R) -> (Vec<ClientPreferences>, GoodVector, PriceSchedule) {
    let n = rng.gen_range(1..=3);
    let clients: Vec<ClientPreferences> = (0..n).map(|_| random_client(rng)).collect();
    let mut h = GoodVector::zero();
    let mut y = PriceSchedule::unavailable();
    for g in Good::all().filter(|g| !g.is_ent()) {
        if rng.gen_bool(0.25) {
            h.set(g, rng.gen_range(1..=2));
        }
        if rng.gen_bool(0.7) {
            let p = rng.gen_range(50..=500) as f64;
            if g.is_hotel() {
                let c = [1.0, 1.35, 2.0][rng.gen_range(0..3)];
                y.set_with_impact(g, p, c);
            } else {
                y.set(g, p);
            }
        }
    }
    let types: Vec<EntType> = {
        let mut t = EntType::ALL.to_vec();
        let keep = rng.gen_range(0..=2);
        while t.len() > keep {
            t.remove(rng.gen_range(0..t.len()));
        }
        t
    };
    let tickets = rng.gen_range(0..=3);
    for _ in 0..tickets {
        if types.is_empty() {
            break;
        }
        let g = Good::Ent(types[rng.gen_range(0..types.len())], rng.gen_range(1..=4));
        if rng.gen_bool(0.5) {
            h.add(g, 1);
        } else {
            y.set(g, rng.gen_range(50..=500) as f64 / 4.0);
        }
    }
    (clients, h, y)
}

/// The eight clients of the worked utility fixture.
pub fn fixture_clients() -> Vec<ClientPreferences> {
    let rows = [
        (2, 5, 73, [175, 34, 24]),
        (1, 3, 125, [113, 124, 57]),
        (4, 5, 73, [157, 12, 177]),
        (1, 2, 102, [50, 67, 49]),
        (1, 3, 75, [12, 135, 110]),
        (2, 4, 86, [197, 8, 59]),
        (1, 5, 90, [56, 197, 162]),
        (1, 3, 50, [79, 92, 136]),
    ];
    rows.iter()
        .map(|&(iad, idd, hp, ev)| ClientPreferences::new(iad, idd, hp, ev).unwrap())
        .collect()
}
