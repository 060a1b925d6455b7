use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tacbid::seq::*;

const INF: f64 = f64::INFINITY;

/// Item 0 is the flash, item 1 the camera.
fn camera_flash(flash: PriceDistribution) -> AbstractAuctionProblem {
    let camera = PriceDistribution::new(vec![(40.0, 0.25), (70.0, 0.5), (95.0, 0.25)]).unwrap();
    AbstractAuctionProblem::from_table(vec![flash, camera], vec![0.0, 10.0, 50.0, 100.0]).unwrap()
}

#[test]
fn camera_flash_purchases() {
    let p = camera_flash(PriceDistribution::point(0.0).unwrap());
    assert_eq!(opt_purchases(&p, 0b01, 1, &[INF, 70.0]).unwrap(), (0b10, 30.0));
    assert_eq!(opt_purchases(&p, 0b00, 1, &[INF, 70.0]).unwrap(), (0b00, 0.0));
    assert_eq!(opt_purchases(&p, 0b01, 1, &[INF, 95.0]).unwrap(), (0b00, 10.0));
    assert_eq!(opt_purchases(&p, 0b00, 1, &[INF, 95.0]).unwrap(), (0b00, 0.0));
    assert_eq!(opt_purchases(&p, 0b01, 0, &[INF, INF]).unwrap(), (0, 10.0));
}

#[test]
fn camera_flash_bid_is_thirty() {
    let p = camera_flash(PriceDistribution::point(0.0).unwrap());
    let s = Scenarios::exhaustive(&p, 0, DEFAULT_CAP).unwrap();
    let bid = marginal_bid_with(&p, 0, 0, &s).unwrap();
    assert!((bid - 30.0).abs() < 1e-12, "{bid}");
}

#[test]
fn camera_flash_expected_price_plan() {
    let p = camera_flash(PriceDistribution::point(0.0).unwrap());
    let mean = p.distributions()[1].mean();
    assert_eq!(mean, 68.75);
    let (g, obj) = opt_purchases(&p, 0b01, 1, &[INF, mean]).unwrap();
    assert_eq!(g, 0b10);
    assert!((obj - 31.25).abs() < 1e-12);
    // free flash: win branch is worth 31.25, losing is worth nothing
    assert!((value_est_ev(&p, 0, 0).unwrap() - 31.25).abs() < 1e-12);
}

#[test]
fn empty_horizon_is_current_utility() {
    let p = camera_flash(PriceDistribution::point(3.0).unwrap());
    for h in 0..4 {
        let v = p.utility(h);
        assert_eq!(exact_value(&p, 2, h).unwrap(), v);
        assert_eq!(value_est_exhaustive(&p, 2, h).unwrap(), v);
        assert_eq!(value_est_ev(&p, 2, h).unwrap(), v);
    }
}

#[test]
fn worthless_item_bid_is_zero() {
    let d = || PriceDistribution::new(vec![(1.0, 0.5), (4.0, 0.5)]).unwrap();
    let p = AbstractAuctionProblem::from_fn(vec![d(), d()], |b| if b[1] { 7.0 } else { 0.0 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(marginal_bid(&p, 0, 0, 50, &mut rng).unwrap(), 0.0);
}

#[test]
fn deterministic_bid_is_plan_difference() {
    let fixed = AbstractAuctionProblem::from_table(
        vec![PriceDistribution::point(5.0).unwrap(), PriceDistribution::point(40.0).unwrap()],
        vec![0.0, 10.0, 50.0, 100.0],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // with flash: 100 - 40 = 60; without: 50 - 40 = 10
    assert_eq!(marginal_bid(&fixed, 0, 0, 3, &mut rng).unwrap(), 50.0);
}

/// Small random instance: up to 4 items, up to 3 support points each.
fn instance() -> impl Strategy<Value = AbstractAuctionProblem> {
    (1usize..=4).prop_flat_map(|n| {
        let dist = prop::collection::vec((0u32..60, 1u32..5), 1..=3);
        (
            prop::collection::vec(dist, n),
            prop::collection::vec(0u32..120, 1 << n),
        )
            .prop_map(|(dists, table)| {
                let dists = dists
                    .into_iter()
                    .map(|pts| {
                        let total: u32 = pts.iter().map(|p| p.1).sum();
                        PriceDistribution::new(
                            pts.iter()
                                .map(|&(y, w)| (y as f64, w as f64 / total as f64))
                                .collect(),
                        )
                        .unwrap()
                    })
                    .collect();
                AbstractAuctionProblem::from_table(dists, table.into_iter().map(f64::from).collect())
                    .unwrap()
            })
    })
}

fn monotone_instance() -> impl Strategy<Value = AbstractAuctionProblem> {
    instance().prop_map(|p| {
        let n = p.n();
        // running max over subsets makes the utility monotone
        let mut table: Vec<f64> = (0..1u32 << n).map(|m| p.utility(m)).collect();
        for m in 0..1usize << n {
            for j in 0..n {
                if m >> j & 1 == 1 {
                    table[m] = table[m].max(table[m ^ 1 << j]);
                }
            }
        }
        AbstractAuctionProblem::from_table(p.distributions().to_vec(), table).unwrap()
    })
}

fn point_instance() -> impl Strategy<Value = AbstractAuctionProblem> {
    instance().prop_map(|p| {
        let dists = p
            .distributions()
            .iter()
            .map(|d| PriceDistribution::point(d.support()[0].0).unwrap())
            .collect();
        let n = p.n();
        AbstractAuctionProblem::from_table(dists, (0..1u32 << n).map(|m| p.utility(m)).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn reordering_is_an_upper_bound(p in instance()) {
        let n = p.n();
        for i in 0..=n {
            // holdings only on items already sold
            for h in 0..1u32 << i {
                let exact = exact_value(&p, i, h).unwrap();
                let est = value_est_exhaustive(&p, i, h).unwrap();
                prop_assert!(est >= exact - 1e-9, "i={} h={} est={} exact={}", i, h, est, exact);
            }
        }
    }

    #[test]
    fn certainty_makes_all_values_equal(p in point_instance()) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for i in 0..=p.n() {
            for h in 0..1u32 << i {
                let exact = exact_value(&p, i, h).unwrap();
                prop_assert_eq!(value_est_exhaustive(&p, i, h).unwrap(), exact);
                prop_assert_eq!(value_est_ev(&p, i, h).unwrap(), exact);
                prop_assert_eq!(value_est_sampled(&p, i, h, 3, &mut rng).unwrap(), exact);
            }
        }
    }

    #[test]
    fn bid_separates_profitable_prices(p in instance()) {
        let s = Scenarios::exhaustive(&p, 0, DEFAULT_CAP).unwrap();
        let r = marginal_bid_with(&p, 0, 0, &s).unwrap();
        let mut win = 0.0;
        let mut lose = 0.0;
        for (w, y) in &s.items {
            let mut y = y.clone();
            y[0] = f64::INFINITY;
            win += w * opt_purchases(&p, 1, 1, &y).unwrap().1;
            lose += w * opt_purchases(&p, 0, 1, &y).unwrap().1;
        }
        win /= s.total;
        lose /= s.total;
        for &(y0, _) in p.distributions()[0].support() {
            // away from exact ties the two conditions coincide
            if (r - y0).abs() > 1e-9 {
                prop_assert_eq!(r >= y0, win - y0 >= lose);
            }
        }
    }

    #[test]
    fn monotone_utility_bids_are_nonnegative(p in monotone_instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..p.n() {
            prop_assert!(marginal_bid(&p, i, 0, 5, &mut rng).unwrap() >= 0.0);
        }
    }

    #[test]
    fn single_item_ev_matches_exhaustive(p in instance()) {
        let single = AbstractAuctionProblem::from_fn(
            vec![p.distributions()[0].clone()],
            |b| if b[0] { p.utility(1) } else { p.utility(0) },
        ).unwrap();
        let a = value_est_ev(&single, 0, 0).unwrap();
        let b = value_est_exhaustive(&single, 0, 0).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn seeded_outputs_repeat(p in instance(), seed in any::<u64>()) {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (
                value_est_sampled(&p, 0, 0, 7, &mut rng).unwrap().to_bits(),
                marginal_bid(&p, 0, 0, 7, &mut rng).unwrap().to_bits(),
            )
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn exhaustive_weights_sum_to_one(p in instance()) {
        let s = Scenarios::exhaustive(&p, 0, DEFAULT_CAP).unwrap();
        let total: f64 = s.items.iter().map(|x| x.0).sum();
        prop_assert!((total - s.total).abs() < 1e-9);
    }
}
