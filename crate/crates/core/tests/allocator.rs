mod common;

use common::{brute_force_opt, fixture_clients, random_instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tacbid::allocator::{self, evaluate_allocation, Allocator, PriceSchedule};
use tacbid::goods::{client_utility, EntType, Good, GoodVector, HotelType, TravelPackage};

#[test]
fn matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..300 {
        let (clients, h, y) = random_instance(&mut rng);
        let expected = brute_force_opt(&clients, &h, &y);
        let got = allocator::opt(&h, &y, &clients).unwrap();
        assert!(got.proven_optimal);
        assert!(
            (got.objective - expected).abs() < 1e-6,
            "case {case}: opt {} vs brute force {expected}",
            got.objective
        );
        let (check, purchases) = evaluate_allocation(&clients, &got.packages, &h, &y).unwrap();
        assert!((check - got.objective).abs() < 1e-6);
        assert_eq!(purchases, got.purchases);
        let lp = allocator::lp_relaxation_value(&h, &y, &clients).unwrap();
        assert!(lp >= expected - 1e-6, "case {case}: lp {lp} below opt {expected}");
    }
}

#[test]
fn warm_started_solves_match_fresh_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (clients, _, _) = random_instance(&mut rng);
    let mut shared = Allocator::full(&clients);
    for _ in 0..100 {
        let (_, h, y) = random_instance(&mut rng);
        let warm = shared.opt(&h, &y).unwrap().objective;
        let fresh = allocator::opt(&h, &y, &clients).unwrap().objective;
        assert!((warm - fresh).abs() < 1e-6, "{warm} vs {fresh}");
        assert!((warm - brute_force_opt(&clients, &h, &y)).abs() < 1e-6);
    }
}

fn pkg(ad: u8, dd: u8, hotel: HotelType, tickets: &[(EntType, u8)]) -> TravelPackage {
    TravelPackage::new(ad, dd, hotel, tickets.to_vec()).unwrap()
}

#[test]
fn worked_example_utilities() {
    use EntType::*;
    use HotelType::*;
    let clients = fixture_clients();
    let packages = [
        pkg(2, 5, Shanties, &[(AlligatorWrestling, 4)]),
        pkg(1, 2, Towers, &[(AlligatorWrestling, 1)]),
        pkg(3, 5, Shanties, &[(Museum, 3), (AlligatorWrestling, 4)]),
        pkg(1, 2, Towers, &[]),
        pkg(1, 2, Towers, &[(AmusementPark, 1)]),
        pkg(2, 3, Towers, &[(AlligatorWrestling, 2)]),
        pkg(1, 5, Shanties, &[(AmusementPark, 2), (AlligatorWrestling, 3), (Museum, 4)]),
        pkg(1, 2, Towers, &[(Museum, 1)]),
    ];
    let expected = [1175.0, 1138.0, 1234.0, 1102.0, 1110.0, 1183.0, 1415.0, 1086.0];
    let mut total = 0.0;
    let mut goods = GoodVector::zero();
    for ((c, p), want) in clients.iter().zip(&packages).zip(expected) {
        let u = client_utility(c, Some(p));
        assert_eq!(u, want, "{p:?}");
        total += u;
        for g in p.goods() {
            goods.add(g, 1);
        }
    }
    assert_eq!(total, 9443.0);
    let best = allocator::value(&goods, &clients).unwrap();
    assert!(best >= 9443.0 - 1e-6);
    let packaged: Vec<_> = packages.iter().cloned().map(Some).collect();
    let (v, bought) = evaluate_allocation(&clients, &packaged, &goods, &PriceSchedule::unavailable()).unwrap();
    assert_eq!(v, 9443.0);
    assert_eq!(bought, GoodVector::zero());
}

#[test]
fn holdings_never_reduce_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (clients, mut h, y) = random_instance(&mut rng);
        let before = allocator::opt(&h, &y, &clients).unwrap().objective;
        h.add(Good::from_index(rand::Rng::gen_range(&mut rng, 0..28)), 1);
        let after = allocator::opt(&h, &y, &clients).unwrap().objective;
        assert!(after >= before - 1e-6);
    }
}
