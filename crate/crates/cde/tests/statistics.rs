use boostcde::{
    expected_from, sample_from, train, train_with_trace, BinProbabilities, Breakpoints, LabeledExample,
    TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn step(x: f64) -> f64 {
    25.0 * (4.0 * x).floor()
}

fn uniform_band(m: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let x: f64 = rng.gen();
            let y = step(x) + 40.0 * rng.gen::<f64>();
            LabeledExample::new(vec![Some(x)], y)
        })
        .collect()
}

#[test]
fn sampling_matches_bin_masses() {
    let bp = Breakpoints::from_points(vec![0.0, 1.0, 2.0, 4.0, 8.0, 9.0]).unwrap();
    let probs = BinProbabilities {
        p: vec![1.0, 0.8, 0.55, 0.5, 0.1, 0.0],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draws = 100_000;
    let mut counts = vec![0usize; probs.bins()];
    for _ in 0..draws {
        let y = sample_from(&bp, &probs, &mut rng);
        counts[bp.bin_of(y).min(probs.bins() - 1)] += 1;
    }
    let stat: f64 = counts
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let e = probs.mass(j) * draws as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let critical = ChiSquared::new((probs.bins() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.999);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

#[test]
fn expected_value_matches_sample_mean() {
    let data = uniform_band(600, 3);
    let model = train(
        &data,
        &TrainConfig {
            k: 12,
            rounds: 30,
            ..Default::default()
        },
    )
    .unwrap();
    let x = [Some(0.6)];
    let probs = model.predict_cdf(&x).unwrap();
    let ev = expected_from(&model.breakpoints, &probs);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let y = sample_from(&model.breakpoints, &probs, &mut rng);
        sum += y;
        sq += y * y;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - ev).abs() < 3.0 * se, "mean {mean} ev {ev} se {se}");
    assert_eq!(ev, model.expected_value(&x).unwrap());
}

#[test]
fn same_seed_same_draws() {
    let data = uniform_band(200, 8);
    let model = train(
        &data,
        &TrainConfig {
            k: 5,
            rounds: 5,
            ..Default::default()
        },
    )
    .unwrap();
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..50)
            .map(|_| model.sample(&[Some(0.3)], &mut rng).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(draw(1), draw(1));
}

#[test]
fn calibrated_on_uniform_band() {
    let train_set = uniform_band(5000, 100);
    let held_out = uniform_band(2000, 200);
    let trace = train_with_trace(&train_set, &TrainConfig::default()).unwrap();
    for w in trace.loss.windows(2) {
        assert!(w[1] <= w[0] + 1e-9);
    }
    let model = trace.model;
    let mut err = 0.0;
    let mut count = 0;
    for ex in &held_out {
        let probs = model.predict_cdf(&ex.features).unwrap();
        assert!(probs.p.windows(2).all(|w| w[0] >= w[1]));
        let x = ex.features[0].unwrap();
        for d in 1..=9 {
            let q = d as f64 / 10.0;
            let t = step(x) + 40.0 * q;
            err += (boostcde::cdf_from(&model.breakpoints, &probs, t) - q).abs();
            count += 1;
        }
    }
    let mae = err / count as f64;
    assert!(mae <= 0.05, "mean absolute CDF error {mae}");
}
