use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vinecast::emos::{crps_gaussian, EmosForecast};
use vinecast::verify::{crps_from_quantiles, normalized_scores, pit_histogram, pit_value, rank_histogram};

#[test]
fn quantile_crps_reduces_to_absolute_error_and_gaussian_limit() {
    assert_eq!(crps_from_quantiles(&[2.5; 10], 4.0).unwrap(), 1.5);
    let f = EmosForecast { mu: 0.0, sigma: 1.0 };
    let q = f.quantiles(1000);
    let got = crps_from_quantiles(&q, 0.0).unwrap();
    assert!((got - 0.2337).abs() < 0.01, "{got}");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let mu = rng.random_range(-10.0..10.0);
        let sigma = rng.random_range(0.2..5.0);
        let y = mu + sigma * rng.random_range(-3.0..3.0);
        let q = EmosForecast { mu, sigma }.quantiles(1000);
        let diff = crps_from_quantiles(&q, y).unwrap() - crps_gaussian(mu, sigma, y).unwrap();
        assert!(diff.abs() <= 0.005 * sigma, "{diff}");
    }
}

#[test]
fn pit_of_gaussian_tail() {
    let f = EmosForecast { mu: 3.0, sigma: 2.0 };
    assert!((pit_value(|y| f.cdf(y), 3.0 + 1.645 * 2.0) - 0.95).abs() < 1e-3);
    let z = normalized_scores(&[vec![0.975]]).unwrap();
    assert!((z[0][0] - 1.959_964).abs() < 1e-5);
}

#[test]
fn uniform_pit_histogram_is_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 100_000;
    let k = 20;
    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let bins = pit_histogram(&u, k).unwrap();
    let expect = (n / k) as f64;
    let band = 4.0 * expect.sqrt();
    assert!(bins.iter().all(|&c| (c as f64 - expect).abs() <= band), "{bins:?}");
}

#[test]
fn exchangeable_ranks_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (n, m) = (100_000, 10);
    let mut rows = Vec::with_capacity(n);
    let mut obs = Vec::with_capacity(n);
    for _ in 0..n {
        rows.push((0..m).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>());
        obs.push(StandardNormal.sample(&mut rng));
    }
    let bins = rank_histogram(&rows, &obs, 1).unwrap();
    assert_eq!(bins.len(), m + 1);
    let p = 1.0 / (m + 1) as f64;
    let band = 5.0 * (n as f64 * p * (1.0 - p)).sqrt();
    assert!(
        bins.iter().all(|&c| (c as f64 - n as f64 * p).abs() <= band),
        "{bins:?}"
    );
}
