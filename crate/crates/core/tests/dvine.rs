use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vinecast::dvine::{fit_in_order, select_and_fit, Column, DVineModel, DVineOptions};
use vinecast::paircopula::{Family, FamilyCatalog};
use vinecast::quad::integrate;

fn gaussian_data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut y, mut x1, mut x2) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        x1.push(a);
        x2.push(0.6 * a + 0.8 * b);
        y.push(0.7 * a + 0.4 * b + 0.6 * e);
    }
    (y, x1, x2)
}

fn gaussian_vine(seed: u64) -> DVineModel {
    let (y, x1, x2) = gaussian_data(1000, seed);
    let opts = DVineOptions {
        catalog: FamilyCatalog::only(&[Family::Gaussian]),
        max_predictors: None,
    };
    let (m, _) = fit_in_order(
        Column::new("y", &y),
        &[Column::new("x1", &x1), Column::new("x2", &x2)],
        &opts,
    )
    .unwrap();
    assert_eq!(m.n_predictors(), 2);
    m
}

fn response_range(m: &DVineModel) -> (f64, f64) {
    let s = m.marginal(0).sample();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 12.0 * m.marginal(0).bandwidth();
    (lo - pad, hi + pad)
}

#[test]
fn conditional_cdf_matches_joint_copula_quadrature() {
    let m = gaussian_vine(11);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let u = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)];
        let joint = |v: f64| m.copula_log_density(&[v, u[0], u[1]]).unwrap().exp();
        let total = integrate(joint, 0.0, 1.0, 1e-12, 1e-10);
        for v in [0.05, 0.2, 0.5, 0.8, 0.95] {
            let oracle = integrate(joint, 0.0, v, 1e-12, 1e-10) / total;
            let got = m.cond_cdf(v, &u).unwrap();
            assert!((got - oracle).abs() < 1e-6, "u {u:?} v {v}: {got} vs {oracle}");
        }
    }
}

#[test]
fn conditional_density_is_joint_over_marginal() {
    let m = gaussian_vine(12);
    let (lo, hi) = response_range(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..3 {
        let x = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let marginal_x = integrate(|s| m.joint_density(s, &x).unwrap(), lo, hi, 1e-12, 1e-10);
        let norm = integrate(|s| m.cond_density(s, &x).unwrap(), lo, hi, 1e-12, 1e-10);
        assert!((norm - 1.0).abs() < 1e-3, "integral {norm}");
        for i in 0..50 {
            let y = -3.0 + 6.0 * i as f64 / 49.0;
            let ratio = m.joint_density(y, &x).unwrap() / marginal_x;
            let d = m.cond_density(y, &x).unwrap();
            assert!((d - ratio).abs() <= 1e-3 * ratio.max(1e-12), "y {y}: {d} vs {ratio}");
        }
    }
}

#[test]
fn quantiles_invert_cdf_and_never_cross() {
    let (y, x1, x2) = gaussian_data(800, 13);
    let noise = gaussian_data(800, 14).0;
    let cands = [Column::new("x1", &x1), Column::new("x2", &x2), Column::new("z", &noise)];
    let (m, _) = select_and_fit(Column::new("y", &y), &cands, &DVineOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let x: Vec<f64> = (0..m.n_predictors()).map(|_| rng.random_range(-2.5..2.5)).collect();
        let u = m.predictor_pits(&x).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 1..100 {
            let a = i as f64 / 100.0;
            let q = m.cond_quantile(a, &x).unwrap();
            assert!(q >= prev, "crossing at alpha {a}");
            prev = q;
            let back = m.cond_cdf(m.marginal(0).cdf(q), &u).unwrap();
            assert!((back - a).abs() < 1e-6, "alpha {a}: {back}");
        }
        let grid = m.predictive_quantiles(&x, 100).unwrap();
        assert!(grid.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn fixed_order_is_respected() {
    let (y, x1, x2) = gaussian_data(500, 15);
    let (m, _) = fit_in_order(
        Column::new("y", &y),
        &[Column::new("x2", &x2), Column::new("x1", &x1)],
        &DVineOptions::default(),
    )
    .unwrap();
    assert_eq!(m.order(), ["y", "x2", "x1"]);
}
