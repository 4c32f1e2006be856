use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use vinecast::dataset::{group_predictors, synth_generate, SynthSpec};
use vinecast::dvine::{select_and_fit, Column, DVineOptions};
use vinecast::emos::fit_emos;
use vinecast::marginal::fit_kde;
use vinecast::paircopula::{fit_pair, FamilyCatalog, PairCopula};
use vinecast::verify::crps_from_quantiles;

fn spec(length: usize) -> SynthSpec {
    serde_json::from_value(serde_json::json!({
        "length": length, "m": 10, "seed": 7,
        "dependence": { "family": "gumbel", "tau": 0.6 },
        "noise_sd": 0.8
    }))
    .expect("valid spec")
}

fn kernels(c: &mut Criterion) {
    let sample: Vec<f64> = (0..864).map(|i| ((i * 7919) % 1000) as f64 / 100.0).collect();
    let kde = fit_kde(&sample).unwrap();
    c.bench_function("kde_quantile_n864", |b| {
        b.iter(|| kde.quantile(black_box(0.37)).unwrap())
    });

    let pairs = PairCopula::gumbel(2.0).unwrap().simulate(1000, 1);
    let (u, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let catalog = FamilyCatalog::default();
    c.bench_function("fit_pair_n1000", |b| {
        b.iter(|| fit_pair(black_box(&u), &v, &catalog).unwrap())
    });

    let q: Vec<f64> = (1..=100).map(|r| r as f64 / 10.0).collect();
    c.bench_function("crps_from_quantiles_r100", |b| {
        b.iter(|| crps_from_quantiles(black_box(&q), 4.2).unwrap())
    });
}

fn models(c: &mut Criterion) {
    let series = synth_generate(&spec(864)).unwrap();
    let obs = series.complete_obs().unwrap();
    let groups = group_predictors(&series).unwrap();
    let ctrl: Vec<f64> = groups.iter().map(|g| g.ctrl).collect();
    let hres: Vec<f64> = groups.iter().map(|g| g.hres).collect();
    let mean: Vec<f64> = groups.iter().map(|g| g.mean_perturbed).collect();
    let cols = [
        Column::new("ctrl", &ctrl),
        Column::new("hres", &hres),
        Column::new("mean", &mean),
    ];
    let opts = DVineOptions::default();
    let mut g = c.benchmark_group("models");
    g.sample_size(10);
    g.bench_function("dvine_select_n864", |b| {
        b.iter(|| select_and_fit(Column::new("obs", &obs), black_box(&cols), &opts).unwrap())
    });
    let (vine, _) = select_and_fit(Column::new("obs", &obs), &cols, &opts).unwrap();
    let x: Vec<f64> = vine.predictors().iter().map(|_| 10.0).collect();
    g.bench_function("dvine_quantiles_r100", |b| {
        b.iter(|| vine.predictive_quantiles(black_box(&x), 100).unwrap())
    });
    let rows: Vec<_> = groups.iter().copied().zip(obs.iter().copied()).take(40).collect();
    g.bench_function("emos_fit_n40", |b| b.iter(|| fit_emos(black_box(&rows)).unwrap()));
    g.finish();
}

criterion_group!(benches, kernels, models);
criterion_main!(benches);
