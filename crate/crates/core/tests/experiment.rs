use std::fs;

use vinecast::experiment::{
    fit_model, load_series, run_diagnostics, run_experiment, write_outputs, ExperimentConfig, Features, ModelKind,
    SavedModel,
};
use vinecast::verify::read_scores_csv;

fn config(family: &str, length: usize, test_size: usize, models: &[&str]) -> ExperimentConfig {
    serde_json::from_value(serde_json::json!({
        "synth": {
            "length": length, "m": 8, "seed": 17, "noise_sd": 0.7,
            "dependence": { "family": family, "tau": 0.55 },
            "climate_amplitude": 6.0
        },
        "models": models,
        "test_size": test_size,
        "refit_every": 5,
        "seed": 3
    }))
    .unwrap()
}

#[test]
fn three_model_run_is_deterministic_and_consistent() {
    let cfg = config("gumbel", 900, 10, &["dvine", "emos_s", "emos_r"]);
    let result = run_experiment(&cfg).unwrap();
    assert_eq!(result.comparison.len(), 3);
    let mut ranks: Vec<usize> = result.comparison.iter().map(|r| r.rank).collect();
    ranks.sort();
    assert_eq!(ranks, [1, 2, 3]);

    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_outputs(&cfg, &result, a.path()).unwrap();
    write_outputs(&cfg, &run_experiment(&cfg).unwrap(), b.path()).unwrap();
    let mut names: Vec<String> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "pit_dvine.json",
            "pit_emos_r.json",
            "pit_emos_s.json",
            "ranks.json",
            "scores_dvine_SYN.csv",
            "scores_emos_r_SYN.csv",
            "scores_emos_s_SYN.csv",
            "summary.json"
        ]
    );
    for n in &names {
        assert_eq!(
            fs::read(a.path().join(n)).unwrap(),
            fs::read(b.path().join(n)).unwrap(),
            "{n}"
        );
    }

    for row in &result.comparison {
        let f = fs::File::open(a.path().join(format!("scores_{}_{}.csv", row.model, row.station))).unwrap();
        let days = read_scores_csv(f).unwrap();
        assert_eq!(days.len(), 10);
        let mean = days.iter().map(|d| d.crps).sum::<f64>() / days.len() as f64;
        assert!((mean - row.mean_crps).abs() < 1e-9);
    }
}

#[test]
fn saved_models_round_trip_through_json() {
    let cfg = config("clayton", 900, 10, &["dvine"]);
    let series = vinecast::dataset::impute_series(&load_series(&cfg).unwrap()[0]).unwrap();
    let features = Features::new(&series, cfg.candidates).unwrap();
    for kind in [ModelKind::Dvine, ModelKind::EmosS, ModelKind::EmosR] {
        let m = fit_model(kind, &features, series.dates(), 880, &cfg).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: SavedModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m, "{kind:?}");
    }
}

#[test]
fn gaussian_normal_scores_look_bivariate_normal() {
    let mut cfg = config("gaussian", 5000, 10, &["emos_s"]);
    cfg.synth.as_mut().unwrap().climate_amplitude = 0.0;
    let series = &load_series(&cfg).unwrap()[0];
    let pairs = run_diagnostics(series, None).unwrap();
    assert_eq!(pairs.len(), 6);
    for p in &pairs {
        let n = p.z.len() as f64;
        // unit variances are the hypothesis; only the correlation is estimated
        let sum = |f: &dyn Fn(f64, f64) -> f64| p.z.iter().map(|&(a, b)| f(a, b)).sum::<f64>();
        let r = sum(&|a, b| a * b) / (sum(&|a, _| a * a) * sum(&|_, b| b * b)).sqrt();
        let d2: Vec<f64> =
            p.z.iter()
                .map(|(a, b)| (a * a - 2.0 * r * a * b + b * b) / (1.0 - r * r))
                .collect();
        let m = d2.iter().sum::<f64>() / n;
        assert!((m - 2.0).abs() < 0.1, "{} {}: {m}", p.first, p.second);
    }
}

#[test]
fn constant_column_is_named() {
    let cfg = config("gaussian", 400, 10, &["emos_s"]);
    let series = &load_series(&cfg).unwrap()[0];
    let mut buf = Vec::new();
    series.write_csv(&mut buf).unwrap();
    // overwrite the hres column with a constant
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let col = header.split(',').position(|h| h == "hres").unwrap();
    let mut out = String::from(header);
    out.push('\n');
    for line in lines {
        let mut cells: Vec<&str> = line.split(',').collect();
        cells[col] = "1.5";
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let s = vinecast::dataset::parse_csv(out.as_bytes(), &Default::default()).unwrap();
    let err = run_diagnostics(&s, None).unwrap_err();
    assert!(err.to_string().contains("hres"), "{err}");
}
