use chrono::{Duration, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vinecast::dataset::{
    fit_harmonic, impute_series, parse_csv, refined_window, standard_window, synth_generate, CsvSchema, MemberRole,
    StationSeries, SynthSpec, ANNUAL_FREQUENCY,
};
use vinecast::paircopula::kendall_tau;
use vinecast::Error;

fn days(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2002, 1, 1).unwrap();
    (0..n).map(|i| start + Duration::days(i as i64)).collect()
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves `X'X beta = X'y` for the harmonic design by Cramer's rule.
fn normal_equations(values: &[Option<f64>]) -> [f64; 3] {
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for (t, v) in values.iter().enumerate() {
        let Some(y) = v else { continue };
        let w = ANNUAL_FREQUENCY * t as f64;
        let row = [1.0, w.cos(), w.sin()];
        for i in 0..3 {
            xty[i] += row[i] * y;
            for j in 0..3 {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    let d = det3(xtx);
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut m = xtx;
        for i in 0..3 {
            m[i][k] = xty[i];
        }
        *o = det3(m) / d;
    }
    out
}

#[test]
fn harmonic_fit_solves_normal_equations() {
    let d = days(730);
    let exact: Vec<Option<f64>> = (0..730)
        .map(|t| Some(2.0 + 3.0 * (ANNUAL_FREQUENCY * t as f64).cos()))
        .collect();
    let f = fit_harmonic(&exact, &d).unwrap();
    assert!(
        (f.mu - 2.0).abs() < 1e-8 && (f.a - 3.0).abs() < 1e-8 && f.b.abs() < 1e-8,
        "{f:?}"
    );

    let sine: Vec<Option<f64>> = (0..730).map(|t| Some((ANNUAL_FREQUENCY * t as f64).sin())).collect();
    let f = fit_harmonic(&sine, &d).unwrap();
    assert!(f.a.abs() < 1e-8 && (f.b - 1.0).abs() < 1e-8, "{f:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let noisy: Vec<Option<f64>> = (0..900)
        .map(|t| {
            let w = ANNUAL_FREQUENCY * t as f64;
            (t % 17 != 3).then(|| 8.0 - 4.0 * w.cos() + 1.5 * w.sin() + noise.sample(&mut rng))
        })
        .collect();
    let f = fit_harmonic(&noisy, &days(900)).unwrap();
    let oracle = normal_equations(&noisy);
    for (got, want) in [f.mu, f.a, f.b].iter().zip(oracle) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    let sparse = vec![Some(1.0), None, Some(2.0), None];
    assert!(matches!(
        fit_harmonic(&sparse, &days(4)),
        Err(Error::InsufficientData { .. })
    ));
}

fn series_with(obs: Vec<Option<f64>>, members: Vec<Vec<Option<f64>>>) -> StationSeries {
    let n = obs.len();
    StationSeries::new(
        "S1",
        24,
        days(n),
        obs,
        members,
        vec!["ens_1".into(), "ens_2".into(), "ctrl".into(), "hres".into()],
        vec![
            MemberRole::Perturbed,
            MemberRole::Perturbed,
            MemberRole::Control,
            MemberRole::HighRes,
        ],
    )
    .unwrap()
}

#[test]
fn imputation_fills_cosine_gap_and_leaves_other_columns() {
    let cosine = |t: usize| 5.0 + 7.0 * (ANNUAL_FREQUENCY * t as f64).cos();
    let n = 800;
    let obs: Vec<Option<f64>> = (0..n).map(|t| (!(300..310).contains(&t)).then(|| cosine(t))).collect();
    let members: Vec<Vec<Option<f64>>> = (0..n).map(|t| vec![Some(t as f64 * 0.01 + 1.0); 4]).collect();
    let s = series_with(obs, members.clone());
    let filled = impute_series(&s).unwrap();
    for t in 300..310 {
        assert!((filled.obs()[t].unwrap() - cosine(t)).abs() < 1e-6);
    }
    assert_eq!(filled.members(), &members[..]);
    assert_eq!(impute_series(&filled).unwrap(), filled);
}

#[test]
fn imputation_names_the_failing_column() {
    let n = 20;
    let obs: Vec<Option<f64>> = (0..n).map(|t| Some(t as f64)).collect();
    let members: Vec<Vec<Option<f64>>> = (0..n)
        .map(|t| vec![Some(1.0), Some(2.0), if t < 2 { Some(3.0) } else { None }, Some(4.0)])
        .collect();
    match impute_series(&series_with(obs, members)) {
        Err(e @ Error::InsufficientData { .. }) => assert!(e.to_string().contains("ctrl"), "{e}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn csv_round_trip() {
    let spec: SynthSpec = serde_json::from_value(serde_json::json!({
        "length": 50, "m": 4, "seed": 9, "missing_rate": 0.05,
        "dependence": { "family": "clayton", "tau": 0.4 }, "noise_sd": 0.5
    }))
    .unwrap();
    let s = synth_generate(&spec).unwrap();
    assert!(s.has_missing());
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let back = parse_csv(&buf[..], &CsvSchema::default()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn synthetic_dependence_matches_target() {
    let spec: SynthSpec = serde_json::from_value(serde_json::json!({
        "length": 5000, "m": 4, "seed": 21,
        "dependence": { "family": "gumbel", "tau": 0.5 }, "noise_sd": 1e-3
    }))
    .unwrap();
    let s = synth_generate(&spec).unwrap();
    let obs = s.complete_obs().unwrap();
    let m1: Vec<f64> = s.member_column(0).into_iter().map(Option::unwrap).collect();
    let tau = kendall_tau(&obs, &m1).unwrap();
    assert!((tau - 0.5).abs() < 0.03, "{tau}");
}

#[test]
fn window_examples() {
    assert_eq!(standard_window(41, 40).unwrap(), (1..=40).collect::<Vec<_>>());
    assert!(standard_window(40, 40).is_err());
    let d = |y, m, dd| NaiveDate::from_ymd_opt(y, m, dd).unwrap();
    let w = refined_window(d(2011, 6, 25), 45, d(2002, 1, 1), d(2014, 12, 31), 24).unwrap();
    assert_eq!(w.len(), 864);
    let cutoff = (d(2011, 6, 25) - d(2002, 1, 1)).num_days() as usize;
    assert!(w.iter().all(|&i| i < cutoff));
}
