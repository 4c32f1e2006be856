//! Rolling-window experiment driver: builds training windows for every test
//! day, fits the requested models, scores the forecasts and writes reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{
    group_predictors, impute_series, parse_csv, synth_generate, CsvSchema, GroupPredictors, StationSeries, SynthSpec,
    WindowKind, WindowSpec,
};
use crate::dvine::{fit_in_order, select_and_fit, Column, DVineModel, DVineOptions};
use crate::emos::{emos_predict, fit_emos, EmosModel, EmosParams};
use crate::error::{Error, Result};
use crate::marginal::fit_kde;
use crate::special::norm_ppf;
use crate::verify::{compare, crps_from_quantiles, ks_uniform, rank_histogram, ComparisonRow, DayScore, ScoreReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dvine,
    EmosS,
    EmosR,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dvine => "dvine",
            Self::EmosS => "emos_s",
            Self::EmosR => "emos_r",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dvine" => Ok(Self::Dvine),
            "emos_s" => Ok(Self::EmosS),
            "emos_r" => Ok(Self::EmosR),
            _ => Err(Error::Config(format!(
                "unknown model {s:?}; expected dvine, emos_s or emos_r"
            ))),
        }
    }
}

/// Candidate predictors offered to D-vine forward selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSet {
    /// Control, high-resolution and perturbed-mean forecasts.
    #[default]
    Groups,
    /// Every member plus the perturbed mean.
    AllMembers,
}

/// Default standard-window length for a forecast horizon.
pub fn default_t1(horizon_hours: u32) -> Option<usize> {
    match horizon_hours {
        24 => Some(40),
        48 => Some(60),
        120 => Some(100),
        240 => Some(200),
        _ => None,
    }
}

fn default_horizon() -> u32 {
    24
}
fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::Dvine, ModelKind::EmosS, ModelKind::EmosR]
}
fn default_n() -> usize {
    45
}
fn default_test_size() -> usize {
    1000
}
fn default_quantiles() -> usize {
    100
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_one() -> usize {
    1
}
fn default_bins() -> usize {
    crate::verify::DEFAULT_PIT_BINS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Station CSV files, one per station.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    /// Synthetic data used instead of `inputs`.
    #[serde(default)]
    pub synth: Option<SynthSpec>,
    #[serde(default = "default_horizon")]
    pub horizon_hours: u32,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    /// Standard window length; the horizon default when absent.
    #[serde(default)]
    pub t1: Option<usize>,
    /// Refined window half-width.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    /// Number of predictive quantiles for the D-vine CRPS.
    #[serde(default = "default_quantiles")]
    pub quantiles: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Reuse each fit for this many consecutive test days.
    #[serde(default = "default_one")]
    pub refit_every: usize,
    #[serde(default = "default_bins")]
    pub pit_bins: usize,
    #[serde(default)]
    pub candidates: CandidateSet,
    /// Fixed predictor order; disables forward selection.
    #[serde(default)]
    pub dvine_order: Option<Vec<String>>,
    /// Also score EMOS through its quantile grid.
    #[serde(default)]
    pub emos_crosscheck: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.inputs.is_empty() == self.synth.is_none() {
            return bad("exactly one of inputs or synth must be given".into());
        }
        if self.models.is_empty() {
            return bad("no models requested".into());
        }
        if self.test_size == 0 {
            return bad("test_size must be at least 1".into());
        }
        if self.refit_every == 0 {
            return bad("refit_every must be at least 1".into());
        }
        if self.quantiles < 2 || self.pit_bins < 2 {
            return bad("quantiles and pit_bins must be at least 2".into());
        }
        if self.n == 0 {
            return bad("refined half-window n must be at least 1".into());
        }
        match self.t1 {
            Some(t) if t < 2 => bad(format!("t1 must be at least 2, got {t}")),
            None if default_t1(self.horizon_hours).is_none() => bad(format!(
                "no default t1 for a {}-hour horizon; set t1",
                self.horizon_hours
            )),
            _ => Ok(()),
        }
    }

    pub fn t1(&self) -> usize {
        self.t1.or_else(|| default_t1(self.horizon_hours)).unwrap_or(40)
    }

    pub fn window(&self, kind: ModelKind) -> WindowSpec {
        match kind {
            ModelKind::EmosS => WindowSpec {
                horizon_hours: self.horizon_hours,
                ..WindowSpec::standard(self.t1())
            },
            ModelKind::Dvine | ModelKind::EmosR => WindowSpec::refined(self.n, self.horizon_hours),
        }
    }

    /// Settings that determine the results, without file locations.
    fn settings_json(&self) -> serde_json::Value {
        serde_json::json!({
            "horizon_hours": self.horizon_hours,
            "models": self.models,
            "t1": self.t1(),
            "n": self.n,
            "test_size": self.test_size,
            "quantiles": self.quantiles,
            "seed": self.seed,
            "refit_every": self.refit_every,
            "pit_bins": self.pit_bins,
            "candidates": self.candidates,
            "dvine_order": self.dvine_order,
            "synth": self.synth,
        })
    }
}

/// Deterministic child seed for a labelled stream.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Reads or generates the station series named by the config.
pub fn load_series(config: &ExperimentConfig) -> Result<Vec<StationSeries>> {
    if let Some(spec) = &config.synth {
        let spec = SynthSpec {
            horizon_hours: config.horizon_hours,
            ..spec.clone()
        };
        return Ok(vec![synth_generate(&spec)?]);
    }
    let schema = CsvSchema {
        horizon_hours: config.horizon_hours,
        roles: None,
    };
    config
        .inputs
        .iter()
        .map(|p| {
            let f = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            parse_csv(f, &schema)
        })
        .collect()
}

/// Per-date inputs shared by all models.
#[derive(Debug, Clone)]
pub struct Features {
    pub obs: Vec<f64>,
    pub groups: Vec<GroupPredictors>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Features {
    /// Requires a complete (imputed) series.
    pub fn new(series: &StationSeries, candidates: CandidateSet) -> Result<Self> {
        let obs = series.complete_obs()?;
        let groups = group_predictors(series)?;
        let mut names = Vec::new();
        let mut columns = Vec::new();
        let pick = |f: fn(&GroupPredictors) -> f64| groups.iter().map(f).collect::<Vec<f64>>();
        match candidates {
            CandidateSet::Groups => {
                names.extend(["ctrl", "hres", "mean"].map(String::from));
                columns.push(pick(|g| g.ctrl));
                columns.push(pick(|g| g.hres));
                columns.push(pick(|g| g.mean_perturbed));
            }
            CandidateSet::AllMembers => {
                for (j, name) in series.member_names().iter().enumerate() {
                    names.push(name.clone());
                    columns.push(
                        series
                            .member_column(j)
                            .into_iter()
                            .map(|v| v.unwrap_or(f64::NAN))
                            .collect(),
                    );
                }
                names.push("mean".into());
                columns.push(pick(|g| g.mean_perturbed));
            }
        }
        Ok(Self {
            obs,
            groups,
            names,
            columns,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn values_at(&self, names: &[String], t: usize) -> Result<Vec<f64>> {
        names
            .iter()
            .map(|n| {
                self.column(n)
                    .map(|c| c[t])
                    .ok_or_else(|| Error::Schema(format!("model predictor {n:?} is not available")))
            })
            .collect()
    }
}

/// A model fitted on one training window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SavedModel {
    Dvine {
        window_kind: WindowKind,
        window_size: usize,
        vine: DVineModel,
    },
    Emos(EmosModel),
}

/// Fits `kind` on the training window of `test_index`.
pub fn fit_model(
    kind: ModelKind,
    features: &Features,
    dates: &[chrono::NaiveDate],
    test_index: usize,
    config: &ExperimentConfig,
) -> Result<SavedModel> {
    let spec = config.window(kind);
    let window = spec.indices(test_index, dates)?;
    assert!(
        window.iter().all(|&i| i < test_index),
        "training window for {} reaches the test day",
        dates[test_index]
    );
    match kind {
        ModelKind::Dvine => {
            let y: Vec<f64> = window.iter().map(|&i| features.obs[i]).collect();
            let names: Vec<String> = match &config.dvine_order {
                Some(order) => order.clone(),
                None => features.names.clone(),
            };
            let cols: Vec<Vec<f64>> = names
                .iter()
                .map(|n| {
                    let c = features
                        .column(n)
                        .ok_or_else(|| Error::Config(format!("unknown D-vine predictor {n:?}")))?;
                    Ok(window.iter().map(|&i| c[i]).collect())
                })
                .collect::<Result<_>>()?;
            let columns: Vec<Column<'_>> = names.iter().zip(&cols).map(|(n, c)| Column::new(n, c)).collect();
            let opts = DVineOptions::default();
            let response = Column::new("obs", &y);
            let (vine, _) = if config.dvine_order.is_some() {
                fit_in_order(response, &columns, &opts)?
            } else {
                select_and_fit(response, &columns, &opts)?
            };
            Ok(SavedModel::Dvine {
                window_kind: spec.kind,
                window_size: window.len(),
                vine,
            })
        }
        ModelKind::EmosS | ModelKind::EmosR => {
            let rows: Vec<(GroupPredictors, f64)> =
                window.iter().map(|&i| (features.groups[i], features.obs[i])).collect();
            Ok(SavedModel::Emos(EmosModel {
                params: fit_emos(&rows)?,
                window_kind: spec.kind,
                window_size: window.len(),
            }))
        }
    }
}

/// Scores a fitted model on day `t`.
pub fn score_day(
    model: &SavedModel,
    features: &Features,
    date: chrono::NaiveDate,
    t: usize,
    quantiles: usize,
    crosscheck: bool,
) -> Result<DayScore> {
    let y = features.obs[t];
    match model {
        SavedModel::Dvine { vine, .. } => {
            let x = features.values_at(vine.predictors(), t)?;
            let q = vine.predictive_quantiles(&x, quantiles)?;
            Ok(DayScore {
                date,
                obs: y,
                crps: crps_from_quantiles(&q, y)?,
                pit: vine.predictive_cdf(y, &x)?,
                crps_quantile: None,
            })
        }
        SavedModel::Emos(m) => {
            let f = emos_predict(&m.params, &features.groups[t]);
            Ok(DayScore {
                date,
                obs: y,
                crps: f.crps(y),
                pit: f.cdf(y),
                crps_quantile: if crosscheck {
                    Some(crps_from_quantiles(&f.quantiles(quantiles), y)?)
                } else {
                    None
                },
            })
        }
    }
}

/// Results for one station.
#[derive(Debug, Clone, PartialEq)]
pub struct StationResult {
    pub station: String,
    pub reports: Vec<ScoreReport>,
    /// Raw-ensemble rank histogram over the test days.
    pub rank_bins: Vec<usize>,
}

/// Results of a full experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub stations: Vec<StationResult>,
    pub comparison: Vec<ComparisonRow>,
}

/// Index of the first test day.
pub fn first_test_index(series_len: usize, test_size: usize) -> Result<usize> {
    series_len.checked_sub(test_size).filter(|&s| s > 0).ok_or_else(|| {
        Error::InsufficientHistory(format!(
            "test_size {test_size} leaves no training data in {series_len} days"
        ))
    })
}

/// Runs every requested model over the final `test_size` days of one
/// station's series.
pub fn run_station(config: &ExperimentConfig, series: &StationSeries) -> Result<StationResult> {
    config.validate()?;
    let series = impute_series(series)?;
    let features = Features::new(&series, config.candidates)?;
    let dates = series.dates();
    let first = first_test_index(series.len(), config.test_size)?;
    let test_days: Vec<usize> = (first..series.len()).collect();

    // fail early, naming the first test day whose window cannot be built
    for &kind in &config.models {
        let spec = config.window(kind);
        for &t in test_days.iter().step_by(config.refit_every) {
            if let Err(e) = spec.indices(t, dates) {
                return Err(Error::InsufficientHistory(format!(
                    "{}: first infeasible test day {} ({e})",
                    kind.name(),
                    dates[t]
                )));
            }
        }
    }

    let mut reports = Vec::with_capacity(config.models.len());
    for &kind in &config.models {
        let blocks: Vec<&[usize]> = test_days.chunks(config.refit_every).collect();
        let scored: Vec<Vec<DayScore>> = blocks
            .par_iter()
            .map(|block| {
                let model = fit_model(kind, &features, dates, block[0], config)?;
                block
                    .iter()
                    .map(|&t| score_day(&model, &features, dates[t], t, config.quantiles, config.emos_crosscheck))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let per_day: Vec<DayScore> = scored.into_iter().flatten().collect();
        reports.push(ScoreReport::new(
            kind.name(),
            series.station_id(),
            per_day,
            config.pit_bins,
        )?);
    }

    let rows: Vec<Vec<f64>> = test_days
        .iter()
        .map(|&t| series.members()[t].iter().map(|v| v.expect("imputed")).collect())
        .collect();
    let obs: Vec<f64> = test_days.iter().map(|&t| features.obs[t]).collect();
    let rank_bins = rank_histogram(&rows, &obs, derive_seed(config.seed, series.station_id(), 0))?;
    Ok(StationResult {
        station: series.station_id().to_string(),
        reports,
        rank_bins,
    })
}

/// Loads the data and runs all stations.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let all = load_series(config)?;
    let stations = all.iter().map(|s| run_station(config, s)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&ScoreReport> = stations.iter().flat_map(|s| s.reports.iter()).collect();
    Ok(ExperimentResult {
        comparison: compare(&refs),
        stations,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn json_bytes(v: &serde_json::Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

/// Pooled PIT counts, raw PIT values and per-station counts for one model.
type PitAccum = (Vec<usize>, Vec<f64>, BTreeMap<String, Vec<usize>>);

/// Writes score CSVs, PIT and rank histograms and the summary table.
pub fn write_outputs(config: &ExperimentConfig, result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut pit: BTreeMap<String, PitAccum> = BTreeMap::new();
    let mut ranks = BTreeMap::new();
    for st in &result.stations {
        for r in &st.reports {
            let mut buf = Vec::new();
            r.write_csv(&mut buf)?;
            write_file(&dir.join(format!("scores_{}_{}.csv", r.model, st.station)), &buf)?;
            let entry = pit
                .entry(r.model.clone())
                .or_insert_with(|| (vec![0; r.pit_bins.len()], Vec::new(), BTreeMap::new()));
            for (acc, c) in entry.0.iter_mut().zip(&r.pit_bins) {
                *acc += c;
            }
            entry.1.extend(r.pit_values());
            entry.2.insert(st.station.clone(), r.pit_bins.clone());
        }
        ranks.insert(st.station.clone(), st.rank_bins.clone());
    }
    for (model, (bins, values, per_station)) in &pit {
        let v = serde_json::json!({
            "model": model,
            "bins": bins.len(),
            "counts": bins,
            "ks_distance": ks_uniform(values),
            "per_station": per_station,
        });
        write_file(&dir.join(format!("pit_{model}.json")), &json_bytes(&v)?)?;
    }
    let mut pooled: Vec<usize> = Vec::new();
    for bins in ranks.values() {
        if pooled.len() < bins.len() {
            pooled.resize(bins.len(), 0);
        }
        for (acc, c) in pooled.iter_mut().zip(bins) {
            *acc += c;
        }
    }
    let v = serde_json::json!({ "pooled": pooled, "per_station": ranks });
    write_file(&dir.join("ranks.json"), &json_bytes(&v)?)?;

    let reports: Vec<serde_json::Value> = result
        .stations
        .iter()
        .flat_map(|s| s.reports.iter().map(ScoreReport::summary_json))
        .collect();
    let v = serde_json::json!({
        "settings": config.settings_json(),
        "comparison": result.comparison,
        "reports": reports,
    });
    write_file(&dir.join("summary.json"), &json_bytes(&v)?)
}

/// Normalized scores of one variable pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScores {
    pub first: String,
    pub second: String,
    pub z: Vec<(f64, f64)>,
}

/// Variables of the contour diagnostics: observation, control, high-res and
/// perturbed mean.
pub const DIAGNOSTIC_VARIABLES: [&str; 4] = ["obs", "ctrl", "hres", "mean"];

/// Normal scores `Phi^{-1}(F_hat(x))` for every pair of diagnostic
/// variables, with marginals fitted on `window` (all days when `None`).
pub fn run_diagnostics(series: &StationSeries, window: Option<&[usize]>) -> Result<Vec<PairScores>> {
    let series = impute_series(series)?;
    let features = Features::new(&series, CandidateSet::Groups)?;
    let all: Vec<usize> = (0..series.len()).collect();
    let idx = window.unwrap_or(&all);
    let mut z = Vec::with_capacity(DIAGNOSTIC_VARIABLES.len());
    for name in DIAGNOSTIC_VARIABLES {
        let col = if name == "obs" {
            features.obs.as_slice()
        } else {
            features.column(name).expect("group column")
        };
        let sample: Vec<f64> = idx.iter().map(|&i| col[i]).collect();
        let marg = fit_kde(&sample).map_err(|e| Error::Fit(format!("marginal of {name}: {e}")))?;
        z.push(sample.iter().map(|&x| norm_ppf(marg.pit(x))).collect::<Vec<f64>>());
    }
    let mut out = Vec::new();
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            out.push(PairScores {
                first: DIAGNOSTIC_VARIABLES[i].into(),
                second: DIAGNOSTIC_VARIABLES[j].into(),
                z: z[i].iter().copied().zip(z[j].iter().copied()).collect(),
            });
        }
    }
    Ok(out)
}

/// Writes `pairs_<v1>_<v2>.csv` files.
pub fn write_pairs(pairs: &[PairScores], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for p in pairs {
        let path = dir.join(format!("pairs_{}_{}.csv", p.first, p.second));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([format!("z_{}", p.first), format!("z_{}", p.second)])?;
        for (a, b) in &p.z {
            w.write_record([a.to_string(), b.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
        write_file(&path, &bytes)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Convenience: fitted EMOS parameters for ad-hoc use.
pub fn emos_params(model: &SavedModel) -> Option<&EmosParams> {
    match model {
        SavedModel::Emos(m) => Some(&m.params),
        SavedModel::Dvine { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DependenceSpec;

    fn synth_config(length: usize, test_size: usize, models: Vec<ModelKind>) -> ExperimentConfig {
        ExperimentConfig {
            synth: Some(SynthSpec {
                length,
                m: 10,
                seed: 3,
                dependence: DependenceSpec {
                    family: "gumbel".into(),
                    tau: 0.6,
                },
                noise_sd: 0.8,
                ctrl_noise_sd: None,
                hres_noise_sd: None,
                start_date: chrono::NaiveDate::from_ymd_opt(2002, 1, 1).unwrap(),
                station: "SYN".into(),
                horizon_hours: 24,
                climate_mean: 10.0,
                climate_amplitude: 5.0,
                climate_sd: 3.0,
                missing_rate: 0.0,
            }),
            models,
            test_size,
            ..Default::default()
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = ExperimentConfig::default();
        assert_eq!(
            (c.n, c.test_size, c.quantiles, c.refit_every, c.t1()),
            (45, 1000, 100, 1, 40)
        );
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert_eq!(default_t1(240), Some(200));
        let bad: std::result::Result<ExperimentConfig, _> = serde_json::from_str(r#"{"bogus": 1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn emos_smoke_run() {
        let config = synth_config(120, 10, vec![ModelKind::EmosS]);
        let res = run_experiment(&config).unwrap();
        assert_eq!(res.stations[0].reports[0].per_day.len(), 10);
        assert_eq!(res.comparison.len(), 1);
        assert_eq!(res.stations[0].rank_bins.iter().sum::<usize>(), 10);
    }

    #[test]
    fn insufficient_history_names_day() {
        let config = synth_config(45, 10, vec![ModelKind::EmosS]);
        match run_experiment(&config) {
            Err(Error::InsufficientHistory(m)) => assert!(m.contains("2002-02-05"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagnostics_emit_six_pairs() {
        let config = synth_config(400, 10, vec![ModelKind::EmosS]);
        let s = &load_series(&config).unwrap()[0];
        let pairs = run_diagnostics(s, None).unwrap();
        assert_eq!(pairs.len(), 6);
        assert!(pairs
            .iter()
            .all(|p| p.z.len() == 400 && p.z.iter().all(|(a, b)| a.is_finite() && b.is_finite())));
    }

    #[test]
    fn seeds_are_stable() {
        assert_eq!(derive_seed(1, "a", 0), derive_seed(1, "a", 0));
        assert_ne!(derive_seed(1, "a", 0), derive_seed(1, "a", 1));
        assert_ne!(derive_seed(1, "a", 0), derive_seed(2, "a", 0));
    }
}
