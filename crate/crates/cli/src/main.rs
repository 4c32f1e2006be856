use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use vinecast::dataset::{
    impute_series, parse_csv, synth_generate, CsvSchema, DependenceSpec, StationSeries, SynthSpec,
};
use vinecast::emos::emos_predict;
use vinecast::experiment::{
    fit_model, run_diagnostics, run_experiment, write_outputs, write_pairs, CandidateSet, ExperimentConfig, Features,
    ModelKind, SavedModel,
};
use vinecast::verify::{compare, crps_from_quantiles, ks_uniform, read_scores_csv, ComparisonRow, ScoreReport};
use vinecast::{Error, Result};

/// D-vine copula and EMOS post-processing of ensemble forecasts.
#[derive(Debug, Parser)]
#[command(name = "vinecast", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic station file.
    Synth(SynthArgs),
    /// Fill gaps with per-column annual harmonics.
    Impute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 24)]
        horizon: u32,
    },
    /// Fit one model on the training window of a test date.
    Fit {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        test_date: NaiveDate,
        /// Where to write the fitted model (JSON).
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Forecast one date with a fitted model and print JSON.
    Predict {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long)]
        date: NaiveDate,
        #[arg(long, default_value_t = 100)]
        quantiles: usize,
        #[arg(long, default_value_t = 24)]
        horizon: u32,
    },
    /// Summarize a per-day score file.
    Verify {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value_t = vinecast::verify::DEFAULT_PIT_BINS)]
        bins: usize,
    },
    /// Rank models by mean CRPS from `scores_<model>_<station>.csv` files.
    Compare {
        #[arg(required = true)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write pairwise normal scores of obs, ctrl, hres and mean.
    Diagnose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 24)]
        horizon: u32,
        /// First day of the marginal-fitting window.
        #[arg(long)]
        from: Option<NaiveDate>,
        /// Last day of the marginal-fitting window.
        #[arg(long)]
        to: Option<NaiveDate>,
    },
    /// Run the full rolling-window experiment.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// JSON synthetic spec; the flags below are ignored when given.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 3000)]
    length: usize,
    #[arg(long, default_value_t = 50)]
    members: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "gumbel")]
    family: String,
    #[arg(long, default_value_t = 0.6)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_sd: f64,
    #[arg(long, default_value = "SYN")]
    station: String,
    #[arg(long, default_value_t = 24)]
    horizon: u32,
    #[arg(long, default_value_t = 0.0)]
    climate_amplitude: f64,
    #[arg(long, default_value_t = 0.0)]
    missing_rate: f64,
    #[arg(long)]
    out: PathBuf,
}

/// Experiment settings: a JSON file, overridden by individual flags.
#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Station CSV file; repeat for several stations.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    /// JSON synthetic spec used instead of input files.
    #[arg(long)]
    synth: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<u32>,
    /// Comma-separated subset of dvine, emos_s, emos_r.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    #[arg(long)]
    t1: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    test_size: Option<usize>,
    /// Size of the predictive quantile grid.
    #[arg(long)]
    quantiles: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    refit_every: Option<usize>,
    #[arg(long)]
    pit_bins: Option<usize>,
    /// groups or all_members.
    #[arg(long)]
    candidates: Option<String>,
    /// Comma-separated fixed D-vine predictor order.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    #[arg(long)]
    emos_crosscheck: bool,
}

impl ConfigArgs {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        if !self.inputs.is_empty() {
            c.inputs = self.inputs;
            c.synth = None;
        }
        if let Some(p) = &self.synth {
            c.synth = Some(read_json(p)?);
            c.inputs.clear();
        }
        macro_rules! set {
            ($($field:ident <- $arg:ident),*) => {$(if let Some(v) = self.$arg { c.$field = v; })*};
        }
        set!(horizon_hours <- horizon, models <- models, n <- n, test_size <- test_size, quantiles <- quantiles,
             seed <- seed, output_dir <- out, refit_every <- refit_every, pit_bins <- pit_bins);
        if self.t1.is_some() {
            c.t1 = self.t1;
        }
        if let Some(s) = self.candidates {
            c.candidates = parse_candidates(&s)?;
        }
        if self.order.is_some() {
            c.dvine_order = self.order;
        }
        c.emos_crosscheck |= self.emos_crosscheck;
        Ok(c)
    }
}

fn parse_candidates(s: &str) -> Result<CandidateSet> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| Error::Config(format!("unknown candidate set {s:?}; expected groups or all_members")))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn read_series(path: &Path, horizon: u32) -> Result<StationSeries> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(
        f,
        &CsvSchema {
            horizon_hours: horizon,
            roles: None,
        },
    )
}

fn write_series(series: &StationSeries, path: &Path) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    series.write_csv(std::io::BufWriter::new(f))
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn print_table(rows: &[ComparisonRow]) {
    println!("{:<12} {:<8} {:>12} {:>5}", "station", "model", "mean_crps", "rank");
    for r in rows {
        println!("{:<12} {:<8} {:>12.6} {:>5}", r.station, r.model, r.mean_crps, r.rank);
    }
}

/// Splits `scores_<model>_<station>.csv` into model and station.
fn label_from_path(path: &Path) -> (String, String) {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let rest = stem.strip_prefix("scores_").unwrap_or(stem);
    for m in [ModelKind::Dvine, ModelKind::EmosS, ModelKind::EmosR] {
        if let Some(st) = rest.strip_prefix(m.name()).and_then(|s| s.strip_prefix('_')) {
            return (m.name().into(), st.into());
        }
    }
    match rest.rsplit_once('_') {
        Some((m, s)) => (m.into(), s.into()),
        None => (rest.into(), String::new()),
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec: SynthSpec = match &args.spec {
        Some(p) => read_json(p)?,
        None => SynthSpec {
            length: args.length,
            m: args.members,
            seed: args.seed,
            dependence: DependenceSpec {
                family: args.family,
                tau: args.tau,
            },
            noise_sd: args.noise_sd,
            ctrl_noise_sd: None,
            hres_noise_sd: None,
            start_date: NaiveDate::from_ymd_opt(2002, 1, 1).expect("valid date"),
            station: args.station,
            horizon_hours: args.horizon,
            climate_mean: 10.0,
            climate_amplitude: args.climate_amplitude,
            climate_sd: 4.0,
            missing_rate: args.missing_rate,
        },
    };
    write_series(&synth_generate(&spec)?, &args.out)
}

fn fit(config: ConfigArgs, kind: ModelKind, test_date: NaiveDate, model_out: &Path) -> Result<()> {
    let config = config.resolve()?;
    config.validate()?;
    let all = vinecast::experiment::load_series(&config)?;
    let [series] = all.as_slice() else {
        return Err(Error::Config(format!(
            "fit needs exactly one station, got {}",
            all.len()
        )));
    };
    let series = impute_series(series)?;
    let t = series
        .index_of(test_date)
        .ok_or_else(|| Error::Config(format!("test date {test_date} is not in the series")))?;
    let features = Features::new(&series, config.candidates)?;
    let model = fit_model(kind, &features, series.dates(), t, &config)?;
    let text = serde_json::to_string_pretty(&model)?;
    fs::write(model_out, text + "\n").map_err(|e| Error::io(model_out, e))
}

type CdfFn = Box<dyn Fn(f64) -> Result<f64>>;

fn predict(input: &Path, model_file: &Path, date: NaiveDate, r: usize, horizon: u32) -> Result<()> {
    let model: SavedModel = read_json(model_file)?;
    let raw = read_series(input, horizon)?;
    let series = impute_series(&raw)?;
    let t = series
        .index_of(date)
        .ok_or_else(|| Error::Config(format!("date {date} is not in the series")))?;
    // observed value only; an imputed one would not be a real verification
    let obs = raw.index_of(date).and_then(|i| raw.obs()[i]);
    let candidates = match &model {
        SavedModel::Dvine { vine, .. }
            if vine
                .predictors()
                .iter()
                .any(|p| !["ctrl", "hres", "mean"].contains(&p.as_str())) =>
        {
            CandidateSet::AllMembers
        }
        _ => CandidateSet::Groups,
    };
    let features = Features::new(&series, candidates)?;
    let (quantiles, cdf): (Vec<f64>, CdfFn) = match &model {
        SavedModel::Dvine { vine, .. } => {
            let x = features.values_at(vine.predictors(), t)?;
            let q = vine.predictive_quantiles(&x, r)?;
            let vine = vine.clone();
            (q, Box::new(move |y| vine.predictive_cdf(y, &x)))
        }
        SavedModel::Emos(m) => {
            let f = emos_predict(&m.params, &features.groups[t]);
            (f.quantiles(r), Box::new(move |y| Ok(f.cdf(y))))
        }
    };
    let mut v = serde_json::json!({ "date": date.to_string(), "quantiles": quantiles });
    if let Some(y) = obs {
        v["obs"] = y.into();
        v["crps"] = crps_from_quantiles(&quantiles, y)?.into();
        v["pit"] = cdf(y)?.into();
    }
    print_json(&v)
}

fn verify(path: &Path, bins: usize) -> Result<()> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let days = read_scores_csv(f)?;
    let (model, station) = label_from_path(path);
    let report = ScoreReport::new(model, station, days, bins)?;
    let mut v = report.summary_json();
    v["ks_distance"] = ks_uniform(&report.pit_values()).into();
    print_json(&v)
}

fn compare_files(paths: &[PathBuf], json: bool) -> Result<()> {
    let mut reports = Vec::with_capacity(paths.len());
    for p in paths {
        let f = fs::File::open(p).map_err(|e| Error::io(p, e))?;
        let (model, station) = label_from_path(p);
        reports.push(ScoreReport::new(
            model,
            station,
            read_scores_csv(f)?,
            vinecast::verify::DEFAULT_PIT_BINS,
        )?);
    }
    let refs: Vec<&ScoreReport> = reports.iter().collect();
    let rows = compare(&refs);
    if json {
        print_json(&serde_json::to_value(&rows)?)
    } else {
        print_table(&rows);
        Ok(())
    }
}

fn diagnose(input: &Path, out: &Path, horizon: u32, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Result<()> {
    let series = impute_series(&read_series(input, horizon)?)?;
    let window: Option<Vec<usize>> = (from.is_some() || to.is_some()).then(|| {
        let dates = series.dates();
        (0..dates.len())
            .filter(|&i| from.is_none_or(|f| dates[i] >= f) && to.is_none_or(|t| dates[i] <= t))
            .collect()
    });
    let pairs = run_diagnostics(&series, window.as_deref())?;
    for p in write_pairs(&pairs, out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn run(config: ConfigArgs) -> Result<()> {
    let config = config.resolve()?;
    let result = run_experiment(&config)?;
    write_outputs(&config, &result, &config.output_dir)?;
    log::info!(
        "wrote {} station results to {}",
        result.stations.len(),
        config.output_dir.display()
    );
    print_table(&result.comparison);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => synth(args),
        Command::Impute { input, out, horizon } => write_series(&impute_series(&read_series(&input, horizon)?)?, &out),
        Command::Fit {
            config,
            model,
            test_date,
            model_out,
        } => fit(config, model, test_date, &model_out),
        Command::Predict {
            input,
            model_file,
            date,
            quantiles,
            horizon,
        } => predict(&input, &model_file, date, quantiles, horizon),
        Command::Verify { scores, bins } => verify(&scores, bins),
        Command::Compare { scores, json } => compare_files(&scores, json),
        Command::Diagnose {
            input,
            out,
            horizon,
            from,
            to,
        } => diagnose(&input, &out, horizon, from, to),
        Command::Run { config } => run(config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
