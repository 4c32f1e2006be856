//! Station time series: CSV ingestion, harmonic imputation, rolling training
//! windows, group predictors and synthetic data.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::{Read, Write};

use chrono::{Datelike, Duration, NaiveDate};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paircopula::{tau_to_param, Family, PairCopula, Rotation};
use crate::special::norm_ppf;

/// Angular frequency of the annual cycle, radians per day.
pub const ANNUAL_FREQUENCY: f64 = 2.0 * PI / 365.25;

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberRole {
    Perturbed,
    Control,
    HighRes,
}

impl MemberRole {
    /// Role implied by a CSV column name: `ens_*`, `ctrl` or `hres`.
    pub fn from_column(name: &str) -> Option<Self> {
        match name {
            "ctrl" => Some(Self::Control),
            "hres" => Some(Self::HighRes),
            n if n.starts_with("ens_") => Some(Self::Perturbed),
            _ => None,
        }
    }
}

/// Daily observations and ensemble forecasts for one station and horizon.
/// Missing cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationSeries {
    station_id: String,
    horizon_hours: u32,
    dates: Vec<NaiveDate>,
    obs: Vec<Option<f64>>,
    members: Vec<Vec<Option<f64>>>,
    member_names: Vec<String>,
    member_roles: Vec<MemberRole>,
}

impl StationSeries {
    /// Validates shapes and date ordering.
    pub fn new(
        station_id: impl Into<String>,
        horizon_hours: u32,
        dates: Vec<NaiveDate>,
        obs: Vec<Option<f64>>,
        members: Vec<Vec<Option<f64>>>,
        member_names: Vec<String>,
        member_roles: Vec<MemberRole>,
    ) -> Result<Self> {
        let n = dates.len();
        if obs.len() != n || members.len() != n {
            return Err(Error::Schema(format!(
                "{n} dates but {} observations and {} member rows",
                obs.len(),
                members.len()
            )));
        }
        let m = member_names.len();
        if member_roles.len() != m {
            return Err(Error::Schema("member names and roles differ in length".into()));
        }
        if let Some(i) = members.iter().position(|row| row.len() != m) {
            return Err(Error::Schema(format!(
                "row {i} has {} members, expected {m}",
                members[i].len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Schema(format!("dates not strictly increasing at {}", w[1])));
        }
        Ok(Self {
            station_id: station_id.into(),
            horizon_hours,
            dates,
            obs,
            members,
            member_names,
            member_roles,
        })
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn horizon_hours(&self) -> u32 {
        self.horizon_hours
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn obs(&self) -> &[Option<f64>] {
        &self.obs
    }

    /// One row of `m` member forecasts per date.
    pub fn members(&self) -> &[Vec<Option<f64>>] {
        &self.members
    }

    pub fn member_names(&self) -> &[String] {
        &self.member_names
    }

    pub fn member_roles(&self) -> &[MemberRole] {
        &self.member_roles
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_members(&self) -> usize {
        self.member_names.len()
    }

    pub fn member_column(&self, j: usize) -> Vec<Option<f64>> {
        self.members.iter().map(|row| row[j]).collect()
    }

    /// Index of `date`, if present.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    pub fn has_missing(&self) -> bool {
        self.obs.iter().any(Option::is_none) || self.members.iter().flatten().any(Option::is_none)
    }

    /// True when dates form an unbroken daily sequence.
    pub fn is_contiguous(&self) -> bool {
        self.dates.windows(2).all(|w| w[1] - w[0] == Duration::days(1))
    }

    /// Observations with missing values rejected, naming the first gap.
    pub fn complete_obs(&self) -> Result<Vec<f64>> {
        self.obs
            .iter()
            .zip(&self.dates)
            .map(|(v, d)| {
                v.ok_or_else(|| Error::InsufficientData {
                    column: Some("obs".into()),
                    message: format!("missing value on {d}; impute first"),
                })
            })
            .collect()
    }

    /// Writes the series in the ingestion CSV layout, missing cells as `NA`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["date".to_string(), "station".into(), "obs".into()];
        header.extend(self.member_names.iter().cloned());
        out.write_record(&header)?;
        let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        for i in 0..self.len() {
            let mut rec = vec![
                self.dates[i].format(DATE_FORMAT).to_string(),
                self.station_id.clone(),
                cell(self.obs[i]),
            ];
            rec.extend(self.members[i].iter().map(|&v| cell(v)));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// How CSV member columns are interpreted.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub horizon_hours: u32,
    /// Explicit member roles in column order; inferred from names when `None`.
    pub roles: Option<Vec<MemberRole>>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            horizon_hours: 24,
            roles: None,
        }
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a `date,station,obs,<members...>` CSV for a single station.
pub fn parse_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<StationSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < 4 || header[0] != "date" || header[1] != "station" || header[2] != "obs" {
        return Err(Error::Schema(format!(
            "header must start with date,station,obs followed by member columns, got {}",
            header.join(",")
        )));
    }
    let member_names = header[3..].to_vec();
    let roles = match &schema.roles {
        Some(r) if r.len() == member_names.len() => r.clone(),
        Some(r) => {
            return Err(Error::Schema(format!(
                "schema declares {} member roles but the file has {} member columns",
                r.len(),
                member_names.len()
            )))
        }
        None => member_names
            .iter()
            .map(|n| {
                MemberRole::from_column(n)
                    .ok_or_else(|| Error::Schema(format!("cannot infer the role of member column {n:?}")))
            })
            .collect::<Result<_>>()?,
    };

    let mut station: Option<String> = None;
    let mut rows: Vec<(NaiveDate, Option<f64>, Vec<Option<f64>>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&rec[0], DATE_FORMAT).map_err(|e| Error::Parse {
            line,
            message: format!("malformed date {:?}: {e}", &rec[0]),
        })?;
        match &station {
            None => station = Some(rec[1].to_string()),
            Some(s) if s != &rec[1] => {
                return Err(Error::Schema(format!(
                    "line {line}: station {:?} differs from {s:?}; use one file per station",
                    &rec[1]
                )))
            }
            Some(_) => {}
        }
        let members = (3..rec.len()).map(|j| parse_cell(&rec[j])).collect();
        rows.push((date, parse_cell(&rec[2]), members));
    }
    let station = station.ok_or_else(|| Error::insufficient("CSV contains no data rows"))?;
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Conflict {
            station,
            date: w[0].0.to_string(),
        });
    }
    let mut dates = Vec::with_capacity(rows.len());
    let mut obs = Vec::with_capacity(rows.len());
    let mut members = Vec::with_capacity(rows.len());
    for (d, o, m) in rows {
        dates.push(d);
        obs.push(o);
        members.push(m);
    }
    StationSeries::new(station, schema.horizon_hours, dates, obs, members, member_names, roles)
}

/// Annual harmonic `mu + a cos(psi t) + b sin(psi t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub psi: f64,
}

impl HarmonicFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.mu + self.a * (self.psi * t).cos() + self.b * (self.psi * t).sin()
    }
}

fn day_offsets(dates: &[NaiveDate]) -> Vec<f64> {
    let Some(&start) = dates.first() else {
        return Vec::new();
    };
    dates.iter().map(|d| (*d - start).num_days() as f64).collect()
}

/// Least-squares harmonic fit over the non-missing entries, with `t` counted
/// in days from the first date.
pub fn fit_harmonic(values: &[Option<f64>], dates: &[NaiveDate]) -> Result<HarmonicFit> {
    if values.len() != dates.len() {
        return Err(Error::domain("fit_harmonic: values and dates differ in length"));
    }
    fit_harmonic_at(values, &day_offsets(dates))
}

fn fit_harmonic_at(values: &[Option<f64>], t: &[f64]) -> Result<HarmonicFit> {
    let pts: Vec<(f64, f64)> = t.iter().zip(values).filter_map(|(&t, v)| v.map(|v| (t, v))).collect();
    if pts.len() < 3 {
        return Err(Error::insufficient(format!(
            "harmonic fit needs at least 3 non-missing values, got {}",
            pts.len()
        )));
    }
    let psi = ANNUAL_FREQUENCY;
    let x = DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => (psi * pts[i].0).cos(),
        _ => (psi * pts[i].0).sin(),
    });
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let coef = x
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::Numeric(format!("harmonic least squares failed: {e}")))?;
    Ok(HarmonicFit {
        mu: coef[0],
        a: coef[1],
        b: coef[2],
        psi,
    })
}

fn column_error(column: &str, e: Error) -> Error {
    match e {
        Error::InsufficientData { message, .. } => Error::InsufficientData {
            column: Some(column.to_string()),
            message,
        },
        other => other,
    }
}

/// Reindexes to an unbroken daily sequence and fills every missing cell with
/// the harmonic fitted to its own column. Observed cells are left untouched.
pub fn impute_series(series: &StationSeries) -> Result<StationSeries> {
    let mut out = reindex_daily(series);
    if !out.has_missing() {
        return Ok(out);
    }
    let t = day_offsets(&out.dates);
    if out.obs.iter().any(Option::is_none) {
        let fit = fit_harmonic_at(&out.obs, &t).map_err(|e| column_error("obs", e))?;
        for (v, &ti) in out.obs.iter_mut().zip(&t) {
            v.get_or_insert_with(|| fit.eval(ti));
        }
    }
    for j in 0..out.n_members() {
        let col = out.member_column(j);
        if col.iter().all(Option::is_some) {
            continue;
        }
        let fit = fit_harmonic_at(&col, &t).map_err(|e| column_error(&out.member_names[j], e))?;
        for (row, &ti) in out.members.iter_mut().zip(&t) {
            row[j].get_or_insert_with(|| fit.eval(ti));
        }
    }
    Ok(out)
}

fn reindex_daily(series: &StationSeries) -> StationSeries {
    if series.is_contiguous() {
        return series.clone();
    }
    let (start, end) = (series.dates[0], *series.dates.last().expect("nonempty"));
    let n = (end - start).num_days() as usize + 1;
    let m = series.n_members();
    let mut obs = vec![None; n];
    let mut members = vec![vec![None; m]; n];
    for (i, d) in series.dates.iter().enumerate() {
        let k = (*d - start).num_days() as usize;
        obs[k] = series.obs[i];
        members[k] = series.members[i].clone();
    }
    StationSeries {
        dates: (0..n).map(|k| start + Duration::days(k as i64)).collect(),
        obs,
        members,
        ..series.clone()
    }
}

/// The `t1` indices immediately preceding `test_index`. Requires
/// `test_index > t1`.
pub fn standard_window(test_index: usize, t1: usize) -> Result<Vec<usize>> {
    if t1 == 0 {
        return Err(Error::Config("standard window length must be positive".into()));
    }
    if test_index <= t1 {
        return Err(Error::InsufficientHistory(format!(
            "test index {test_index} leaves no room for a {t1}-day window"
        )));
    }
    Ok((test_index - t1..test_index).collect())
}

/// Days the current-year block is moved back so that no training
/// observation postdates the forecast issue time.
pub fn horizon_lag_days(horizon_hours: u32) -> i64 {
    (horizon_hours as i64 + 23) / 24 - 1
}

fn same_day_in_year(date: NaiveDate, year: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, date.month(), date.day())
        .or_else(|| NaiveDate::from_ymd_opt(year, date.month(), date.day() - 1))
        .expect("valid calendar day")
}

/// Refined rolling window as day offsets from `data_start`: the `n` days
/// before `test_date` (moved back by the horizon lag) plus, for every earlier
/// calendar year, the `2n + 1` days centred on the same day of year, clipped
/// to the data range.
pub fn refined_window(
    test_date: NaiveDate,
    n: usize,
    data_start: NaiveDate,
    data_end: NaiveDate,
    horizon_hours: u32,
) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Config("refined window half-width must be at least 1".into()));
    }
    if test_date < data_start || test_date > data_end {
        return Err(Error::domain(format!(
            "test date {test_date} outside the data range {data_start}..{data_end}"
        )));
    }
    let n = n as i64;
    // every training day must precede this bound
    let cutoff = test_date - Duration::days(horizon_lag_days(horizon_hours));
    let offset = |d: NaiveDate| (d - data_start).num_days() as usize;
    let mut days = BTreeSet::new();

    let recent_lo = (cutoff - Duration::days(n)).max(data_start);
    let mut d = recent_lo;
    while d < cutoff {
        days.insert(offset(d));
        d += Duration::days(1);
    }
    let recent = days.len();

    let mut prior = 0usize;
    for year in data_start.year()..test_date.year() {
        let centre = same_day_in_year(test_date, year);
        let lo = (centre - Duration::days(n)).max(data_start);
        let hi = (centre + Duration::days(n))
            .min(data_end)
            .min(cutoff - Duration::days(1));
        let mut d = lo;
        while d <= hi {
            prior += usize::from(days.insert(offset(d)));
            d += Duration::days(1);
        }
    }
    if prior == 0 && recent < n as usize {
        return Err(Error::InsufficientHistory(format!(
            "refined window for {test_date} has no prior-year data and only {recent} of {n} recent days"
        )));
    }
    Ok(days.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Standard,
    Refined,
}

/// Training-window recipe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    /// Standard window length in days.
    pub t1: usize,
    /// Refined half-window in days.
    pub n: usize,
    pub horizon_hours: u32,
}

impl WindowSpec {
    pub fn standard(t1: usize) -> Self {
        Self {
            kind: WindowKind::Standard,
            t1,
            n: 45,
            horizon_hours: 24,
        }
    }

    pub fn refined(n: usize, horizon_hours: u32) -> Self {
        Self {
            kind: WindowKind::Refined,
            t1: 0,
            n,
            horizon_hours,
        }
    }

    /// Training indices into a contiguous daily `dates` sequence for the day
    /// at `test_index`.
    pub fn indices(&self, test_index: usize, dates: &[NaiveDate]) -> Result<Vec<usize>> {
        if test_index >= dates.len() {
            return Err(Error::domain(format!(
                "test index {test_index} beyond {} dates",
                dates.len()
            )));
        }
        match self.kind {
            WindowKind::Standard => {
                if self.t1 < 2 {
                    return Err(Error::Config(format!(
                        "standard window length must be at least 2, got {}",
                        self.t1
                    )));
                }
                standard_window(test_index, self.t1)
            }
            WindowKind::Refined => refined_window(
                dates[test_index],
                self.n,
                dates[0],
                dates[dates.len() - 1],
                self.horizon_hours,
            ),
        }
    }
}

/// Exchangeable-group summaries of one day's ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupPredictors {
    pub mean_perturbed: f64,
    pub ctrl: f64,
    pub hres: f64,
    /// Sample variance of the perturbed members (divisor `m - 1`).
    pub ens_var: f64,
}

/// Per-date group predictors. Needs exactly one control, one high-resolution
/// and at least two perturbed members, all present.
pub fn group_predictors(series: &StationSeries) -> Result<Vec<GroupPredictors>> {
    let roles = series.member_roles();
    let find = |role: MemberRole| -> Result<usize> {
        let idx: Vec<usize> = (0..roles.len()).filter(|&j| roles[j] == role).collect();
        match idx.as_slice() {
            [j] => Ok(*j),
            _ => Err(Error::Schema(format!(
                "expected exactly one {role:?} member, found {}",
                idx.len()
            ))),
        }
    };
    let ctrl = find(MemberRole::Control)?;
    let hres = find(MemberRole::HighRes)?;
    let perturbed: Vec<usize> = (0..roles.len())
        .filter(|&j| roles[j] == MemberRole::Perturbed)
        .collect();
    if perturbed.len() < 2 {
        return Err(Error::Schema(format!(
            "need at least 2 perturbed members, found {}",
            perturbed.len()
        )));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut buf = Vec::with_capacity(perturbed.len());
    for (i, row) in series.members().iter().enumerate() {
        let missing = |j: usize| Error::InsufficientData {
            column: Some(series.member_names()[j].clone()),
            message: format!("missing value on {}; impute first", series.dates()[i]),
        };
        buf.clear();
        for &j in &perturbed {
            buf.push(row[j].ok_or_else(|| missing(j))?);
        }
        let k = buf.len() as f64;
        let mean = buf.iter().sum::<f64>() / k;
        let var = buf.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        out.push(GroupPredictors {
            mean_perturbed: mean,
            ctrl: row[ctrl].ok_or_else(|| missing(ctrl))?,
            hres: row[hres].ok_or_else(|| missing(hres))?,
            ens_var: var,
        });
    }
    Ok(out)
}

/// Dependence between the forecast signal and the observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceSpec {
    /// A pair-copula family name or `comonotone`.
    pub family: String,
    #[serde(default)]
    pub tau: f64,
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2002, 1, 1).expect("valid date")
}

fn default_station() -> String {
    "SYN".into()
}

fn default_horizon() -> u32 {
    24
}

fn default_mean() -> f64 {
    10.0
}

fn default_sd() -> f64 {
    4.0
}

/// Synthetic-data recipe. The latent signal `x` and observation `y` share
/// Gaussian margins `N(mu_t, sd^2)` and are coupled by the declared copula;
/// every member is `x` plus independent Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub length: usize,
    /// Number of perturbed members; a control and a high-resolution member
    /// are always added.
    pub m: usize,
    pub seed: u64,
    pub dependence: DependenceSpec,
    pub noise_sd: f64,
    #[serde(default)]
    pub ctrl_noise_sd: Option<f64>,
    #[serde(default)]
    pub hres_noise_sd: Option<f64>,
    #[serde(default = "default_start")]
    pub start_date: NaiveDate,
    #[serde(default = "default_station")]
    pub station: String,
    #[serde(default = "default_horizon")]
    pub horizon_hours: u32,
    #[serde(default = "default_mean")]
    pub climate_mean: f64,
    /// Amplitude of an annual cosine in the climatological mean.
    #[serde(default)]
    pub climate_amplitude: f64,
    #[serde(default = "default_sd")]
    pub climate_sd: f64,
    /// Fraction of cells blanked after generation.
    #[serde(default)]
    pub missing_rate: f64,
}

#[derive(Debug, Clone)]
enum Coupling {
    Comonotone,
    Copula(PairCopula),
}

/// The generating law, kept for oracle forecasts.
#[derive(Debug, Clone)]
pub struct SynthTruth {
    coupling: Coupling,
    centre: Vec<f64>,
    sd: f64,
    latent_u: Vec<f64>,
    signal: Vec<f64>,
}

impl SynthTruth {
    /// Latent forecast signal `x_t` (before member noise).
    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    /// True conditional CDF of the observation on day `t` given the signal.
    pub fn cdf(&self, t: usize, y: f64) -> f64 {
        let v = crate::special::norm_cdf((y - self.centre[t]) / self.sd);
        match &self.coupling {
            Coupling::Comonotone => f64::from(v >= self.latent_u[t]),
            Coupling::Copula(c) => c.h1(self.latent_u[t], v),
        }
    }

    /// True conditional quantile of the observation on day `t`.
    pub fn quantile(&self, t: usize, alpha: f64) -> f64 {
        let v = match &self.coupling {
            Coupling::Comonotone => self.latent_u[t],
            Coupling::Copula(c) => c.hinv1(self.latent_u[t], alpha).unwrap_or(alpha),
        };
        self.centre[t] + self.sd * norm_ppf(v)
    }
}

fn coupling_for(dep: &DependenceSpec) -> Result<Coupling> {
    if dep.family == "comonotone" {
        return Ok(Coupling::Comonotone);
    }
    let family: Family = dep
        .family
        .parse()
        .map_err(|_| Error::Config(format!("unknown dependence family {:?}", dep.family)))?;
    if family == Family::Independence {
        return Ok(Coupling::Copula(PairCopula::independence()));
    }
    let config = |e: Error| Error::Config(format!("dependence {} with tau {}: {e}", dep.family, dep.tau));
    let (tau, rotation) = if family.is_asymmetric() && dep.tau < 0.0 {
        (-dep.tau, Rotation::R90)
    } else {
        (dep.tau, Rotation::R0)
    };
    let params = tau_to_param(family, tau).map_err(config)?;
    PairCopula::new(family, rotation, &params)
        .map(Coupling::Copula)
        .map_err(config)
}

/// Generates a synthetic station series (deterministic per seed).
pub fn synth_generate(spec: &SynthSpec) -> Result<StationSeries> {
    synth_generate_with_truth(spec).map(|(s, _)| s)
}

/// As [`synth_generate`], also returning the generating law.
pub fn synth_generate_with_truth(spec: &SynthSpec) -> Result<(StationSeries, SynthTruth)> {
    let coupling = coupling_for(&spec.dependence)?;
    if spec.length == 0 || spec.m < 2 {
        return Err(Error::Config("synthetic spec needs length >= 1 and m >= 2".into()));
    }
    let noise = [
        spec.noise_sd,
        spec.ctrl_noise_sd.unwrap_or(spec.noise_sd),
        spec.hres_noise_sd.unwrap_or(spec.noise_sd),
    ];
    if noise.iter().any(|s| !(*s >= 0.0)) || !(spec.climate_sd > 0.0) || !(0.0..1.0).contains(&spec.missing_rate) {
        return Err(Error::Config(
            "synthetic spec has invalid noise, spread or missing rate".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.length;
    let sd = spec.climate_sd;
    let mut dates = Vec::with_capacity(n);
    let mut obs = Vec::with_capacity(n);
    let mut members = Vec::with_capacity(n);
    let mut centre = Vec::with_capacity(n);
    let mut latent_u = Vec::with_capacity(n);
    let mut signal = Vec::with_capacity(n);
    for t in 0..n {
        let mu = spec.climate_mean + spec.climate_amplitude * (ANNUAL_FREQUENCY * t as f64).cos();
        let (u, v) = match &coupling {
            Coupling::Comonotone => {
                let u = crate::paircopula::clamp_unit(rng.random());
                (u, u)
            }
            Coupling::Copula(c) => c.simulate_with(1, &mut rng)[0],
        };
        let x = mu + sd * norm_ppf(u);
        let y = mu + sd * norm_ppf(v);
        let mut row = Vec::with_capacity(spec.m + 2);
        for _ in 0..spec.m {
            let e: f64 = rng.sample(StandardNormal);
            row.push(Some(x + noise[0] * e));
        }
        for s in &noise[1..] {
            let e: f64 = rng.sample(StandardNormal);
            row.push(Some(x + s * e));
        }
        dates.push(spec.start_date + Duration::days(t as i64));
        obs.push(Some(y));
        members.push(row);
        centre.push(mu);
        latent_u.push(u);
        signal.push(x);
    }
    if spec.missing_rate > 0.0 {
        for t in 0..n {
            if rng.random::<f64>() < spec.missing_rate {
                obs[t] = None;
            }
            for cell in members[t].iter_mut() {
                if rng.random::<f64>() < spec.missing_rate {
                    *cell = None;
                }
            }
        }
    }
    let mut names: Vec<String> = (1..=spec.m).map(|i| format!("ens_{i:02}")).collect();
    names.push("ctrl".into());
    names.push("hres".into());
    let mut roles = vec![MemberRole::Perturbed; spec.m];
    roles.push(MemberRole::Control);
    roles.push(MemberRole::HighRes);
    let series = StationSeries::new(
        spec.station.clone(),
        spec.horizon_hours,
        dates,
        obs,
        members,
        names,
        roles,
    )?;
    Ok((
        series,
        SynthTruth {
            coupling,
            centre,
            sd,
            latent_u,
            signal,
        },
    ))
}
