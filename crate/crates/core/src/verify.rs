//! Forecast verification: CRPS, PIT and rank histograms, normalized scores.

use std::io::Write;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::norm_ppf;

pub const DEFAULT_PIT_BINS: usize = 20;

/// CRPS of the empirical law on the quantile grid `z` (nondecreasing):
/// `mean |z_r - y| - (1 / 2R^2) sum_{r,r'} |z_r - z_r'|`, in O(R).
pub fn crps_from_quantiles(z: &[f64], y: f64) -> Result<f64> {
    let r = z.len();
    if r < 2 {
        return Err(Error::domain(format!("need at least 2 quantiles, got {r}")));
    }
    if let Some(i) = z.windows(2).position(|w| !(w[1] >= w[0])) {
        return Err(Error::domain(format!(
            "quantiles decrease at position {}: {} > {}",
            i + 1,
            z[i],
            z[i + 1]
        )));
    }
    let rf = r as f64;
    let abs_err: f64 = z.iter().map(|&v| (v - y).abs()).sum::<f64>() / rf;
    // for sorted z: sum_{r,r'} |z_r - z_r'| = 2 sum_i (2i - R - 1) z_i, i 1-based
    let spread: f64 = z
        .iter()
        .enumerate()
        .map(|(i, &v)| (2.0 * (i + 1) as f64 - rf - 1.0) * v)
        .sum::<f64>();
    Ok((abs_err - spread / (rf * rf)).max(0.0))
}

/// PIT of `y` under the predictive CDF `cdf`.
pub fn pit_value<F: Fn(f64) -> f64>(cdf: F, y: f64) -> f64 {
    cdf(y).clamp(0.0, 1.0)
}

/// Equal-width histogram on `[0, 1]`: `[0, 1/K]`, then `(i/K, (i+1)/K]`.
pub fn pit_histogram(values: &[f64], k: usize) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::domain(format!("PIT histogram needs at least 2 bins, got {k}")));
    }
    let mut counts = vec![0; k];
    for &p in values {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("PIT value {p} outside [0, 1]")));
        }
        let bin = ((p * k as f64).ceil() as usize).saturating_sub(1).min(k - 1);
        counts[bin] += 1;
    }
    Ok(counts)
}

/// Rank of `obs` among `members` (1-based), with ties broken uniformly.
pub fn rank_of<R: Rng + ?Sized>(members: &[f64], obs: f64, rng: &mut R) -> usize {
    let below = members.iter().filter(|&&m| m < obs).count();
    let ties = members.iter().filter(|&&m| m == obs).count();
    1 + below + if ties > 0 { rng.random_range(0..=ties) } else { 0 }
}

/// Verification rank histogram over `m + 1` ranks.
pub fn rank_histogram(rows: &[Vec<f64>], obs: &[f64], seed: u64) -> Result<Vec<usize>> {
    if rows.len() != obs.len() {
        return Err(Error::domain(
            "rank histogram: ensemble rows and observations differ in count",
        ));
    }
    let Some(m) = rows.first().map(Vec::len) else {
        return Ok(Vec::new());
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; m + 1];
    for (row, &y) in rows.iter().zip(obs) {
        if row.len() != m || row.iter().any(|v| !v.is_finite()) || !y.is_finite() {
            return Err(Error::domain("rank histogram rows must have m finite members"));
        }
        counts[rank_of(row, y, &mut rng) - 1] += 1;
    }
    Ok(counts)
}

/// Elementwise `Phi^{-1}(u)`.
pub fn normalized_scores(u: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    u.iter()
        .map(|row| {
            row.iter()
                .map(|&p| {
                    if p > 0.0 && p < 1.0 {
                        Ok(norm_ppf(p))
                    } else {
                        Err(Error::domain(format!("normalized score needs u in (0, 1), got {p}")))
                    }
                })
                .collect()
        })
        .collect()
}

/// Kolmogorov-Smirnov distance between the sample and `U(0, 1)`.
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &p)| (p - i as f64 / n).max((i + 1) as f64 / n - p))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayScore {
    pub date: NaiveDate,
    pub obs: f64,
    pub crps: f64,
    pub pit: f64,
    /// Quantile-grid CRPS alongside a closed-form one, when cross-checking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crps_quantile: Option<f64>,
}

/// Scores of one model at one station over a test period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub model: String,
    pub station: String,
    pub per_day: Vec<DayScore>,
    pub mean_crps: f64,
    pub pit_bins: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_bins: Option<Vec<usize>>,
}

impl ScoreReport {
    pub fn new(
        model: impl Into<String>,
        station: impl Into<String>,
        per_day: Vec<DayScore>,
        bins: usize,
    ) -> Result<Self> {
        let pits: Vec<f64> = per_day.iter().map(|d| d.pit).collect();
        Ok(Self {
            model: model.into(),
            station: station.into(),
            mean_crps: mean(per_day.iter().map(|d| d.crps)),
            pit_bins: pit_histogram(&pits, bins)?,
            per_day,
            rank_bins: None,
        })
    }

    pub fn pit_values(&self) -> Vec<f64> {
        self.per_day.iter().map(|d| d.pit).collect()
    }

    /// Per-day scores as CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let cross = self.per_day.iter().any(|d| d.crps_quantile.is_some());
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["date", "obs", "crps", "pit"];
        if cross {
            header.push("crps_quantile");
        }
        out.write_record(&header)?;
        for d in &self.per_day {
            let mut rec = vec![
                d.date.to_string(),
                d.obs.to_string(),
                d.crps.to_string(),
                d.pit.to_string(),
            ];
            if cross {
                rec.push(d.crps_quantile.map_or_else(String::new, |v| v.to_string()));
            }
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<scores csv>", e))?;
        Ok(())
    }

    /// Aggregates and histogram bins.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "model": self.model,
            "station": self.station,
            "days": self.per_day.len(),
            "mean_crps": self.mean_crps,
            "pit_bins": self.pit_bins,
            "pit_ks": ks_uniform(&self.pit_values()),
        })
    }
}

/// Reads per-day scores written by [`ScoreReport::write_csv`].
pub fn read_scores_csv<R: std::io::Read>(r: R) -> Result<Vec<DayScore>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.deserialize::<DayScoreRow>() {
        let row = rec?;
        out.push(DayScore {
            date: row.date,
            obs: row.obs,
            crps: row.crps,
            pit: row.pit,
            crps_quantile: row.crps_quantile,
        });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct DayScoreRow {
    date: NaiveDate,
    obs: f64,
    crps: f64,
    pit: f64,
    #[serde(default)]
    crps_quantile: Option<f64>,
}

pub fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// One row of a model comparison, ranked by mean CRPS (1 = best).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub station: String,
    pub mean_crps: f64,
    pub rank: usize,
}

/// Ranks models per station by mean CRPS, ties broken by model name.
pub fn compare(reports: &[&ScoreReport]) -> Vec<ComparisonRow> {
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| ComparisonRow {
            model: r.model.clone(),
            station: r.station.clone(),
            mean_crps: r.mean_crps,
            rank: 0,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.station
            .cmp(&b.station)
            .then(a.mean_crps.total_cmp(&b.mean_crps))
            .then(a.model.cmp(&b.model))
    });
    let mut rank = 0;
    for i in 0..rows.len() {
        rank = if i > 0 && rows[i].station == rows[i - 1].station {
            rank + 1
        } else {
            1
        };
        rows[i].rank = rank;
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emos::crps_gaussian;
    use crate::special::norm_cdf;

    fn brute_crps(z: &[f64], y: f64) -> f64 {
        let r = z.len() as f64;
        let a: f64 = z.iter().map(|v| (v - y).abs()).sum::<f64>() / r;
        let b: f64 = z.iter().flat_map(|v| z.iter().map(move |w| (v - w).abs())).sum::<f64>();
        a - b / (2.0 * r * r)
    }

    #[test]
    fn crps_quantile_formula() {
        assert_eq!(crps_from_quantiles(&[2.5; 7], 1.0).unwrap(), 1.5);
        let z = [-1.0, -0.2, 0.3, 0.3, 1.7, 2.0];
        for y in [-3.0, 0.0, 0.3, 5.0] {
            assert!((crps_from_quantiles(&z, y).unwrap() - brute_crps(&z, y)).abs() < 1e-14);
        }
        // reflection about y
        let y = 0.4;
        let refl: Vec<f64> = z.iter().rev().map(|v| 2.0 * y - v).collect();
        let d = crps_from_quantiles(&z, y).unwrap() - crps_from_quantiles(&refl, y).unwrap();
        assert!(d.abs() < 1e-14);
        assert!(crps_from_quantiles(&[1.0, 0.0], 0.0).is_err());
        assert!(crps_from_quantiles(&[1.0], 0.0).is_err());

        let r = 1000;
        let zq: Vec<f64> = (1..=r).map(|i| norm_ppf(i as f64 / (r + 1) as f64)).collect();
        let got = crps_from_quantiles(&zq, 0.0).unwrap();
        assert!((got - crps_gaussian(0.0, 1.0, 0.0).unwrap()).abs() < 0.01);
    }

    #[test]
    fn pit_examples() {
        assert_eq!(pit_value(norm_cdf, 0.0), 0.5);
        assert!((pit_value(|y| norm_cdf((y - 2.0) / 3.0), 2.0 + 1.645 * 3.0) - 0.95).abs() < 1e-3);
        assert_eq!(pit_histogram(&[0.05, 0.55, 0.95], 2).unwrap(), vec![1, 2]);
        assert_eq!(pit_histogram(&[0.0, 0.5, 1.0], 2).unwrap(), vec![2, 1]);
        assert_eq!(pit_histogram(&[], 4).unwrap(), vec![0; 4]);
        assert!(pit_histogram(&[0.5], 1).is_err());
    }

    #[test]
    fn rank_extremes_and_ties() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]];
        assert_eq!(rank_histogram(&rows, &[0.0, 9.0], 1).unwrap(), vec![1, 0, 0, 1]);
        let tied = vec![vec![1.0, 1.0, 1.0]; 4000];
        let h = rank_histogram(&tied, &vec![1.0; 4000], 5).unwrap();
        assert!(h.iter().all(|&c| (800..1200).contains(&c)), "{h:?}");
        assert_eq!(h, rank_histogram(&tied, &vec![1.0; 4000], 5).unwrap());
    }

    #[test]
    fn normalized_score_values() {
        let z = normalized_scores(&[vec![0.5, 0.975]]).unwrap();
        assert_eq!(z[0][0], 0.0);
        assert!((z[0][1] - 1.959_964).abs() < 1e-6);
        assert!(normalized_scores(&[vec![1.0]]).is_err());
    }

    #[test]
    fn report_and_comparison() {
        let d = |i: u32, c: f64, p: f64| DayScore {
            date: NaiveDate::from_ymd_opt(2020, 1, i).unwrap(),
            obs: 1.0,
            crps: c,
            pit: p,
            crps_quantile: None,
        };
        let a = ScoreReport::new("a", "S", vec![d(1, 1.0, 0.1), d(2, 2.0, 0.9)], 2).unwrap();
        let b = ScoreReport::new("b", "S", vec![d(1, 0.5, 0.4), d(2, 0.7, 0.6)], 2).unwrap();
        assert_eq!(a.mean_crps, 1.5);
        assert_eq!(a.pit_bins, vec![1, 1]);
        let table = compare(&[&a, &b]);
        assert_eq!((table[0].model.as_str(), table[0].rank), ("b", 1));
        assert_eq!((table[1].model.as_str(), table[1].rank), ("a", 2));
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let back = read_scores_csv(buf.as_slice()).unwrap();
        assert_eq!(back, a.per_day);
    }

    #[test]
    fn ks_distance() {
        assert!((ks_uniform(&[0.5]) - 0.5).abs() < 1e-15);
        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_uniform(&grid) <= 0.0005 + 1e-12);
    }
}
