//! Gaussian kernel density marginals with exact CDF and quantile inversion.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::paircopula::CLAMP_EPS;
use crate::special::{norm_cdf, norm_pdf};

pub const MIN_SAMPLE: usize = 10;

// Kernels further than this many bandwidths away contribute 0 or 1 to the
// CDF at double precision.
const CUTOFF: f64 = 9.0;
const GRID_POINTS: usize = 1024;

/// Univariate Gaussian-kernel density estimate with Silverman's bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeMarginal {
    sample: Vec<f64>,
    bandwidth: f64,
    grid: Vec<f64>,
    grid_cdf: Vec<f64>,
    grid_pdf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct KdeRepr {
    bandwidth: f64,
    digest: String,
    sample: Vec<f64>,
}

impl Serialize for KdeMarginal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KdeRepr {
            bandwidth: self.bandwidth,
            digest: self.digest(),
            sample: self.sample.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KdeMarginal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = KdeRepr::deserialize(d)?;
        let m = KdeMarginal::with_bandwidth(&r.sample, r.bandwidth).map_err(D::Error::custom)?;
        if m.digest() != r.digest {
            return Err(D::Error::custom("marginal sample does not match its digest"));
        }
        Ok(m)
    }
}

fn linear_quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Silverman's rule `1.06 * min(sd, IQR / 1.349) * n^(-1/5)`.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let iqr = linear_quantile(sorted, 0.75) - linear_quantile(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    1.06 * spread * n.powf(-0.2)
}

/// Fits a KDE marginal to `sample`.
pub fn fit_kde(sample: &[f64]) -> Result<KdeMarginal> {
    let sorted = validated(sample)?;
    let h = silverman_bandwidth(&sorted);
    KdeMarginal::build(sorted, h)
}

fn validated(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.len() < MIN_SAMPLE {
        return Err(Error::insufficient(format!(
            "kernel density needs at least {MIN_SAMPLE} values, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("kernel density sample contains non-finite values"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::Fit("kernel density sample has zero variance".into()));
    }
    Ok(sorted)
}

impl KdeMarginal {
    /// Builds the estimator with a fixed bandwidth.
    pub fn with_bandwidth(sample: &[f64], bandwidth: f64) -> Result<Self> {
        let sorted = validated(sample)?;
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Self::build(sorted, bandwidth)
    }

    fn build(sample: Vec<f64>, bandwidth: f64) -> Result<Self> {
        let lo = sample[0] - 6.0 * bandwidth;
        let hi = sample[sample.len() - 1] + 6.0 * bandwidth;
        let step = (hi - lo) / (GRID_POINTS - 1) as f64;
        let mut m = Self {
            sample,
            bandwidth,
            grid: (0..GRID_POINTS).map(|i| lo + step * i as f64).collect(),
            grid_cdf: Vec::new(),
            grid_pdf: Vec::new(),
        };
        (m.grid_cdf, m.grid_pdf) = m.grid.iter().map(|&x| m.cdf_and_density(x)).unzip();
        Ok(m)
    }

    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    /// SHA-256 of the sorted sample's little-endian bytes.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for x in &self.sample {
            h.update(x.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Returns `(cdf(x), density(x))` in one pass over the active kernels.
    pub fn cdf_and_density(&self, x: f64) -> (f64, f64) {
        let h = self.bandwidth;
        let below = self.sample.partition_point(|&s| s < x - CUTOFF * h);
        let above = self.sample.partition_point(|&s| s <= x + CUTOFF * h);
        let mut cdf = below as f64;
        let mut dens = 0.0;
        for &s in &self.sample[below..above] {
            let z = (x - s) / h;
            cdf += norm_cdf(z);
            dens += norm_pdf(z);
        }
        let n = self.sample.len() as f64;
        ((cdf / n).clamp(0.0, 1.0), dens / (n * h))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let below = self.sample.partition_point(|&s| s < x - CUTOFF * h);
        let above = self.sample.partition_point(|&s| s <= x + CUTOFF * h);
        let sum: f64 = self.sample[below..above].iter().map(|&s| norm_cdf((x - s) / h)).sum();
        ((below as f64 + sum) / self.sample.len() as f64).clamp(0.0, 1.0)
    }

    pub fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let below = self.sample.partition_point(|&s| s < x - CUTOFF * h);
        let above = self.sample.partition_point(|&s| s <= x + CUTOFF * h);
        let sum: f64 = self.sample[below..above].iter().map(|&s| norm_pdf((x - s) / h)).sum();
        sum / (self.sample.len() as f64 * h)
    }

    /// Probability integral transform, clamped to `[1e-10, 1 - 1e-10]`.
    pub fn pit(&self, x: f64) -> f64 {
        self.cdf(x).clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
    }

    /// Inverts the cubic Hermite interpolant of the CDF on grid cell `i`.
    fn hermite_start(&self, i: usize, alpha: f64) -> f64 {
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let w = x1 - x0;
        let (c0, c1) = (self.grid_cdf[i], self.grid_cdf[i + 1]);
        let (m0, m1) = (self.grid_pdf[i] * w, self.grid_pdf[i + 1] * w);
        let p = |t: f64| {
            let (t2, t3) = (t * t, t * t * t);
            (2.0 * t3 - 3.0 * t2 + 1.0) * c0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * c1 + (t3 - t2) * m1
        };
        let dp = |t: f64| {
            let t2 = t * t;
            (6.0 * t2 - 6.0 * t) * (c0 - c1) + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (3.0 * t2 - 2.0 * t) * m1
        };
        let mut t = if c1 > c0 {
            ((alpha - c0) / (c1 - c0)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        for _ in 0..4 {
            let d = dp(t);
            if !(d > 0.0) {
                break;
            }
            t = (t - (p(t) - alpha) / d).clamp(0.0, 1.0);
        }
        x0 + t * w
    }

    /// Inverse CDF. The cached grid brackets the root and supplies a cubic
    /// Hermite start; Newton steps on the exact kernel sum, safeguarded
    /// by bisection, finish it.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {alpha}")));
        }
        let k = self.grid_cdf.partition_point(|&c| c < alpha);
        let span = 4.0 * self.bandwidth;
        let last = self.grid.len() - 1;
        let (mut lo, mut hi, mut x) = if k == 0 || k > last {
            let (mut lo, mut hi) = if k == 0 {
                (self.grid[0] - span, self.grid[0])
            } else {
                (self.grid[last], self.grid[last] + span)
            };
            while self.cdf(lo) > alpha {
                lo -= span;
                if lo < self.grid[0] - 1e3 * span {
                    return Err(Error::Numeric(format!("quantile bracket failed at alpha {alpha}")));
                }
            }
            while self.cdf(hi) < alpha {
                hi += span;
                if hi > self.grid[last] + 1e3 * span {
                    return Err(Error::Numeric(format!("quantile bracket failed at alpha {alpha}")));
                }
            }
            (lo, hi, 0.5 * (lo + hi))
        } else {
            let (lo, hi) = (self.grid[k - 1], self.grid[k]);
            (lo, hi, self.hermite_start(k - 1, alpha))
        };
        let tol = 1e-13 * (1.0 + x.abs());
        for _ in 0..200 {
            let (c, d) = self.cdf_and_density(x);
            let err = c - alpha;
            if err == 0.0 {
                return Ok(x);
            }
            if err < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let newton = if d > 0.0 { x - err / d } else { f64::NAN };
            // quadratic convergence: a step this small leaves a negligible error
            if newton > lo && newton < hi && (newton - x).abs() <= 1e-7 * self.bandwidth {
                return Ok(newton);
            }
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= tol || hi - lo <= tol {
                return Ok(next);
            }
            x = next;
        }
        Err(Error::Numeric(format!(
            "quantile inversion did not converge at alpha {alpha}"
        )))
    }
}
