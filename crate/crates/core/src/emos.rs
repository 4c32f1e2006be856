//! Gaussian EMOS (non-homogeneous regression) with exchangeable member
//! groups, fitted by minimum mean CRPS.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{GroupPredictors, WindowKind};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::special::{norm_cdf, norm_pdf};

/// Lower bound on the predictive standard deviation.
pub const SIGMA_FLOOR: f64 = 1e-6;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// `mu = a + b . x`, `sigma^2 = c + d S^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmosParams {
    pub a: f64,
    pub b: Vec<f64>,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmosForecast {
    pub mu: f64,
    pub sigma: f64,
}

impl EmosForecast {
    pub fn cdf(&self, y: f64) -> f64 {
        norm_cdf((y - self.mu) / self.sigma)
    }

    pub fn crps(&self, y: f64) -> f64 {
        crps_unchecked(self.mu, self.sigma, y)
    }

    /// Quantiles at `r / (R + 1)`, `r = 1..=R`.
    pub fn quantiles(&self, r: usize) -> Vec<f64> {
        (1..=r)
            .map(|i| self.mu + self.sigma * crate::special::norm_ppf(i as f64 / (r + 1) as f64))
            .collect()
    }
}

/// Group predictors in coefficient order: perturbed mean, control, high-res.
pub fn group_vector(gp: &GroupPredictors) -> [f64; 3] {
    [gp.mean_perturbed, gp.ctrl, gp.hres]
}

fn predict_raw(p: &EmosParams, x: &[f64], s2: f64) -> EmosForecast {
    let mu = p.a + p.b.iter().zip(x).map(|(b, x)| b * x).sum::<f64>();
    let var = p.c + p.d * s2;
    EmosForecast {
        mu,
        sigma: var.max(0.0).sqrt().max(SIGMA_FLOOR),
    }
}

pub fn emos_predict(params: &EmosParams, gp: &GroupPredictors) -> EmosForecast {
    predict_raw(params, &group_vector(gp), gp.ens_var)
}

#[inline]
fn crps_unchecked(mu: f64, sigma: f64, y: f64) -> f64 {
    let z = (y - mu) / sigma;
    sigma * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) - FRAC_1_SQRT_PI)
}

/// Closed-form CRPS of `N(mu, sigma^2)` at `y`.
pub fn crps_gaussian(mu: f64, sigma: f64, y: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("CRPS needs a positive sigma, got {sigma}")));
    }
    Ok(crps_unchecked(mu, sigma, y))
}

/// Result of a minimum-CRPS fit.
#[derive(Debug, Clone, PartialEq)]
pub struct EmosFit {
    pub params: EmosParams,
    pub mean_crps: f64,
    /// Objective at the least-squares start.
    pub start_crps: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Fits the three-group model on `(predictors, observation)` rows.
pub fn fit_emos(rows: &[(GroupPredictors, f64)]) -> Result<EmosParams> {
    fit_emos_traced(rows).map(|f| f.params)
}

pub fn fit_emos_traced(rows: &[(GroupPredictors, f64)]) -> Result<EmosFit> {
    let x: Vec<Vec<f64>> = rows.iter().map(|(gp, _)| group_vector(gp).to_vec()).collect();
    let s2: Vec<f64> = rows.iter().map(|(gp, _)| gp.ens_var).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    fit_linear(&x, &s2, &y)
}

/// Minimum-CRPS fit with arbitrary mean predictors `x` (one row per case)
/// and spread `s2`. Predictors and observations are centred first so that
/// shifting all of them by a constant changes only the intercept.
pub fn fit_linear(x: &[Vec<f64>], s2: &[f64], y: &[f64]) -> Result<EmosFit> {
    let n = y.len();
    let g = x.first().map_or(0, Vec::len);
    if n < g + 3 {
        return Err(Error::insufficient(format!(
            "EMOS with {g} groups needs at least {} rows, got {n}",
            g + 3
        )));
    }
    if x.len() != n || s2.len() != n || x.iter().any(|r| r.len() != g) {
        return Err(Error::Schema("EMOS training rows have inconsistent shapes".into()));
    }
    if y.iter().chain(s2).chain(x.iter().flatten()).any(|v| !v.is_finite()) || s2.iter().any(|&v| v < 0.0) {
        return Err(Error::domain(
            "EMOS training data must be finite with nonnegative spread",
        ));
    }
    let nf = n as f64;
    let x_mean: Vec<f64> = (0..g).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let y_mean = y.iter().sum::<f64>() / nf;
    let xc: Vec<Vec<f64>> = x
        .iter()
        .map(|r| r.iter().zip(&x_mean).map(|(v, m)| v - m).collect())
        .collect();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // least-squares start
    let design = DMatrix::from_fn(n, g + 1, |i, j| if j == 0 { 1.0 } else { xc[i][j - 1] });
    let ols = design
        .clone()
        .svd(true, true)
        .solve(&DVector::from_column_slice(&yc), 1e-12)
        .map_err(|e| Error::Fit(format!("EMOS least-squares start failed: {e}")))?;
    let resid = DVector::from_column_slice(&yc) - &design * &ols;
    let resid_var = resid.norm_squared() / (n as f64 - (g + 1) as f64).max(1.0);
    let y_sd = (yc.iter().map(|v| v * v).sum::<f64>() / nf).sqrt().max(SIGMA_FLOOR);

    // theta = (a_c, b_1..b_g, gamma, delta); c = gamma^2, d = delta^2
    let unpack = |th: &[f64]| EmosParams {
        a: th[0],
        b: th[1..=g].to_vec(),
        c: th[g + 1] * th[g + 1],
        d: th[g + 2] * th[g + 2],
    };
    let objective = |th: &[f64]| -> f64 {
        let p = unpack(th);
        let mut sum = 0.0;
        for i in 0..n {
            let f = predict_raw(&p, &xc[i], s2[i]);
            sum += crps_unchecked(f.mu, f.sigma, yc[i]);
        }
        sum / nf
    };

    let mut start: Vec<f64> = ols.iter().copied().collect();
    start.push(resid_var.sqrt());
    start.push(0.1f64.sqrt());
    let mut step = vec![0.1 * y_sd];
    step.extend(start[1..=g].iter().map(|b| 0.1 * b.abs().max(0.5)));
    step.push(0.1 * start[g + 1].max(0.1 * y_sd));
    step.push(0.1);
    let start_crps = objective(&start);
    let res = nelder_mead(objective, &start, &step, NelderMeadOptions::default());
    if !res.fx.is_finite() {
        return Err(Error::Fit(format!(
            "EMOS optimizer returned a non-finite objective after {} iterations (start {start:?}, start CRPS {start_crps})",
            res.iterations
        )));
    }
    let (theta, fx) = if res.fx <= start_crps {
        (res.x, res.fx)
    } else {
        (start, start_crps)
    };
    let mut params = unpack(&theta);
    params.a += y_mean - params.b.iter().zip(&x_mean).map(|(b, m)| b * m).sum::<f64>();
    Ok(EmosFit {
        params,
        mean_crps: fx,
        start_crps,
        evaluations: res.iterations,
        converged: res.converged,
    })
}

/// Fitted parameters together with the window they were trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmosModel {
    #[serde(flatten)]
    pub params: EmosParams,
    pub window_kind: WindowKind,
    pub window_size: usize,
}
