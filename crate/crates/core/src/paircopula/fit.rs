use serde::{Deserialize, Serialize};

use super::family::{gaussian_log_pdf_xy, StudentKernel};
use super::{clamp_unit, kendall_tau, tau_to_param, Family, PairCopula, Rotation};
use crate::error::{Error, Result};
use crate::optim::brent_minimize;
use crate::special::{norm_ppf, StudentT};

/// Degrees-of-freedom grid for the Student t profile likelihood.
pub const DEFAULT_NU_GRID: [f64; 9] = [2.5, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0];

const MIN_OBS: usize = 30;
const RHO_MAX: f64 = 0.9999;
const CLAYTON_MAX: f64 = 28.0;
const GUMBEL_MAX: f64 = 17.0;
const FRANK_MAX: f64 = 35.0;
const PARAM_MIN: f64 = 1e-4;
const BRENT_TOL: f64 = 1e-8;
const BRENT_ITER: usize = 200;

/// Families (with rotations) considered by [`fit_pair`] and the
/// independence pre-test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyCatalog {
    pub entries: Vec<(Family, Rotation)>,
    /// Level of the tau-based independence test; `None` disables it.
    pub indep_level: Option<f64>,
    pub nu_grid: Vec<f64>,
}

impl Default for FamilyCatalog {
    fn default() -> Self {
        let mut entries = vec![
            (Family::Independence, Rotation::R0),
            (Family::Gaussian, Rotation::R0),
            (Family::StudentT, Rotation::R0),
        ];
        for fam in [Family::Clayton, Family::Gumbel] {
            for rot in Rotation::ALL {
                entries.push((fam, rot));
            }
        }
        entries.push((Family::Frank, Rotation::R0));
        Self {
            entries,
            indep_level: Some(0.05),
            nu_grid: DEFAULT_NU_GRID.to_vec(),
        }
    }
}

impl FamilyCatalog {
    /// Restricts the catalog to the given families (all admissible rotations).
    /// Independence is always retained.
    pub fn only(families: &[Family]) -> Self {
        let base = Self::default();
        let entries = base
            .entries
            .into_iter()
            .filter(|(f, _)| *f == Family::Independence || families.contains(f))
            .collect();
        Self { entries, ..base }
    }

    pub fn without_indep_test(mut self) -> Self {
        self.indep_level = None;
        self
    }
}

#[derive(Debug, Clone)]
pub struct PairFit {
    pub copula: PairCopula,
    pub loglik: f64,
    pub aic: f64,
    pub tau: f64,
}

impl PairFit {
    fn independence(tau: f64) -> Self {
        Self {
            copula: PairCopula::independence(),
            loglik: 0.0,
            aic: 0.0,
            tau,
        }
    }
}

/// Two-sided asymptotic z-test of tau = 0; true when independence is kept.
fn independence_accepted(tau: f64, n: usize, level: f64) -> bool {
    let n = n as f64;
    let sd = (2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0))).sqrt();
    let crit = -norm_ppf(0.5 * level);
    (tau / sd).abs() <= crit
}

/// Selects and fits a pair copula to copula data by maximum likelihood and
/// AIC over the catalog.
pub fn fit_pair(u: &[f64], v: &[f64], catalog: &FamilyCatalog) -> Result<PairFit> {
    if u.len() != v.len() {
        return Err(Error::domain("fit_pair: u and v differ in length"));
    }
    let n = u.len();
    if n < MIN_OBS {
        return Err(Error::insufficient(format!(
            "pair-copula fit needs at least {MIN_OBS} observations, got {n}"
        )));
    }
    let u: Vec<f64> = u.iter().map(|&x| clamp_unit(x)).collect();
    let v: Vec<f64> = v.iter().map(|&x| clamp_unit(x)).collect();
    let tau = kendall_tau(&u, &v)?;

    if let Some(level) = catalog.indep_level {
        if independence_accepted(tau, n, level) {
            return Ok(PairFit::independence(tau));
        }
    }

    let mut best = PairFit::independence(tau);
    let mut normal_scores: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut attempted = 0usize;
    let mut succeeded = 0usize;

    for &(family, rotation) in &catalog.entries {
        if family == Family::Independence {
            continue;
        }
        if family.is_asymmetric() && (tau == 0.0 || rotation.negates() != (tau < 0.0)) {
            continue;
        }
        attempted += 1;
        let fitted = match family {
            Family::Gaussian => {
                let (x, y) = normal_scores.get_or_insert_with(|| {
                    (
                        u.iter().map(|&p| norm_ppf(p)).collect(),
                        v.iter().map(|&p| norm_ppf(p)).collect(),
                    )
                });
                fit_gaussian(x, y, tau)
            }
            Family::StudentT => fit_student(&u, &v, tau, &catalog.nu_grid),
            _ => fit_one_param(&u, &v, family, rotation, tau),
        };
        let Some((copula, loglik)) = fitted else { continue };
        if !loglik.is_finite() {
            continue;
        }
        succeeded += 1;
        let aic = -2.0 * loglik + 2.0 * copula.n_params() as f64;
        if aic < best.aic {
            best = PairFit {
                copula,
                loglik,
                aic,
                tau,
            };
        }
    }
    if attempted > 0 && succeeded == 0 {
        return Err(Error::Fit(format!(
            "no copula family could be fitted (n = {n}, tau = {tau:.4})"
        )));
    }
    Ok(best)
}

fn fit_gaussian(x: &[f64], y: &[f64], tau: f64) -> Option<(PairCopula, f64)> {
    let n = x.len() as f64;
    let sxx: f64 = x.iter().zip(y).map(|(a, b)| a * a + b * b).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nll = |rho: f64| {
        let r2 = rho * rho;
        0.5 * n * (1.0 - r2).ln() + (r2 * sxx - 2.0 * rho * sxy) / (2.0 * (1.0 - r2))
    };
    let start = tau_to_param(Family::Gaussian, tau).ok()?[0].clamp(-RHO_MAX, RHO_MAX);
    let (rho, f) = polish(nll, -RHO_MAX, RHO_MAX, start);
    debug_assert!(
        (-nll(rho)
            - x.iter()
                .zip(y)
                .map(|(a, b)| gaussian_log_pdf_xy(rho, *a, *b))
                .sum::<f64>())
        .abs()
            < 1e-6 * n
    );
    Some((PairCopula::gaussian(rho).ok()?, -f))
}

fn fit_student(u: &[f64], v: &[f64], tau: f64, nu_grid: &[f64]) -> Option<(PairCopula, f64)> {
    let start = tau_to_param(Family::Gaussian, tau).ok()?[0].clamp(-RHO_MAX, RHO_MAX);
    let mut best: Option<(f64, f64, f64)> = None;
    for &nu in nu_grid {
        if nu <= 2.0 {
            continue;
        }
        let t = StudentT::new(nu);
        let x: Vec<f64> = u.iter().map(|&p| t.ppf(p)).collect();
        let y: Vec<f64> = v.iter().map(|&p| t.ppf(p)).collect();
        let nll = |rho: f64| {
            let k = StudentKernel::new(rho, nu);
            -x.iter().zip(&y).map(|(a, b)| k.log_pdf_xy(*a, *b)).sum::<f64>()
        };
        let (rho, f) = polish(nll, -RHO_MAX, RHO_MAX, start);
        if f.is_finite() && best.is_none_or(|b| -f > b.2) {
            best = Some((rho, nu, -f));
        }
    }
    let (rho, nu, ll) = best?;
    Some((PairCopula::student_t(rho, nu).ok()?, ll))
}

fn fit_one_param(u: &[f64], v: &[f64], family: Family, rotation: Rotation, tau: f64) -> Option<(PairCopula, f64)> {
    let (lo, hi) = match family {
        Family::Clayton => (PARAM_MIN, CLAYTON_MAX),
        Family::Gumbel => (1.0, GUMBEL_MAX),
        Family::Frank if tau > 0.0 => (PARAM_MIN, FRANK_MAX),
        Family::Frank => (-FRANK_MAX, -PARAM_MIN),
        _ => return None,
    };
    let nll = |theta: f64| match PairCopula::new(family, rotation, &[theta]) {
        Ok(c) => -u.iter().zip(v).map(|(a, b)| c.log_pdf(*a, *b)).sum::<f64>(),
        Err(_) => f64::INFINITY,
    };
    let start = tau_to_param(family, tau.abs().min(0.9))
        .ok()
        .map(|p| p[0].copysign(if family == Family::Frank { tau } else { 1.0 }))
        .unwrap_or(0.5 * (lo + hi))
        .clamp(lo, hi);
    let (theta, f) = polish(nll, lo, hi, start);
    Some((PairCopula::new(family, rotation, &[theta]).ok()?, -f))
}

/// Brent search on `[lo, hi]`, keeping the tau-inversion start if it is
/// better.
fn polish<F: Fn(f64) -> f64>(nll: F, lo: f64, hi: f64, start: f64) -> (f64, f64) {
    let (x, fx) = brent_minimize(&nll, lo, hi, BRENT_TOL, BRENT_ITER);
    let fs = nll(start);
    if fs < fx {
        (start, fs)
    } else {
        (x, fx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(pairs: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        pairs.iter().copied().unzip()
    }

    #[test]
    fn too_few_observations() {
        let u = vec![0.5; 10];
        assert!(matches!(
            fit_pair(&u, &u, &FamilyCatalog::default()),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn recovers_gaussian() {
        let (u, v) = split(&PairCopula::gaussian(0.8).unwrap().simulate(5000, 1));
        let fit = fit_pair(&u, &v, &FamilyCatalog::default()).unwrap();
        assert!(
            matches!(fit.copula.family(), Family::Gaussian | Family::StudentT),
            "{fit:?}"
        );
        let rho = fit.copula.params()[0];
        assert!((0.77..=0.83).contains(&rho), "{rho}");
    }

    #[test]
    fn gumbel_tau_recovered() {
        let (u, v) = split(&PairCopula::gumbel(2.0).unwrap().simulate(5000, 2));
        let fit = fit_pair(&u, &v, &FamilyCatalog::default()).unwrap();
        assert!((fit.copula.tau() - 0.5).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn negative_dependence_uses_rotations() {
        let c = PairCopula::clayton(3.0).unwrap().rotated(Rotation::R90).unwrap();
        let (u, v) = split(&c.simulate(3000, 3));
        let fit = fit_pair(&u, &v, &FamilyCatalog::default()).unwrap();
        assert!(fit.copula.tau() < -0.5, "{fit:?}");
        assert_eq!(fit.copula.family(), Family::Clayton);
        assert_eq!(fit.copula.rotation(), Rotation::R90);
    }

    #[test]
    fn independence_mostly_selected() {
        let mut hits = 0;
        for seed in 0..100 {
            let (u, v) = split(&PairCopula::independence().simulate(500, 1000 + seed));
            if fit_pair(&u, &v, &FamilyCatalog::default())
                .unwrap()
                .copula
                .is_independence()
            {
                hits += 1;
            }
        }
        assert!(hits >= 90, "{hits}");
    }
}
