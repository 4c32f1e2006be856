//! Parametric bivariate copulas: densities, h-functions and their inverses,
//! Kendall's tau relations, maximum-likelihood family selection and
//! conditional-inversion sampling.

mod family;
mod fit;
mod tau;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use family::{Kernel, StudentKernel};

pub use fit::{fit_pair, FamilyCatalog, PairFit, DEFAULT_NU_GRID};
pub use tau::{kendall_tau, kendall_tau_empirical, param_to_tau, tau_to_param};

/// Copula arguments are clamped into `[CLAMP_EPS, 1 - CLAMP_EPS]`.
pub const CLAMP_EPS: f64 = 1e-10;

#[inline]
pub fn clamp_unit(u: f64) -> f64 {
    u.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Independence,
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Independence,
        Family::Gaussian,
        Family::StudentT,
        Family::Clayton,
        Family::Gumbel,
        Family::Frank,
    ];

    pub fn n_params(self) -> usize {
        match self {
            Family::Independence => 0,
            Family::StudentT => 2,
            _ => 1,
        }
    }

    /// Families whose rotations give distinct copulas.
    pub fn is_asymmetric(self) -> bool {
        matches!(self, Family::Clayton | Family::Gumbel)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "independence",
            Family::Gaussian => "gaussian",
            Family::StudentT => "student_t",
            Family::Clayton => "clayton",
            Family::Gumbel => "gumbel",
            Family::Frank => "frank",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown copula family `{s}`")))
    }
}

/// Counter-clockwise rotation of a copula density, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    /// 90 and 270 degree rotations flip the sign of the dependence.
    pub fn negates(self) -> bool {
        matches!(self, Rotation::R90 | Rotation::R270)
    }
}

impl TryFrom<u16> for Rotation {
    type Error = String;

    fn try_from(d: u16) -> std::result::Result<Self, Self::Error> {
        match d {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            _ => Err(format!("rotation must be 0, 90, 180 or 270, got {d}")),
        }
    }
}

impl From<Rotation> for u16 {
    fn from(r: Rotation) -> u16 {
        r.degrees()
    }
}

/// Which argument an h-function conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cond {
    /// `dC/du`: distribution of the second argument given the first.
    First,
    /// `dC/dv`: distribution of the first argument given the second.
    Second,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PairCopulaRepr {
    family: Family,
    rotation: Rotation,
    params: Vec<f64>,
}

/// A bivariate parametric copula with rotation.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "PairCopulaRepr", into = "PairCopulaRepr")]
pub struct PairCopula {
    family: Family,
    rotation: Rotation,
    params: Vec<f64>,
    kernel: Kernel,
}

impl fmt::Debug for PairCopula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairCopula")
            .field("family", &self.family)
            .field("rotation", &self.rotation.degrees())
            .field("params", &self.params)
            .finish()
    }
}

impl PartialEq for PairCopula {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.rotation == other.rotation && self.params == other.params
    }
}

impl TryFrom<PairCopulaRepr> for PairCopula {
    type Error = Error;

    fn try_from(r: PairCopulaRepr) -> Result<Self> {
        PairCopula::new(r.family, r.rotation, &r.params)
    }
}

impl From<PairCopula> for PairCopulaRepr {
    fn from(c: PairCopula) -> Self {
        PairCopulaRepr {
            family: c.family,
            rotation: c.rotation,
            params: c.params,
        }
    }
}

impl PairCopula {
    pub fn new(family: Family, rotation: Rotation, params: &[f64]) -> Result<Self> {
        if params.len() != family.n_params() {
            return Err(Error::domain(format!(
                "{family} takes {} parameter(s), got {}",
                family.n_params(),
                params.len()
            )));
        }
        if rotation != Rotation::R0 && !family.is_asymmetric() {
            return Err(Error::domain(format!("{family} does not admit rotation")));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("copula parameters must be finite"));
        }
        let kernel = match family {
            Family::Independence => Kernel::Independence,
            Family::Gaussian => {
                let rho = params[0];
                if rho.abs() >= 1.0 {
                    return Err(Error::domain(format!("gaussian rho must lie in (-1, 1), got {rho}")));
                }
                Kernel::Gaussian { rho }
            }
            Family::StudentT => {
                let (rho, nu) = (params[0], params[1]);
                if rho.abs() >= 1.0 || nu <= 2.0 {
                    return Err(Error::domain(format!(
                        "student_t needs rho in (-1, 1) and nu > 2, got ({rho}, {nu})"
                    )));
                }
                Kernel::StudentT(StudentKernel::new(rho, nu))
            }
            Family::Clayton => {
                let theta = params[0];
                if theta <= 0.0 {
                    return Err(Error::domain(format!("clayton theta must be > 0, got {theta}")));
                }
                Kernel::Clayton { theta }
            }
            Family::Gumbel => {
                let theta = params[0];
                if theta < 1.0 {
                    return Err(Error::domain(format!("gumbel theta must be >= 1, got {theta}")));
                }
                Kernel::Gumbel { theta }
            }
            Family::Frank => {
                let theta = params[0];
                if theta == 0.0 {
                    return Err(Error::domain("frank theta must be nonzero"));
                }
                Kernel::Frank { theta }
            }
        };
        Ok(Self {
            family,
            rotation,
            params: params.to_vec(),
            kernel,
        })
    }

    pub fn independence() -> Self {
        Self::new(Family::Independence, Rotation::R0, &[]).expect("valid")
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        Self::new(Family::Gaussian, Rotation::R0, &[rho])
    }

    pub fn student_t(rho: f64, nu: f64) -> Result<Self> {
        Self::new(Family::StudentT, Rotation::R0, &[rho, nu])
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        Self::new(Family::Clayton, Rotation::R0, &[theta])
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        Self::new(Family::Gumbel, Rotation::R0, &[theta])
    }

    pub fn frank(theta: f64) -> Result<Self> {
        Self::new(Family::Frank, Rotation::R0, &[theta])
    }

    pub fn rotated(self, rotation: Rotation) -> Result<Self> {
        Self::new(self.family, rotation, &self.params)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    pub fn is_independence(&self) -> bool {
        self.family == Family::Independence
    }

    pub fn tau(&self) -> f64 {
        param_to_tau(self)
    }

    // ---- fast evaluation: arguments are clamped, never fails ----

    pub fn log_pdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let k = &self.kernel;
        match self.rotation {
            Rotation::R0 => k.log_pdf(u, v),
            Rotation::R90 => k.log_pdf(1.0 - u, v),
            Rotation::R180 => k.log_pdf(1.0 - u, 1.0 - v),
            Rotation::R270 => k.log_pdf(u, 1.0 - v),
        }
    }

    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        self.log_pdf(u, v).exp()
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let k = &self.kernel;
        let c = match self.rotation {
            Rotation::R0 => k.cdf(u, v),
            Rotation::R90 => v - k.cdf(1.0 - u, v),
            Rotation::R180 => u + v - 1.0 + k.cdf(1.0 - u, 1.0 - v),
            Rotation::R270 => u - k.cdf(u, 1.0 - v),
        };
        c.clamp(0.0, 1.0)
    }

    /// `C(v | u) = dC/du`.
    pub fn h1(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let k = &self.kernel;
        match self.rotation {
            Rotation::R0 => k.h1(u, v),
            Rotation::R90 => k.h1(1.0 - u, v),
            Rotation::R180 => 1.0 - k.h1(1.0 - u, 1.0 - v),
            Rotation::R270 => 1.0 - k.h1(u, 1.0 - v),
        }
    }

    /// `C(u | v) = dC/dv`.
    pub fn h2(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let k = &self.kernel;
        match self.rotation {
            Rotation::R0 => k.h1(v, u),
            Rotation::R90 => 1.0 - k.h1(v, 1.0 - u),
            Rotation::R180 => 1.0 - k.h1(1.0 - v, 1.0 - u),
            Rotation::R270 => k.h1(1.0 - v, u),
        }
    }

    /// Inverse of [`h1`](Self::h1) in its second argument. Output clamped.
    pub fn hinv1(&self, u: f64, w: f64) -> Option<f64> {
        let (u, w) = (clamp_unit(u), clamp_unit(w));
        let k = &self.kernel;
        let v = match self.rotation {
            Rotation::R0 => k.hinv1(u, w)?,
            Rotation::R90 => k.hinv1(1.0 - u, w)?,
            Rotation::R180 => 1.0 - k.hinv1(1.0 - u, 1.0 - w)?,
            Rotation::R270 => 1.0 - k.hinv1(u, 1.0 - w)?,
        };
        Some(clamp_unit(v))
    }

    /// Inverse of [`h2`](Self::h2) in its first argument. Output clamped.
    pub fn hinv2(&self, v: f64, w: f64) -> Option<f64> {
        let (v, w) = (clamp_unit(v), clamp_unit(w));
        let k = &self.kernel;
        let u = match self.rotation {
            Rotation::R0 => k.hinv1(v, w)?,
            Rotation::R90 => 1.0 - k.hinv1(v, 1.0 - w)?,
            Rotation::R180 => 1.0 - k.hinv1(1.0 - v, 1.0 - w)?,
            Rotation::R270 => k.hinv1(1.0 - v, w)?,
        };
        Some(clamp_unit(u))
    }

    // ---- checked API: rejects arguments outside the open unit square ----

    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        check_open(u, v)?;
        Ok(self.pdf(u, v))
    }

    pub fn hfunc(&self, u: f64, v: f64, which: Cond) -> Result<f64> {
        check_open(u, v)?;
        Ok(match which {
            Cond::First => self.h1(u, v),
            Cond::Second => self.h2(u, v),
        })
    }

    /// Inverts the h-function in the non-conditioning argument: with
    /// `Cond::First`, returns `v` such that `C(v | u) = w`.
    pub fn hinv(&self, cond: f64, w: f64, which: Cond) -> Result<f64> {
        check_open(cond, w)?;
        let r = match which {
            Cond::First => self.hinv1(cond, w),
            Cond::Second => self.hinv2(cond, w),
        };
        r.ok_or_else(|| Error::Numeric(format!("h-inverse of {self:?} failed at ({cond}, {w})")))
    }

    /// Draws `n` pairs by conditional inversion: `v = hinv1(u, w)` with
    /// `u, w` independent uniforms.
    pub fn simulate(&self, n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.simulate_with(n, &mut rng)
    }

    pub fn simulate_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<(f64, f64)> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let w: f64 = rng.random();
                let u = clamp_unit(u);
                let v = self.hinv1(u, w).unwrap_or_else(|| clamp_unit(w));
                (u, v)
            })
            .collect()
    }
}

fn check_open(u: f64, v: f64) -> Result<()> {
    let ok = |x: f64| x > 0.0 && x < 1.0;
    if ok(u) && ok(v) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "copula arguments must lie in (0, 1), got ({u}, {v})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog_samples() -> Vec<PairCopula> {
        let mut v = vec![
            PairCopula::independence(),
            PairCopula::gaussian(0.7).unwrap(),
            PairCopula::gaussian(-0.4).unwrap(),
            PairCopula::student_t(0.5, 4.0).unwrap(),
            PairCopula::frank(5.0).unwrap(),
            PairCopula::frank(-3.0).unwrap(),
        ];
        for rot in Rotation::ALL {
            v.push(PairCopula::clayton(2.0).unwrap().rotated(rot).unwrap());
            v.push(PairCopula::gumbel(2.0).unwrap().rotated(rot).unwrap());
        }
        v
    }

    #[test]
    fn independence_is_flat() {
        let c = PairCopula::independence();
        assert_eq!(c.density(0.3, 0.8).unwrap(), 1.0);
        assert_eq!(c.hfunc(0.3, 0.8, Cond::First).unwrap(), 0.8);
        assert_eq!(c.hinv(0.3, 0.25, Cond::First).unwrap(), 0.25);
    }

    #[test]
    fn gaussian_zero_rho_reduces_to_independence() {
        let c = PairCopula::gaussian(0.0).unwrap();
        assert!((c.density(0.3, 0.7).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_median_hfunc() {
        for rho in [-0.9, -0.2, 0.3, 0.95] {
            let c = PairCopula::gaussian(rho).unwrap();
            assert!((c.hfunc(0.5, 0.5, Cond::First).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_arguments_rejected() {
        let c = PairCopula::clayton(1.0).unwrap();
        assert!(matches!(c.density(0.0, 0.5), Err(Error::Domain(_))));
        assert!(c.hfunc(0.5, 1.0, Cond::Second).is_err());
        assert!(c.density(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(PairCopula::gaussian(1.0).is_err());
        assert!(PairCopula::student_t(0.2, 2.0).is_err());
        assert!(PairCopula::clayton(0.0).is_err());
        assert!(PairCopula::gumbel(0.9).is_err());
        assert!(PairCopula::frank(0.0).is_err());
        assert!(PairCopula::gaussian(0.3).unwrap().rotated(Rotation::R90).is_err());
        assert!(PairCopula::new(Family::Gaussian, Rotation::R0, &[0.1, 2.0]).is_err());
    }

    #[test]
    fn extreme_gaussian_inverse_stays_inside() {
        let c = PairCopula::gaussian(0.99).unwrap();
        for u in [1e-9, 0.01, 0.5, 0.999] {
            let v = c.hinv(u, 0.999, Cond::First).unwrap();
            assert!(v > 0.0 && v < 1.0 && v.is_finite());
        }
    }

    #[test]
    fn rotated_clayton_reflects_arguments() {
        let base = PairCopula::clayton(3.0).unwrap();
        let r180 = base.clone().rotated(Rotation::R180).unwrap();
        for &(u, v) in &[(0.1, 0.2), (0.7, 0.4), (0.95, 0.99)] {
            assert!((r180.pdf(u, v) - base.pdf(1.0 - u, 1.0 - v)).abs() < 1e-12);
        }
    }

    #[test]
    fn log_density_finite_on_clamped_square() {
        let edge = [CLAMP_EPS, 1e-6, 0.5, 1.0 - 1e-6, 1.0 - CLAMP_EPS];
        for c in catalog_samples() {
            for &u in &edge {
                for &v in &edge {
                    let l = c.log_pdf(u, v);
                    assert!(l.is_finite(), "{c:?} at ({u}, {v}) -> {l}");
                }
            }
        }
    }

    #[test]
    fn hfunc_monotone_in_conditioned_argument() {
        for c in catalog_samples() {
            let mut prev = 0.0;
            for i in 1..100 {
                let v = i as f64 / 100.0;
                let h = c.h1(0.37, v);
                assert!(h >= prev, "{c:?}");
                prev = h;
            }
        }
    }

    #[test]
    fn uniform_margins_by_quadrature() {
        use crate::quad::integrate;
        for c in catalog_samples() {
            for i in 1..10 {
                let u = i as f64 / 10.0;
                let m = integrate(|v| c.pdf(u, v), 0.0, 1.0, 1e-11, 1e-11);
                assert!((m - 1.0).abs() < 1e-5, "{c:?} u={u} mass={m}");
            }
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let c = PairCopula::gumbel(1.7).unwrap();
        assert_eq!(c.simulate(50, 11), c.simulate(50, 11));
        assert_ne!(c.simulate(50, 11), c.simulate(50, 12));
    }

    #[test]
    fn json_round_trip() {
        let c = PairCopula::gumbel(2.5).unwrap().rotated(Rotation::R270).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"family":"gumbel","rotation":270,"params":[2.5]}"#);
        let back: PairCopula = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<PairCopula>(r#"{"family":"gumbel","rotation":45,"params":[2.5]}"#).is_err());
        assert!(serde_json::from_str::<PairCopula>(r#"{"family":"clayton","rotation":0,"params":[-1]}"#).is_err());
    }
}
