//! Scalar distribution functions shared by the copula families and marginals.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::{beta, erf, gamma};

use crate::quad;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile. Returns +-inf at the endpoints.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * erf::erfc_inv(2.0 * p);
    // one Newton step on the lower tail keeps |cdf(x) - p| at rounding level
    let err = norm_cdf(x) - p;
    let d = norm_pdf(x);
    if d > 0.0 && err.is_finite() {
        x - err / d
    } else {
        x
    }
}

/// Student t distribution with `nu` degrees of freedom (unit scale).
#[derive(Debug, Clone, Copy)]
pub struct StudentT {
    nu: f64,
    log_norm: f64,
}

impl StudentT {
    pub fn new(nu: f64) -> Self {
        let log_norm = gamma::ln_gamma(0.5 * (nu + 1.0)) - gamma::ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
        Self { nu, log_norm }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.log_norm - 0.5 * (self.nu + 1.0) * (x * x / self.nu).ln_1p()
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return if x > 0.0 { 1.0 } else { 0.0 };
        }
        let tail = 0.5 * beta::beta_reg(0.5 * self.nu, 0.5, self.nu / (self.nu + x * x));
        if x <= 0.0 {
            tail
        } else {
            1.0 - tail
        }
    }

    pub fn ppf(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p > 0.5 {
            return -self.lower_ppf(1.0 - p);
        }
        self.lower_ppf(p)
    }

    fn lower_ppf(&self, p: f64) -> f64 {
        if p == 0.5 {
            return 0.0;
        }
        let dist = StudentsT::new(0.0, 1.0, self.nu).expect("nu > 0");
        let mut x = dist.inverse_cdf(p);
        if !x.is_finite() {
            x = norm_ppf(p);
        }
        for _ in 0..3 {
            let err = self.cdf(x) - p;
            let d = self.pdf(x);
            if d <= 0.0 || !err.is_finite() {
                break;
            }
            let step = err / d;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        x
    }
}

/// Lower-orthant bivariate normal probability P(X < h, Y < k) with
/// correlation `r`.
pub fn bvn_cdf(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return norm_cdf(k);
    }
    if k == f64::INFINITY {
        return norm_cdf(h);
    }
    if r < 0.0 {
        // P(X<h, Y<k; r) = P(X<h) - P(X<h, -Y<-k; -r)
        return (norm_cdf(h) - bvnd(-h, k, -r)).max(0.0);
    }
    bvnd(-h, -k, r)
}

// Gauss-Legendre (weight, abscissa) pairs on [-1, 1], negative half.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_691_0, -0.238_619_186_083_197_0),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

// Upper-orthant probability P(X > dh, Y > dk), Drezner-Wesolowsky with
// Genz's refinements. Only called with r >= 0.
fn bvnd(dh: f64, dk: f64, r: f64) -> f64 {
    let quad: &[(f64, f64)] = if r < 0.3 {
        &GL6
    } else if r < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let h = dh;
    let k = dk;
    let hk = h * k;
    let two_pi = 2.0 * PI;
    let mut bvn = 0.0;
    if r <= 0.925 {
        if r > 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = r.asin();
            for &(w, x) in quad {
                for is in [-1.0, 1.0] {
                    let sn = (asr * (is * x + 1.0) / 2.0).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (2.0 * two_pi);
        }
        bvn + norm_cdf(-h) * norm_cdf(-k)
    } else {
        if r < 1.0 {
            let a_s = (1.0 - r) * (1.0 + r);
            let mut a = a_s.sqrt();
            let b_s = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -(b_s / a_s + hk) / 2.0;
            if asr > -100.0 {
                bvn = a * asr.exp() * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
            }
            if -hk < 100.0 {
                let b = b_s.sqrt();
                bvn -= (-hk / 2.0).exp()
                    * two_pi.sqrt()
                    * norm_cdf(-b / a)
                    * b
                    * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
            }
            a /= 2.0;
            for &(w, x) in quad {
                for is in [-1.0, 1.0] {
                    let xs = (a * (is * x + 1.0)).powi(2);
                    let rs = (1.0 - xs).sqrt();
                    let asr = -(b_s / xs + hk) / 2.0;
                    if asr > -100.0 {
                        bvn += a
                            * w
                            * asr.exp()
                            * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
                    }
                }
            }
            bvn = -bvn / two_pi;
        }
        bvn + norm_cdf(-h.max(k))
    }
}

/// Debye function of order one, `D1(x) = (1/x) * int_0^x t / (e^t - 1) dt`.
pub fn debye1(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x < 0.0 {
        return debye1(-x) - x / 2.0;
    }
    let integrand = |t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() };
    quad::integrate(integrand, 0.0, x, 1e-14, 1e-13) / x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &p in &[1e-10, 1e-4, 0.025, 0.3, 0.5, 0.8, 0.975, 1.0 - 1e-9] {
            let x = norm_ppf(p);
            assert!((norm_cdf(x) - p).abs() <= 1e-14 * p.max(1e-3), "p={p}");
        }
        let z = norm_ppf(0.975);
        assert!((z - 1.959_963_984_540_054).abs() < 1e-12, "{z}");
    }

    #[test]
    fn student_quantile_inverts_cdf() {
        for &nu in &[2.5, 3.0, 5.0, 10.0, 30.0] {
            let t = StudentT::new(nu);
            for &p in &[1e-10, 1e-3, 0.1, 0.5, 0.77, 0.999] {
                let x = t.ppf(p);
                let err = (t.cdf(x) - p).abs();
                assert!(err <= 1e-13 * p.max(1e-2), "nu={nu} p={p} err={err}");
            }
        }
    }

    #[test]
    fn student_pdf_integrates_to_cdf() {
        let t = StudentT::new(4.0);
        let mass = quad::integrate(|x| t.pdf(x), -1.5, 0.7, 1e-13, 1e-12);
        assert!((mass - (t.cdf(0.7) - t.cdf(-1.5))).abs() < 1e-11);
    }

    #[test]
    fn bvn_matches_quadrature() {
        for &r in &[-0.95_f64, -0.5, 0.0, 0.2, 0.6, 0.9, 0.97] {
            for &(h, k) in &[(0.3, -0.4), (-1.2, 0.8), (1.5, 1.1)] {
                // P(X<h, Y<k) = int_{-inf}^h phi(x) Phi((k - r x)/sqrt(1-r^2)) dx
                let s = (1.0 - r * r).sqrt();
                let f = |x: f64| norm_pdf(x) * norm_cdf((k - r * x) / s);
                let cuts = [-40.0, -10.0, -5.0, -2.0, 0.0];
                let mut oracle = 0.0;
                for w in cuts.windows(2) {
                    oracle += quad::integrate(f, w[0], w[1].min(h), 1e-17, 1e-14);
                }
                oracle += quad::integrate(f, 0.0f64.min(h), h, 1e-17, 1e-14);
                let got = bvn_cdf(h, k, r);
                assert!((got - oracle).abs() < 1e-12, "r={r} h={h} k={k}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn debye_limits() {
        assert!((debye1(1e-6) - 1.0).abs() < 1e-6);
        // D1(x) ~ pi^2 / (6x) for large x
        assert!((debye1(60.0) - PI * PI / 360.0).abs() < 1e-12);
        assert!((debye1(-2.0) - (debye1(2.0) + 1.0)).abs() < 1e-14);
    }
}
