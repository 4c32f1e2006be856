//! Unrotated, exchangeable bivariate copula kernels.
//!
//! Every function here takes arguments already clamped into the open unit
//! square. `h1(u, v)` is `dC/du`, i.e. the conditional distribution of the
//! second argument given the first; exchangeability gives `dC/dv` as
//! `h1(v, u)`.

use crate::optim::solve_increasing;
use crate::quad;
use crate::special::{bvn_cdf, norm_cdf, norm_ppf, StudentT};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Kernel {
    Independence,
    Gaussian { rho: f64 },
    StudentT(StudentKernel),
    Clayton { theta: f64 },
    Gumbel { theta: f64 },
    Frank { theta: f64 },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StudentKernel {
    pub rho: f64,
    pub nu: f64,
    pub t: StudentT,
    pub t1: StudentT,
    pub log_const: f64,
}

impl StudentKernel {
    pub fn new(rho: f64, nu: f64) -> Self {
        use statrs::function::gamma::ln_gamma;
        let log_const = ln_gamma(0.5 * (nu + 2.0)) + ln_gamma(0.5 * nu)
            - 2.0 * ln_gamma(0.5 * (nu + 1.0))
            - 0.5 * (1.0 - rho * rho).ln();
        Self {
            rho,
            nu,
            t: StudentT::new(nu),
            t1: StudentT::new(nu + 1.0),
            log_const,
        }
    }

    /// Log density in terms of the t-quantiles `x`, `y`.
    #[inline]
    pub fn log_pdf_xy(&self, x: f64, y: f64) -> f64 {
        let (rho, nu) = (self.rho, self.nu);
        let q = (x * x + y * y - 2.0 * rho * x * y) / (nu * (1.0 - rho * rho));
        self.log_const - 0.5 * (nu + 2.0) * q.ln_1p() + 0.5 * (nu + 1.0) * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
    }
}

/// `ln(u^-theta + v^-theta - 1)` for Clayton, stable for large exponents.
#[inline]
fn clayton_log_sum(theta: f64, u: f64, v: f64) -> f64 {
    let a = -theta * u.ln();
    let b = -theta * v.ln();
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo.exp_m1() * (-hi).exp()).ln_1p()
}

/// `ln(x^theta + y^theta)` from `ln x`, `ln y`.
#[inline]
fn log_sum_pow(theta: f64, lx: f64, ly: f64) -> f64 {
    let a = theta * lx;
    let b = theta * ly;
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl Kernel {
    pub fn log_pdf(&self, u: f64, v: f64) -> f64 {
        match *self {
            Kernel::Independence => 0.0,
            Kernel::Gaussian { rho } => {
                let x = norm_ppf(u);
                let y = norm_ppf(v);
                gaussian_log_pdf_xy(rho, x, y)
            }
            Kernel::StudentT(k) => k.log_pdf_xy(k.t.ppf(u), k.t.ppf(v)),
            Kernel::Clayton { theta } => {
                (1.0 + theta).ln()
                    - (1.0 + theta) * (u.ln() + v.ln())
                    - (2.0 + 1.0 / theta) * clayton_log_sum(theta, u, v)
            }
            Kernel::Gumbel { theta } => {
                let x = -u.ln();
                let y = -v.ln();
                let (lx, ly) = (x.ln(), y.ln());
                let ls = log_sum_pow(theta, lx, ly);
                let a = (ls / theta).exp();
                -a + x + y + (theta - 1.0) * (lx + ly) + (2.0 / theta - 2.0) * ls + (a + theta - 1.0).ln() - a.ln()
            }
            Kernel::Frank { theta } => {
                let g = (-theta).exp_m1();
                let a = (-theta * u).exp_m1();
                let b = (-theta * v).exp_m1();
                (-theta * g).ln() - theta * (u + v) - 2.0 * (g + a * b).abs().ln()
            }
        }
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        match *self {
            Kernel::Independence => u * v,
            Kernel::Gaussian { rho } => bvn_cdf(norm_ppf(u), norm_ppf(v), rho),
            Kernel::StudentT(_) => {
                // no closed form; integrate the conditional distribution
                quad::integrate(|s| self.h1(s, v), 0.0, u, 1e-14, 1e-12).clamp(0.0, u.min(v))
            }
            Kernel::Clayton { theta } => (-clayton_log_sum(theta, u, v) / theta).exp(),
            Kernel::Gumbel { theta } => {
                let ls = log_sum_pow(theta, (-u.ln()).ln(), (-v.ln()).ln());
                (-(ls / theta).exp()).exp()
            }
            Kernel::Frank { theta } => {
                let g = (-theta).exp_m1();
                let a = (-theta * u).exp_m1();
                let b = (-theta * v).exp_m1();
                -(a * b / g).ln_1p() / theta
            }
        }
    }

    pub fn h1(&self, u: f64, v: f64) -> f64 {
        let h = match *self {
            Kernel::Independence => v,
            Kernel::Gaussian { rho } => {
                let x = norm_ppf(u);
                let y = norm_ppf(v);
                norm_cdf((y - rho * x) / (1.0 - rho * rho).sqrt())
            }
            Kernel::StudentT(k) => {
                let x = k.t.ppf(u);
                let y = k.t.ppf(v);
                let scale = ((k.nu + x * x) * (1.0 - k.rho * k.rho) / (k.nu + 1.0)).sqrt();
                k.t1.cdf((y - k.rho * x) / scale)
            }
            Kernel::Clayton { theta } => {
                (-(theta + 1.0) * u.ln() - (1.0 + 1.0 / theta) * clayton_log_sum(theta, u, v)).exp()
            }
            Kernel::Gumbel { theta } => {
                let x = -u.ln();
                let lx = x.ln();
                let ly = (-v.ln()).ln();
                let ls = log_sum_pow(theta, lx, ly);
                let a = (ls / theta).exp();
                (-a + x + (1.0 / theta - 1.0) * ls + (theta - 1.0) * lx).exp()
            }
            Kernel::Frank { theta } => {
                let g = (-theta).exp_m1();
                let a = (-theta * u).exp_m1();
                let b = (-theta * v).exp_m1();
                (a + 1.0) * b / (g + a * b)
            }
        };
        h.clamp(0.0, 1.0)
    }

    /// Solves `h1(u, v) = w` for `v`.
    pub fn hinv1(&self, u: f64, w: f64) -> Option<f64> {
        let v = match *self {
            Kernel::Independence => w,
            Kernel::Gaussian { rho } => norm_cdf(norm_ppf(w) * (1.0 - rho * rho).sqrt() + rho * norm_ppf(u)),
            Kernel::StudentT(k) => {
                let x = k.t.ppf(u);
                let scale = ((k.nu + x * x) * (1.0 - k.rho * k.rho) / (k.nu + 1.0)).sqrt();
                k.t.cdf(k.t1.ppf(w) * scale + k.rho * x)
            }
            Kernel::Clayton { theta } => {
                // v = (1 + u^-theta (w^(-theta/(1+theta)) - 1))^(-1/theta)
                let e = (-theta / (1.0 + theta) * w.ln()).exp_m1();
                let t = -theta * u.ln() + e.ln();
                let softplus = if t > 0.0 {
                    t + (-t).exp().ln_1p()
                } else {
                    t.exp().ln_1p()
                };
                (-softplus / theta).exp()
            }
            Kernel::Gumbel { theta } => gumbel_hinv1(theta, u, w)?,
            Kernel::Frank { theta } => {
                let g = (-theta).exp_m1();
                let a1 = (-theta * u).exp();
                -(w * g / (w + a1 * (1.0 - w))).ln_1p() / theta
            }
        };
        v.is_finite().then_some(v)
    }
}

#[inline]
pub(crate) fn gaussian_log_pdf_xy(rho: f64, x: f64, y: f64) -> f64 {
    let r2 = rho * rho;
    -0.5 * (1.0 - r2).ln() - (r2 * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * (1.0 - r2))
}

// With x = -ln u and A = (x^theta + y^theta)^(1/theta), h1 = w reduces to
// -A + (1-theta) ln A + (theta-1) ln x + x = ln w, monotone in s = ln A on
// [ln x, ln(x - ln w)].
fn gumbel_hinv1(theta: f64, u: f64, w: f64) -> Option<f64> {
    let x = -u.ln();
    let lx = x.ln();
    let lw = w.ln();
    let g = |s: f64| s.exp() - (1.0 - theta) * s - (theta - 1.0) * lx - x + lw;
    let dg = |s: f64| s.exp() + theta - 1.0;
    let lo = lx;
    let hi = (x - lw).ln();
    let s = if hi <= lo {
        lo
    } else {
        solve_increasing(g, dg, 0.0, lo, hi, 1e-15 * hi.abs().max(1.0), 200)?
    };
    // y^theta = A^theta - x^theta = x^theta * expm1(theta (s - ln x))
    let y = x * ((theta * (s - lx)).exp_m1().max(0.0)).powf(1.0 / theta);
    Some((-y).exp())
}
