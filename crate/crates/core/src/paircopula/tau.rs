use std::f64::consts::PI;

use super::{Family, PairCopula};
use crate::error::{Error, Result};
use crate::optim::solve_increasing;
use crate::special::debye1;

/// Kendall's tau-a of paired samples: `(concordant - discordant) / C(n, 2)`,
/// with tied pairs counted as neither. Knight's O(n log n) merge-sort count.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain("kendall_tau: samples differ in length"));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::insufficient(format!(
            "kendall_tau needs at least 2 pairs, got {n}"
        )));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::domain("kendall_tau: NaN in sample"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let pairs = |k: u64| k * k.saturating_sub(1) / 2;
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x[a] == x[b] {
            run_x += 1;
            if y[a] == y[b] {
                run_xy += 1;
            } else {
                ties_xy += pairs(run_xy);
                run_xy = 1;
            }
        } else {
            ties_x += pairs(run_x);
            ties_xy += pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    ties_x += pairs(run_x);
    ties_xy += pairs(run_xy);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_y = 0u64;
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            ties_y += pairs(run_y);
            run_y = 1;
        }
    }
    ties_y += pairs(run_y);

    let total = pairs(n as u64);
    let score = total as i64 - ties_x as i64 - ties_y as i64 + ties_xy as i64 - 2 * swaps as i64;
    Ok(score as f64 / total as f64)
}

/// Sorts `v` ascending, returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

pub fn kendall_tau_empirical(pairs: &[(f64, f64)]) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    kendall_tau(&x, &y)
}

fn frank_tau(theta: f64) -> f64 {
    if theta.abs() < 1e-8 {
        return theta / 9.0;
    }
    1.0 - 4.0 / theta * (1.0 - debye1(theta))
}

/// Kendall's tau implied by a copula, including the sign flip of 90/270
/// degree rotations.
pub fn param_to_tau(cop: &PairCopula) -> f64 {
    let p = cop.params();
    let tau = match cop.family() {
        Family::Independence => 0.0,
        Family::Gaussian | Family::StudentT => 2.0 / PI * p[0].asin(),
        Family::Clayton => p[0] / (p[0] + 2.0),
        Family::Gumbel => 1.0 - 1.0 / p[0],
        Family::Frank => frank_tau(p[0]),
    };
    if cop.rotation().negates() {
        -tau
    } else {
        tau
    }
}

/// Parameter vector of the unrotated `family` with Kendall's tau `tau`.
/// Student t gets `nu = 5`.
pub fn tau_to_param(family: Family, tau: f64) -> Result<Vec<f64>> {
    let bad = || Error::domain(format!("tau = {tau} is not attainable by {family}"));
    if !(tau > -1.0 && tau < 1.0) {
        return Err(bad());
    }
    match family {
        Family::Independence => {
            if tau == 0.0 {
                Ok(vec![])
            } else {
                Err(bad())
            }
        }
        Family::Gaussian => Ok(vec![(PI * tau / 2.0).sin()]),
        Family::StudentT => Ok(vec![(PI * tau / 2.0).sin(), 5.0]),
        Family::Clayton => {
            if tau <= 0.0 {
                return Err(bad());
            }
            Ok(vec![2.0 * tau / (1.0 - tau)])
        }
        Family::Gumbel => {
            if tau < 0.0 {
                return Err(bad());
            }
            Ok(vec![1.0 / (1.0 - tau)])
        }
        Family::Frank => {
            if tau == 0.0 {
                return Err(bad());
            }
            let target = tau.abs();
            let mut hi = 10.0;
            while frank_tau(hi) < target {
                hi *= 2.0;
                if hi > 1e6 {
                    return Err(bad());
                }
            }
            let theta = solve_increasing(frank_tau, |_| 0.0, target, 0.0, hi, 1e-13, 400)
                .ok_or_else(|| Error::Numeric(format!("frank tau inversion failed at {tau}")))?;
            Ok(vec![theta.copysign(tau)])
        }
    }
}
