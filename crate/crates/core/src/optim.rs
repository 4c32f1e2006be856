//! Derivative-free minimizers and a safeguarded scalar root finder.

/// Result of a Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct Simplex {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once the spread of objective values over the simplex is below this.
    pub ftol: f64,
    pub max_iter: usize,
    /// Maximum number of restarts from the current best vertex.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-8,
            max_iter: 5000,
            restarts: 4,
        }
    }
}

/// Minimizes `f` from `x0` with initial simplex offsets `step`. The simplex is
/// rebuilt around the incumbent after each convergence until a restart no
/// longer improves the objective by more than `ftol`.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], opts: NelderMeadOptions) -> Simplex
where
    F: Fn(&[f64]) -> f64,
{
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best = run_simplex(&eval, x0, step, opts);
    let mut total = best.iterations;
    for _ in 0..opts.restarts {
        let next = run_simplex(&eval, &best.x, step, opts);
        total += next.iterations;
        let gain = best.fx - next.fx;
        if next.fx <= best.fx {
            best = next;
        }
        if gain <= opts.ftol {
            break;
        }
    }
    best.iterations = total;
    best
}

fn run_simplex<F>(f: &F, x0: &[f64], step: &[f64], opts: NelderMeadOptions) -> Simplex
where
    F: Fn(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if step[i] != 0.0 { step[i] } else { 1e-3 };
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        if (vals[n] - vals[0]).abs() <= opts.ftol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (w - c)).collect() };

        let xr = along(-ALPHA);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-GAMMA);
            let fe = f(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(-RHO);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(RHO);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, p)| b + SIGMA * (p - b)).collect();
            vals[i] = f(&shrunk);
            pts[i] = shrunk;
        }
    }

    let (bi, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty simplex");
    Simplex {
        x: pts[bi].clone(),
        fx: vals[bi],
        iterations,
        converged,
    }
}

/// Brent's method for a scalar minimum on `[lo, hi]`. Returns `(x, f(x))`.
pub fn brent_minimize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let f = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Solves `g(x) = target` for nondecreasing `g` on `[lo, hi]` by Newton steps
/// that fall back to bisection whenever they leave the bracket. `dg` is the
/// derivative (may return 0 where unknown). Returns `None` if the bracket does
/// not contain the target or the iteration cap is hit.
pub fn solve_increasing<G, D>(
    g: G,
    dg: D,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Option<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let glo = g(lo) - target;
    let ghi = g(hi) - target;
    if glo > 0.0 || ghi < 0.0 {
        return None;
    }
    if glo == 0.0 {
        return Some(lo);
    }
    if ghi == 0.0 {
        return Some(hi);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let gx = g(x) - target;
        if gx == 0.0 {
            return Some(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= x_tol {
            return Some(0.5 * (lo + hi));
        }
        let d = dg(x);
        let newton = if d > 0.0 && d.is_finite() { x - gx / d } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 0.25 * x_tol {
            return Some(next);
        }
        x = next;
    }
    None
}
