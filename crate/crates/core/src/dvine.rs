//! D-vine copula quantile regression with the response as the first node.
//!
//! Variables are indexed `0..=k` along the path, `0` being the response.
//! The edge joining `i` and `i + j` sits in tree `j` at position `i`; its
//! first argument is `F(u_i | u_{i+1..i+j-1})` and its second
//! `F(u_{i+j} | u_{i+1..i+j-1})`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::{fit_kde, KdeMarginal};
use crate::optim::solve_increasing;
use crate::paircopula::{clamp_unit, fit_pair, FamilyCatalog, PairCopula, CLAMP_EPS};

pub const MIN_TRAINING_ROWS: usize = 100;
const WARN_TRAINING_ROWS: usize = 300;

/// A named candidate predictor series.
#[derive(Debug, Clone, Copy)]
pub struct Column<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

impl<'a> Column<'a> {
    pub fn new(name: &'a str, values: &'a [f64]) -> Self {
        Self { name, values }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DVineOptions {
    pub catalog: FamilyCatalog,
    /// Upper bound on the number of selected predictors.
    pub max_predictors: Option<usize>,
}

/// Score of one tentative extension of the vine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub name: String,
    pub cll: f64,
    /// Copula parameters on the response edges of the extended model.
    pub n_params: usize,
    pub caic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub candidates: Vec<CandidateScore>,
    pub chosen: Option<String>,
    /// Criterion value after this step.
    pub caic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NoImprovement,
    CandidatesExhausted,
    MaxPredictors,
    FixedOrder,
}

/// Audit record of forward selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub criterion: String,
    pub steps: Vec<SelectionStep>,
    pub stop: StopReason,
}

impl SelectionTrace {
    /// Criterion after each accepted step, starting from the empty model.
    pub fn caic_path(&self) -> Vec<f64> {
        let mut path = vec![0.0];
        path.extend(self.steps.iter().filter(|s| s.chosen.is_some()).map(|s| s.caic));
        path
    }
}

const CAIC_FORMULA: &str = "cAIC = cll - (number of copula parameters on edges joining the response)";

/// Fitted D-vine regression model.
#[derive(Debug, Clone, PartialEq)]
pub struct DVineModel {
    names: Vec<String>,
    marginals: Vec<KdeMarginal>,
    /// `edges[j - 1][i]` joins variables `i` and `i + j`.
    edges: Vec<Vec<PairCopula>>,
    cll: f64,
    caic: f64,
}

// Per-variable pseudo-observation columns of the training data.
struct FitState {
    /// `fwd[i][t]`: `F(u_i | u_{i+1..i+t})`.
    fwd: Vec<Vec<Vec<f64>>>,
    edges: Vec<Vec<PairCopula>>,
    cll: f64,
    params: usize,
}

struct Extension {
    edges: Vec<PairCopula>,
    /// New last entry for `fwd[i]`, `i = 0..q`.
    fwd_tail: Vec<Vec<f64>>,
    edge_cll: f64,
    edge_params: usize,
}

impl FitState {
    fn caic(&self) -> f64 {
        self.cll - self.params as f64
    }

    fn order(&self) -> usize {
        self.fwd.len() - 1
    }

    /// Fits the edges that attach `u_new` as variable `q = k + 1`.
    fn extend(&self, u_new: &[f64], catalog: &FamilyCatalog) -> Result<Extension> {
        let q = self.fwd.len();
        let mut b = u_new.to_vec();
        let mut edges = Vec::with_capacity(q);
        let mut fwd_tail = vec![Vec::new(); q];
        let mut edge_cll = 0.0;
        let mut edge_params = 0;
        for j in 1..=q {
            let i = q - j;
            let a = &self.fwd[i][j - 1];
            let fit = fit_pair(a, &b, catalog)?;
            let c = fit.copula;
            if i == 0 {
                edge_cll = fit.loglik;
                edge_params = c.n_params();
            }
            fwd_tail[i] = a.iter().zip(&b).map(|(&x, &y)| c.h2(x, y)).collect();
            if j < q {
                b = a.iter().zip(&b).map(|(&x, &y)| c.h1(x, y)).collect();
            }
            edges.push(c);
        }
        Ok(Extension {
            edges,
            fwd_tail,
            edge_cll,
            edge_params,
        })
    }

    fn accept(&mut self, u_new: Vec<f64>, ext: Extension) {
        let q = self.fwd.len();
        for (i, tail) in ext.fwd_tail.into_iter().enumerate() {
            self.fwd[i].push(tail);
        }
        self.fwd.push(vec![u_new]);
        for (jm1, c) in ext.edges.into_iter().enumerate() {
            if self.edges.len() <= jm1 {
                self.edges.push(Vec::new());
            }
            debug_assert_eq!(self.edges[jm1].len(), q - jm1 - 1);
            self.edges[jm1].push(c);
        }
        self.cll += ext.edge_cll;
        self.params += ext.edge_params;
    }
}

fn validate(y: &[f64], candidates: &[Column<'_>]) -> Result<()> {
    let n = y.len();
    if n < MIN_TRAINING_ROWS {
        return Err(Error::insufficient(format!(
            "D-vine regression needs at least {MIN_TRAINING_ROWS} training rows, got {n}"
        )));
    }
    if n < WARN_TRAINING_ROWS {
        warn!("D-vine fitted on only {n} rows; pair-copula estimates will be noisy");
    }
    for c in candidates {
        if c.values.len() != n {
            return Err(Error::Schema(format!(
                "predictor {} has {} rows, response has {n}",
                c.name,
                c.values.len()
            )));
        }
    }
    if y.iter()
        .chain(candidates.iter().flat_map(|c| c.values))
        .any(|v| !v.is_finite())
    {
        return Err(Error::domain("D-vine training data contain non-finite values"));
    }
    Ok(())
}

fn fit_marginal(name: &str, values: &[f64]) -> Result<KdeMarginal> {
    fit_kde(values).map_err(|e| match e {
        Error::Fit(m) => Error::Fit(format!("marginal of {name}: {m}")),
        Error::InsufficientData { message, .. } => Error::InsufficientData {
            column: Some(name.to_string()),
            message,
        },
        other => other,
    })
}

/// Forward selection by conditional AIC. Starting from the response alone,
/// each step tries every unused candidate as the next node, fitting only the
/// new edges, and keeps the best one if it strictly improves the criterion.
pub fn select_and_fit(
    response: Column<'_>,
    candidates: &[Column<'_>],
    opts: &DVineOptions,
) -> Result<(DVineModel, SelectionTrace)> {
    validate(response.values, candidates)?;
    let y_marg = fit_marginal(response.name, response.values)?;
    let mut cand_margs = Vec::with_capacity(candidates.len());
    let mut cand_u = Vec::with_capacity(candidates.len());
    for c in candidates {
        let m = fit_marginal(c.name, c.values)?;
        cand_u.push(c.values.iter().map(|&x| m.pit(x)).collect::<Vec<f64>>());
        cand_margs.push(m);
    }
    let v: Vec<f64> = response.values.iter().map(|&x| y_marg.pit(x)).collect();
    let mut state = FitState {
        fwd: vec![vec![v]],
        edges: Vec::new(),
        cll: 0.0,
        params: 0,
    };
    let mut used = vec![false; candidates.len()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    let limit = opts.max_predictors.unwrap_or(usize::MAX);

    let stop = loop {
        if chosen.len() >= limit {
            break StopReason::MaxPredictors;
        }
        if used.iter().all(|&u| u) {
            break StopReason::CandidatesExhausted;
        }
        let mut scores = Vec::new();
        let mut best: Option<(usize, f64, Extension)> = None;
        for (ci, c) in candidates.iter().enumerate() {
            if used[ci] {
                continue;
            }
            let ext = state.extend(&cand_u[ci], &opts.catalog)?;
            let cll = state.cll + ext.edge_cll;
            let n_params = state.params + ext.edge_params;
            let caic = cll - n_params as f64;
            scores.push(CandidateScore {
                name: c.name.to_string(),
                cll,
                n_params,
                caic,
            });
            if best.as_ref().is_none_or(|b| caic > b.1) {
                best = Some((ci, caic, ext));
            }
        }
        let (ci, caic, ext) = best.expect("at least one unused candidate");
        if caic > state.caic() {
            used[ci] = true;
            chosen.push(ci);
            state.accept(cand_u[ci].clone(), ext);
            steps.push(SelectionStep {
                candidates: scores,
                chosen: Some(candidates[ci].name.to_string()),
                caic,
            });
        } else {
            steps.push(SelectionStep {
                candidates: scores,
                chosen: None,
                caic: state.caic(),
            });
            break StopReason::NoImprovement;
        }
    };

    let mut names = vec![response.name.to_string()];
    let mut marginals = vec![y_marg];
    for &ci in &chosen {
        names.push(candidates[ci].name.to_string());
        marginals.push(cand_margs[ci].clone());
    }
    let model = DVineModel {
        names,
        marginals,
        caic: state.caic(),
        cll: state.cll,
        edges: state.edges,
    };
    let trace = SelectionTrace {
        criterion: CAIC_FORMULA.into(),
        steps,
        stop,
    };
    Ok((model, trace))
}

/// Fits the D-vine with the predictors in the given order, without selection.
pub fn fit_in_order(
    response: Column<'_>,
    predictors: &[Column<'_>],
    opts: &DVineOptions,
) -> Result<(DVineModel, SelectionTrace)> {
    validate(response.values, predictors)?;
    let y_marg = fit_marginal(response.name, response.values)?;
    let v: Vec<f64> = response.values.iter().map(|&x| y_marg.pit(x)).collect();
    let mut state = FitState {
        fwd: vec![vec![v]],
        edges: Vec::new(),
        cll: 0.0,
        params: 0,
    };
    let mut names = vec![response.name.to_string()];
    let mut marginals = vec![y_marg];
    let mut steps = Vec::new();
    for c in predictors {
        let m = fit_marginal(c.name, c.values)?;
        let u: Vec<f64> = c.values.iter().map(|&x| m.pit(x)).collect();
        let ext = state.extend(&u, &opts.catalog)?;
        state.accept(u, ext);
        steps.push(SelectionStep {
            candidates: vec![CandidateScore {
                name: c.name.to_string(),
                cll: state.cll,
                n_params: state.params,
                caic: state.caic(),
            }],
            chosen: Some(c.name.to_string()),
            caic: state.caic(),
        });
        names.push(c.name.to_string());
        marginals.push(m);
    }
    debug_assert_eq!(state.order(), predictors.len());
    let model = DVineModel {
        names,
        marginals,
        caic: state.caic(),
        cll: state.cll,
        edges: state.edges,
    };
    let trace = SelectionTrace {
        criterion: CAIC_FORMULA.into(),
        steps,
        stop: StopReason::FixedOrder,
    };
    Ok((model, trace))
}

impl DVineModel {
    /// Response name followed by the selected predictors in vine order.
    pub fn order(&self) -> &[String] {
        &self.names
    }

    pub fn response(&self) -> &str {
        &self.names[0]
    }

    pub fn predictors(&self) -> &[String] {
        &self.names[1..]
    }

    pub fn n_predictors(&self) -> usize {
        self.names.len() - 1
    }

    /// Marginal of the response (index 0) or of the `i`-th predictor (`i + 1`).
    pub fn marginal(&self, idx: usize) -> &KdeMarginal {
        &self.marginals[idx]
    }

    /// Pair copula of tree `tree` (1-based) at position `pos`.
    pub fn edge(&self, tree: usize, pos: usize) -> &PairCopula {
        &self.edges[tree - 1][pos]
    }

    pub fn cll(&self) -> f64 {
        self.cll
    }

    pub fn caic(&self) -> f64 {
        self.caic
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_predictors() {
            return Err(Error::domain(format!(
                "model has {} predictors, got {} values",
                self.n_predictors(),
                u.len()
            )));
        }
        Ok(())
    }

    /// `F(u_j | u_1..u_{j-1})` for `j = 1..=k`.
    fn conditioning_terms(&self, u: &[f64]) -> Vec<f64> {
        let k = u.len();
        let mut out = Vec::with_capacity(k);
        if k == 0 {
            return out;
        }
        // index 0 is unused so positions match variable numbers
        let mut f: Vec<f64> = std::iter::once(0.0).chain(u.iter().map(|&x| clamp_unit(x))).collect();
        let mut b = f.clone();
        out.push(f[1]);
        for t in 1..k {
            let mut nf = f.clone();
            let mut nb = b.clone();
            for i in 1..=k - t {
                let e = &self.edges[t - 1][i];
                nf[i] = e.h2(f[i], b[i + t]);
                nb[i + t] = e.h1(f[i], b[i + t]);
            }
            f = nf;
            b = nb;
            out.push(b[t + 1]);
        }
        out
    }

    /// Copula-scale PIT values of raw predictor values.
    pub fn predictor_pits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(x.iter().zip(&self.marginals[1..]).map(|(&xi, m)| m.pit(xi)).collect())
    }

    /// `C(v | u_1..u_k)` on the copula scale.
    pub fn cond_cdf(&self, v: f64, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        Ok(self.cond_cdf_with(v, &self.conditioning_terms(u)))
    }

    fn cond_cdf_with(&self, v: f64, terms: &[f64]) -> f64 {
        terms
            .iter()
            .enumerate()
            .fold(clamp_unit(v), |w, (jm1, &b)| self.edges[jm1][0].h2(w, b))
    }

    /// Inverse of [`cond_cdf`](Self::cond_cdf) in `v`.
    fn cond_cdf_inverse(&self, alpha: f64, terms: &[f64]) -> Result<f64> {
        let mut w = clamp_unit(alpha);
        for (jm1, &b) in terms.iter().enumerate().rev() {
            match self.edges[jm1][0].hinv2(b, w) {
                Some(x) => w = x,
                None => return self.invert_by_search(alpha, terms),
            }
        }
        Ok(w)
    }

    fn invert_by_search(&self, alpha: f64, terms: &[f64]) -> Result<f64> {
        solve_increasing(
            |v| self.cond_cdf_with(v, terms),
            |_| 0.0,
            alpha,
            CLAMP_EPS,
            1.0 - CLAMP_EPS,
            1e-12,
            200,
        )
        .ok_or_else(|| {
            Error::Numeric(format!(
                "conditional quantile at alpha {alpha} did not converge (conditioning terms {terms:?})"
            ))
        })
    }

    /// Conditional quantile of the response given raw predictor values.
    pub fn cond_quantile(&self, alpha: f64, x: &[f64]) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {alpha}")));
        }
        let terms = self.conditioning_terms(&self.predictor_pits(x)?);
        let v = self.cond_cdf_inverse(alpha, &terms)?;
        self.marginals[0].quantile(v)
    }

    /// Quantiles at levels `r / (R + 1)`, `r = 1..=R`.
    pub fn predictive_quantiles(&self, x: &[f64], r: usize) -> Result<Vec<f64>> {
        if r < 2 {
            return Err(Error::domain(format!("need at least 2 quantile levels, got {r}")));
        }
        let terms = self.conditioning_terms(&self.predictor_pits(x)?);
        let mut out = Vec::with_capacity(r);
        for i in 1..=r {
            let alpha = i as f64 / (r + 1) as f64;
            let v = self.cond_cdf_inverse(alpha, &terms)?;
            out.push(self.marginals[0].quantile(v)?);
        }
        Ok(out)
    }

    /// Predictive CDF of the response at `y` given raw predictor values.
    pub fn predictive_cdf(&self, y: f64, x: &[f64]) -> Result<f64> {
        let terms = self.conditioning_terms(&self.predictor_pits(x)?);
        Ok(self.cond_cdf_with(self.marginals[0].pit(y), &terms))
    }

    /// Predictive density `c(F_Y(y) | u) * f_Y(y)`.
    pub fn cond_density(&self, y: f64, x: &[f64]) -> Result<f64> {
        let terms = self.conditioning_terms(&self.predictor_pits(x)?);
        let (v, fy) = self.marginals[0].cdf_and_density(y);
        let mut w = clamp_unit(v);
        let mut dens = fy;
        for (jm1, &b) in terms.iter().enumerate() {
            let e = &self.edges[jm1][0];
            dens *= e.pdf(w, b);
            w = e.h2(w, b);
        }
        Ok(dens)
    }

    /// Log density of the full D-vine copula at `(v, u_1..u_k)`, all edges
    /// included.
    pub fn copula_log_density(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.names.len() {
            return Err(Error::domain(format!(
                "expected {} copula values, got {}",
                self.names.len(),
                w.len()
            )));
        }
        let k = w.len() - 1;
        let mut f: Vec<f64> = w.iter().map(|&x| clamp_unit(x)).collect();
        let mut b = f.clone();
        let mut logd = 0.0;
        for t in 1..=k {
            let mut nf = f.clone();
            let mut nb = b.clone();
            for i in 0..=k - t {
                let e = &self.edges[t - 1][i];
                logd += e.log_pdf(f[i], b[i + t]);
                nf[i] = e.h2(f[i], b[i + t]);
                nb[i + t] = e.h1(f[i], b[i + t]);
            }
            f = nf;
            b = nb;
        }
        Ok(logd)
    }

    /// Joint density of response and predictors from the fitted marginals
    /// and all pair copulas.
    pub fn joint_density(&self, y: f64, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        let mut w = Vec::with_capacity(x.len() + 1);
        let mut log_marg = 0.0;
        for (m, &val) in self.marginals.iter().zip(std::iter::once(&y).chain(x)) {
            let (c, d) = m.cdf_and_density(val);
            w.push(c);
            log_marg += d.ln();
        }
        Ok((self.copula_log_density(&w)? + log_marg).exp())
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeRepr {
    tree: usize,
    position: usize,
    #[serde(flatten)]
    copula: PairCopula,
}

#[derive(Serialize, Deserialize)]
struct DVineRepr {
    order: Vec<String>,
    marginals: Vec<KdeMarginal>,
    edges: Vec<EdgeRepr>,
    cll: f64,
    caic: f64,
}

impl Serialize for DVineModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .flat_map(|(jm1, tree)| {
                tree.iter().enumerate().map(move |(i, c)| EdgeRepr {
                    tree: jm1 + 1,
                    position: i,
                    copula: c.clone(),
                })
            })
            .collect();
        DVineRepr {
            order: self.names.clone(),
            marginals: self.marginals.clone(),
            edges,
            cll: self.cll,
            caic: self.caic,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DVineModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = DVineRepr::deserialize(d)?;
        let k = r
            .order
            .len()
            .checked_sub(1)
            .ok_or_else(|| D::Error::custom("empty variable order"))?;
        if r.marginals.len() != k + 1 {
            return Err(D::Error::custom("one marginal per variable is required"));
        }
        let mut edges: Vec<Vec<Option<PairCopula>>> = (1..=k).map(|j| vec![None; k + 1 - j]).collect();
        for e in r.edges {
            let slot = e
                .tree
                .checked_sub(1)
                .and_then(|t| edges.get_mut(t))
                .and_then(|t| t.get_mut(e.position))
                .ok_or_else(|| D::Error::custom(format!("edge ({}, {}) outside the vine", e.tree, e.position)))?;
            if slot.replace(e.copula).is_some() {
                return Err(D::Error::custom(format!("duplicate edge ({}, {})", e.tree, e.position)));
            }
        }
        let edges = edges
            .into_iter()
            .map(|t| t.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| D::Error::custom("missing edges"))?;
        Ok(DVineModel {
            names: r.order,
            marginals: r.marginals,
            edges,
            cll: r.cll,
            caic: r.caic,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::norm_ppf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x1 = Vec::new();
        let mut x2 = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let e: f64 = StandardNormal.sample(&mut rng);
            x1.push(a);
            x2.push(0.5 * a + b);
            y.push(a + 0.5 * b + 0.7 * e);
        }
        (y, x1, x2)
    }

    #[test]
    fn rejects_small_training_sets() {
        let y: Vec<f64> = (0..50).map(f64::from).collect();
        assert!(matches!(
            select_and_fit(Column::new("y", &y), &[], &DVineOptions::default()),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn empty_model_is_climatology() {
        let (y, _, _) = gaussian_data(400, 1);
        let (m, trace) = fit_in_order(Column::new("y", &y), &[], &DVineOptions::default()).unwrap();
        assert_eq!(m.n_predictors(), 0);
        assert_eq!(trace.stop, StopReason::FixedOrder);
        for a in [0.1, 0.5, 0.9] {
            assert_eq!(m.cond_quantile(a, &[]).unwrap(), m.marginal(0).quantile(a).unwrap());
            assert_eq!(m.cond_cdf(a, &[]).unwrap(), a);
        }
        assert!((m.cond_density(0.3, &[]).unwrap() - m.marginal(0).density(0.3)).abs() < 1e-15);
    }

    #[test]
    fn selects_informative_predictors_and_round_trips() {
        let (y, x1, x2) = gaussian_data(1500, 2);
        let noise: Vec<f64> = gaussian_data(1500, 99).0;
        let cands = [
            Column::new("x1", &x1),
            Column::new("noise", &noise),
            Column::new("x2", &x2),
        ];
        let (m, trace) = select_and_fit(Column::new("y", &y), &cands, &DVineOptions::default()).unwrap();
        assert_eq!(m.predictors()[0], "x1");
        assert!(m.predictors().contains(&"x2".to_string()));
        let path = trace.caic_path();
        assert!(path.windows(2).all(|w| w[1] > w[0]), "{path:?}");
        assert!((m.caic() - path[path.len() - 1]).abs() < 1e-9);

        let x = vec![0.4, -0.2][..m.n_predictors()].to_vec();
        let u = m.predictor_pits(&x).unwrap();
        for i in 1..100 {
            let a = i as f64 / 100.0;
            let q = m.cond_quantile(a, &x).unwrap();
            let back = m.cond_cdf(m.marginal(0).cdf(q), &u).unwrap();
            assert!((back - a).abs() < 1e-6, "alpha {a}: {back}");
        }
        let json = serde_json::to_string(&m).unwrap();
        let back: DVineModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn density_matches_cdf_derivative() {
        let (y, x1, x2) = gaussian_data(600, 3);
        let preds = [Column::new("x1", &x1), Column::new("x2", &x2)];
        let (m, _) = fit_in_order(Column::new("y", &y), &preds, &DVineOptions::default()).unwrap();
        let x = [norm_ppf(0.3), 0.8];
        let h = 1e-4;
        for yv in [-1.5, 0.0, 0.7, 2.0] {
            let fd = (m.predictive_cdf(yv + h, &x).unwrap() - m.predictive_cdf(yv - h, &x).unwrap()) / (2.0 * h);
            let d = m.cond_density(yv, &x).unwrap();
            assert!((fd - d).abs() < 1e-5 * (1.0 + d), "{yv}: {fd} vs {d}");
        }
    }
}
