//! Penalty-coefficient selection by k-fold cross-validation over a geometric
//! sequence of candidates.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrkError};
use crate::model::{Dataset, RegressionBasis};
use crate::objective::{PenaltyKind, PenaltySpec};
use crate::optimizer::{fit_trk, FitOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GscvConfig {
    pub k: usize,
    pub a0: f64,
    pub q: f64,
    pub n_terms: usize,
    /// Spacing of the elastic-net `alpha` grid.
    pub alpha_step: f64,
    pub seed: u64,
}

impl Default for GscvConfig {
    fn default() -> Self {
        Self { k: 5, a0: 1e-5, q: 10f64.sqrt(), n_terms: 20, alpha_step: 0.05, seed: 0 }
    }
}

impl GscvConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k >= 2
            && self.a0 > 0.0
            && self.a0.is_finite()
            && self.q > 1.0
            && self.q.is_finite()
            && self.n_terms >= 1
            && self.alpha_step > 0.0
            && self.alpha_step <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(TrkError::InvalidArgument(format!("invalid GSCV configuration: {self:?}")))
        }
    }

    /// `a0 q^(i-1)` for `i = 1..=n_terms`.
    pub fn coefficients(&self) -> Vec<f64> {
        (0..self.n_terms).map(|i| self.a0 * self.q.powi(i as i32)).collect()
    }

    /// `{0, h, 2h, ...} ∪ {1}`.
    pub fn alphas(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0usize;
        loop {
            let a = i as f64 * self.alpha_step;
            if a > 1.0 + 1e-12 {
                break;
            }
            out.push(if (a - 1.0).abs() <= 1e-12 { 1.0 } else { a });
            i += 1;
        }
        if *out.last().expect("alpha grid starts at 0") < 1.0 {
            out.push(1.0);
        }
        out
    }

    /// The candidate penalties of `kind` in scan order.
    pub fn candidates(&self, kind: PenaltyKind) -> Result<Vec<PenaltySpec>> {
        match kind {
            PenaltyKind::None => Err(TrkError::InvalidArgument("nothing to tune for the `none` penalty".into())),
            PenaltyKind::Lasso | PenaltyKind::Ridge => {
                Ok(self.coefficients().into_iter().map(|c| PenaltySpec::from_kind(kind, c, 0.0)).collect())
            }
            PenaltyKind::ElasticNet => {
                let alphas = self.alphas();
                Ok(self
                    .coefficients()
                    .into_iter()
                    .flat_map(|c| alphas.iter().map(move |a| PenaltySpec::elastic_net(c, *a)))
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub spec: PenaltySpec,
    /// Mean per-fold MSE; `+inf` when some fold could not be fitted.
    pub score: f64,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GscvResult {
    pub candidates: Vec<Candidate>,
    pub best: PenaltySpec,
    pub best_score: f64,
    pub ties_broken: bool,
}

impl GscvResult {
    /// Writes `lambda[,alpha],cv_score,feasible`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let with_alpha = self.best.kind == PenaltyKind::ElasticNet;
        let mut w = csv::Writer::from_writer(out);
        if with_alpha {
            w.write_record(["lambda", "alpha", "cv_score", "feasible"])?;
        } else {
            w.write_record(["lambda", "cv_score", "feasible"])?;
        }
        for c in &self.candidates {
            let mut rec = vec![c.spec.coefficient().to_string()];
            if with_alpha {
                rec.push(c.spec.alpha.to_string());
            }
            rec.push(c.score.to_string());
            rec.push(c.score.is_finite().to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shuffles `0..n` with `seed` and deals it into `k` folds whose sizes differ
/// by at most one; the first `n % k` folds get the extra index.
pub fn kfold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(TrkError::InvalidArgument(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (size, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for v in 0..k {
        let len = size + usize::from(v < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

fn check_fold_sizes(data: &Dataset, basis: RegressionBasis, folds: &[Vec<usize>]) -> Result<()> {
    let p = basis.terms(data.dim());
    let smallest_train = folds.iter().map(|f| data.n() - f.len()).min().unwrap_or(0);
    if smallest_train < p + 1 {
        return Err(TrkError::InvalidArgument(format!(
            "training folds keep {smallest_train} points; the {basis} basis needs at least {}",
            p + 1
        )));
    }
    Ok(())
}

fn score_folds(
    data: &Dataset,
    basis: RegressionBasis,
    spec: &PenaltySpec,
    opts: &FitOptions,
    folds: &[Vec<usize>],
) -> (f64, Option<String>) {
    let mut total = 0.0;
    for (v, held_out) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..data.n()).filter(|i| !held_out.contains(i)).collect();
        let fold_mse = data
            .subset(&train)
            .and_then(|d| fit_trk(&d, basis, spec, opts))
            .and_then(|fit| {
                let pts = DMatrix::from_fn(held_out.len(), data.dim(), |r, c| data.points()[(held_out[r], c)]);
                let pred = fit.model.predict_many(&pts)?;
                Ok(held_out.iter().zip(&pred).map(|(i, p)| (data.responses()[*i] - p).powi(2)).sum::<f64>()
                    / held_out.len() as f64)
            });
        match fold_mse {
            Ok(m) if m.is_finite() => total += m,
            Ok(m) => return (f64::INFINITY, Some(format!("fold {v}: squared error is {m}"))),
            Err(e) => return (f64::INFINITY, Some(format!("fold {v}: {e}"))),
        }
    }
    (total / folds.len() as f64, None)
}

/// Mean over folds of the held-out mean squared error, in raw output units.
pub fn cv_score(
    data: &Dataset,
    basis: RegressionBasis,
    spec: &PenaltySpec,
    opts: &FitOptions,
    k: usize,
    seed: u64,
) -> Result<f64> {
    let folds = kfold_partition(data.n(), k, seed)?;
    check_fold_sizes(data, basis, &folds)?;
    let (score, diagnostic) = score_folds(data, basis, spec, opts, &folds);
    if let Some(d) = diagnostic {
        log::warn!("cv_score for {spec:?}: {d}");
    }
    Ok(score)
}

/// Scores every candidate penalty of `kind` on shared folds and selects the
/// lowest CV error. Ties go to the smaller coefficient, then the smaller
/// `alpha`.
pub fn gscv(
    data: &Dataset,
    basis: RegressionBasis,
    kind: PenaltyKind,
    cfg: &GscvConfig,
    opts: &FitOptions,
) -> Result<GscvResult> {
    cfg.validate()?;
    let specs = cfg.candidates(kind)?;
    gscv_over(data, basis, &specs, cfg, opts)
}

/// [`gscv`] over an explicit candidate list.
pub fn gscv_over(
    data: &Dataset,
    basis: RegressionBasis,
    specs: &[PenaltySpec],
    cfg: &GscvConfig,
    opts: &FitOptions,
) -> Result<GscvResult> {
    if specs.is_empty() {
        return Err(TrkError::InvalidArgument("no candidates to score".into()));
    }
    let folds = kfold_partition(data.n(), cfg.k, cfg.seed)?;
    check_fold_sizes(data, basis, &folds)?;

    let candidates: Vec<Candidate> = specs
        .par_iter()
        .map(|spec| {
            let (score, diagnostic) = score_folds(data, basis, spec, opts, &folds);
            Candidate { spec: *spec, score, diagnostic }
        })
        .collect();

    let best_score = candidates.iter().map(|c| c.score).fold(f64::INFINITY, f64::min);
    if !best_score.is_finite() {
        return Err(TrkError::TuningFailed);
    }
    let tied: Vec<&Candidate> = candidates.iter().filter(|c| c.score == best_score).collect();
    let best = tied
        .iter()
        .min_by(|a, b| {
            a.spec
                .coefficient()
                .total_cmp(&b.spec.coefficient())
                .then(a.spec.alpha.total_cmp(&b.spec.alpha))
        })
        .expect("at least one finite score")
        .spec;
    Ok(GscvResult { ties_broken: tied.len() > 1, candidates, best, best_score })
}
