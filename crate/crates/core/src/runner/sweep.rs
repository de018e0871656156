use nalgebra::DVector;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::benchmarks::{metrics, Benchmark};
use crate::error::{Result, TrkError};
use crate::model::{Dataset, RegressionBasis};
use crate::objective::{PenaltyKind, PenaltySpec};
use crate::optimizer::{fit_trk, FitOptions};

use super::experiment::split_design;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub benchmark: Benchmark,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub basis: RegressionBasis,
    pub kind: PenaltyKind,
    pub coefficients: Vec<f64>,
    /// Elastic-net mixing values; ignored for other kinds.
    pub alphas: Vec<f64>,
    pub fit: FitOptions,
}

/// One grid cell. Metrics are `None` when the fit failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coefficient: f64,
    pub alpha: Option<f64>,
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
    pub theta: Option<Vec<f64>>,
}

impl SweepRow {
    pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["coefficient", "alpha", "rmse", "mae", "theta"])?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        for r in rows {
            let theta = r
                .theta
                .as_ref()
                .map_or_else(String::new, |t| t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"));
            w.write_record([r.coefficient.to_string(), opt(r.alpha), opt(r.rmse), opt(r.mae), theta])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fits one model per grid cell on a single shared design and reports test
/// errors.
pub fn sensitivity_sweep(req: &SweepRequest) -> Result<Vec<SweepRow>> {
    if req.coefficients.is_empty() {
        return Err(TrkError::InvalidArgument("the coefficient list is empty".into()));
    }
    let bench = req.benchmark;
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let (train_seed, test_seed) = (rng.next_u64(), rng.next_u64());
    let (train_x, test_x) = if bench.is_simulator() {
        split_design(&bench.sample_inputs(req.n_train + req.n_test, train_seed)?, req.n_train, test_seed)
    } else {
        (bench.sample_inputs(req.n_train, train_seed)?, bench.sample_inputs(req.n_test, test_seed)?)
    };
    let eval = |x: &nalgebra::DMatrix<f64>| -> Result<Vec<f64>> {
        (0..x.nrows()).map(|i| bench.eval(&x.row(i).iter().copied().collect::<Vec<_>>())).collect()
    };
    let test_y = eval(&test_x)?;
    let train_y = DVector::from_vec(eval(&train_x)?);
    let data = Dataset::with_bounds(train_x, train_y, bench.bounds())?;

    let cells: Vec<(f64, Option<f64>)> = match req.kind {
        PenaltyKind::ElasticNet => {
            if req.alphas.is_empty() {
                return Err(TrkError::InvalidArgument("elastic-net sweeps need at least one alpha".into()));
            }
            req.coefficients.iter().flat_map(|c| req.alphas.iter().map(move |a| (*c, Some(*a)))).collect()
        }
        _ => req.coefficients.iter().map(|c| (*c, None)).collect(),
    };
    for (c, a) in &cells {
        PenaltySpec::from_kind(req.kind, *c, a.unwrap_or(0.0)).validate()?;
    }

    Ok(cells
        .par_iter()
        .map(|(c, a)| {
            let spec = PenaltySpec::from_kind(req.kind, *c, a.unwrap_or(0.0));
            let outcome = fit_trk(&data, req.basis, &spec, &req.fit).and_then(|fit| {
                let pred = fit.model.predict_many(&test_x)?;
                Ok((metrics(&test_y, &pred)?, fit.model.theta().values().to_vec()))
            });
            match outcome {
                Ok((m, theta)) => SweepRow { coefficient: *c, alpha: *a, rmse: Some(m.rmse), mae: Some(m.mae), theta: Some(theta) },
                Err(e) => {
                    log::warn!("sweep cell ({c}, {a:?}) failed: {e}");
                    SweepRow { coefficient: *c, alpha: *a, rmse: None, mae: None, theta: None }
                }
            }
        })
        .collect())
}
