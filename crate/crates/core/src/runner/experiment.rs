use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::benchmarks::{metrics, Benchmark, MetricsReport};
use crate::error::Result;
use crate::model::Dataset;
use crate::tuner::{gscv, GscvConfig};

use super::config::{ExperimentConfig, ModelEntry};

/// Outcome of one model on one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionRow {
    pub model: String,
    pub repetition: usize,
    pub seed: u64,
    pub coefficient: f64,
    pub alpha: f64,
    pub result: std::result::Result<(MetricsReport, Vec<f64>), String>,
    pub seconds: f64,
}

/// Mean and sample standard deviation of one metric for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub model: String,
    pub metric: &'static str,
    pub mean: f64,
    pub std: f64,
    pub is_best: bool,
    pub is_second: bool,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub benchmark: String,
    pub rows: Vec<RepetitionRow>,
    pub aggregates: Vec<AggregateRow>,
}

pub(crate) const METRICS: [&str; 3] = ["r2", "rmse", "mae"];

fn metric_value(m: &MetricsReport, name: &str) -> Option<f64> {
    match name {
        "r2" => m.r2,
        "rmse" => Some(m.rmse),
        _ => Some(m.mae),
    }
}

/// Draws `n_train + n_test` inputs in one design and splits them with a
/// seeded shuffle; the first `n_train` shuffled indices train.
pub fn split_design(points: &DMatrix<f64>, n_train: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut idx: Vec<usize> = (0..points.nrows()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |rows: &[usize]| DMatrix::from_fn(rows.len(), points.ncols(), |r, c| points[(rows[r], c)]);
    (pick(&idx[..n_train]), pick(&idx[n_train..]))
}

fn evaluate(bench: Benchmark, points: &DMatrix<f64>) -> Result<DVector<f64>> {
    let values = (0..points.nrows())
        .map(|i| bench.eval(&points.row(i).iter().copied().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

struct Design {
    train: Dataset,
    test_points: DMatrix<f64>,
    test_y: DVector<f64>,
    fold_seed: u64,
    seed: u64,
}

fn make_design(cfg: &ExperimentConfig, bench: Benchmark, seed: u64) -> Result<Design> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train_seed, test_seed, fold_seed) = (rng.next_u64(), rng.next_u64(), rng.next_u64());
    let n_test = cfg.n_test()?;
    let (train_x, test_x) = if bench.is_simulator() {
        let pool = bench.sample_inputs(cfg.n_train + n_test, train_seed)?;
        split_design(&pool, cfg.n_train, test_seed)
    } else {
        (bench.sample_inputs(cfg.n_train, train_seed)?, bench.sample_inputs(n_test, test_seed)?)
    };
    let train_y = evaluate(bench, &train_x)?;
    let test_y = evaluate(bench, &test_x)?;
    let train = Dataset::with_bounds(train_x, train_y, bench.bounds())?;
    Ok(Design { train, test_points: test_x, test_y, fold_seed, seed })
}

fn run_model(cfg: &ExperimentConfig, design: &Design, entry: &ModelEntry) -> (std::result::Result<(MetricsReport, Vec<f64>), String>, f64, f64) {
    let mut spec = entry.spec();
    let outcome = (|| -> Result<(MetricsReport, Vec<f64>)> {
        if entry.tune {
            let gcfg = GscvConfig { seed: design.fold_seed, ..cfg.gscv.clone() };
            spec = gscv(&design.train, entry.basis, entry.penalty, &gcfg, &cfg.fit)?.best;
        }
        let fit = entry.optimizer.fit(&design.train, entry.basis, &spec, &cfg.fit)?;
        let pred = fit.model.predict_many(&design.test_points)?;
        Ok((metrics(design.test_y.as_slice(), &pred)?, fit.model.theta().values().to_vec()))
    })();
    (outcome.map_err(|e| e.to_string()), spec.coefficient(), spec.alpha)
}

/// Runs every roster entry on every repetition. Within a repetition all
/// models share the same training and test arrays.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let bench = cfg.benchmark()?;
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.repetitions).map(|_| master.next_u64()).collect();

    let per_rep: Vec<Vec<RepetitionRow>> = seeds
        .par_iter()
        .enumerate()
        .map(|(rep, seed)| -> Result<Vec<RepetitionRow>> {
            let design = make_design(cfg, bench, *seed)?;
            Ok(cfg
                .models
                .iter()
                .map(|entry| {
                    let start = Instant::now();
                    let (result, coefficient, alpha) = run_model(cfg, &design, entry);
                    if let Err(e) = &result {
                        log::warn!("{} repetition {rep}: {e}", entry.name);
                    }
                    RepetitionRow {
                        model: entry.name.clone(),
                        repetition: rep,
                        seed: design.seed,
                        coefficient,
                        alpha,
                        result,
                        seconds: start.elapsed().as_secs_f64(),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let rows: Vec<RepetitionRow> = per_rep.into_iter().flatten().collect();
    let names: Vec<String> = cfg.models.iter().map(|m| m.name.clone()).collect();
    let aggregates = aggregate(&names, &rows);
    Ok(ExperimentReport { benchmark: bench.name().to_string(), rows, aggregates })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Aggregates per (model, metric) in roster order and marks the best and
/// second-best models per metric.
pub(crate) fn aggregate(models: &[String], rows: &[RepetitionRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for metric in METRICS {
        let mut block: Vec<AggregateRow> = models
            .iter()
            .map(|model| {
                let mine: Vec<&RepetitionRow> = rows.iter().filter(|r| &r.model == model).collect();
                let values: Vec<f64> = mine
                    .iter()
                    .filter_map(|r| r.result.as_ref().ok().and_then(|(m, _)| metric_value(m, metric)))
                    .collect();
                let (mean, std) = mean_std(&values);
                AggregateRow {
                    model: model.clone(),
                    metric,
                    mean,
                    std,
                    is_best: false,
                    is_second: false,
                    n_ok: values.len(),
                    n_failed: mine.len() - values.len(),
                }
            })
            .collect();
        mark_ranks(&mut block);
        out.extend(block);
    }
    out
}

fn mark_ranks(block: &mut [AggregateRow]) {
    let sign = if block.first().is_some_and(|r| r.metric == "r2") { -1.0 } else { 1.0 };
    let key = |r: &AggregateRow| (sign * r.mean, r.std);
    let mut keys: Vec<(f64, f64)> = block.iter().filter(|r| r.n_ok > 0).map(key).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    for r in block.iter_mut().filter(|r| r.n_ok > 0) {
        let k = key(r);
        r.is_best = keys.first() == Some(&k);
        r.is_second = keys.get(1) == Some(&k);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: &str, rep: usize, rmse: f64) -> RepetitionRow {
        RepetitionRow {
            model: model.into(),
            repetition: rep,
            seed: 0,
            coefficient: 0.0,
            alpha: 0.0,
            result: Ok((MetricsReport { r2: Some(1.0 - rmse), rmse, mae: rmse / 2.0 }, vec![1.0])),
            seconds: 0.0,
        }
    }

    fn find<'a>(agg: &'a [AggregateRow], model: &str, metric: &str) -> &'a AggregateRow {
        agg.iter().find(|r| r.model == model && r.metric == metric).unwrap()
    }

    #[test]
    fn single_model_is_best_everywhere() {
        let agg = aggregate(&["a".into()], &[row("a", 0, 0.5)]);
        assert_eq!(agg.len(), 3);
        assert!(agg.iter().all(|r| r.is_best && !r.is_second && r.std == 0.0));
    }

    #[test]
    fn sample_std_and_ranking() {
        let rows = vec![row("a", 0, 1.0), row("a", 1, 3.0), row("b", 0, 0.5), row("b", 1, 0.7), row("c", 0, 5.0), row("c", 1, 5.0)];
        let agg = aggregate(&["a".into(), "b".into(), "c".into()], &rows);
        let a = find(&agg, "a", "rmse");
        assert_eq!(a.mean, 2.0);
        assert!((a.std - 2f64.sqrt()).abs() < 1e-15);
        assert!(find(&agg, "b", "rmse").is_best);
        assert!(a.is_second);
        assert!(find(&agg, "b", "r2").is_best);
        assert!(!find(&agg, "c", "r2").is_best && !find(&agg, "c", "r2").is_second);
    }

    #[test]
    fn equal_means_fall_back_to_std() {
        let rows = vec![row("a", 0, 1.0), row("a", 1, 3.0), row("b", 0, 1.5), row("b", 1, 2.5), row("c", 0, 2.5), row("c", 1, 1.5)];
        let agg = aggregate(&["a".into(), "b".into(), "c".into()], &rows);
        assert!(find(&agg, "b", "rmse").is_best && find(&agg, "c", "rmse").is_best);
        assert!(find(&agg, "a", "rmse").is_second);
    }

    #[test]
    fn failures_are_counted_not_averaged() {
        let mut failed = row("a", 1, 0.0);
        failed.result = Err("boom".into());
        let agg = aggregate(&["a".into()], &[row("a", 0, 0.4), failed]);
        let r = find(&agg, "a", "rmse");
        assert_eq!((r.n_ok, r.n_failed, r.mean), (1, 1, 0.4));
    }

    #[test]
    fn split_is_a_partition() {
        let pts = DMatrix::from_fn(8, 2, |r, c| (r * 2 + c) as f64);
        let (a, b) = split_design(&pts, 6, 3);
        assert_eq!((a.nrows(), b.nrows()), (6, 2));
        let mut firsts: Vec<f64> = a.column(0).iter().chain(b.column(0).iter()).copied().collect();
        firsts.sort_by(f64::total_cmp);
        assert_eq!(firsts, (0..8).map(|r| (r * 2) as f64).collect::<Vec<_>>());
        assert_eq!(split_design(&pts, 6, 3), (a, b));
    }
}
