use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::Result;

use super::experiment::ExperimentReport;

fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Writes `repetitions.csv` and `aggregate.csv` into `dir`, plus wall-clock
/// times in `timings.csv`. The first two files depend only on the
/// configuration.
pub fn emit_report(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("repetitions.csv"))?));
    w.write_record(["benchmark", "model", "repetition", "seed", "status", "coefficient", "alpha", "r2", "rmse", "mae", "theta", "error"])?;
    for row in &report.rows {
        let mut rec = vec![
            report.benchmark.clone(),
            row.model.clone(),
            row.repetition.to_string(),
            row.seed.to_string(),
        ];
        match &row.result {
            Ok((m, theta)) => {
                let theta: Vec<String> = theta.iter().map(|t| t.to_string()).collect();
                rec.extend([
                    "ok".into(),
                    row.coefficient.to_string(),
                    row.alpha.to_string(),
                    m.r2.map_or_else(String::new, |v| v.to_string()),
                    m.rmse.to_string(),
                    m.mae.to_string(),
                    theta.join(";"),
                    String::new(),
                ]);
            }
            Err(e) => rec.extend([
                "failed".into(),
                row.coefficient.to_string(),
                row.alpha.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.clone(),
            ]),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("aggregate.csv"))?));
    w.write_record(["model", "metric", "mean", "std", "is_best", "is_second", "n_ok", "n_failed"])?;
    for a in &report.aggregates {
        w.write_record([
            a.model.clone(),
            a.metric.to_string(),
            fmt(a.mean),
            fmt(a.std),
            a.is_best.to_string(),
            a.is_second.to_string(),
            a.n_ok.to_string(),
            a.n_failed.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("timings.csv"))?));
    w.write_record(["model", "repetition", "seconds"])?;
    for row in &report.rows {
        w.write_record([row.model.clone(), row.repetition.to_string(), row.seconds.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
