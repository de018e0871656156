use nalgebra::DVector;
use trk_core::benchmarks::{forrester, Benchmark};
use trk_core::model::{Dataset, RegressionBasis};
use trk_core::objective::{PenaltyKind, PenaltySpec};
use trk_core::optimizer::{fit_trk, FitOptions};
use trk_core::runner::{emit_report, load_model, run_experiment, save_model, sensitivity_sweep, ExperimentConfig, SweepRequest};
use trk_core::sampling::lhs;

fn forrester_data(n: usize, seed: u64) -> Dataset {
    let x = lhs(n, 1, seed);
    let y: Vec<f64> = x.iter().map(|v| forrester(*v)).collect();
    Dataset::new(x, DVector::from_vec(y)).unwrap()
}

#[test]
fn saved_model_predicts_identically() {
    let data = forrester_data(10, 3);
    let fit = fit_trk(&data, RegressionBasis::Linear, &PenaltySpec::ridge(1.0), &FitOptions::default()).unwrap();
    let text = save_model(&fit.model).unwrap();
    let back = load_model(&text).unwrap();
    assert_eq!(back.theta().values(), fit.model.theta().values());
    for i in 0..50 {
        let x = [i as f64 / 49.0];
        assert_eq!(back.predict(&x).unwrap().to_bits(), fit.model.predict(&x).unwrap().to_bits());
        assert_eq!(back.predict_mse(&x).unwrap().to_bits(), fit.model.predict_mse(&x).unwrap().to_bits());
    }
    assert_eq!(save_model(&back).unwrap(), text);
}

#[test]
fn tampered_documents_are_rejected() {
    let data = forrester_data(8, 1);
    let fit = fit_trk(&data, RegressionBasis::Constant, &PenaltySpec::none(), &FitOptions::default()).unwrap();
    let text = save_model(&fit.model).unwrap();
    assert!(load_model(&text.replacen("\"version\": 1", "\"version\": 99", 1)).is_err());
    assert!(load_model(&text.replacen("trk-model", "other", 1)).is_err());
    assert!(load_model("{}").is_err());
}

#[test]
fn duplicate_roster_entries_give_identical_columns() {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
benchmark = "sphere"
n_train = 15
n_test = 200
repetitions = 3
seed = 4

[[models]]
name = "A"

[[models]]
name = "B"
"#,
    )
    .unwrap();
    let report = run_experiment(&cfg).unwrap();
    let per = |m: &str| report.rows.iter().filter(|r| r.model == m).map(|r| r.result.clone().unwrap()).collect::<Vec<_>>();
    let (a, b) = (per("A"), per("B"));
    assert_eq!(a.len(), 3);
    for ((ma, ta), (mb, tb)) in a.iter().zip(&b) {
        assert_eq!(ma.rmse.to_bits(), mb.rmse.to_bits());
        assert_eq!(ma.mae.to_bits(), mb.mae.to_bits());
        assert_eq!(ta, tb);
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
benchmark = "forrester"
n_train = 8
n_test = 100
repetitions = 4
seed = 11

[[models]]
name = "UK"

[[models]]
name = "lasso"
penalty = "lasso"
tune = true
"#,
    )
    .unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        emit_report(&run_experiment(&cfg).unwrap(), d.path()).unwrap();
    }
    for file in ["repetitions.csv", "aggregate.csv"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file}");
    }
    assert!(dirs[0].path().join("timings.csv").exists());
}

#[test]
fn ridge_sweep_is_finite_everywhere() {
    let coefficients: Vec<f64> = (0..13).map(|i| 10f64.powf(-4.0 + 0.5 * i as f64)).collect();
    let req = SweepRequest {
        benchmark: Benchmark::Forrester,
        n_train: 8,
        n_test: 500,
        seed: 5,
        basis: RegressionBasis::Linear,
        kind: PenaltyKind::Ridge,
        coefficients: coefficients.clone(),
        alphas: vec![0.5],
        fit: FitOptions::default(),
    };
    let rows = sensitivity_sweep(&req).unwrap();
    assert_eq!(rows.len(), coefficients.len());
    for (row, c) in rows.iter().zip(&coefficients) {
        assert_eq!(row.coefficient, *c);
        assert!(row.rmse.is_some_and(f64::is_finite) && row.mae.is_some_and(f64::is_finite));
        assert!(row.theta.as_ref().unwrap().iter().all(|t| t.is_finite() && *t > 0.0));
    }
}

#[test]
fn box_optimizer_in_roster() {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
benchmark = "sphere"
n_train = 20
n_test = 100
repetitions = 2

[[models]]
name = "UK"
optimizer = "box"
"#,
    )
    .unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert!(report.rows.iter().all(|r| r.result.is_ok()));
    assert!(ExperimentConfig::from_toml_str("benchmark = \"sphere\"\nn_train = 5\n[[models]]\nname = \"x\"\noptimizer = \"newton\"\n").is_err());
}
