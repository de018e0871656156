use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrkError};
use crate::model::{AffineTransform, FittedModel, RegressionBasis, Theta, TrainingData};

pub const MODEL_FORMAT: &str = "trk-model";
pub const MODEL_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Matrix {
    rows: usize,
    cols: usize,
    /// Row-major entries.
    data: Vec<f64>,
}

impl Matrix {
    fn from(m: &DMatrix<f64>) -> Self {
        Self { rows: m.nrows(), cols: m.ncols(), data: m.transpose().as_slice().to_vec() }
    }

    fn into_dmatrix(self, what: &str) -> Result<DMatrix<f64>> {
        if self.rows.checked_mul(self.cols) != Some(self.data.len()) {
            return Err(TrkError::Deserialization(format!("{what}: {}x{} matrix with {} entries", self.rows, self.cols, self.data.len())));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    version: u64,
    basis: RegressionBasis,
    theta: Vec<f64>,
    theta_bounds: (f64, f64),
    beta: Vec<f64>,
    sigma2: f64,
    nugget: f64,
    corr_factor: Matrix,
    gamma_star: Vec<f64>,
    regression_factor: Matrix,
    training_points: Matrix,
    training_responses: Vec<f64>,
    input_transform: AffineTransform,
    output_transform: AffineTransform,
}

/// Serializes a model to a self-describing JSON document.
pub fn save_model(model: &FittedModel) -> Result<String> {
    let t = model.training();
    let doc = Document {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        basis: model.basis(),
        theta: model.theta().values().to_vec(),
        theta_bounds: model.theta().bounds(),
        beta: model.beta().as_slice().to_vec(),
        sigma2: model.sigma2(),
        nugget: model.nugget(),
        corr_factor: Matrix::from(model.corr_factor()),
        gamma_star: model.gamma_star().as_slice().to_vec(),
        regression_factor: Matrix::from(model.regression_factor()),
        training_points: Matrix::from(&t.points),
        training_responses: t.responses.as_slice().to_vec(),
        input_transform: t.input_transform.clone(),
        output_transform: t.output_transform.clone(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| TrkError::Deserialization(e.to_string()))
}

/// Parses a document written by [`save_model`].
pub fn load_model(text: &str) -> Result<FittedModel> {
    let de = |e: serde_json::Error| TrkError::Deserialization(e.to_string());
    let value: serde_json::Value = serde_json::from_str(text).map_err(de)?;
    if value.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
        return Err(TrkError::Deserialization(format!("not a {MODEL_FORMAT} document")));
    }
    let version = value.get("version").and_then(|v| v.as_u64());
    if version != Some(MODEL_VERSION) {
        return Err(TrkError::VersionMismatch { found: version.unwrap_or(0), expected: MODEL_VERSION });
    }
    let doc: Document = serde_json::from_value(value).map_err(de)?;
    let theta = Theta::new(doc.theta, doc.theta_bounds).map_err(|e| TrkError::Deserialization(e.to_string()))?;
    FittedModel::from_parts(
        theta,
        DVector::from_vec(doc.beta),
        doc.sigma2,
        doc.corr_factor.into_dmatrix("corr_factor")?,
        DVector::from_vec(doc.gamma_star),
        doc.basis,
        doc.nugget,
        doc.regression_factor.into_dmatrix("regression_factor")?,
        TrainingData {
            points: doc.training_points.into_dmatrix("training_points")?,
            responses: DVector::from_vec(doc.training_responses),
            input_transform: doc.input_transform,
            output_transform: doc.output_transform,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::forrester;
    use crate::model::Dataset;
    use crate::optimizer::{fit_uk, FitOptions};

    fn model() -> FittedModel {
        let x = crate::sampling::lhs(10, 1, 7);
        let y = DVector::from_iterator(10, x.iter().map(|v| forrester(*v)));
        fit_uk(&Dataset::new(x, y).unwrap(), RegressionBasis::Linear, &FitOptions::default()).unwrap().model
    }

    #[test]
    fn round_trip_predicts_bitwise() {
        let m = model();
        let back = load_model(&save_model(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        for i in 0..100 {
            let x = [i as f64 / 99.0];
            assert_eq!(m.predict(&x).unwrap().to_bits(), back.predict(&x).unwrap().to_bits());
        }
    }

    #[test]
    fn corrupt_documents_are_rejected() {
        let text = save_model(&model()).unwrap();
        assert!(matches!(load_model(&text[..text.len() / 2]), Err(TrkError::Deserialization(_))));
        let v2 = text.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(load_model(&v2), Err(TrkError::VersionMismatch { found: 2, expected: 1 })));
        let other = text.replacen("trk-model", "other", 1);
        assert!(matches!(load_model(&other), Err(TrkError::Deserialization(_))));
        let short = text.replacen("\"sigma2\"", "\"sigma_2\"", 1);
        assert!(load_model(&short).is_err());
    }
}
