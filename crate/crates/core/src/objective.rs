//! Penalized concentrated-likelihood objective and likelihood diagnostics.
//!
//! All quantities live in the dataset's normalized space. The gradient and
//! Hessian are those of the *profiled* log-likelihood, i.e. with `beta` and
//! `sigma^2` replaced by their GLS estimates at every `theta`.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrkError};
use crate::model::{correlation_matrix, design_matrix, factor_correlation, Dataset, Gls, RegressionBasis, Theta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    None,
    Lasso,
    Ridge,
    ElasticNet,
}

impl PenaltyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Lasso => "lasso",
            Self::Ridge => "ridge",
            Self::ElasticNet => "elastic_net",
        }
    }
}

impl std::str::FromStr for PenaltyKind {
    type Err = TrkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "none" | "uk" => Ok(Self::None),
            "lasso" | "l1" => Ok(Self::Lasso),
            "ridge" | "l2" => Ok(Self::Ridge),
            "elastic_net" | "elasticnet" | "enet" => Ok(Self::ElasticNet),
            other => Err(TrkError::InvalidArgument(format!("unknown penalty `{other}`"))),
        }
    }
}

impl std::fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A penalty on `theta` and its coefficients. Only the coefficients of the
/// active kind are used; the others stay at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub alpha: f64,
}

impl Default for PenaltySpec {
    fn default() -> Self {
        Self::none()
    }
}

impl PenaltySpec {
    pub fn none() -> Self {
        Self { kind: PenaltyKind::None, lambda: 0.0, mu: 0.0, gamma: 0.0, alpha: 0.0 }
    }

    pub fn lasso(lambda: f64) -> Self {
        Self { kind: PenaltyKind::Lasso, lambda, ..Self::none() }
    }

    pub fn ridge(mu: f64) -> Self {
        Self { kind: PenaltyKind::Ridge, mu, ..Self::none() }
    }

    pub fn elastic_net(gamma: f64, alpha: f64) -> Self {
        Self { kind: PenaltyKind::ElasticNet, gamma, alpha, ..Self::none() }
    }

    /// Builds a spec of `kind` with `coefficient` (and `alpha` for elastic-net).
    pub fn from_kind(kind: PenaltyKind, coefficient: f64, alpha: f64) -> Self {
        match kind {
            PenaltyKind::None => Self::none(),
            PenaltyKind::Lasso => Self::lasso(coefficient),
            PenaltyKind::Ridge => Self::ridge(coefficient),
            PenaltyKind::ElasticNet => Self::elastic_net(coefficient, alpha),
        }
    }

    /// The coefficient of the active kind (0 for `none`).
    pub fn coefficient(&self) -> f64 {
        match self.kind {
            PenaltyKind::None => 0.0,
            PenaltyKind::Lasso => self.lambda,
            PenaltyKind::Ridge => self.mu,
            PenaltyKind::ElasticNet => self.gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let coefficients = [self.lambda, self.mu, self.gamma];
        if coefficients.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(TrkError::InvalidArgument(format!(
                "penalty coefficients must be finite and nonnegative: {self:?}"
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(TrkError::InvalidArgument(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Penalty term added to the concentrated objective. `theta > 0`, so
/// `|theta| = theta`.
pub fn penalty(spec: &PenaltySpec, theta: &Theta) -> f64 {
    let t = theta.values();
    match spec.kind {
        PenaltyKind::None => 0.0,
        PenaltyKind::Lasso => spec.lambda * t.iter().map(|v| v.abs()).sum::<f64>(),
        PenaltyKind::Ridge => spec.mu * t.iter().map(|v| v * v).sum::<f64>(),
        PenaltyKind::ElasticNet => {
            spec.gamma * t.iter().map(|v| spec.alpha * v.abs() + (1.0 - spec.alpha) * v * v).sum::<f64>()
        }
    }
}

pub(crate) fn objective_normalized(
    points: &DMatrix<f64>,
    y: &DVector<f64>,
    basis: RegressionBasis,
    theta: &Theta,
    spec: &PenaltySpec,
) -> Result<(f64, Gls)> {
    let gls = Gls::compute(points, y, basis, theta)?;
    Ok((gls.concentrated_objective() + penalty(spec, theta), gls))
}

/// `sigma^2 |R|^(1/n) + penalty(theta)` with `sigma^2` profiled at `theta`.
pub fn trk_objective(data: &Dataset, basis: RegressionBasis, theta: &Theta, spec: &PenaltySpec) -> Result<f64> {
    check_dim(data, theta)?;
    objective_normalized(data.normalized_points(), data.normalized_responses(), basis, theta, spec).map(|(v, _)| v)
}

fn check_dim(data: &Dataset, theta: &Theta) -> Result<()> {
    if theta.dim() != data.dim() {
        return Err(TrkError::DimensionMismatch { expected: data.dim(), actual: theta.dim() });
    }
    Ok(())
}

/// Gaussian log-likelihood of normalized responses for arbitrary `beta` and
/// `sigma2`. The correlation matrix carries the same nugget the fit would use.
pub fn log_likelihood_normalized(
    points: &DMatrix<f64>,
    y: &DVector<f64>,
    basis: RegressionBasis,
    theta: &Theta,
    beta: &DVector<f64>,
    sigma2: f64,
) -> Result<f64> {
    let (n, d) = points.shape();
    if !(sigma2 > 0.0) {
        return Err(TrkError::InvalidArgument(format!("sigma2 must be positive, got {sigma2}")));
    }
    if y.len() != n {
        return Err(TrkError::DimensionMismatch { expected: n, actual: y.len() });
    }
    if beta.len() != basis.terms(d) {
        return Err(TrkError::DimensionMismatch { expected: basis.terms(d), actual: beta.len() });
    }
    let r = correlation_matrix(theta, points)?;
    let (l, _) = factor_correlation(&r)?;
    let e = y - design_matrix(basis, points) * beta;
    let z = l.solve_lower_triangular(&e).expect("Cholesky factor has a positive diagonal");
    let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let nf = n as f64;
    Ok(-0.5 * nf * (2.0 * std::f64::consts::PI).ln() - 0.5 * nf * sigma2.ln() - 0.5 * log_det
        - z.norm_squared() / (2.0 * sigma2))
}

/// Log-likelihood of the dataset's normalized responses.
pub fn log_likelihood(
    data: &Dataset,
    basis: RegressionBasis,
    theta: &Theta,
    beta: &DVector<f64>,
    sigma2: f64,
) -> Result<f64> {
    check_dim(data, theta)?;
    log_likelihood_normalized(data.normalized_points(), data.normalized_responses(), basis, theta, beta, sigma2)
}

/// Log-likelihood at the GLS estimates `(beta_hat, sigma2_hat)` for `theta`.
pub fn profiled_log_likelihood(data: &Dataset, basis: RegressionBasis, theta: &Theta) -> Result<f64> {
    check_dim(data, theta)?;
    let gls = Gls::compute(data.normalized_points(), data.normalized_responses(), basis, theta)?;
    log_likelihood(data, basis, theta, &gls.beta, gls.sigma2)
}

/// Shared pieces of the derivative computations.
struct Derivatives {
    gls: Gls,
    r: DMatrix<f64>,
    /// `dR/dtheta_k`
    dr: Vec<DMatrix<f64>>,
    /// `R^-1 dR/dtheta_k`
    w: Vec<DMatrix<f64>>,
    /// `gamma^T dR/dtheta_k gamma`
    quad: Vec<f64>,
}

impl Derivatives {
    fn new(data: &Dataset, basis: RegressionBasis, theta: &Theta) -> Result<Self> {
        check_dim(data, theta)?;
        let x = data.normalized_points();
        let gls = Gls::compute(x, data.normalized_responses(), basis, theta)?;
        let r = correlation_matrix(theta, x)?;
        let n = x.nrows();
        let dr: Vec<DMatrix<f64>> = (0..data.dim())
            .map(|k| DMatrix::from_fn(n, n, |i, j| -(x[(i, k)] - x[(j, k)]).powi(2) * r[(i, j)]))
            .collect();
        let w = dr.iter().map(|m| gls.solve(m)).collect();
        let quad = dr.iter().map(|m| gls.gamma.dot(&(m * &gls.gamma))).collect();
        Ok(Self { gls, r, dr, w, quad })
    }

    fn gradient(&self) -> DVector<f64> {
        let s2 = self.gls.sigma2;
        DVector::from_iterator(
            self.dr.len(),
            (0..self.dr.len()).map(|k| 0.5 * self.quad[k] / s2 - 0.5 * self.w[k].trace()),
        )
    }
}

fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    // tr(AB) = sum_ij A_ij B_ji
    a.component_mul(&b.transpose()).sum()
}

/// Gradient of the profiled log-likelihood with respect to `theta`:
/// `1/2 tr(R^-1 (e e^T / sigma^2 - R) R^-1 dR/dtheta_k)`.
pub fn likelihood_gradient(data: &Dataset, basis: RegressionBasis, theta: &Theta) -> Result<DVector<f64>> {
    Ok(Derivatives::new(data, basis, theta)?.gradient())
}

/// Hessian of the profiled log-likelihood with respect to `theta`.
///
/// With `gamma = R^-1 e`, `a_k = gamma^T dR_k gamma` and the GLS projector
/// `P = R^-1 - R^-1 F (F^T R^-1 F)^-1 F^T R^-1`:
///
/// `H_ij = -gamma^T dR_i P dR_j gamma / s2 + gamma^T dR_ij gamma / (2 s2)
///        + a_i a_j / (2 n s2^2) - tr(R^-1 dR_ij) / 2 + tr(R^-1 dR_i R^-1 dR_j) / 2`
///
/// where `dR_ij` has entries `(dx_i)^2 (dx_j)^2 R`.
pub fn likelihood_hessian(data: &Dataset, basis: RegressionBasis, theta: &Theta) -> Result<DMatrix<f64>> {
    let dv = Derivatives::new(data, basis, theta)?;
    let x = data.normalized_points();
    let (n, d) = x.shape();
    let s2 = dv.gls.sigma2;
    let gamma = &dv.gls.gamma;

    // P dR_j gamma
    let projected: Vec<DVector<f64>> = dv
        .dr
        .iter()
        .map(|m| {
            let q = m * gamma;
            let s = dv.gls.solve_vec(&q);
            let c = dv.gls.solve_regression(&(dv.gls.f.transpose() * &s));
            let correction = dv.gls.solve_vec(&(&dv.gls.f * c));
            s - correction
        })
        .collect();

    let mut h = DMatrix::zeros(d, d);
    for i in 0..d {
        let qi = &dv.dr[i] * gamma;
        for j in 0..=i {
            let d2 = DMatrix::from_fn(n, n, |a, b| {
                (x[(a, i)] - x[(b, i)]).powi(2) * (x[(a, j)] - x[(b, j)]).powi(2) * dv.r[(a, b)]
            });
            let value = -qi.dot(&projected[j]) / s2
                + gamma.dot(&(&d2 * gamma)) / (2.0 * s2)
                + dv.quad[i] * dv.quad[j] / (2.0 * n as f64 * s2 * s2)
                - 0.5 * dv.gls.solve(&d2).trace()
                + 0.5 * trace_of_product(&dv.w[i], &dv.w[j]);
            h[(i, j)] = value;
            h[(j, i)] = value;
        }
    }
    Ok(h)
}

/// Singular values of the likelihood Hessian, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianSpectrum {
    pub singular_values: Vec<f64>,
    /// `s_1 / s_D`; infinite when the smallest value is zero.
    pub condition_ratio: f64,
}

pub fn spectrum_of(h: &DMatrix<f64>) -> HessianSpectrum {
    let mut singular_values: Vec<f64> = SVD::new(h.clone(), false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let largest = singular_values[0];
    let smallest = *singular_values.last().expect("Hessian is at least 1x1");
    let condition_ratio = if smallest > 0.0 { largest / smallest } else { f64::INFINITY };
    HessianSpectrum { singular_values, condition_ratio }
}

pub fn hessian_spectrum(data: &Dataset, basis: RegressionBasis, theta: &Theta) -> Result<HessianSpectrum> {
    Ok(spectrum_of(&likelihood_hessian(data, basis, theta)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fit_given_theta;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn theta(v: &[f64]) -> Theta {
        Theta::with_values(v.to_vec()).unwrap()
    }

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
        let x = DMatrix::from_fn(n, d, |_, _| rng.random::<f64>());
        let y = DVector::from_fn(n, |i, _| {
            let row: f64 = (0..d).map(|k| (3.0 * x[(i, k)] + k as f64).sin()).sum();
            row + 0.3 * rng.random::<f64>()
        });
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn penalty_hand_values_and_reductions() {
        let t = theta(&[1.0, 2.0]);
        assert_eq!(penalty(&PenaltySpec::lasso(10.0), &t), 30.0);
        assert_eq!(penalty(&PenaltySpec::ridge(10.0), &t), 50.0);
        assert_eq!(penalty(&PenaltySpec::none(), &t), 0.0);
        assert_eq!(penalty(&PenaltySpec::elastic_net(10.0, 1.0), &t), penalty(&PenaltySpec::lasso(10.0), &t));
        assert_eq!(penalty(&PenaltySpec::elastic_net(10.0, 0.0), &t), penalty(&PenaltySpec::ridge(10.0), &t));
        assert_eq!(penalty(&PenaltySpec::elastic_net(10.0, 0.5), &t), 10.0 * (0.5 * 3.0 + 0.5 * 5.0));
    }

    #[test]
    fn penalty_spec_validation() {
        assert!(PenaltySpec::ridge(-1.0).validate().is_err());
        assert!(PenaltySpec::elastic_net(1.0, 1.5).validate().is_err());
        assert!(PenaltySpec::lasso(f64::NAN).validate().is_err());
        assert!(PenaltySpec::elastic_net(1.0, 0.3).validate().is_ok());
        assert_eq!("elastic-net".parse::<PenaltyKind>().unwrap(), PenaltyKind::ElasticNet);
    }

    proptest! {
        #[test]
        fn penalty_is_monotone_in_coefficients(
            t in proptest::collection::vec(0.01f64..100.0, 1..6),
            c1 in 0.0f64..1e4,
            dc in 0.0f64..1e4,
            alpha in 0.0f64..=1.0,
        ) {
            let th = Theta::with_values(t).unwrap();
            let c2 = c1 + dc;
            prop_assert!(penalty(&PenaltySpec::lasso(c1), &th) <= penalty(&PenaltySpec::lasso(c2), &th));
            prop_assert!(penalty(&PenaltySpec::ridge(c1), &th) <= penalty(&PenaltySpec::ridge(c2), &th));
            prop_assert!(
                penalty(&PenaltySpec::elastic_net(c1, alpha), &th)
                    <= penalty(&PenaltySpec::elastic_net(c2, alpha), &th)
            );
        }

        #[test]
        fn elastic_net_endpoints_reduce_exactly(
            t in proptest::collection::vec(0.01f64..100.0, 1..6),
            c in 0.0f64..1e5,
        ) {
            let th = Theta::with_values(t).unwrap();
            prop_assert_eq!(penalty(&PenaltySpec::elastic_net(c, 1.0), &th), penalty(&PenaltySpec::lasso(c), &th));
            prop_assert_eq!(penalty(&PenaltySpec::elastic_net(c, 0.0), &th), penalty(&PenaltySpec::ridge(c), &th));
        }
    }

    fn two_point() -> Dataset {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        Dataset::new(x, DVector::from_vec(vec![0.0, 1.0])).unwrap()
    }

    #[test]
    fn objective_matches_explicit_two_by_two() {
        let data = two_point();
        let t = theta(&[1.0]);
        let xn = data.normalized_points();
        let yn = data.normalized_responses();
        let c = (-(xn[(0, 0)] - xn[(1, 0)]).powi(2)).exp();
        let det = 1.0 - c * c;
        let rinv = [[1.0 / det, -c / det], [-c / det, 1.0 / det]];
        let sum_rinv: f64 = rinv.iter().flatten().sum();
        let beta = ((rinv[0][0] + rinv[1][0]) * yn[0] + (rinv[0][1] + rinv[1][1]) * yn[1]) / sum_rinv;
        let e = [yn[0] - beta, yn[1] - beta];
        let quad = e[0] * (rinv[0][0] * e[0] + rinv[0][1] * e[1]) + e[1] * (rinv[1][0] * e[0] + rinv[1][1] * e[1]);
        let sigma2 = quad / 2.0;
        let core = sigma2 * det.powf(0.5);

        let none = trk_objective(&data, RegressionBasis::Constant, &t, &PenaltySpec::none()).unwrap();
        assert_relative_eq!(none, core, max_relative = 1e-12);
        let lasso = trk_objective(&data, RegressionBasis::Constant, &t, &PenaltySpec::lasso(1.0)).unwrap();
        assert_relative_eq!(lasso, core + 1.0, max_relative = 1e-12);
        let ridge0 = trk_objective(&data, RegressionBasis::Constant, &t, &PenaltySpec::ridge(0.0)).unwrap();
        assert_eq!(ridge0, none);
    }

    #[test]
    fn profiled_likelihood_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_dataset(&mut rng, 8, 2);
        let t = theta(&[0.8, 2.0]);
        let model = fit_given_theta(&data, RegressionBasis::Linear, &t).unwrap();
        let ll = log_likelihood(&data, RegressionBasis::Linear, &t, model.beta(), model.sigma2()).unwrap();
        let n = data.n() as f64;
        let log_det = 2.0 * model.corr_factor().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let closed = -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + 1.0) - 0.5 * n * model.sigma2().ln() - 0.5 * log_det;
        assert_relative_eq!(ll, closed, max_relative = 1e-12);
    }

    #[test]
    fn doubling_responses_shifts_profiled_likelihood() {
        // Works on normalized arrays directly: doubling a raw y would be
        // undone by output normalization.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = random_dataset(&mut rng, 7, 1);
        let x = data.normalized_points();
        let y = data.normalized_responses();
        let t = theta(&[1.5]);
        let profiled = |y: &DVector<f64>| {
            let gls = Gls::compute(x, y, RegressionBasis::Constant, &t).unwrap();
            log_likelihood_normalized(x, y, RegressionBasis::Constant, &t, &gls.beta, gls.sigma2).unwrap()
        };
        let shift = profiled(&(y * 2.0)) - profiled(y);
        assert_relative_eq!(shift, -(data.n() as f64) * 2f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn single_point_likelihood_is_the_constant() {
        let x = DMatrix::from_row_slice(1, 1, &[0.3]);
        let y = DVector::from_vec(vec![4.0]);
        let ll = log_likelihood_normalized(&x, &y, RegressionBasis::Constant, &theta(&[1.0]), &DVector::from_vec(vec![4.0]), 1.0)
            .unwrap();
        assert_relative_eq!(ll, -0.5 * (2.0 * std::f64::consts::PI).ln(), max_relative = 1e-15);
    }

    fn relative_error(a: &[f64], b: &[f64]) -> f64 {
        let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        diff / scale.max(f64::MIN_POSITIVE)
    }

    /// Richardson-extrapolated central difference of `f` along coordinate `i`.
    fn richardson<F: Fn(&[f64]) -> f64>(f: F, t: &[f64], i: usize) -> f64 {
        let central = |h: f64| {
            let mut up = t.to_vec();
            let mut down = t.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        };
        let h = 1e-3 * t[i];
        (4.0 * central(h / 2.0) - central(h)) / 3.0
    }

    fn fd_gradient(data: &Dataset, basis: RegressionBasis, t: &[f64]) -> Vec<f64> {
        (0..t.len())
            .map(|i| richardson(|v| profiled_log_likelihood(data, basis, &theta(v)).unwrap(), t, i))
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, d) in [(6, 1), (10, 1), (9, 3), (12, 3)] {
            let data = random_dataset(&mut rng, n, d);
            let t: Vec<f64> = (0..d).map(|_| 0.2 + 2.0 * rng.random::<f64>()).collect();
            let analytic = likelihood_gradient(&data, RegressionBasis::Constant, &theta(&t)).unwrap();
            let numeric = fd_gradient(&data, RegressionBasis::Constant, &t);
            let err = relative_error(analytic.as_slice(), &numeric);
            assert!(err < 1e-5, "n={n} d={d} err={err:e}");
        }
    }

    #[test]
    fn hessian_matches_finite_differences_and_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (n, d) in [(8, 1), (10, 2), (12, 3)] {
            let data = random_dataset(&mut rng, n, d);
            let t: Vec<f64> = (0..d).map(|_| 0.3 + 1.5 * rng.random::<f64>()).collect();
            let basis = RegressionBasis::Linear;
            let h = likelihood_hessian(&data, basis, &theta(&t)).unwrap();
            assert!((&h - h.transpose()).amax() <= 1e-10 * h.amax());
            let mut numeric = Vec::new();
            for j in 0..d {
                for i in 0..d {
                    numeric.push(richardson(|v| likelihood_gradient(&data, basis, &theta(v)).unwrap()[i], &t, j));
                }
            }
            let analytic: Vec<f64> = (0..d).flat_map(|j| (0..d).map(move |i| (i, j))).map(|(i, j)| h[(i, j)]).collect();
            let err = relative_error(&analytic, &numeric);
            assert!(err < 1e-4, "n={n} d={d} err={err:e}");
        }
    }

    #[test]
    fn gradient_respects_coordinate_swap_symmetry() {
        // design symmetric under (x1, x2) -> (x2, x1) with symmetric responses
        let pts: [(f64, f64); 6] = [(0.1, 0.7), (0.7, 0.1), (0.3, 0.3), (0.9, 0.5), (0.5, 0.9), (0.8, 0.8)];
        let x = DMatrix::from_fn(6, 2, |i, k| if k == 0 { pts[i].0 } else { pts[i].1 });
        let y = DVector::from_fn(6, |i, _| (pts[i].0 + pts[i].1).sin() + pts[i].0 * pts[i].1);
        let data = Dataset::new(x, y).unwrap();
        let g = likelihood_gradient(&data, RegressionBasis::Constant, &theta(&[1.3, 1.3])).unwrap();
        assert_relative_eq!(g[0], g[1], max_relative = 1e-10);
    }

    #[test]
    fn gradient_vanishes_at_scanned_interior_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let data = random_dataset(&mut rng, 10, 1);
        let basis = RegressionBasis::Constant;
        let ll = |log_t: f64| profiled_log_likelihood(&data, basis, &theta(&[10f64.powf(log_t)])).unwrap();
        // dense scan over log10(theta) in [-2, 2]
        let grid: Vec<f64> = (0..=400).map(|i| -2.0 + 4.0 * i as f64 / 400.0).collect();
        let best = (1..grid.len() - 1)
            .max_by(|&a, &b| ll(grid[a]).total_cmp(&ll(grid[b])))
            .unwrap();
        assert!(ll(grid[best]) >= ll(grid[best - 1]) && ll(grid[best]) >= ll(grid[best + 1]));
        // golden-section refinement inside the bracketing cells
        let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let c = b - ratio * (b - a);
            let d = a + ratio * (b - a);
            if ll(c) > ll(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let t_star = 10f64.powf(0.5 * (a + b));
        let g = likelihood_gradient(&data, basis, &theta(&[t_star])).unwrap();
        assert!(g[0].abs() < 1e-4, "gradient {:e} at theta {t_star}", g[0]);
    }

    #[test]
    fn spectrum_of_small_matrices() {
        let one = DMatrix::from_row_slice(1, 1, &[-3.5]);
        let s = spectrum_of(&one);
        assert_eq!(s.singular_values, vec![3.5]);
        assert_eq!(s.condition_ratio, 1.0);

        let h = DMatrix::from_row_slice(3, 3, &[-50.0, 0.01, 0.0, 0.01, 2.0, 0.02, 0.0, 0.02, 0.5]);
        let s = spectrum_of(&h);
        for (got, want) in s.singular_values.iter().zip([50.0, 2.0, 0.5]) {
            assert_relative_eq!(*got, want, max_relative = 1e-3);
        }
        // independent route: |eigenvalues| of the symmetric matrix
        let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().map(|v| v.abs()).collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in s.singular_values.iter().zip(eig) {
            assert_relative_eq!(*got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn argmin_objective_equals_argmax_likelihood_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = random_dataset(&mut rng, 9, 2);
        let basis = RegressionBasis::Linear;
        let grid: Vec<Theta> = [0.05, 0.3, 1.0, 3.0, 20.0]
            .iter()
            .flat_map(|a| [0.1, 1.0, 5.0].iter().map(move |b| theta(&[*a, *b])))
            .collect();
        let objective: Vec<f64> = grid.iter().map(|t| trk_objective(&data, basis, t, &PenaltySpec::none()).unwrap()).collect();
        let likelihood: Vec<f64> = grid.iter().map(|t| profiled_log_likelihood(&data, basis, t).unwrap()).collect();
        let argmin = (0..grid.len()).min_by(|&a, &b| objective[a].total_cmp(&objective[b])).unwrap();
        let argmax = (0..grid.len()).max_by(|&a, &b| likelihood[a].total_cmp(&likelihood[b])).unwrap();
        assert_eq!(argmin, argmax);
    }
}
