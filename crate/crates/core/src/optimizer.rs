//! Hooke–Jeeves pattern search over `log10(theta)` minimizing the penalized
//! concentrated-likelihood objective.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TrkError};
use crate::model::{Dataset, FittedModel, Gls, RegressionBasis, Theta, DEFAULT_THETA_BOUNDS};
use crate::objective::{objective_normalized, PenaltySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Starting point; a single entry is broadcast to every dimension.
    pub theta_init: Vec<f64>,
    pub theta_bounds: (f64, f64),
    pub max_iters: usize,
    /// Relative objective decrease below which an improving iteration stops
    /// the search.
    pub epsilon: f64,
    pub step_expand: f64,
    pub step_shrink: f64,
    /// Smallest step, in decades of `theta`.
    pub min_step: f64,
    /// First step, in decades of `theta`.
    pub initial_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            theta_init: vec![10.0],
            theta_bounds: DEFAULT_THETA_BOUNDS,
            max_iters: 500,
            epsilon: 1e-8,
            step_expand: 2.0,
            step_shrink: 0.5,
            min_step: 1e-6,
            initial_step: 0.5,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(TrkError::InvalidArgument(msg));
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.step_expand > 1.0 && self.step_expand.is_finite()) {
            return bad(format!("step_expand must exceed 1, got {}", self.step_expand));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return bad(format!("step_shrink must lie in (0, 1), got {}", self.step_shrink));
        }
        if !(self.min_step > 0.0) || !(self.initial_step >= self.min_step && self.initial_step.is_finite()) {
            return bad(format!(
                "steps must satisfy 0 < min_step <= initial_step, got {} and {}",
                self.min_step, self.initial_step
            ));
        }
        if self.theta_init.is_empty() {
            return bad("theta_init must not be empty".into());
        }
        Theta::new(self.theta_init.clone(), self.theta_bounds).map(|_| ())
    }

    /// The starting `theta` for a `dim`-dimensional problem.
    pub fn initial_theta(&self, dim: usize) -> Result<Theta> {
        match self.theta_init.len() {
            1 => Theta::broadcast(self.theta_init[0], dim, self.theta_bounds),
            len if len == dim => Theta::new(self.theta_init.clone(), self.theta_bounds),
            len => Err(TrkError::DimensionMismatch { expected: dim, actual: len }),
        }
    }
}

/// Why the search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// An improving iteration decreased the objective by less than `epsilon`.
    Converged,
    /// Every step shrank below `min_step`.
    StepTolerance,
    MaxIterations,
    /// The fixed number of explore/move cycles of [`fit_box_search`] ran out.
    Cycles,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::StepTolerance => "step_tolerance",
            Self::MaxIterations => "max_iterations",
            Self::Cycles => "cycles",
        }
    }
}

/// One row per iteration: the base point after the iteration, its objective
/// and the best objective seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub theta: Vec<f64>,
    pub objective: f64,
    pub best_objective: f64,
}

#[derive(Debug, Clone)]
pub struct TrkFit {
    pub model: FittedModel,
    pub objective: f64,
    pub trace: Vec<TraceRow>,
    pub termination: Termination,
    pub evaluations: usize,
}

impl TrkFit {
    pub fn iterations(&self) -> usize {
        self.trace.last().map_or(0, |r| r.iter)
    }

    /// Writes the trace as CSV with columns
    /// `iter,theta_1..theta_D,objective,best_objective`.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.model.dim();
        let mut header = vec!["iter".to_string()];
        header.extend((1..=dim).map(|k| format!("theta_{k}")));
        header.extend(["objective".to_string(), "best_objective".to_string()]);
        w.write_record(&header)?;
        for row in &self.trace {
            let mut rec = vec![row.iter.to_string()];
            rec.extend(row.theta.iter().map(|v| v.to_string()));
            rec.push(row.objective.to_string());
            rec.push(row.best_objective.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Search<'a> {
    data: &'a Dataset,
    basis: RegressionBasis,
    spec: &'a PenaltySpec,
    bounds: (f64, f64),
    evaluations: usize,
    best: Option<(f64, Theta, Gls)>,
    last_error: Option<TrkError>,
}

impl Search<'_> {
    fn theta_at(&self, u: &[f64]) -> Theta {
        let (lo, hi) = self.bounds;
        let values = u.iter().map(|v| 10f64.powf(*v).clamp(lo, hi)).collect();
        Theta::new(values, self.bounds).expect("clamped into bounds")
    }

    fn eval(&mut self, u: &[f64]) -> f64 {
        let theta = self.theta_at(u);
        self.eval_theta(theta)
    }

    fn eval_theta(&mut self, theta: Theta) -> f64 {
        self.evaluations += 1;
        match objective_normalized(
            self.data.normalized_points(),
            self.data.normalized_responses(),
            self.basis,
            &theta,
            self.spec,
        ) {
            Ok((value, gls)) if value.is_finite() => {
                if self.best.as_ref().is_none_or(|(b, _, _)| value < *b) {
                    self.best = Some((value, theta, gls));
                }
                value
            }
            Ok((value, _)) => {
                self.last_error = Some(TrkError::FitFailed(format!("objective is {value} at theta {:?}", theta.values())));
                f64::INFINITY
            }
            Err(e) => {
                log::debug!("theta {:?} infeasible: {e}", theta.values());
                self.last_error = Some(e);
                f64::INFINITY
            }
        }
    }

    fn finish(self, termination: Termination, trace: Vec<TraceRow>) -> Result<TrkFit> {
        let evaluations = self.evaluations;
        let Some((objective, theta, gls)) = self.best else {
            let detail = self.last_error.map_or_else(|| "no feasible theta".to_string(), |e| e.to_string());
            return Err(TrkError::FitFailed(detail));
        };
        log::debug!(
            "{}: {} after {} iterations, {evaluations} evaluations, objective {objective:.6e}",
            if termination == Termination::Cycles { "box search" } else { "pattern search" },
            termination.name(),
            trace.last().map_or(0, |r| r.iter)
        );
        let model = FittedModel::from_gls(self.data, self.basis, theta, gls);
        Ok(TrkFit { model, objective, trace, termination, evaluations })
    }
}

/// Fits a theta-regularized Kriging model.
pub fn fit_trk(data: &Dataset, basis: RegressionBasis, spec: &PenaltySpec, opts: &FitOptions) -> Result<TrkFit> {
    opts.validate()?;
    spec.validate()?;
    let theta0 = opts.initial_theta(data.dim())?;
    let (lo, hi) = (opts.theta_bounds.0.log10(), opts.theta_bounds.1.log10());
    let width = hi - lo;

    let mut search = Search { data, basis, spec, bounds: opts.theta_bounds, evaluations: 0, best: None, last_error: None };
    let mut base: Vec<f64> = theta0.values().iter().map(|v| v.log10().clamp(lo, hi)).collect();
    let mut base_value = search.eval(&base);
    let mut steps = vec![opts.initial_step.min(width.max(opts.min_step)); base.len()];
    let mut trace = vec![TraceRow {
        iter: 0,
        theta: search.theta_at(&base).values().to_vec(),
        objective: base_value,
        best_objective: base_value,
    }];

    let mut termination = Termination::MaxIterations;
    for iter in 1..=opts.max_iters {
        let previous = base_value;
        let mut trial = base.clone();
        let mut trial_value = base_value;
        for k in 0..trial.len() {
            for direction in [1.0, -1.0] {
                let moved = (trial[k] + direction * steps[k]).clamp(lo, hi);
                if moved == trial[k] {
                    continue;
                }
                let mut candidate = trial.clone();
                candidate[k] = moved;
                let value = search.eval(&candidate);
                if value < trial_value {
                    trial = candidate;
                    trial_value = value;
                    steps[k] = (steps[k] * opts.step_expand).min(width);
                    break;
                }
            }
        }

        if trial_value < base_value {
            let pattern: Vec<f64> =
                trial.iter().zip(&base).map(|(t, b)| (2.0 * t - b).clamp(lo, hi)).collect();
            let pattern_value = if pattern != trial { search.eval(&pattern) } else { f64::INFINITY };
            if pattern_value < trial_value {
                base = pattern;
                base_value = pattern_value;
            } else {
                base = trial;
                base_value = trial_value;
            }
        } else {
            for s in &mut steps {
                *s *= opts.step_shrink;
            }
        }

        trace.push(TraceRow {
            iter,
            theta: search.theta_at(&base).values().to_vec(),
            objective: base_value,
            best_objective: base_value,
        });

        if base_value < previous {
            if (previous - base_value) / previous.abs().max(1.0) < opts.epsilon {
                termination = Termination::Converged;
                break;
            }
        } else if steps.iter().all(|s| *s < opts.min_step) {
            termination = Termination::StepTolerance;
            break;
        }
    }

    search.finish(termination, trace)
}

/// Search strategy for `theta`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// [`fit_trk`]
    #[default]
    Pattern,
    /// [`fit_box_search`]
    Box,
}

impl std::str::FromStr for Optimizer {
    type Err = TrkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pattern" => Ok(Self::Pattern),
            "box" => Ok(Self::Box),
            _ => Err(TrkError::InvalidArgument(format!("unknown optimizer '{s}' (pattern, box)"))),
        }
    }
}

impl Optimizer {
    pub fn fit(self, data: &Dataset, basis: RegressionBasis, spec: &PenaltySpec, opts: &FitOptions) -> Result<TrkFit> {
        match self {
            Self::Pattern => fit_trk(data, basis, spec, opts),
            Self::Box => fit_box_search(data, basis, spec, opts),
        }
    }
}

/// Universal Kriging: [`fit_trk`] without a penalty.
pub fn fit_uk(data: &Dataset, basis: RegressionBasis, opts: &FitOptions) -> Result<TrkFit> {
    fit_trk(data, basis, &PenaltySpec::none(), opts)
}


/// The short multiplicative box search of the DACE toolbox (`boxmin`): at
/// most `min(D, 4)` cycles (2 for `D <= 2`) of coordinate exploration with
/// per-dimension factors `2^(k/(D+2))` followed by an accelerating pattern
/// move. Provided as the reference optimizer for plain Kriging baselines;
/// only `theta_init` and `theta_bounds` of `opts` are used.
pub fn fit_box_search(data: &Dataset, basis: RegressionBasis, spec: &PenaltySpec, opts: &FitOptions) -> Result<TrkFit> {
    opts.validate()?;
    spec.validate()?;
    let (lo, up) = opts.theta_bounds;
    let mut t = opts.initial_theta(data.dim())?.values().to_vec();
    let p = t.len();
    let mut factors: Vec<f64> = if lo == up {
        vec![1.0; p]
    } else {
        (1..=p).map(|k| 2f64.powf(k as f64 / (p as f64 + 2.0))).collect()
    };

    let mut search = Search { data, basis, spec, bounds: opts.theta_bounds, evaluations: 0, best: None, last_error: None };
    let theta = |v: &[f64]| Theta::new(v.iter().map(|x| x.clamp(lo, up)).collect(), (lo, up)).expect("clamped into bounds");
    let mut f = search.eval_theta(theta(&t));
    let mut trace = vec![TraceRow { iter: 0, theta: t.clone(), objective: f, best_objective: f }];
    if f.is_infinite() {
        return search.finish(Termination::Cycles, trace);
    }

    let cycles = if p <= 2 { 2 } else { p.min(4) };
    for cycle in 1..=cycles {
        let start = t.clone();
        for j in (0..p).filter(|j| factors[*j] != 1.0) {
            let mut tt = t.clone();
            let at_bound = t[j] == up || t[j] == lo;
            tt[j] = if t[j] == up {
                t[j] / factors[j].sqrt()
            } else if t[j] == lo {
                t[j] * factors[j].sqrt()
            } else {
                up.min(t[j] * factors[j])
            };
            let ff = search.eval_theta(theta(&tt));
            if ff < f {
                t = tt;
                f = ff;
            } else if !at_bound {
                tt[j] = lo.max(t[j] / factors[j]);
                let ff = search.eval_theta(theta(&tt));
                if ff < f {
                    t = tt;
                    f = ff;
                }
            }
        }

        let mut v: Vec<f64> = t.iter().zip(&start).map(|(a, b)| a / b).collect();
        if v.iter().all(|r| *r == 1.0) {
            factors.rotate_left(1);
            factors.iter_mut().for_each(|d| *d = d.powf(0.2));
        } else {
            loop {
                let tt: Vec<f64> = t.iter().zip(&v).map(|(a, r)| (a * r).clamp(lo, up)).collect();
                let ff = search.eval_theta(theta(&tt));
                let hit_bound = tt.iter().any(|x| *x == lo || *x == up);
                if ff < f {
                    t = tt;
                    f = ff;
                    v.iter_mut().for_each(|r| *r *= *r);
                } else {
                    break;
                }
                if hit_bound {
                    break;
                }
            }
            factors.rotate_left(1);
            factors.iter_mut().for_each(|d| *d = d.powf(0.25));
        }
        trace.push(TraceRow { iter: cycle, theta: t.clone(), objective: f, best_objective: f });
    }
    search.finish(Termination::Cycles, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::forrester;
    use crate::objective::trk_objective;
    use crate::sampling::lhs;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn forrester_data(n: usize, seed: u64) -> Dataset {
        let x = lhs(n, 1, seed);
        let y: Vec<f64> = x.iter().map(|v| forrester(*v)).collect();
        Dataset::new(x, DVector::from_vec(y)).unwrap()
    }

    fn sphere_slice(n: usize, seed: u64) -> Dataset {
        let x = lhs(n, 2, seed).map(|v| 10.24 * v - 5.12);
        let y = DVector::from_iterator(n, x.row_iter().map(|r| r.iter().map(|v| v * v).sum()));
        Dataset::new(x, y).unwrap()
    }

    fn dense_scan_min(data: &Dataset, spec: &PenaltySpec) -> f64 {
        (0..400)
            .filter_map(|i| {
                let t = 10f64.powf(-2.0 + 4.0 * i as f64 / 399.0);
                trk_objective(data, RegressionBasis::Linear, &Theta::with_values(vec![t]).unwrap(), spec).ok()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn defaults_are_valid() {
        let o = FitOptions::default();
        o.validate().unwrap();
        assert_eq!(o.initial_theta(3).unwrap().values(), &[10.0; 3]);
        assert!(o.initial_theta(3).is_ok());
        let bad = FitOptions { theta_init: vec![1.0, 2.0], ..o.clone() };
        assert!(bad.initial_theta(3).is_err());
        for broken in [
            FitOptions { max_iters: 0, ..o.clone() },
            FitOptions { epsilon: 0.0, ..o.clone() },
            FitOptions { step_expand: 1.0, ..o.clone() },
            FitOptions { step_shrink: 1.0, ..o.clone() },
            FitOptions { theta_init: vec![1e3], ..o.clone() },
            FitOptions { min_step: 0.0, ..o },
        ] {
            assert!(broken.validate().is_err(), "{broken:?}");
        }
    }

    #[test]
    fn matches_dense_scan_in_one_dimension() {
        let data = forrester_data(10, 3);
        for spec in [PenaltySpec::none(), PenaltySpec::lasso(10.0), PenaltySpec::ridge(10.0)] {
            let fit = fit_trk(&data, RegressionBasis::Linear, &spec, &FitOptions::default()).unwrap();
            let grid = dense_scan_min(&data, &spec);
            assert!(fit.objective <= grid + 1e-3 * grid.abs(), "{spec:?}: {} vs {grid}", fit.objective);
        }
    }

    #[test]
    fn uk_is_unpenalized_trk() {
        let data = forrester_data(10, 5);
        let a = fit_uk(&data, RegressionBasis::Linear, &FitOptions::default()).unwrap();
        let b = fit_trk(&data, RegressionBasis::Linear, &PenaltySpec::none(), &FitOptions::default()).unwrap();
        assert_eq!(a.model.theta(), b.model.theta());
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.model.predict(&[0.3]).unwrap().to_bits(), b.model.predict(&[0.3]).unwrap().to_bits());
    }

    #[test]
    fn uk_theta_is_interior_and_ridge_shrinks_it() {
        let data = forrester_data(10, 11);
        let opts = FitOptions::default();
        let uk = fit_uk(&data, RegressionBasis::Linear, &opts).unwrap();
        let ridge = fit_trk(&data, RegressionBasis::Linear, &PenaltySpec::ridge(10.0), &opts).unwrap();
        let t_uk = uk.model.theta().values()[0];
        assert!(t_uk > 1e-2 && t_uk < 1e2, "{t_uk}");
        assert!(ridge.model.theta().values()[0] < t_uk);
    }

    #[test]
    fn saturated_regression_has_tiny_objective() {
        let x = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, 3.0]);
        let data = Dataset::new(x, y).unwrap();
        let fit = fit_uk(&data, RegressionBasis::Linear, &FitOptions::default()).unwrap();
        assert!(fit.model.sigma2() < 1e-20);
        assert!(fit.objective < 1e-20);
    }

    #[test]
    fn descends_from_the_start_on_sphere() {
        let data = sphere_slice(15, 2);
        let opts = FitOptions::default();
        let at_start = trk_objective(&data, RegressionBasis::Linear, &opts.initial_theta(2).unwrap(), &PenaltySpec::none()).unwrap();
        let fit = fit_uk(&data, RegressionBasis::Linear, &opts).unwrap();
        assert!(fit.objective <= at_start);
        assert_eq!(fit.trace[0].objective, at_start);
    }

    #[test]
    fn stops_with_a_convergence_reason() {
        let data = sphere_slice(20, 8);
        let fit = fit_uk(&data, RegressionBasis::Constant, &FitOptions::default()).unwrap();
        assert_ne!(fit.termination, Termination::MaxIterations);
        let capped = fit_uk(&data, RegressionBasis::Constant, &FitOptions { max_iters: 1, ..FitOptions::default() }).unwrap();
        assert!(capped.trace.len() <= 2);
    }

    #[test]
    fn trace_csv_layout() {
        let data = sphere_slice(8, 1);
        let fit = fit_uk(&data, RegressionBasis::Constant, &FitOptions { max_iters: 3, ..FitOptions::default() }).unwrap();
        let mut buf = Vec::new();
        fit.write_trace(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "iter,theta_1,theta_2,objective,best_objective");
        assert_eq!(lines.count(), fit.trace.len());
    }

    #[test]
    fn ridge_penalty_path_is_monotone() {
        let data = forrester_data(12, 21);
        let mut last = f64::INFINITY;
        for mu in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let fit = fit_trk(&data, RegressionBasis::Linear, &PenaltySpec::ridge(mu), &FitOptions::default()).unwrap();
            let norm: f64 = fit.model.theta().values().iter().map(|t| t * t).sum();
            assert!(norm <= last + 1e-8, "mu={mu}: {norm} > {last}");
            last = norm;
        }
    }

    #[test]
    fn box_search_is_short_and_descending() {
        let data = sphere_slice(20, 4);
        let opts = FitOptions::default();
        let fit = fit_box_search(&data, RegressionBasis::Linear, &PenaltySpec::none(), &opts).unwrap();
        assert_eq!(fit.termination, Termination::Cycles);
        assert_eq!(fit.trace.len(), 3);
        assert!(fit.trace.windows(2).all(|w| w[1].best_objective <= w[0].best_objective));
        let at_start = trk_objective(&data, RegressionBasis::Linear, &opts.initial_theta(2).unwrap(), &PenaltySpec::none()).unwrap();
        assert!(fit.objective < at_start);
        let same = Optimizer::Box.fit(&data, RegressionBasis::Linear, &PenaltySpec::none(), &opts).unwrap();
        assert_eq!(same.trace, fit.trace);
    }

    #[test]
    fn box_search_respects_a_pinned_box() {
        let data = sphere_slice(10, 6);
        let opts = FitOptions { theta_init: vec![2.0], theta_bounds: (2.0, 2.0), ..FitOptions::default() };
        let fit = fit_box_search(&data, RegressionBasis::Constant, &PenaltySpec::none(), &opts).unwrap();
        assert_eq!(fit.model.theta().values(), &[2.0, 2.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn trace_is_monotone_boxed_and_deterministic(seed in 0u64..1000, n in 6usize..14, mu in 0.0f64..20.0) {
            let data = sphere_slice(n, seed);
            let opts = FitOptions { theta_bounds: (0.05, 20.0), theta_init: vec![1.0], ..FitOptions::default() };
            let spec = PenaltySpec::ridge(mu);
            let a = fit_trk(&data, RegressionBasis::Constant, &spec, &opts).unwrap();
            let b = fit_trk(&data, RegressionBasis::Constant, &spec, &opts).unwrap();
            prop_assert_eq!(&a.trace, &b.trace);
            for w in a.trace.windows(2) {
                prop_assert!(w[1].best_objective <= w[0].best_objective);
            }
            for row in &a.trace {
                prop_assert!(row.theta.iter().all(|t| *t >= 0.05 && *t <= 20.0));
            }
            prop_assert_eq!(a.objective, a.trace.last().unwrap().best_objective);
        }
    }
}
