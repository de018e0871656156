//! Analytic test functions, the borehole and steel-column simulators, and the
//! accuracy metrics used to compare surrogates.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Result, TrkError};
use crate::sampling::{lhs, normal_transform, scale_to_bounds};

/// Length of the steel column (mm).
pub const STEEL_COLUMN_LENGTH: f64 = 7500.0;

/// `(mean, standard deviation)` of the steel-column inputs, ordered
/// `(F_s, Z_1, Z_2, Z_3, b, t, h, F_0, E)`. The design variables `b`, `t`, `h`
/// are centred on a nominal design.
pub const STEEL_INPUTS: [(f64, f64); 9] = [
    (400.0, 35.0),
    (500_000.0, 50_000.0),
    (600_000.0, 90_000.0),
    (600_000.0, 90_000.0),
    (300.0, 3.0),
    (20.0, 2.0),
    (400.0, 5.0),
    (30.0, 10.0),
    (21_000.0, 4_200.0),
];

/// Design bounds of `(b, t, h)` in millimetres.
pub const STEEL_DESIGN_BOUNDS: [(f64, f64); 3] = [(25.0, 450.0), (5.0, 40.0), (150.0, 600.0)];

/// Input domain of the borehole model, ordered
/// `(r_w, r, T_u, H_u, T_l, H_l, L, K_w)`.
pub const BOREHOLE_BOUNDS: [(f64, f64); 8] = [
    (0.05, 0.15),
    (100.0, 50_000.0),
    (63_070.0, 115_600.0),
    (990.0, 1_110.0),
    (63.1, 116.0),
    (700.0, 820.0),
    (1_120.0, 1_680.0),
    (9_855.0, 12_045.0),
];

const LANGERMANN_C: [f64; 5] = [1.0, 2.0, 5.0, 2.0, 3.0];
const LANGERMANN_A: [[f64; 2]; 5] = [[3.0, 5.0], [5.0, 2.0], [2.0, 1.0], [1.0, 4.0], [7.0, 9.0]];

/// Registered response functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Forrester,
    CornerPeak,
    Langermann,
    Rastrigin,
    MorokoffCaflisch,
    Sphere,
    Rhe,
    Trid,
    Schwefel,
    Stybtang,
    Shd,
    Borehole,
    SteelColumn,
}

impl Benchmark {
    pub const ALL: [Benchmark; 13] = [
        Self::Forrester,
        Self::CornerPeak,
        Self::Langermann,
        Self::Rastrigin,
        Self::MorokoffCaflisch,
        Self::Sphere,
        Self::Rhe,
        Self::Trid,
        Self::Schwefel,
        Self::Stybtang,
        Self::Shd,
        Self::Borehole,
        Self::SteelColumn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Forrester => "forrester",
            Self::CornerPeak => "cornerpeak",
            Self::Langermann => "langermann",
            Self::Rastrigin => "rastrigin",
            Self::MorokoffCaflisch => "morcaf",
            Self::Sphere => "sphere",
            Self::Rhe => "rhe",
            Self::Trid => "trid",
            Self::Schwefel => "schwefel",
            Self::Stybtang => "stybtang",
            Self::Shd => "shd",
            Self::Borehole => "borehole",
            Self::SteelColumn => "steelcolumn",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Forrester => 1,
            Self::CornerPeak | Self::Langermann | Self::Rastrigin | Self::MorokoffCaflisch => 2,
            Self::Sphere => 4,
            Self::Rhe => 6,
            Self::Trid | Self::Borehole => 8,
            Self::SteelColumn => 9,
            Self::Schwefel => 12,
            Self::Stybtang => 24,
            Self::Shd => 25,
        }
    }

    /// Input domain. For the steel column this is mean +/- 4 standard
    /// deviations of each input; its samples are normal, not uniform.
    pub fn bounds(self) -> Vec<(f64, f64)> {
        let uniform = |lo: f64, hi: f64| vec![(lo, hi); self.dim()];
        match self {
            Self::Forrester | Self::CornerPeak | Self::Langermann | Self::MorokoffCaflisch | Self::Shd => {
                uniform(0.0, 1.0)
            }
            Self::Rastrigin => uniform(0.0, 1.8),
            Self::Sphere => uniform(-5.12, 5.12),
            Self::Rhe | Self::Trid | Self::Schwefel => uniform(-1.0, 1.0),
            Self::Stybtang => uniform(0.0, 0.5),
            Self::Borehole => BOREHOLE_BOUNDS.to_vec(),
            Self::SteelColumn => STEEL_INPUTS.iter().map(|(m, s)| (m - 4.0 * s, m + 4.0 * s)).collect(),
        }
    }

    /// Engineering simulators use a single pool split into train/test;
    /// analytic functions use independent train and test designs.
    pub fn is_simulator(self) -> bool {
        matches!(self, Self::Borehole | Self::SteelColumn)
    }

    /// `n` input points drawn from the benchmark's input distribution: a
    /// Latin Hypercube scaled to the bounds, or for the steel column a Latin
    /// Hypercube in probability space mapped through normal quantiles.
    pub fn sample_inputs(self, n: usize, seed: u64) -> Result<DMatrix<f64>> {
        let unit = lhs(n, self.dim(), seed);
        match self {
            Self::SteelColumn => {
                let mut out = DMatrix::zeros(n, self.dim());
                for i in 0..n {
                    for (k, (mean, sd)) in STEEL_INPUTS.iter().enumerate() {
                        // LHS values lie in [0, 1); 0 itself has no quantile
                        let u = unit[(i, k)].max(f64::MIN_POSITIVE);
                        out[(i, k)] = normal_transform(u, *mean, *sd)?;
                    }
                }
                Ok(out)
            }
            _ => scale_to_bounds(&unit, &self.bounds()),
        }
    }

    pub fn eval(self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(TrkError::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        if self != Self::SteelColumn && self != Self::Borehole {
            warn_outside(self.name(), x, &self.bounds());
        }
        Ok(match self {
            Self::Forrester => forrester(x[0]),
            Self::CornerPeak => (1.0 + 5.0 * (x[0] + x[1])).powi(-3),
            Self::Langermann => langermann(x),
            Self::Rastrigin => 20.0 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>(),
            Self::MorokoffCaflisch => 9.0 / 4.0 * x.iter().map(|v| v.sqrt()).product::<f64>(),
            Self::Sphere => x.iter().map(|v| v * v).sum(),
            Self::Rhe => nested_squares(x, 1, 6),
            Self::Trid => trid(x),
            Self::Schwefel => 418.9829 * 12.0 - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>(),
            Self::Stybtang => 0.5 * styblinski_tang_sum(x),
            Self::Shd => shd(x),
            Self::Borehole => borehole(x)?,
            Self::SteelColumn => steel_limit_state(x)?,
        })
    }
}

impl std::str::FromStr for Benchmark {
    type Err = TrkError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|b| b.name() == lower)
            .ok_or_else(|| TrkError::UnknownBenchmark(s.to_string()))
    }
}

impl std::fmt::Display for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates a benchmark addressed by its registry name.
pub fn eval_benchmark(name: &str, x: &[f64]) -> Result<f64> {
    name.parse::<Benchmark>()?.eval(x)
}

fn warn_outside(name: &str, x: &[f64], bounds: &[(f64, f64)]) {
    let slack = |lo: f64, hi: f64| 1e-9 * (hi - lo);
    if let Some((k, v)) = x
        .iter()
        .enumerate()
        .find(|(k, v)| **v < bounds[*k].0 - slack(bounds[*k].0, bounds[*k].1) || **v > bounds[*k].1 + slack(bounds[*k].0, bounds[*k].1))
    {
        log::warn!("{name}: input {k} = {v} lies outside [{}, {}]", bounds[k].0, bounds[k].1);
    }
}

pub fn forrester(x: f64) -> f64 {
    (6.0 * x - 1.0).powi(2) * (12.0 * x - 4.0).sin()
}

fn langermann(x: &[f64]) -> f64 {
    LANGERMANN_C
        .iter()
        .zip(LANGERMANN_A.iter())
        .map(|(c, a)| {
            let s: f64 = x.iter().zip(a).map(|(xj, aj)| (xj - aj).powi(2)).sum();
            c * (-s / PI).exp() * (PI * s).cos()
        })
        .sum()
}

fn trid(x: &[f64]) -> f64 {
    let squares: f64 = x.iter().map(|v| (v - 1.0).powi(2)).sum();
    let cross: f64 = x.windows(2).map(|w| w[1] * w[0]).sum();
    squares - cross
}

fn styblinski_tang_sum(x: &[f64]) -> f64 {
    x.iter().map(|v| v.powi(4) - 16.0 * v * v + 5.0 * v).sum()
}

/// `sum_{i=first}^{last} sum_{j=1}^{i} x_j^2` (1-based indices).
fn nested_squares(x: &[f64], first: usize, last: usize) -> f64 {
    (first..=last).map(|i| x[..i].iter().map(|v| v * v).sum::<f64>()).sum()
}

/// Components of the special high-dimensional function before weighting.
pub fn shd_parts(x: &[f64]) -> [f64; 3] {
    let stybtang = styblinski_tang_sum(&x[..8]);
    let griewank = x[8..16].iter().map(|v| v * v / 100.0).sum::<f64>()
        - x[8..16]
            .iter()
            .enumerate()
            .map(|(k, v)| (v / ((k + 9) as f64).sqrt()).cos())
            .product::<f64>()
        + 1.0;
    let rhe = nested_squares(x, 17, 25);
    [stybtang, griewank, rhe]
}

fn shd(x: &[f64]) -> f64 {
    let [a, b, c] = shd_parts(x);
    a / 8.0 + b / 40.0 + c / 100.0
}

/// Borehole water flow (m^3/yr); inputs `(r_w, r, T_u, H_u, T_l, H_l, L, K_w)`.
pub fn borehole(x: &[f64]) -> Result<f64> {
    if x.len() != 8 {
        return Err(TrkError::DimensionMismatch { expected: 8, actual: x.len() });
    }
    warn_outside("borehole", x, &BOREHOLE_BOUNDS);
    let [rw, r, tu, hu, tl, hl, l, kw] = [x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]];
    let log_ratio = (r / rw).ln();
    Ok(2.0 * PI * tu * (hu - hl) / (log_ratio * (1.0 + 2.0 * l * tu / (log_ratio * rw * rw * kw) + tu / tl)))
}

/// Euler buckling load `pi^2 E b t h^2 / (2 L^2)`.
pub fn euler_buckling_load(b: f64, t: f64, h: f64, e: f64) -> f64 {
    PI * PI * e * b * t * h * h / (2.0 * STEEL_COLUMN_LENGTH * STEEL_COLUMN_LENGTH)
}

/// Steel-column limit state; inputs `(F_s, Z_1, Z_2, Z_3, b, t, h, F_0, E)`.
pub fn steel_limit_state(x: &[f64]) -> Result<f64> {
    if x.len() != 9 {
        return Err(TrkError::DimensionMismatch { expected: 9, actual: x.len() });
    }
    let [fs, z1, z2, z3, b, t, h, f0, e] = [x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8]];
    if !(b > 0.0 && t > 0.0 && h > 0.0 && e > 0.0) {
        return Err(TrkError::InvalidArgument(format!(
            "steel column needs positive b, t, h, E; got b={b} t={t} h={h} E={e}"
        )));
    }
    let load = z1 + z2 + z3;
    let buckling = euler_buckling_load(b, t, h, e);
    if buckling == load {
        return Err(TrkError::SingularConfiguration(format!(
            "Euler buckling load equals the combined load ({load})"
        )));
    }
    if buckling < load {
        log::warn!("steel column is past buckling: xi_b = {buckling:.6e} < F = {load:.6e}");
    }
    Ok(fs - load * (1.0 / (2.0 * b * t) + f0 / (b * t * h) * (buckling / (buckling - load))))
}

/// Cost of a steel-column design `b t + 5 h`.
pub fn steel_cost(b: f64, t: f64, h: f64) -> f64 {
    for (v, (lo, hi), name) in [(b, STEEL_DESIGN_BOUNDS[0], "b"), (t, STEEL_DESIGN_BOUNDS[1], "t"), (h, STEEL_DESIGN_BOUNDS[2], "h")] {
        if v < lo || v > hi {
            log::warn!("steel cost: {name} = {v} lies outside [{lo}, {hi}]");
        }
    }
    b * t + 5.0 * h
}

/// Accuracy of a set of predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    /// Coefficient of determination; `None` when the true values are constant.
    pub r2: Option<f64>,
    pub rmse: f64,
    pub mae: f64,
}

pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<MetricsReport> {
    if y_true.len() != y_pred.len() {
        return Err(TrkError::DimensionMismatch { expected: y_true.len(), actual: y_pred.len() });
    }
    if y_true.len() < 2 {
        return Err(TrkError::InvalidArgument("metrics need at least two values".into()));
    }
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let sse: f64 = y_true.iter().zip(y_pred).map(|(a, b)| (a - b).powi(2)).sum();
    let sst: f64 = y_true.iter().map(|a| (a - mean).powi(2)).sum();
    let mae = y_true.iter().zip(y_pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
    Ok(MetricsReport { r2: (sst > 0.0).then(|| 1.0 - sse / sst), rmse: (sse / n).sqrt(), mae })
}
