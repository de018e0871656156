//! Latin Hypercube designs, affine scaling to physical bounds and the
//! standard-normal quantile used for stochastic inputs.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TrkError};

/// Random-permutation Latin Hypercube: `n` points in `[0, 1)^dim`, exactly
/// one per stratum `[k/n, (k+1)/n)` in every dimension, jittered uniformly
/// inside the stratum.
pub fn lhs(n: usize, dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, dim);
    let nf = n as f64;
    for k in 0..dim {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (i, s) in strata.into_iter().enumerate() {
            let u: f64 = rng.random();
            out[(i, k)] = within_stratum((s as f64 + u) / nf, s, nf);
        }
    }
    out
}

/// Nudges `v` so that `floor(v * n) == stratum` despite rounding.
fn within_stratum(mut v: f64, stratum: usize, n: f64) -> f64 {
    let s = stratum as f64;
    while (v * n).floor() > s {
        v = v.next_down();
    }
    while (v * n).floor() < s {
        v = v.next_up();
    }
    v
}

/// Maps unit-cube points to `bounds` per dimension.
pub fn scale_to_bounds(points: &DMatrix<f64>, bounds: &[(f64, f64)]) -> Result<DMatrix<f64>> {
    check_bounds(points, bounds)?;
    Ok(DMatrix::from_fn(points.nrows(), points.ncols(), |i, k| {
        let (lo, hi) = bounds[k];
        lo + points[(i, k)] * (hi - lo)
    }))
}

/// Inverse of [`scale_to_bounds`].
pub fn unscale_from_bounds(points: &DMatrix<f64>, bounds: &[(f64, f64)]) -> Result<DMatrix<f64>> {
    check_bounds(points, bounds)?;
    Ok(DMatrix::from_fn(points.nrows(), points.ncols(), |i, k| {
        let (lo, hi) = bounds[k];
        (points[(i, k)] - lo) / (hi - lo)
    }))
}

fn check_bounds(points: &DMatrix<f64>, bounds: &[(f64, f64)]) -> Result<()> {
    if bounds.len() != points.ncols() {
        return Err(TrkError::DimensionMismatch { expected: points.ncols(), actual: bounds.len() });
    }
    if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo < hi)) {
        return Err(TrkError::InvalidArgument(format!("bounds must satisfy low < high, got ({lo}, {hi})")));
    }
    Ok(())
}

/// `mean + sd * Phi^-1(u)`.
pub fn normal_transform(u: f64, mean: f64, sd: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(TrkError::InvalidArgument(format!("probability must lie in (0, 1), got {u}")));
    }
    if !(sd > 0.0) {
        return Err(TrkError::InvalidArgument(format!("standard deviation must be positive, got {sd}")));
    }
    Ok(mean + sd * standard_normal_quantile(u))
}

/// Standard normal quantile, Wichura's AS 241 (PPND16); relative accuracy
/// about 1e-16.
pub fn standard_normal_quantile(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((r * 2509.080_928_730_122_7 + 33430.575_583_588_128) * r + 67265.770_927_008_700) * r
                + 45921.953_931_549_871)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((r * 5226.495_278_852_545_5 + 28729.085_735_721_942) * r + 39307.895_800_092_710) * r
                + 21213.794_301_586_595)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_911)
                * r
                + 1.0);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        (((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_6) * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_100_0)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((r * 2.010_334_399_292_288_1e-7 + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}
