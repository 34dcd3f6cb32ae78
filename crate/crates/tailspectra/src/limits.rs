//! Exact limit-law oracles and statistical distance measures.
//!
//! The normalized largest eigenvalue converges to a Frechet law with
//! parameter `alpha/2`; the point process of all normalized eigenvalues
//! converges to a Poisson process with mean measure
//! `mu(x, inf) = E[sigma^alpha] x^{-alpha/2}` whose points have the
//! Gamma-sum representation `(Gamma_i / E[sigma^alpha])^{-2/alpha}`; and the
//! normalized trace has a totally right-skewed `alpha/2`-stable limit, checked
//! here through its tail index. The large-deviation ratio diagnostic compares
//! `P(S_1 > y)` against its one-jump approximation `n E[sigma^alpha] P(Z^2 > y)`
//! deep in the tail.

use rand::Rng;
use rayon::prelude::*;

use crate::model::DataMatrix;
use crate::normalization::{centering, sigma_alpha_moment_exact};
use crate::rng::{derive_subseed, rng_from_seed};
use crate::sampling::{NoiseSpec, VolatilitySpec};
use crate::spectra::row_sums_squares;
use crate::{Error, Result};

/// Frechet CDF with parameter `alpha/2`: `exp(-x^{-alpha/2})` for `x > 0`.
pub fn frechet_cdf(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-x.powf(-alpha / 2.0)).exp()
    }
}

/// Mean measure of the limiting Poisson process on the positive half-line:
/// `mu(x, inf) = moment * x^{-alpha/2}`. The negative half-line carries no
/// mass.
pub fn mean_measure(alpha: f64, moment: f64, x: f64) -> f64 {
    assert!(x > 0.0, "mean_measure requires x > 0");
    assert!(moment > 0.0, "moment must be positive");
    moment * x.powf(-alpha / 2.0)
}

/// The first `k` points of the limiting Poisson process,
/// `(Gamma_i / moment)^{-2/alpha}` with `Gamma_i` partial sums of iid unit
/// exponentials; strictly decreasing almost surely.
pub fn sample_limit_points(alpha: f64, moment: f64, k: usize, seed: u64) -> Vec<f64> {
    assert!(alpha > 0.0, "alpha must be positive");
    assert!(moment > 0.0, "moment must be positive");
    assert!(k >= 1, "k must be at least 1");
    let mut rng = rng_from_seed(seed);
    let mut gamma = 0.0f64;
    let mut points = Vec::with_capacity(k);
    for _ in 0..k {
        let u: f64 = rng.gen();
        gamma += -(1.0 - u).ln();
        points.push((gamma / moment).powf(-2.0 / alpha));
    }
    points
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and the target `cdf`.
///
/// The statistic is evaluated at the sorted sample points against both step
/// levels `i/N` and `(i+1)/N`, which makes it deterministic under ties.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "ks_distance requires samples");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        sup = sup
            .max((f - i as f64 / n).abs())
            .max((f - (i + 1) as f64 / n).abs());
    }
    sup
}

/// Classical Hill estimator of the tail index from the top `k_upper` order
/// statistics: `k / sum_{i<k} ln(x_(i) / x_(k))` on the descending order
/// statistics. Scale-invariant.
pub fn hill_estimator(samples: &[f64], k_upper: usize) -> Result<f64> {
    if k_upper < 10 {
        return Err(Error::InvalidArgument(format!(
            "hill estimator needs at least 10 upper order statistics, got {k_upper}"
        )));
    }
    if k_upper >= samples.len() {
        return Err(Error::InvalidArgument(format!(
            "k_upper = {k_upper} must be smaller than the sample size {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidArgument(
            "hill estimator requires strictly positive samples".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let threshold = sorted[k_upper];
    let log_sum: f64 = sorted[..k_upper]
        .iter()
        .map(|x| (x / threshold).ln())
        .sum();
    if log_sum <= 0.0 {
        return Err(Error::Numerical(
            "degenerate log-spacings in hill estimator".into(),
        ));
    }
    Ok(k_upper as f64 / log_sum)
}

/// Default number of upper order statistics for Hill: `floor(N^{2/3})`.
pub fn hill_default_k(n_samples: usize) -> usize {
    (n_samples as f64).powf(2.0 / 3.0).floor() as usize
}

/// The large-deviation threshold `gamma_n = n^{2/alpha + epsilon}`.
pub fn gamma_n(alpha: f64, n: usize, epsilon: f64) -> f64 {
    assert!(epsilon > 0.0, "epsilon must be positive");
    (n as f64).powf(2.0 / alpha + epsilon)
}

/// Monte Carlo estimate of the large-deviation ratio
/// `P(S_1 > y + c_n 1{alpha>2}) / (n E[sigma^alpha] P(Z^2 > y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub ratio: f64,
    /// Standard error propagated from the binomial exceedance count.
    pub std_error: f64,
    pub exceedances: u64,
    pub reps: usize,
    /// No exceedances were observed; the estimate carries no information.
    pub underpowered: bool,
}

/// Estimates the ratio of the exact row-sum tail to its one-jump
/// approximation at level `y`, over `reps` independent replications of the
/// row sum `S_1 = sum_t X_{1t}^2`.
///
/// The denominator uses the exact `E[sigma^alpha]`, so the volatility spec
/// must have a closed-form moment. Replications are independent streams
/// derived from `seed`; the result does not depend on thread count.
pub fn large_deviation_ratio(
    noise: &NoiseSpec,
    vol: &VolatilitySpec,
    n: usize,
    y: f64,
    reps: usize,
    seed: u64,
) -> Result<RatioEstimate> {
    assert!(reps >= 1, "reps must be at least 1");
    assert!(
        y >= (n as f64).powf(2.0 / noise.alpha()),
        "y must lie in the large-deviation regime y >= n^(2/alpha)"
    );
    let moment = sigma_alpha_moment_exact(vol, noise.alpha(), n)?;
    let denominator = n as f64 * moment * noise.tail_squared(y);
    if denominator <= 0.0 {
        return Err(Error::InvalidArgument(
            "level y is beyond the representable tail".into(),
        ));
    }
    let shift = centering(noise, vol, n, n)?;
    let level = y + shift;
    let exceedances: u64 = (0..reps)
        .into_par_iter()
        .map(|t| {
            let x = DataMatrix::generate(noise, vol, 1, n, n, derive_subseed(seed, t as u64))
                .expect("spec validated above");
            let s1 = row_sums_squares(&x)[0];
            u64::from(s1 > level)
        })
        .sum();
    let p_hat = exceedances as f64 / reps as f64;
    let se_p = (p_hat * (1.0 - p_hat) / reps as f64).sqrt();
    Ok(RatioEstimate {
        ratio: p_hat / denominator,
        std_error: se_p / denominator,
        exceedances,
        reps,
        underpowered: exceedances == 0,
    })
}
