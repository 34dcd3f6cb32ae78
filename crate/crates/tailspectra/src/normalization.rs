//! Normalizing and centering sequences.
//!
//! The eigenvalue scale is set by `a_k`, the exact solution of
//! `k * P(|Z| > a_k) = 1`. With pure Pareto tails this is `a_k = scale * k^{1/alpha}`
//! in closed form, so every downstream tolerance is sharp rather than
//! asymptotic-up-to-slowly-varying. The thinned model replaces `a_np` by
//! `b_n = a_{floor(np E[(sigma^(n))^alpha])}`, and for `alpha` in `(2,4)` the
//! eigenvalues are centered by `c_n = n E[X^2]`.

use crate::sampling::{NoiseSpec, Transform, VolatilitySpec};
use crate::{Error, Result};

/// The full set of constants for one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationConstants {
    /// `a_{np}^2`, the eigenvalue scale of the un-thinned model.
    pub a_np_sq: f64,
    /// `b_n^2` for thinned models, absent otherwise.
    pub b_n_sq: Option<f64>,
    /// Centering `c_n`: zero for `alpha < 2`, `n E[X^2]` for `alpha` in `(2,4)`.
    pub c_n: f64,
    /// Dimension at this grid point.
    pub p: usize,
    /// Sample size at this grid point.
    pub n: usize,
    /// Growth exponent from the dimension rule.
    pub beta: f64,
    /// Constant prefactor of the dimension rule.
    pub ell_const: f64,
    /// `E[sigma^alpha]` (or `E[(sigma^(n))^alpha]` for thinned models).
    pub sigma_alpha_moment: f64,
}

/// Dimension growth rule `p = max(1, round(ell_const * n^beta))`.
///
/// `beta` outside `(0,1]` is rejected; the regime `beta > 1` is intentionally
/// not modelled (there the non-zero spectra of `X X'` and `X' X` coincide and
/// the transposed matrix should be studied instead).
pub fn dimension_rule(n: usize, beta: f64, ell_const: f64) -> Result<usize> {
    if !(beta > 0.0) || beta > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "beta must lie in (0,1], got {beta}"
        )));
    }
    if !(ell_const > 0.0) || !ell_const.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ell_const must be positive, got {ell_const}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let p = (ell_const * (n as f64).powf(beta)).round();
    Ok((p as usize).max(1))
}

/// The exact solution `a_k` of `k * P(|Z| > a_k) = 1`.
///
/// For the Pareto tail `(scale/x)^alpha` this is `scale * k^{1/alpha}`.
///
/// ```
/// use tailspectra::{normalization::a_sequence, sampling::NoiseSpec};
/// let noise = NoiseSpec::symmetric_pareto(3.0, 1.0)?;
/// assert!((a_sequence(&noise, 1000.0) - 10.0).abs() < 1e-13);
/// # Ok::<(), tailspectra::Error>(())
/// ```
pub fn a_sequence(spec: &NoiseSpec, k: f64) -> f64 {
    assert!(k >= 1.0, "a_sequence requires k >= 1");
    spec.scale() * k.powf(1.0 / spec.alpha())
}

/// Monte Carlo or exact estimate of a volatility moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    /// Standard error of the Monte Carlo mean; `None` when the value is exact.
    pub std_error: Option<f64>,
}

impl MomentEstimate {
    fn exact(value: f64) -> Self {
        MomentEstimate {
            value,
            std_error: None,
        }
    }
}

/// `E[sigma^alpha]`, exact where the law is discrete and by Monte Carlo for
/// the bounded mixing field (sampling the stationary marginal).
pub fn sigma_alpha_moment(
    spec: &VolatilitySpec,
    alpha: f64,
    n_model: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    assert!(alpha > 0.0, "moment order must be positive");
    spec.validate()?;
    match spec {
        VolatilitySpec::Degenerate { value } => Ok(MomentEstimate::exact(value.powf(alpha))),
        VolatilitySpec::Thinned { levels, prob_rule } => {
            let q = prob_rule.level_probs(n_model)?;
            let value = levels
                .iter()
                .zip(&q)
                .map(|(s, qj)| qj * s.powf(alpha))
                .sum();
            Ok(MomentEstimate::exact(value))
        }
        VolatilitySpec::BoundedMixing { .. } => {
            if mc_samples == 0 {
                return Err(Error::InvalidArgument(
                    "mc_samples must be >= 1 for bounded-mixing moments".into(),
                ));
            }
            // The stationary marginal of the latent field is standard normal,
            // so sampling a 1 x mc_samples slice with rho_time = rho_row = 0
            // draws iid copies of sigma.
            let marginal = match spec {
                VolatilitySpec::BoundedMixing {
                    bound_m, transform, ..
                } => VolatilitySpec::BoundedMixing {
                    bound_m: *bound_m,
                    rho_time: 0.0,
                    rho_row: 0.0,
                    transform: transform.clone(),
                },
                _ => unreachable!(),
            };
            let draws = marginal.sample(1, mc_samples, n_model, seed)?;
            let powered: Vec<f64> = draws.iter().map(|s| s.powf(alpha)).collect();
            let n = powered.len() as f64;
            let mean = powered.iter().sum::<f64>() / n;
            let var = powered.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            Ok(MomentEstimate {
                value: mean,
                std_error: Some((var / n).sqrt()),
            })
        }
    }
}

/// `E[sigma^alpha]` when it is available in closed form, error otherwise.
pub fn sigma_alpha_moment_exact(
    spec: &VolatilitySpec,
    alpha: f64,
    n_model: usize,
) -> Result<f64> {
    match spec {
        VolatilitySpec::BoundedMixing { transform, .. } => match transform {
            Transform::Constant(c) => Ok(c.powf(alpha)),
            Transform::ScaledLogistic => Err(Error::MomentUnavailable(
                "bounded-mixing with the logistic transform has no closed-form moment".into(),
            )),
        },
        _ => Ok(sigma_alpha_moment(spec, alpha, n_model, 1, 0)?.value),
    }
}

/// The thinned normalizing sequence `b_n = a_{floor(np E[(sigma^(n))^alpha])}`.
///
/// Errors when the effective index `np E[(sigma^(n))^alpha]` falls below one
/// (the thinning extinguishes too aggressively for this `n`).
pub fn b_sequence(spec: &NoiseSpec, vol: &VolatilitySpec, n: usize, p: usize) -> Result<f64> {
    if !matches!(vol, VolatilitySpec::Thinned { .. }) {
        return Err(Error::InvalidArgument(
            "b_sequence requires a thinned volatility spec".into(),
        ));
    }
    let moment = sigma_alpha_moment_exact(vol, spec.alpha(), n)?;
    let effective = (n as f64) * (p as f64) * moment;
    if effective < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "effective index np E[(sigma^(n))^alpha] = {effective} < 1"
        )));
    }
    let k = effective.floor().max(1.0);
    Ok(a_sequence(spec, k))
}

/// Centering sequence: `0` for `alpha < 2`, `n E[sigma^2] E[Z^2]` for
/// `alpha` in `(2,4)`.
///
/// Errors when `alpha > 2` but `E[sigma^2]` has no closed form (bounded-mixing
/// with the logistic transform).
pub fn centering(spec: &NoiseSpec, vol: &VolatilitySpec, n: usize, n_model: usize) -> Result<f64> {
    if spec.alpha() < 2.0 {
        return Ok(0.0);
    }
    let sigma_sq = sigma_alpha_moment_exact(vol, 2.0, n_model)?;
    Ok(n as f64 * sigma_sq * spec.second_moment()?)
}

/// Assembles all constants for a grid point `n` of an experiment.
pub fn constants_for(
    spec: &NoiseSpec,
    vol: &VolatilitySpec,
    n: usize,
    beta: f64,
    ell_const: f64,
) -> Result<NormalizationConstants> {
    let p = dimension_rule(n, beta, ell_const)?;
    let a_np = a_sequence(spec, (n * p) as f64);
    let thinned = matches!(vol, VolatilitySpec::Thinned { .. });
    let b_n_sq = if thinned {
        let b = b_sequence(spec, vol, n, p)?;
        Some(b * b)
    } else {
        None
    };
    let c_n = centering(spec, vol, n, n)?;
    let sigma_alpha_moment = match sigma_alpha_moment_exact(vol, spec.alpha(), n) {
        Ok(v) => v,
        // The Monte Carlo value is filled in by the harness when needed.
        Err(_) => f64::NAN,
    };
    Ok(NormalizationConstants {
        a_np_sq: a_np * a_np,
        b_n_sq,
        c_n,
        p,
        n,
        beta,
        ell_const,
        sigma_alpha_moment,
    })
}
