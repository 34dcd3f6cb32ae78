//! Heavy-tailed noise and volatility fields.
//!
//! The noise `Z` has Pareto magnitude: `P(|Z| > x) = (scale/x)^alpha` for
//! `x >= scale`, with sign `+1` with probability `q_plus` and `-1` with
//! `q_minus`. The slowly varying factor of the regular-variation tail is fixed
//! to a constant, which makes the normalizing sequences closed-form.
//!
//! The volatility field `sigma` comes in three variants: a degenerate constant,
//! a bounded strongly mixing stationary field (a Gaussian AR(1) pushed through
//! a bounded increasing transform, with an optional common factor coupling the
//! rows), and an n-dependent "thinned" discrete field that is zero with
//! probability approaching one.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::rng::rng_from_seed;
use crate::{Error, Result};

pub use crate::rng::derive_subseed;

/// Distribution family of the iid noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    /// `q_plus = q_minus = 1/2`; mean zero by symmetry for every `alpha`.
    SymmetricPareto,
    /// Asymmetric signs; for `alpha > 2` the closed-form mean is subtracted
    /// so that `E[Z] = 0`.
    SkewedPareto,
}

/// Specification of the iid heavy-tailed noise `Z` with an exact tail oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    family: NoiseFamily,
    alpha: f64,
    q_plus: f64,
    q_minus: f64,
    scale: f64,
}

impl NoiseSpec {
    /// Builds a spec, rejecting `alpha` outside `(0,2) U (2,4)`, sign
    /// probabilities that do not sum to one, or a non-positive scale.
    pub fn new(
        family: NoiseFamily,
        alpha: f64,
        q_plus: f64,
        q_minus: f64,
        scale: f64,
    ) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 4.0 || alpha == 2.0 {
            return Err(Error::InvalidSpec(format!(
                "alpha must lie in (0,2) or (2,4), got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&q_plus) || !(0.0..=1.0).contains(&q_minus) {
            return Err(Error::InvalidSpec(
                "sign probabilities must lie in [0,1]".into(),
            ));
        }
        if (q_plus + q_minus - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "q_plus + q_minus must equal 1 within 1e-12, got {}",
                q_plus + q_minus
            )));
        }
        if family == NoiseFamily::SymmetricPareto && (q_plus - q_minus).abs() > 1e-12 {
            return Err(Error::InvalidSpec(
                "symmetric-pareto requires q_plus = q_minus = 1/2".into(),
            ));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(NoiseSpec {
            family,
            alpha,
            q_plus,
            q_minus,
            scale,
        })
    }

    /// Symmetric Pareto noise with the given tail index and scale.
    pub fn symmetric_pareto(alpha: f64, scale: f64) -> Result<Self> {
        NoiseSpec::new(NoiseFamily::SymmetricPareto, alpha, 0.5, 0.5, scale)
    }

    /// Skewed Pareto noise.
    pub fn skewed_pareto(alpha: f64, q_plus: f64, scale: f64) -> Result<Self> {
        NoiseSpec::new(NoiseFamily::SkewedPareto, alpha, q_plus, 1.0 - q_plus, scale)
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q_plus(&self) -> f64 {
        self.q_plus
    }

    pub fn q_minus(&self) -> f64 {
        self.q_minus
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Exact tail of the Pareto magnitude: `P(|Z| > x) = (scale/x)^alpha` for
    /// `x >= scale`, and 1 below the support.
    ///
    /// For skewed noise with `alpha > 2` the sampler shifts entries by the
    /// closed-form mean; the tail oracle refers to the unshifted magnitude,
    /// which is also the exact asymptotic tail function.
    pub fn tail(&self, x: f64) -> f64 {
        assert!(x > 0.0, "tail requires x > 0");
        if x <= self.scale {
            1.0
        } else {
            (self.scale / x).powf(self.alpha)
        }
    }

    /// `P(Z^2 > y)`, the tail of the squared noise.
    pub fn tail_squared(&self, y: f64) -> f64 {
        assert!(y > 0.0, "tail_squared requires y > 0");
        self.tail(y.sqrt())
    }

    /// The mean subtracted from each entry so that `E[Z] = 0`.
    ///
    /// Non-zero only for skewed noise with `alpha > 2`; symmetry handles the
    /// symmetric family and no centering is applied for `alpha < 2`.
    pub fn mean_shift(&self) -> f64 {
        match self.family {
            NoiseFamily::SymmetricPareto => 0.0,
            NoiseFamily::SkewedPareto => {
                if self.alpha > 2.0 {
                    (self.q_plus - self.q_minus) * self.alpha * self.scale / (self.alpha - 1.0)
                } else {
                    0.0
                }
            }
        }
    }

    /// `E[Z^2] = scale^2 * alpha / (alpha - 2)` for `alpha > 2`.
    ///
    /// The second moment of the sampled noise: the magnitude is Pareto and the
    /// mean shift for skewed noise changes `E[Z^2]` by `-shift^2`.
    pub fn second_moment(&self) -> Result<f64> {
        if self.alpha <= 2.0 {
            return Err(Error::MomentUnavailable(format!(
                "E[Z^2] is infinite for alpha = {}",
                self.alpha
            )));
        }
        let raw = self.scale * self.scale * self.alpha / (self.alpha - 2.0);
        let shift = self.mean_shift();
        Ok(raw - shift * shift)
    }

    /// Samples a `p x n` matrix of iid noise. Identical seeds yield
    /// bit-identical matrices; entries are filled in column-major order and
    /// each entry consumes one uniform for the magnitude and one for the sign.
    pub fn sample(&self, p: usize, n: usize, seed: u64) -> DMatrix<f64> {
        assert!(p >= 1 && n >= 1, "sample_noise requires p >= 1 and n >= 1");
        let mut rng = rng_from_seed(seed);
        let shift = self.mean_shift();
        let inv_alpha = 1.0 / self.alpha;
        DMatrix::from_fn(p, n, |_, _| {
            // from_fn fills column-major for DMatrix
            let u: f64 = rng.gen();
            let magnitude = self.scale * (1.0 - u).powf(-inv_alpha);
            let s: f64 = rng.gen();
            let sign = if s < self.q_plus { 1.0 } else { -1.0 };
            sign * magnitude - shift
        })
    }
}

/// Exact `P(|Z| > x)` for a noise spec; free-function form of [`NoiseSpec::tail`].
pub fn noise_tail(spec: &NoiseSpec, x: f64) -> f64 {
    spec.tail(x)
}

/// Samples a `p x n` noise matrix; free-function form of [`NoiseSpec::sample`].
pub fn sample_noise(spec: &NoiseSpec, p: usize, n: usize, seed: u64) -> DMatrix<f64> {
    spec.sample(p, n, seed)
}

/// Bounded increasing map applied to the latent Gaussian field.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    /// `x -> sqrt(M) * (0.1 + 0.9 * logistic(x))`, strictly increasing with
    /// range `(0.1 sqrt(M), sqrt(M))`.
    ScaledLogistic,
    /// Constant volatility `c` with `0 < c <= sqrt(M)`; the degenerate limit
    /// used to cross-check the Monte Carlo moment estimator.
    Constant(f64),
}

impl Transform {
    fn apply(&self, bound_m: f64, x: f64) -> f64 {
        match self {
            Transform::ScaledLogistic => {
                let logistic = 1.0 / (1.0 + (-x).exp());
                bound_m.sqrt() * (0.1 + 0.9 * logistic)
            }
            Transform::Constant(c) => *c,
        }
    }
}

/// Thinning probability rule: the simplex `(q_0, ..., q_m)` as a function of `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbRule {
    /// `q_j(n) = c_j * n^{-v}` with `v` in `(0,1]`; `q_0(n) = 1 - sum` tends
    /// to one, and `n q_j -> infinity` exactly when `v < 1`.
    PowerLaw { coeffs: Vec<f64>, exponent: f64 },
    /// n-independent probabilities for the non-zero levels.
    Fixed { probs: Vec<f64> },
}

impl ProbRule {
    /// Probabilities `(q_1, ..., q_m)` of the non-zero levels at sample size `n`.
    pub fn level_probs(&self, n: usize) -> Result<Vec<f64>> {
        let q: Vec<f64> = match self {
            ProbRule::PowerLaw { coeffs, exponent } => {
                let f = (n as f64).powf(-exponent);
                coeffs.iter().map(|c| c * f).collect()
            }
            ProbRule::Fixed { probs } => probs.clone(),
        };
        let total: f64 = q.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "thinning probabilities sum to {total} > 1 at n = {n}"
            )));
        }
        Ok(q)
    }
}

/// Specification of the volatility field.
#[derive(Debug, Clone, PartialEq)]
pub enum VolatilitySpec {
    /// `sigma = value` everywhere.
    Degenerate { value: f64 },
    /// Stationary bounded mixing field: per-row Gaussian AR(1) with
    /// coefficient `rho_time` pushed through `transform`; rows share a common
    /// AR(1) factor with weight `rho_row` (`rho_row = 0` gives iid rows).
    BoundedMixing {
        bound_m: f64,
        rho_time: f64,
        rho_row: f64,
        transform: Transform,
    },
    /// n-dependent iid field on `{0, s_1, ..., s_m}` with probabilities
    /// `(q_0(n), ..., q_m(n))`.
    Thinned { levels: Vec<f64>, prob_rule: ProbRule },
}

impl VolatilitySpec {
    /// Constant volatility.
    pub fn degenerate(value: f64) -> Result<Self> {
        let spec = VolatilitySpec::Degenerate { value };
        spec.validate()?;
        Ok(spec)
    }

    /// Bounded mixing volatility with the default scaled-logistic transform.
    pub fn bounded_mixing(bound_m: f64, rho_time: f64, rho_row: f64) -> Result<Self> {
        let spec = VolatilitySpec::BoundedMixing {
            bound_m,
            rho_time,
            rho_row,
            transform: Transform::ScaledLogistic,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Thinned volatility with a power-law rule `q_j(n) = c_j n^{-v}`.
    pub fn thinned_power_law(levels: Vec<f64>, coeffs: Vec<f64>, exponent: f64) -> Result<Self> {
        let spec = VolatilitySpec::Thinned {
            levels,
            prob_rule: ProbRule::PowerLaw { coeffs, exponent },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the variant's invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            VolatilitySpec::Degenerate { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "degenerate volatility must be non-negative, got {value}"
                    )));
                }
            }
            VolatilitySpec::BoundedMixing {
                bound_m,
                rho_time,
                rho_row,
                transform,
            } => {
                if !(*bound_m > 0.0) {
                    return Err(Error::InvalidSpec("bound_M must be positive".into()));
                }
                if rho_time.abs() >= 1.0 {
                    return Err(Error::InvalidSpec(format!(
                        "rho_time must lie in (-1,1), got {rho_time}"
                    )));
                }
                if !(0.0..1.0).contains(rho_row) {
                    return Err(Error::InvalidSpec(format!(
                        "rho_row must lie in [0,1), got {rho_row}"
                    )));
                }
                if let Transform::Constant(c) = transform {
                    if !(*c > 0.0) || *c > bound_m.sqrt() {
                        return Err(Error::InvalidSpec(format!(
                            "constant transform must lie in (0, sqrt(M)], got {c}"
                        )));
                    }
                }
            }
            VolatilitySpec::Thinned { levels, prob_rule } => {
                if levels.is_empty() {
                    return Err(Error::InvalidSpec("thinned requires at least one level".into()));
                }
                let increasing = levels.windows(2).all(|w| w[0] < w[1]);
                if !increasing || levels[0] <= 0.0 {
                    return Err(Error::InvalidSpec(
                        "levels must be strictly increasing and positive".into(),
                    ));
                }
                match prob_rule {
                    ProbRule::PowerLaw { coeffs, exponent } => {
                        if coeffs.len() != levels.len() {
                            return Err(Error::InvalidSpec(
                                "one coefficient per level required".into(),
                            ));
                        }
                        if coeffs.iter().any(|c| *c < 0.0) {
                            return Err(Error::InvalidSpec("coefficients must be >= 0".into()));
                        }
                        if !(*exponent > 0.0) || *exponent > 1.0 {
                            return Err(Error::InvalidSpec(format!(
                                "thinning exponent must lie in (0,1], got {exponent}"
                            )));
                        }
                    }
                    ProbRule::Fixed { probs } => {
                        if probs.len() != levels.len() {
                            return Err(Error::InvalidSpec(
                                "one probability per level required".into(),
                            ));
                        }
                        if probs.iter().any(|q| !(0.0..=1.0).contains(q)) {
                            return Err(Error::InvalidSpec("probabilities must lie in [0,1]".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Samples the `p x n` volatility matrix.
    ///
    /// For the thinned variant `n_model` selects the distribution of
    /// `sigma^(n_model)`; the other variants ignore it.
    pub fn sample(&self, p: usize, n: usize, n_model: usize, seed: u64) -> Result<DMatrix<f64>> {
        self.validate()?;
        match self {
            VolatilitySpec::Degenerate { value } => Ok(DMatrix::from_element(p, n, *value)),
            VolatilitySpec::BoundedMixing {
                bound_m,
                rho_time,
                rho_row,
                transform,
            } => {
                let mut rng = rng_from_seed(seed);
                // Common factor first, then each row; both stationary AR(1).
                let common = ar1_series(n, *rho_time, &mut rng);
                let w_common = rho_row.sqrt();
                let w_own = (1.0 - rho_row).sqrt();
                let mut out = DMatrix::zeros(p, n);
                for i in 0..p {
                    let own = ar1_series(n, *rho_time, &mut rng);
                    for t in 0..n {
                        let latent = w_common * common[t] + w_own * own[t];
                        out[(i, t)] = transform.apply(*bound_m, latent);
                    }
                }
                Ok(out)
            }
            VolatilitySpec::Thinned { levels, prob_rule } => {
                let q = prob_rule.level_probs(n_model)?;
                let mut cumulative = Vec::with_capacity(q.len());
                let mut acc = 0.0;
                for qi in &q {
                    acc += qi;
                    cumulative.push(acc);
                }
                let mut rng = rng_from_seed(seed);
                Ok(DMatrix::from_fn(p, n, |_, _| {
                    let u: f64 = rng.gen();
                    match cumulative.iter().position(|c| u < *c) {
                        Some(j) => levels[j],
                        None => 0.0,
                    }
                }))
            }
        }
    }
}

/// Stationary standard Gaussian AR(1) path of length `n`.
fn ar1_series(n: usize, rho: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let innovation_scale = (1.0 - rho * rho).sqrt();
    let mut series = Vec::with_capacity(n);
    let mut x: f64 = rng.sample(StandardNormal);
    series.push(x);
    for _ in 1..n {
        let eps: f64 = rng.sample(StandardNormal);
        x = rho * x + innovation_scale * eps;
        series.push(x);
    }
    series
}

/// Samples the volatility field; free-function form of [`VolatilitySpec::sample`].
pub fn sample_volatility(
    spec: &VolatilitySpec,
    p: usize,
    n: usize,
    n_model: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    spec.sample(p, n, n_model, seed)
}
