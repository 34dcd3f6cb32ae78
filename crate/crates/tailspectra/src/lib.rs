//! Simulation laboratory for the eigenstructure of sample covariance matrices
//! built from high-dimensional, heavy-tailed stochastic volatility models.
//!
//! A data matrix `X` has entries `X[i][t] = sigma[i][t] * Z[i][t]`: a light-tailed
//! non-negative volatility field times iid noise whose magnitude is Pareto with
//! tail index `alpha` in `(0,4)`. At that tail weight the sample covariance
//! matrix `S = X X'` is dominated by its diagonal, the largest eigenvalues obey
//! Frechet/Poisson limit laws, and eigenvectors localize. This crate generates
//! the models, computes exact and approximate spectra, evaluates the limit-law
//! oracles, and drives Monte Carlo experiments that check each of these
//! phenomena at desk scale.
//!
//! Module map:
//!
//! | Module          | Contents                                                          |
//! |-----------------|-------------------------------------------------------------------|
//! | [`sampling`]    | Noise and volatility specifications and samplers                  |
//! | [`model`]       | Data matrices, dependence matrices `A`, band-structure statistics |
//! | [`normalization`] | The sequences `a_np`, `b_n`, `c_n` and the dimension rule       |
//! | [`spectra`]     | Covariance spectra, diagonal approximations, eigenvector errors   |
//! | [`limits`]      | Frechet/Poisson/stable limit oracles and statistical distances    |
//! | [`harness`]     | Experiment configs, runners, CSV records, JSON reports            |
//!
//! Everything is a pure function of `(spec, dims, seed)`; see [`rng`] for the
//! seed-derivation scheme that keeps parallel sweeps bit-reproducible.
//!
//! ```
//! use tailspectra::sampling::NoiseSpec;
//! use tailspectra::normalization::a_sequence;
//!
//! let noise = NoiseSpec::symmetric_pareto(1.0, 1.0)?;
//! // a_k solves k * P(|Z| > a_k) = 1; for Pareto(1) that is a_k = k.
//! assert_eq!(a_sequence(&noise, 1000.0), 1000.0);
//! # Ok::<(), tailspectra::Error>(())
//! ```

pub mod error;
pub mod harness;
pub mod limits;
pub mod model;
pub mod normalization;
pub mod rng;
pub mod sampling;
pub(crate) mod util;
pub mod spectra;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

// The guide chapters in `book/` double as doc-tests so their snippets stay
// compilable. mdbook cannot run snippets against the crate, `cargo test` can.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/dependence.md")]
    mod dependence {}
    #[doc = include_str!("../../../book/src/limits.md")]
    mod limits {}
    #[doc = include_str!("../../../book/src/thinning.md")]
    mod thinning {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
