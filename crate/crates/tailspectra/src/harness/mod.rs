//! Monte Carlo experiment harness: configuration, scheduling, records.
//!
//! An [`ExperimentConfig`] names one experiment kind, the noise/volatility
//! model, the dimension rule, an `n`-grid and a replication count. Running it
//! yields one [`DiagnosticsRecord`] per `(n, replication)` (the
//! large-deviation experiment aggregates its replications into one record per
//! `n`). Records are a pure function of the config: every task derives its
//! own seed from `(master_seed, n, replication)`, tasks run on a rayon pool
//! of any size, and the merge is sorted, so serial and parallel runs emit
//! byte-identical CSV.

pub mod config;
pub mod csv;
pub mod report;

use rayon::prelude::*;

use crate::limits::{gamma_n, large_deviation_ratio};
use crate::model::{DataMatrix, DependenceMatrix};
use crate::normalization::{
    a_sequence, b_sequence, centering, dimension_rule, sigma_alpha_moment,
    sigma_alpha_moment_exact,
};
use crate::rng::{derive_subseed, derive_task_seed};
use crate::sampling::{NoiseSpec, ProbRule, VolatilitySpec};
use crate::spectra::{
    diag_approx_spectrum, eigenvalues_sym, eigenvector_error, fmatrix_spectrum,
    offdiag_ratio_of_cov, row_sums_squares, sample_covariance, top_eigenpairs,
};
use crate::{Error, Result};

/// Seed stream tag for the Monte Carlo moment estimate.
const MOMENT_SEED_STREAM: u64 = 0x4d4f_4d45;
/// Seed stream tag for the dependence-matrix perturbation.
const PERTURB_SEED_STREAM: u64 = 0x5045_5254;
/// Seed stream tag for the large-deviation runs (combined with n).
const LD_SEED_STREAM: u64 = 0x4c44_5652;

/// Monte Carlo sample count used to estimate `P_n(A, k)` in experiment records.
const NB_MC_SAMPLES: usize = 100_000;

/// The experiment families the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    DiagApprox,
    PointProcess,
    FrechetTop,
    TraceTail,
    FmatrixEigen,
    EigenvectorLoc,
    ThinnedDiag,
    ThinnedPp,
    LdRatio,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::DiagApprox => "diag-approx",
            ExperimentKind::PointProcess => "point-process",
            ExperimentKind::FrechetTop => "frechet-top",
            ExperimentKind::TraceTail => "trace-tail",
            ExperimentKind::FmatrixEigen => "fmatrix-eigen",
            ExperimentKind::EigenvectorLoc => "eigenvector-loc",
            ExperimentKind::ThinnedDiag => "thinned-diag",
            ExperimentKind::ThinnedPp => "thinned-pp",
            ExperimentKind::LdRatio => "ld-ratio",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "diag-approx" => ExperimentKind::DiagApprox,
            "point-process" => ExperimentKind::PointProcess,
            "frechet-top" => ExperimentKind::FrechetTop,
            "trace-tail" => ExperimentKind::TraceTail,
            "fmatrix-eigen" => ExperimentKind::FmatrixEigen,
            "eigenvector-loc" => ExperimentKind::EigenvectorLoc,
            "thinned-diag" => ExperimentKind::ThinnedDiag,
            "thinned-pp" => ExperimentKind::ThinnedPp,
            "ld-ratio" => ExperimentKind::LdRatio,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown experiment kind '{other}'"
                )))
            }
        })
    }

    fn is_thinned(&self) -> bool {
        matches!(self, ExperimentKind::ThinnedDiag | ExperimentKind::ThinnedPp)
    }

    fn needs_dependence(&self) -> bool {
        matches!(
            self,
            ExperimentKind::FmatrixEigen | ExperimentKind::EigenvectorLoc
        )
    }
}

/// Rule for the band-inspection width `k_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKRule {
    /// `k_p = floor(p^{1/4})`, which satisfies `k_p -> infinity` with
    /// `k_p^3 = o(p)`.
    QuarterPower,
    /// A fixed inspection width.
    Fixed(usize),
}

impl BandKRule {
    pub fn k_for(&self, p: usize) -> usize {
        match self {
            BandKRule::QuarterPower => ((p as f64).powf(0.25).floor() as usize).clamp(1, p),
            BandKRule::Fixed(k) => (*k).clamp(1, p),
        }
    }

    pub fn as_config_string(&self) -> String {
        match self {
            BandKRule::QuarterPower => "p^{1/4}".to_string(),
            BandKRule::Fixed(k) => format!("fixed({k})"),
        }
    }
}

/// Recipe for building the dependence matrix at each grid dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum DependenceRecipe {
    Band {
        bandwidth: usize,
        diag: f64,
        profile: Vec<f64>,
    },
    PerturbedBand {
        bandwidth: usize,
        diag: f64,
        profile: Vec<f64>,
        num_dense_rows: usize,
    },
}

impl DependenceRecipe {
    /// Checks the recipe constraints at dimension `p` without building.
    pub fn validate_for(&self, p: usize) -> Result<()> {
        let (bandwidth, diag, profile, dense) = match self {
            DependenceRecipe::Band {
                bandwidth,
                diag,
                profile,
            } => (*bandwidth, *diag, profile, 0),
            DependenceRecipe::PerturbedBand {
                bandwidth,
                diag,
                profile,
                num_dense_rows,
            } => (*bandwidth, *diag, profile, *num_dense_rows),
        };
        if bandwidth >= p {
            return Err(Error::InvalidArgument(format!(
                "bandwidth {bandwidth} must be smaller than p = {p}"
            )));
        }
        if profile.len() != bandwidth {
            return Err(Error::InvalidArgument(format!(
                "profile must list one value per lag 1..={bandwidth}, got {}",
                profile.len()
            )));
        }
        let off_sum: f64 = profile.iter().map(|v| 2.0 * v.abs()).sum();
        if diag <= off_sum {
            return Err(Error::NotPositiveDefinite(format!(
                "diagonal dominance violated: diag {diag} <= 2 sum |profile| = {off_sum}"
            )));
        }
        if dense > p {
            return Err(Error::InvalidArgument(format!(
                "num_dense_rows {dense} exceeds p = {p}"
            )));
        }
        Ok(())
    }

    /// Builds the matrix at dimension `p`; the perturbation stream is derived
    /// from the master seed.
    pub fn build(&self, p: usize, master_seed: u64) -> Result<DependenceMatrix> {
        match self {
            DependenceRecipe::Band {
                bandwidth,
                diag,
                profile,
            } => DependenceMatrix::band(p, *bandwidth, *diag, profile),
            DependenceRecipe::PerturbedBand {
                bandwidth,
                diag,
                profile,
                num_dense_rows,
            } => {
                let base = DependenceMatrix::band(p, *bandwidth, *diag, profile)?;
                DependenceMatrix::perturb_band(
                    &base,
                    *num_dense_rows,
                    derive_subseed(master_seed, PERTURB_SEED_STREAM),
                )
            }
        }
    }
}

/// Full description of one experiment sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub noise: NoiseSpec,
    pub vol: VolatilitySpec,
    pub beta: f64,
    pub ell_const: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub top_k: usize,
    pub thresholds: Vec<f64>,
    pub band_k_rule: BandKRule,
    pub master_seed: u64,
    pub output_path: String,
    pub dependence: Option<DependenceRecipe>,
    /// Exponent offset in the large-deviation level `gamma_n = n^{2/alpha+eps}`.
    pub ld_epsilon: f64,
    /// Draws for the Monte Carlo volatility moment when no closed form exists.
    pub moment_mc_samples: usize,
}

impl ExperimentConfig {
    /// A config with the harness defaults for everything but the experiment,
    /// model, and grid.
    pub fn new(
        experiment: ExperimentKind,
        noise: NoiseSpec,
        vol: VolatilitySpec,
        n_grid: Vec<usize>,
        replications: usize,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            experiment,
            noise,
            vol,
            beta: 0.7,
            ell_const: 1.0,
            n_grid,
            replications,
            top_k: 2,
            thresholds: vec![0.5, 1.0, 2.0, 4.0],
            band_k_rule: BandKRule::QuarterPower,
            master_seed,
            output_path: "records.csv".to_string(),
            dependence: None,
            ld_epsilon: 0.1,
            moment_mc_samples: 200_000,
        }
    }

    /// Checks all invariants; returns advisory warnings (e.g. a thinning rule
    /// too aggressive for the configured grid).
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("n_grid must not be empty".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "n_grid must be strictly ascending".into(),
            ));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidConfig("top_k must be >= 1".into()));
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::InvalidConfig(
                "thresholds must be positive and non-empty".into(),
            ));
        }
        if !(self.ld_epsilon > 0.0) {
            return Err(Error::InvalidConfig("ld_epsilon must be positive".into()));
        }
        self.vol.validate()?;
        let thinned_vol = matches!(self.vol, VolatilitySpec::Thinned { .. });
        if self.experiment.is_thinned() && !thinned_vol {
            return Err(Error::InvalidConfig(format!(
                "{} requires a thinned volatility spec",
                self.experiment.as_str()
            )));
        }
        if thinned_vol && !self.experiment.is_thinned() && self.experiment != ExperimentKind::LdRatio
        {
            return Err(Error::InvalidConfig(format!(
                "{} uses the a_np normalization; thinned volatility needs the thinned-* experiments",
                self.experiment.as_str()
            )));
        }
        if self.experiment.needs_dependence() && self.dependence.is_none() {
            return Err(Error::InvalidConfig(format!(
                "{} requires a [dependence] recipe",
                self.experiment.as_str()
            )));
        }
        let mut min_p = usize::MAX;
        for &n in &self.n_grid {
            let p = dimension_rule(n, self.beta, self.ell_const)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            min_p = min_p.min(p);
            if let Some(recipe) = &self.dependence {
                recipe
                    .validate_for(p)
                    .map_err(|e| Error::InvalidConfig(format!("dependence recipe: {e}")))?;
            }
            if thinned_vol {
                // surfaces rules whose probabilities overflow at small n
                if let VolatilitySpec::Thinned { prob_rule, .. } = &self.vol {
                    prob_rule
                        .level_probs(n)
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                }
                b_sequence(&self.noise, &self.vol, n, p)
                    .map_err(|e| Error::InvalidConfig(format!("at n = {n}: {e}")))?;
            }
        }
        if self.experiment == ExperimentKind::EigenvectorLoc && self.top_k > min_p {
            return Err(Error::InvalidConfig(format!(
                "top_k = {} exceeds the smallest grid dimension p = {min_p}",
                self.top_k
            )));
        }
        if self.noise.alpha() > 2.0 && self.experiment != ExperimentKind::DiagApprox {
            // everything except the centering-free ratio needs an exact E[sigma^2]
            centering(&self.noise, &self.vol, self.n_grid[0], self.n_grid[0]).map_err(|_| {
                Error::InvalidConfig(
                    "alpha > 2 needs a closed-form E[sigma^2] for the centering c_n; \
                     use a degenerate, thinned, or constant-transform volatility"
                        .into(),
                )
            })?;
        }
        Ok(self.warnings())
    }

    fn min_recipe_p(&self) -> usize {
        match &self.dependence {
            Some(DependenceRecipe::Band { bandwidth, .. })
            | Some(DependenceRecipe::PerturbedBand { bandwidth, .. }) => bandwidth + 1,
            None => 1,
        }
    }

    /// Advisory warnings: the point-process limit for the thinned model needs
    /// `p exp(-c n q_j) -> 0` for the levels with `n q_j -> infinity`; at desk
    /// scale a rule with `p exp(-n q_j) > 0.05` at the top of the grid will
    /// converge poorly.
    fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let VolatilitySpec::Thinned { prob_rule, .. } = &self.vol {
            let &n_max = self.n_grid.last().expect("validated non-empty");
            if let (Ok(p), Ok(q)) = (
                dimension_rule(n_max, self.beta, self.ell_const),
                prob_rule.level_probs(n_max),
            ) {
                for (j, qj) in q.iter().enumerate() {
                    let mass = p as f64 * (-(n_max as f64) * qj).exp();
                    if mass > 0.05 {
                        out.push(format!(
                            "thinning level {} has p exp(-n q) = {mass:.3} at n = {n_max}; \
                             the point-process limit requires p exp(-c n q) -> 0 for each c > 0",
                            j + 1
                        ));
                    }
                }
            }
        }
        out
    }
}

/// One named metric value; `value` is absent when the quantity is undefined
/// (then `flag` says why).
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: Option<f64>,
    pub flag: Option<String>,
}

impl Metric {
    fn plain(name: impl Into<String>, value: f64) -> Self {
        Metric {
            name: name.into(),
            value: Some(value),
            flag: None,
        }
    }

    fn flagged(name: impl Into<String>, value: Option<f64>, flag: impl Into<String>) -> Self {
        Metric {
            name: name.into(),
            value,
            flag: Some(flag.into()),
        }
    }
}

/// All metrics of one `(n, replication)` task.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub p: usize,
    pub replication: usize,
    pub metrics: Vec<Metric>,
}

/// Per-grid-point constants shared by every replication.
struct GridPoint {
    n: usize,
    p: usize,
    a_np_sq: f64,
    b_n_sq: Option<f64>,
    c_n: f64,
    moment: f64,
    moment_std_error: Option<f64>,
    dependence: Option<DependenceMatrix>,
    band_k: usize,
}

fn grid_points(config: &ExperimentConfig) -> Result<Vec<GridPoint>> {
    let mut points = Vec::with_capacity(config.n_grid.len());
    for &n in &config.n_grid {
        let p = dimension_rule(n, config.beta, config.ell_const)?;
        let a_np = a_sequence(&config.noise, (n * p) as f64);
        let thinned = matches!(config.vol, VolatilitySpec::Thinned { .. });
        let b_n_sq = if thinned {
            let b = b_sequence(&config.noise, &config.vol, n, p)?;
            Some(b * b)
        } else {
            None
        };
        let c_n = if config.noise.alpha() < 2.0 {
            0.0
        } else {
            centering(&config.noise, &config.vol, n, n)?
        };
        let (moment, moment_std_error) = match sigma_alpha_moment_exact(&config.vol, config.noise.alpha(), n)
        {
            Ok(v) => (v, None),
            Err(_) => {
                let est = sigma_alpha_moment(
                    &config.vol,
                    config.noise.alpha(),
                    n,
                    config.moment_mc_samples,
                    derive_subseed(config.master_seed, MOMENT_SEED_STREAM),
                )?;
                (est.value, est.std_error)
            }
        };
        let dependence = match &config.dependence {
            Some(recipe) if config.experiment.needs_dependence() => {
                Some(recipe.build(p, config.master_seed)?)
            }
            _ => None,
        };
        points.push(GridPoint {
            n,
            p,
            a_np_sq: a_np * a_np,
            b_n_sq,
            c_n,
            moment,
            moment_std_error,
            dependence,
            band_k: config.band_k_rule.k_for(p),
        });
    }
    Ok(points)
}

/// Runs every `(n, replication)` task of the config and returns the records
/// sorted by `(n, replication)`. Identical configs produce identical records
/// on any thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<DiagnosticsRecord>> {
    config.validate()?;
    let points = grid_points(config)?;
    if config.experiment == ExperimentKind::LdRatio {
        return run_ld_ratio(config, &points);
    }
    let tasks: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(gi, _)| (0..config.replications).map(move |r| (gi, r)))
        .collect();
    let mut records = tasks
        .par_iter()
        .map(|&(gi, r)| run_task(config, &points[gi], r))
        .collect::<Result<Vec<DiagnosticsRecord>>>()?;
    records.sort_by_key(|rec| (rec.n, rec.replication));
    check_finiteness(&records)?;
    Ok(records)
}

fn run_ld_ratio(config: &ExperimentConfig, points: &[GridPoint]) -> Result<Vec<DiagnosticsRecord>> {
    let mut records = Vec::with_capacity(points.len());
    for point in points {
        let alpha = config.noise.alpha();
        let y = gamma_n(alpha, point.n, config.ld_epsilon);
        let est = large_deviation_ratio(
            &config.noise,
            &config.vol,
            point.n,
            y,
            config.replications,
            derive_subseed(
                derive_subseed(config.master_seed, LD_SEED_STREAM),
                point.n as u64,
            ),
        )?;
        let mut metrics = vec![Metric::plain("alpha", alpha)];
        if est.underpowered {
            metrics.push(Metric::flagged("ld_ratio", Some(est.ratio), "underpowered"));
        } else {
            metrics.push(Metric::plain("ld_ratio", est.ratio));
        }
        metrics.push(Metric::plain("ld_std_error", est.std_error));
        metrics.push(Metric::plain("ld_level", y));
        records.push(DiagnosticsRecord {
            experiment: config.experiment,
            n: point.n,
            p: point.p,
            replication: 0,
            metrics,
        });
    }
    check_finiteness(&records)?;
    Ok(records)
}

fn run_task(
    config: &ExperimentConfig,
    point: &GridPoint,
    replication: usize,
) -> Result<DiagnosticsRecord> {
    let seed = derive_task_seed(config.master_seed, point.n, replication);
    let x = DataMatrix::generate(&config.noise, &config.vol, point.p, point.n, point.n, seed)?;
    let alpha = config.noise.alpha();
    let mut metrics = vec![Metric::plain("alpha", alpha)];

    match config.experiment {
        ExperimentKind::DiagApprox | ExperimentKind::ThinnedDiag => {
            let norm_sq = point.b_n_sq.unwrap_or(point.a_np_sq);
            let s = sample_covariance(&x);
            metrics.push(Metric::plain(
                "offdiag_ratio",
                offdiag_ratio_of_cov(&s, norm_sq),
            ));
            if let Some(b_sq) = point.b_n_sq {
                metrics.push(Metric::plain("b2_over_a2", b_sq / point.a_np_sq));
            }
        }
        ExperimentKind::PointProcess | ExperimentKind::ThinnedPp => {
            let norm_sq = point.b_n_sq.unwrap_or(point.a_np_sq);
            let s = sample_covariance(&x);
            let eigs = eigenvalues_sym(&s)?;
            metrics.push(Metric::plain("sigma_alpha_moment", point.moment));
            if let Some(se) = point.moment_std_error {
                metrics.push(Metric::plain("sigma_alpha_moment_se", se));
            }
            for &x_thr in &config.thresholds {
                let above = eigs
                    .iter()
                    .filter(|l| (**l - point.c_n) / norm_sq > x_thr)
                    .count();
                let below = eigs
                    .iter()
                    .filter(|l| (**l - point.c_n) / norm_sq < -x_thr)
                    .count();
                metrics.push(Metric::plain(format!("count_exceed@{x_thr}"), above as f64));
                metrics.push(Metric::plain(format!("count_neg@{x_thr}"), below as f64));
            }
            if let Some(b_sq) = point.b_n_sq {
                metrics.push(Metric::plain("b2_over_a2", b_sq / point.a_np_sq));
            }
        }
        ExperimentKind::FrechetTop => {
            let s = sample_covariance(&x);
            let top = top_eigenpairs(&s, 1)?;
            let lambda1 = top[0].value;
            let value =
                point.moment.powf(2.0 / alpha) * (lambda1 - point.c_n) / point.a_np_sq;
            metrics.push(Metric::plain("sigma_alpha_moment", point.moment));
            metrics.push(Metric::plain("lambda1_normalized", value));
        }
        ExperimentKind::TraceTail => {
            let trace: f64 = row_sums_squares(&x).iter().sum();
            let value = (trace - point.p as f64 * point.c_n) / point.a_np_sq;
            metrics.push(Metric::plain("trace_normalized", value));
        }
        ExperimentKind::FmatrixEigen => {
            let a = point.dependence.as_ref().expect("validated");
            let s = sample_covariance(&x);
            let f_spec = fmatrix_spectrum(a, &s, point.c_n)?;
            let s_diag: Vec<f64> = (0..point.p).map(|i| s[(i, i)]).collect();
            let approx = diag_approx_spectrum(&s_diag, &a.diagonal(), point.c_n);
            let gap = f_spec
                .iter()
                .zip(&approx)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0f64, f64::max);
            metrics.push(Metric::plain("fmatrix_gap", gap / point.a_np_sq));
            if replication == 0 {
                let nb = a.nb_statistic(
                    point.band_k,
                    NB_MC_SAMPLES,
                    derive_subseed(seed, 2),
                );
                metrics.push(Metric::plain("nb_estimate", nb.value));
                if let Some(se) = nb.std_error {
                    metrics.push(Metric::plain("nb_std_error", se));
                }
            }
        }
        ExperimentKind::EigenvectorLoc => {
            let a = point.dependence.as_ref().expect("validated");
            let s = sample_covariance(&x);
            for j in 0..config.top_k {
                let err = eigenvector_error(a, &s, point.c_n, j)?;
                let name = format!("ev_error@{}", j + 1);
                if err.degenerate {
                    metrics.push(Metric::flagged(name, None, "degenerate"));
                } else {
                    metrics.push(Metric::plain(name, err.distance));
                }
            }
            if replication == 0 {
                let nb = a.nb_statistic(point.band_k, NB_MC_SAMPLES, derive_subseed(seed, 2));
                metrics.push(Metric::plain("nb_estimate", nb.value));
            }
        }
        ExperimentKind::LdRatio => unreachable!("handled by run_ld_ratio"),
    }

    Ok(DiagnosticsRecord {
        experiment: config.experiment,
        n: point.n,
        p: point.p,
        replication,
        metrics,
    })
}

/// NaN and infinity are forbidden in records; undefined quantities must carry
/// an explicit flag with no value instead.
fn check_finiteness(records: &[DiagnosticsRecord]) -> Result<()> {
    for rec in records {
        for metric in &rec.metrics {
            if let Some(v) = metric.value {
                if !v.is_finite() {
                    return Err(Error::Numerical(format!(
                        "metric {} at n = {}, replication {} is {v}",
                        metric.name, rec.n, rec.replication
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Validation warning helper for thinned rules (exposed for the CLI).
pub fn condition_check_warnings(config: &ExperimentConfig) -> Vec<String> {
    config.warnings()
}

/// Convenience: does this volatility spec admit closed-form moments?
pub fn has_exact_moment(vol: &VolatilitySpec) -> bool {
    !matches!(
        vol,
        VolatilitySpec::BoundedMixing {
            transform: crate::sampling::Transform::ScaledLogistic,
            ..
        }
    )
}

/// Re-exported for config parsing.
pub(crate) fn default_prob_rule_kind(rule: &ProbRule) -> &'static str {
    match rule {
        ProbRule::PowerLaw { .. } => "power-law",
        ProbRule::Fixed { .. } => "fixed",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(kind: ExperimentKind) -> ExperimentConfig {
        let noise = NoiseSpec::symmetric_pareto(1.0, 1.0).unwrap();
        let vol = VolatilitySpec::degenerate(1.0).unwrap();
        ExperimentConfig::new(kind, noise, vol, vec![50, 100], 3, 42)
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let mut c = base_config(ExperimentKind::DiagApprox);
        c.n_grid = vec![];
        assert!(c.validate().is_err());
        c.n_grid = vec![100, 100];
        assert!(c.validate().is_err());
        c.n_grid = vec![200, 100];
        assert!(c.validate().is_err());
    }

    #[test]
    fn validation_enforces_thinned_pairing() {
        let mut c = base_config(ExperimentKind::ThinnedDiag);
        assert!(c.validate().is_err());
        c.vol = VolatilitySpec::thinned_power_law(vec![1.0], vec![1.0], 0.5).unwrap();
        assert!(c.validate().is_ok());

        let mut c2 = base_config(ExperimentKind::DiagApprox);
        c2.vol = VolatilitySpec::thinned_power_law(vec![1.0], vec![1.0], 0.5).unwrap();
        assert!(c2.validate().is_err());
    }

    #[test]
    fn validation_requires_dependence_recipe() {
        let mut c = base_config(ExperimentKind::FmatrixEigen);
        assert!(c.validate().is_err());
        c.dependence = Some(DependenceRecipe::Band {
            bandwidth: 1,
            diag: 2.0,
            profile: vec![0.5],
        });
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validation_blocks_uncenterable_alpha_above_two() {
        let mut c = base_config(ExperimentKind::FrechetTop);
        c.noise = NoiseSpec::symmetric_pareto(3.0, 1.0).unwrap();
        c.vol = VolatilitySpec::bounded_mixing(4.0, 0.5, 0.0).unwrap();
        assert!(c.validate().is_err());
        c.vol = VolatilitySpec::degenerate(1.0).unwrap();
        assert!(c.validate().is_ok());
    }

    #[test]
    fn thinned_warning_fires_for_aggressive_rules() {
        let mut c = base_config(ExperimentKind::ThinnedDiag);
        // v = 1: n q = c stays bounded, p e^{-nq} is large
        c.vol = VolatilitySpec::thinned_power_law(vec![1.0], vec![200.0], 1.0).unwrap();
        c.n_grid = vec![400, 800];
        let warnings = c.validate().unwrap();
        assert!(!warnings.is_empty());
    }

    #[test]
    fn degenerate_zero_volatility_gives_zero_ratios() {
        let mut c = base_config(ExperimentKind::DiagApprox);
        c.vol = VolatilitySpec::degenerate(0.0).unwrap();
        let records = run_experiment(&c).unwrap();
        assert_eq!(records.len(), 6);
        for rec in &records {
            let m = rec
                .metrics
                .iter()
                .find(|m| m.name == "offdiag_ratio")
                .unwrap();
            assert_eq!(m.value, Some(0.0));
        }
    }

    #[test]
    fn records_are_sorted_and_deterministic() {
        let c = base_config(ExperimentKind::DiagApprox);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a, b);
        let keys: Vec<(usize, usize)> = a.iter().map(|r| (r.n, r.replication)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn seed_isolation_when_extending_replications() {
        let mut c = base_config(ExperimentKind::DiagApprox);
        c.replications = 3;
        let short = run_experiment(&c).unwrap();
        c.replications = 4;
        let long = run_experiment(&c).unwrap();
        for rec in &short {
            let twin = long
                .iter()
                .find(|r| r.n == rec.n && r.replication == rec.replication)
                .unwrap();
            assert_eq!(rec, twin);
        }
    }

    #[test]
    fn thread_pools_do_not_change_records() {
        let c = base_config(ExperimentKind::PointProcess);
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_experiment(&c).unwrap())
        };
        assert_eq!(run_with(1), run_with(4));
    }

    #[test]
    fn frechet_top_records_carry_normalized_lambda() {
        let c = base_config(ExperimentKind::FrechetTop);
        let records = run_experiment(&c).unwrap();
        for rec in &records {
            assert!(rec
                .metrics
                .iter()
                .any(|m| m.name == "lambda1_normalized" && m.value.unwrap() > 0.0));
        }
    }

    #[test]
    fn ld_ratio_emits_one_record_per_n() {
        let mut c = base_config(ExperimentKind::LdRatio);
        c.n_grid = vec![20, 40];
        c.replications = 5000;
        let records = run_experiment(&c).unwrap();
        assert_eq!(records.len(), 2);
        for rec in &records {
            assert_eq!(rec.replication, 0);
            assert!(rec.metrics.iter().any(|m| m.name == "ld_ratio"));
        }
    }

    #[test]
    fn eigenvector_loc_emits_per_rank_metrics() {
        let mut c = base_config(ExperimentKind::EigenvectorLoc);
        c.dependence = Some(DependenceRecipe::Band {
            bandwidth: 1,
            diag: 2.0,
            profile: vec![0.5],
        });
        c.top_k = 2;
        let records = run_experiment(&c).unwrap();
        for rec in &records {
            assert!(rec.metrics.iter().any(|m| m.name == "ev_error@1"));
            assert!(rec.metrics.iter().any(|m| m.name == "ev_error@2"));
        }
    }
}
