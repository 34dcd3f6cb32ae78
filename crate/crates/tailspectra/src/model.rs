//! Data matrices `X = sigma . Z`, dependence matrices `A`, and the band
//! structure statistics behind the nearly-banded condition.
//!
//! A [`DependenceMatrix`] is symmetric positive definite with a cached square
//! root, so `Y = A^{1/2} X` gives the columns covariance structure `A`. Band
//! matrices are built diagonally dominant, which yields positive definiteness
//! and an explicit uniform spectral bound across a whole dimension grid.
//!
//! The band statistics quantify how far a matrix is from banded: `j_statistic`
//! inspects `k` chosen rows and reports whether they rule out bandwidth `k`,
//! and `nb_statistic` is the probability that a uniformly random choice of
//! `k` rows betrays the violation. All indices are 0-based.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::rng::rng_from_seed;
use crate::sampling::{NoiseSpec, VolatilitySpec};
use crate::util::{binomial_capped, format_f64_17};
use crate::{Error, Result};

/// Subset-count threshold below which `nb_statistic` is computed exactly.
pub const NB_EXACT_THRESHOLD: f64 = 1e5;

/// Where a data matrix came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub noise: NoiseSpec,
    pub vol: VolatilitySpec,
    pub seed: u64,
}

/// The `p x n` data matrix of the stochastic volatility model.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    entries: DMatrix<f64>,
    provenance: Option<Provenance>,
}

impl DataMatrix {
    /// Hadamard product `X = sigma . z` of a volatility field and a noise field.
    pub fn assemble(sigma: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<Self> {
        if sigma.shape() != z.shape() {
            return Err(Error::DimensionMismatch(format!(
                "sigma is {:?}, z is {:?}",
                sigma.shape(),
                z.shape()
            )));
        }
        Ok(DataMatrix {
            entries: sigma.component_mul(z),
            provenance: None,
        })
    }

    /// Samples sigma and Z from their specs and assembles `X`.
    ///
    /// The noise stream is `derive_subseed(seed, 0)` and the volatility stream
    /// `derive_subseed(seed, 1)`, so the two fields are independent.
    pub fn generate(
        noise: &NoiseSpec,
        vol: &VolatilitySpec,
        p: usize,
        n: usize,
        n_model: usize,
        seed: u64,
    ) -> Result<Self> {
        let z = noise.sample(p, n, crate::rng::derive_subseed(seed, 0));
        let sigma = vol.sample(p, n, n_model, crate::rng::derive_subseed(seed, 1))?;
        let mut data = DataMatrix::assemble(&sigma, &z)?;
        data.provenance = Some(Provenance {
            noise: noise.clone(),
            vol: vol.clone(),
            seed,
        });
        Ok(data)
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n(&self) -> usize {
        self.entries.ncols()
    }
}

/// Hadamard product as a free function; see [`DataMatrix::assemble`].
pub fn assemble(sigma: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<DataMatrix> {
    DataMatrix::assemble(sigma, z)
}

/// Symmetric positive definite dependence matrix with cached square root.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceMatrix {
    entries: DMatrix<f64>,
    sqrt_entries: DMatrix<f64>,
    declared_bandwidth: Option<usize>,
    spectral_bound: f64,
}

impl DependenceMatrix {
    /// Identity dependence (iid columns).
    pub fn identity(p: usize) -> Self {
        DependenceMatrix {
            entries: DMatrix::identity(p, p),
            sqrt_entries: DMatrix::identity(p, p),
            declared_bandwidth: Some(0),
            spectral_bound: 1.0,
        }
    }

    /// Symmetric band matrix: `diag_value` on the diagonal and
    /// `offdiag_profile[lag-1]` at distance `lag` for `lag = 1..=bandwidth`.
    ///
    /// Requires strict diagonal dominance
    /// `diag_value > 2 * sum |offdiag_profile|`, which makes the matrix
    /// positive definite with smallest eigenvalue at least the dominance
    /// margin and spectral norm at most `diag_value + 2 * sum |profile|`.
    pub fn band(
        p: usize,
        bandwidth: usize,
        diag_value: f64,
        offdiag_profile: &[f64],
    ) -> Result<Self> {
        if bandwidth >= p {
            return Err(Error::InvalidArgument(format!(
                "bandwidth {bandwidth} must be smaller than p = {p}"
            )));
        }
        if offdiag_profile.len() != bandwidth {
            return Err(Error::InvalidArgument(format!(
                "profile must list one value per lag 1..={bandwidth}, got {}",
                offdiag_profile.len()
            )));
        }
        if !(diag_value > 0.0) {
            return Err(Error::InvalidArgument("diag_value must be positive".into()));
        }
        let off_sum: f64 = offdiag_profile.iter().map(|v| 2.0 * v.abs()).sum();
        if diag_value <= off_sum {
            return Err(Error::NotPositiveDefinite(format!(
                "diagonal dominance violated: diag {diag_value} <= 2 sum |profile| = {off_sum}"
            )));
        }
        let mut entries = DMatrix::zeros(p, p);
        for i in 0..p {
            entries[(i, i)] = diag_value;
            for (lag_idx, value) in offdiag_profile.iter().enumerate() {
                let lag = lag_idx + 1;
                if i + lag < p {
                    entries[(i, i + lag)] = *value;
                    entries[(i + lag, i)] = *value;
                }
            }
        }
        let sqrt_entries = matrix_sqrt(&entries)?;
        let spectral_bound = diag_value + off_sum;
        let dep = DependenceMatrix {
            entries,
            sqrt_entries,
            declared_bandwidth: Some(bandwidth),
            spectral_bound,
        };
        dep.check_sqrt()?;
        Ok(dep)
    }

    /// Perturbs a band matrix into a nearly banded one: picks
    /// `num_dense_rows` row/column indices and fills their mutual crossing
    /// positions symmetrically with small entries (at most
    /// `spectral_bound / 2p` in magnitude). Only the selected rows can violate
    /// the band structure, so the nearly-banded statistic stays small.
    /// Positive definiteness is re-checked; the declared bandwidth is cleared.
    pub fn perturb_band(base: &DependenceMatrix, num_dense_rows: usize, seed: u64) -> Result<Self> {
        if num_dense_rows == 0 {
            return Ok(base.clone());
        }
        let p = base.p();
        if num_dense_rows > p {
            return Err(Error::InvalidArgument(format!(
                "num_dense_rows {num_dense_rows} exceeds p = {p}"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let mut rows = sample_indices(&mut rng, p, num_dense_rows).into_vec();
        rows.sort_unstable();
        let cap = base.spectral_bound / (2.0 * p as f64);
        let mut entries = base.entries.clone();
        for (a_idx, &i) in rows.iter().enumerate() {
            for &j in rows.iter().skip(a_idx + 1) {
                let value = rng.gen_range(-cap..=cap);
                entries[(i, j)] = value;
                entries[(j, i)] = value;
            }
        }
        let eigen = symmetric_eigenvalues(&entries);
        let min = eigen.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "perturbation drove the smallest eigenvalue to {min}"
            )));
        }
        let max = eigen.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sqrt_entries = matrix_sqrt(&entries)?;
        let dep = DependenceMatrix {
            entries,
            sqrt_entries,
            declared_bandwidth: None,
            spectral_bound: base.spectral_bound.max(max),
        };
        dep.check_sqrt()?;
        Ok(dep)
    }

    /// Wraps an explicit symmetric positive definite matrix, computing its
    /// square root and spectral bound.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&entries)?;
        let eigen = symmetric_eigenvalues(&entries);
        let min = eigen.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "smallest eigenvalue is {min}"
            )));
        }
        let max = eigen.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sqrt_entries = matrix_sqrt(&entries)?;
        let dep = DependenceMatrix {
            entries,
            sqrt_entries,
            declared_bandwidth: None,
            spectral_bound: max * (1.0 + 1e-12),
        };
        dep.check_sqrt()?;
        Ok(dep)
    }

    fn check_sqrt(&self) -> Result<()> {
        let p = self.p() as f64;
        let residual = (&self.sqrt_entries * &self.sqrt_entries) - &self.entries;
        let frob = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
        if frob > 1e-8 * p {
            return Err(Error::Numerical(format!(
                "square root residual {frob} exceeds 1e-8 * p"
            )));
        }
        Ok(())
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The cached symmetric positive definite square root `A^{1/2}`.
    pub fn sqrt_entries(&self) -> &DMatrix<f64> {
        &self.sqrt_entries
    }

    pub fn declared_bandwidth(&self) -> Option<usize> {
        self.declared_bandwidth
    }

    /// Uniform bound on the spectral norm, valid across a grid built from the
    /// same recipe.
    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    /// Diagonal of `A` as a vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.p()).map(|i| self.entries[(i, i)]).collect()
    }

    /// `true` iff `A[i][j] = 0` whenever `|i - j| > k`.
    pub fn is_band(&self, k: usize) -> bool {
        is_band(&self.entries, k)
    }

    /// Nearly-banded statistic with automatic exact/Monte Carlo dispatch; see
    /// [`nb_statistic`]. Returns exact zero without sampling when the declared
    /// bandwidth is at most `k`.
    pub fn nb_statistic(&self, k: usize, num_samples: usize, seed: u64) -> NbEstimate {
        if let Some(bw) = self.declared_bandwidth {
            if bw <= k {
                return NbEstimate {
                    value: 0.0,
                    std_error: None,
                    exact: true,
                };
            }
        }
        nb_statistic(&self.entries, k, num_samples, seed)
    }
}

/// Multiplies the dependence square root into a data matrix: `Y = A^{1/2} X`.
pub fn apply_dependence(a_sqrt: &DMatrix<f64>, x: &DataMatrix) -> Result<DMatrix<f64>> {
    if a_sqrt.ncols() != x.p() {
        return Err(Error::DimensionMismatch(format!(
            "A^(1/2) is {}x{}, X has p = {}",
            a_sqrt.nrows(),
            a_sqrt.ncols(),
            x.p()
        )));
    }
    Ok(a_sqrt * x.entries())
}

/// Symmetric positive definite square root via the spectral decomposition
/// `A = O T O'`, returning `O T^{1/2} O'`.
pub fn matrix_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(a)?;
    let eigen = nalgebra::SymmetricEigen::new(a.clone());
    if let Some(min) = eigen.eigenvalues.iter().copied().reduce(f64::min) {
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "smallest eigenvalue is {min}"
            )));
        }
    }
    let sqrt_vals = eigen.eigenvalues.map(f64::sqrt);
    let scaled = &eigen.eigenvectors * DMatrix::from_diagonal(&sqrt_vals);
    let root = &scaled * eigen.eigenvectors.transpose();
    // enforce exact symmetry against rounding in the triple product
    let mut sym = root.clone();
    for i in 0..sym.nrows() {
        for j in 0..i {
            let v = 0.5 * (root[(i, j)] + root[(j, i)]);
            sym[(i, j)] = v;
            sym[(j, i)] = v;
        }
    }
    Ok(sym)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSymmetric(format!(
            "matrix is {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::NotSymmetric(format!(
                    "entries ({i},{j}) and ({j},{i}) differ by {}",
                    (m[(i, j)] - m[(j, i)]).abs()
                )));
            }
        }
    }
    Ok(())
}

fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// `true` iff `m[i][j] = 0` for all `|i - j| > k`.
pub fn is_band(m: &DMatrix<f64>, k: usize) -> bool {
    let p = m.nrows();
    for i in 0..p {
        for j in 0..p {
            if i.abs_diff(j) > k && m[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

/// Row-inspection statistic `J_{k,p}`: for a strictly increasing tuple `a` of
/// length `k`, returns 1 iff some selected row `a_i` carries a non-zero entry
/// at a column `j` with `|j - a_i| > k` (the inspected rows rule out
/// bandwidth `k`), else 0.
pub fn j_statistic(m: &DMatrix<f64>, a: &[usize]) -> u8 {
    let p = m.nrows();
    assert!(!a.is_empty(), "j_statistic requires a non-empty tuple");
    assert!(
        a.windows(2).all(|w| w[0] < w[1]),
        "indices must be strictly increasing"
    );
    assert!(*a.last().unwrap() < p, "indices must lie in [0, p)");
    let k = a.len();
    for &row in a {
        for j in 0..p {
            if j.abs_diff(row) > k && m[(row, j)] != 0.0 {
                return 1;
            }
        }
    }
    0
}

/// Rows that carry a non-zero entry beyond distance `k`.
fn violating_rows(m: &DMatrix<f64>, k: usize) -> usize {
    let p = m.nrows();
    (0..p)
        .filter(|&i| (0..p).any(|j| j.abs_diff(i) > k && m[(i, j)] != 0.0))
        .count()
}

/// Probability estimate with its sampling uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbEstimate {
    pub value: f64,
    /// `sqrt(q(1-q)/num_samples)` for the Monte Carlo route, `None` when exact.
    pub std_error: Option<f64>,
    pub exact: bool,
}

/// Exact `P_n(A, k)`: the probability that `k` uniformly chosen rows betray a
/// band-structure violation. `J` depends on the tuple only through whether it
/// hits a violating row, so the average over all tuples collapses to
/// `1 - C(p-V, k)/C(p, k)` with `V` the number of violating rows.
pub fn nb_exact(m: &DMatrix<f64>, k: usize) -> f64 {
    let p = m.nrows();
    assert!(k >= 1 && k <= p, "nb statistics require 1 <= k <= p");
    let v = violating_rows(m, k);
    if v == 0 {
        return 0.0;
    }
    if p - v < k {
        return 1.0;
    }
    let mut ratio = 1.0f64;
    for i in 0..k {
        ratio *= (p - v - i) as f64 / (p - i) as f64;
    }
    1.0 - ratio
}

/// Monte Carlo estimate of `P_n(A, k)` over `num_samples` uniformly drawn
/// `k`-subsets, evaluating `j_statistic` on each draw.
pub fn nb_monte_carlo(m: &DMatrix<f64>, k: usize, num_samples: usize, seed: u64) -> NbEstimate {
    let p = m.nrows();
    assert!(k >= 1 && k <= p, "nb statistics require 1 <= k <= p");
    assert!(num_samples >= 1, "num_samples must be >= 1");
    let mut rng = rng_from_seed(seed);
    let mut hits = 0u64;
    for _ in 0..num_samples {
        let mut subset = sample_indices(&mut rng, p, k).into_vec();
        subset.sort_unstable();
        hits += u64::from(j_statistic(m, &subset));
    }
    let q = hits as f64 / num_samples as f64;
    NbEstimate {
        value: q,
        std_error: Some((q * (1.0 - q) / num_samples as f64).sqrt()),
        exact: false,
    }
}

/// `P_n(A, k)` with the documented dispatch: exact when `C(p,k) <= 1e5`,
/// Monte Carlo with a reported standard error otherwise.
pub fn nb_statistic(m: &DMatrix<f64>, k: usize, num_samples: usize, seed: u64) -> NbEstimate {
    let p = m.nrows();
    if binomial_capped(p, k, NB_EXACT_THRESHOLD).is_some() {
        NbEstimate {
            value: nb_exact(m, k),
            std_error: None,
            exact: true,
        }
    } else {
        nb_monte_carlo(m, k, num_samples, seed)
    }
}

/// Writes a matrix as CSV: a `rows,cols` header line, then one row per line
/// with 17-significant-digit entries.
pub fn dump_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{},{}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_f64_17(m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a matrix written by [`dump_matrix_csv`].
pub fn load_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::RecordsParse {
        line: 1,
        message: "empty matrix file".into(),
    })?;
    let dims: Vec<&str> = header.split(',').collect();
    if dims.len() != 2 {
        return Err(Error::RecordsParse {
            line: 1,
            message: format!("expected 'rows,cols' header, got '{header}'"),
        });
    }
    let parse_dim = |s: &str| {
        s.trim().parse::<usize>().map_err(|_| Error::RecordsParse {
            line: 1,
            message: format!("bad dimension '{s}'"),
        })
    };
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let mut data = Vec::with_capacity(rows * cols);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::RecordsParse {
                line: idx + 1,
                message: format!("bad number '{field}'"),
            })?;
            data.push(v);
        }
    }
    if data.len() != rows * cols {
        return Err(Error::RecordsParse {
            line: 1,
            message: format!("expected {} entries, found {}", rows * cols, data.len()),
        });
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}
