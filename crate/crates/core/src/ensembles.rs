//! Random sensing matrices with columns normalized to `E|X_i|^2 = n`, plus
//! empirical checks of the tail condition on linear forms and of the
//! concentration of column norms.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randsrc::{weibull_variance, RngStream, ALGORITHM_ID};

/// Deviation of `|X_i|^2 / n` from one that still counts as concentrated.
pub fn h2_threshold() -> f64 {
    (2f64.sqrt() - 1.0) / 2.0
}

/// Column distribution of a sensing matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    /// i.i.d. symmetric Weibull entries of shape `r`, rescaled to variance one.
    IidEntries { r: f64 },
    Gaussian,
    Rademacher,
    /// Uniform on the unit `l_p` ball, rescaled so coordinates have variance one.
    LpBallUniform { p: f64 },
    /// Uniform on the sphere of radius `sqrt(n)`.
    SphereUniform,
    /// `sqrt(2) * delta_i * (eps_1i, .., eps_ni)` with `P(delta_i = 1) = 1/2`:
    /// isotropic and sub-gaussian, but half the columns vanish.
    MaskedBernoulli,
    /// Matrix supplied by hand; cannot be resampled.
    Custom { name: String },
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnsembleSpec::IidEntries { r } if !(1.0..=2.0).contains(r) => {
                Err(Error::param(format!("IidEntries needs r in [1, 2], got {r}")))
            }
            EnsembleSpec::LpBallUniform { p } if !(*p >= 1.0) || !p.is_finite() => {
                Err(Error::param(format!("LpBallUniform needs finite p >= 1, got {p}")))
            }
            EnsembleSpec::Custom { name } if name.contains([',', '(', ')', '\n']) => {
                Err(Error::param(format!("custom ensemble name {name:?} has reserved characters")))
            }
            _ => Ok(()),
        }
    }

    /// Whether fresh columns can be drawn from this spec.
    pub fn is_resamplable(&self) -> bool {
        !matches!(self, EnsembleSpec::Custom { .. })
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSpec::IidEntries { r } => write!(f, "iid_entries(r={r})"),
            EnsembleSpec::Gaussian => write!(f, "gaussian"),
            EnsembleSpec::Rademacher => write!(f, "rademacher"),
            EnsembleSpec::LpBallUniform { p } => write!(f, "lp_ball(p={p})"),
            EnsembleSpec::SphereUniform => write!(f, "sphere"),
            EnsembleSpec::MaskedBernoulli => write!(f, "masked_bernoulli"),
            EnsembleSpec::Custom { name } => write!(f, "custom({name})"),
        }
    }
}

impl FromStr for EnsembleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let arg = |prefix: &str| -> Option<&str> {
            s.strip_prefix(prefix).and_then(|rest| rest.strip_suffix(')'))
        };
        let number = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad ensemble parameter in {s:?}")))
        };
        let spec = match s {
            "gaussian" => EnsembleSpec::Gaussian,
            "rademacher" => EnsembleSpec::Rademacher,
            "sphere" => EnsembleSpec::SphereUniform,
            "masked_bernoulli" => EnsembleSpec::MaskedBernoulli,
            "exponential" => EnsembleSpec::IidEntries { r: 1.0 },
            _ => {
                if let Some(v) = arg("iid_entries(r=") {
                    EnsembleSpec::IidEntries { r: number(v)? }
                } else if let Some(v) = arg("lp_ball(p=") {
                    EnsembleSpec::LpBallUniform { p: number(v)? }
                } else if let Some(v) = arg("custom(") {
                    EnsembleSpec::Custom { name: v.to_string() }
                } else {
                    return Err(Error::Parse(format!("unknown ensemble {s:?}")));
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Dense `n x N` matrix whose columns are the sample vectors `X_1..X_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    entries: DMatrix<f64>,
    pub spec: EnsembleSpec,
    pub seed: u64,
}

impl SensingMatrix {
    pub fn new(entries: DMatrix<f64>, spec: EnsembleSpec, seed: u64) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::param("sensing matrix needs n >= 1 and N >= 1"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("sensing matrix entries must be finite"));
        }
        spec.validate()?;
        Ok(Self { entries, spec, seed })
    }

    /// Hand-specified matrix from row-major data.
    pub fn from_rows(name: &str, rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::new(
            DMatrix::from_row_slice(rows, cols, data),
            EnsembleSpec::Custom { name: name.into() },
            0,
        )
    }

    /// Ambient dimension `n`.
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of columns `N`.
    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.entries.column(i).clone_owned()
    }

    pub fn column_norms_sq(&self) -> Vec<f64> {
        self.entries.column_iter().map(|c| c.norm_squared()).collect()
    }

    pub fn algorithm_id(&self) -> &'static str {
        ALGORITHM_ID
    }

    /// Matrix with columns reordered so that new column `k` is old column `perm[k]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.cols()];
        if perm.len() != self.cols() || perm.iter().any(|&p| p >= self.cols() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::param("not a permutation of the columns"));
        }
        let entries = DMatrix::from_fn(self.rows(), self.cols(), |r, c| self.entries[(r, perm[c])]);
        Ok(Self {
            entries,
            spec: self.spec.clone(),
            seed: self.seed,
        })
    }
}

/// One column of length `n` drawn under `spec`.
pub fn sample_column(spec: &EnsembleSpec, n: usize, stream: &mut RngStream) -> Result<DVector<f64>> {
    spec.validate()?;
    let col = match spec {
        EnsembleSpec::IidEntries { r } => {
            let scale = 1.0 / weibull_variance(*r)?.sqrt();
            DVector::from_fn(n, |_, _| stream.symmetric_weibull(*r) * scale)
        }
        EnsembleSpec::Gaussian => DVector::from_fn(n, |_, _| stream.gaussian()),
        EnsembleSpec::Rademacher => DVector::from_fn(n, |_, _| stream.rademacher()),
        EnsembleSpec::LpBallUniform { p } => {
            let scale = cached_scale_factor(*p, n)?;
            sample_lp_ball_point(stream, *p, n)? * scale
        }
        EnsembleSpec::SphereUniform => loop {
            let g = DVector::from_fn(n, |_, _| stream.gaussian());
            let norm = g.norm();
            if norm > 0.0 {
                break g * ((n as f64).sqrt() / norm);
            }
        },
        EnsembleSpec::MaskedBernoulli => {
            let keep = stream.rademacher() > 0.0;
            let signs = DVector::from_fn(n, |_, _| stream.rademacher());
            if keep {
                signs * std::f64::consts::SQRT_2
            } else {
                DVector::zeros(n)
            }
        }
        EnsembleSpec::Custom { name } => {
            return Err(Error::param(format!("custom ensemble {name:?} cannot be sampled")))
        }
    };
    Ok(col)
}

/// Draw an `n x N` matrix. Column `j` comes from stream `(seed, j)`, so the
/// result is a pure function of `(spec, n, N, seed)` regardless of threading.
pub fn generate_matrix(spec: &EnsembleSpec, n: usize, big_n: usize, seed: u64) -> Result<SensingMatrix> {
    if n == 0 || big_n == 0 {
        return Err(Error::param("n and N must be at least 1"));
    }
    spec.validate()?;
    if let EnsembleSpec::LpBallUniform { p } = spec {
        // warm the cache once instead of racing on it from every column
        cached_scale_factor(*p, n)?;
    }
    let columns: Vec<DVector<f64>> = (0..big_n)
        .into_par_iter()
        .map(|j| sample_column(spec, n, &mut RngStream::new(seed, j as u64)))
        .collect::<Result<_>>()?;
    SensingMatrix::new(DMatrix::from_columns(&columns), spec.clone(), seed)
}

/// Uniform point of `B_p^n = {x : sum |x_i|^p <= 1}`.
///
/// Uses `x = g / (sum |g_i|^p + Z)^{1/p}` with `g_i` of density proportional
/// to `exp(-|t|^p)` (generated as a random sign times `G^{1/p}`,
/// `G ~ Gamma(1/p)`) and `Z` standard exponential.
pub fn sample_lp_ball_point(stream: &mut RngStream, p: f64, n: usize) -> Result<DVector<f64>> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param(format!("l_p ball needs finite p >= 1, got {p}")));
    }
    if n == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    let mut g = DVector::zeros(n);
    let mut mass = 0.0;
    for i in 0..n {
        let gamma = stream.gamma(1.0 / p)?;
        g[i] = stream.rademacher() * gamma.powf(1.0 / p);
        mass += gamma;
    }
    let z = stream.exponential(1.0)?;
    Ok(g / (mass + z).powf(1.0 / p))
}

/// `1 / sigma_hat`, where `sigma_hat^2` is the Monte Carlo per-coordinate
/// variance of the uniform measure on `B_p^n`, pooled over coordinates.
pub fn isotropic_scale_factor(p: f64, n: usize, stream: &mut RngStream, samples: usize) -> Result<f64> {
    if samples < 10_000 {
        return Err(Error::param(format!("need at least 10^4 samples, got {samples}")));
    }
    let mut acc = 0.0;
    for _ in 0..samples {
        acc += sample_lp_ball_point(stream, p, n)?.norm_squared();
    }
    let variance = acc / (samples as f64 * n as f64);
    Ok(1.0 / variance.sqrt())
}

const SCALE_SEED: u64 = 0x5CA1_E000;

fn scale_cache() -> &'static Mutex<HashMap<(u64, usize), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Isotropic scale factor for `B_p^n`, memoized per `(p, n)` and computed from
/// a fixed stream so that every process gets the same constant.
pub fn cached_scale_factor(p: f64, n: usize) -> Result<f64> {
    let key = (p.to_bits(), n);
    if let Some(&v) = scale_cache().lock().unwrap().get(&key) {
        return Ok(v);
    }
    let samples = (2_000_000 / n.max(1)).max(10_000);
    let mut stream = RngStream::new(SCALE_SEED ^ p.to_bits(), n as u64);
    let v = isotropic_scale_factor(p, n, &mut stream, samples)?;
    scale_cache().lock().unwrap().insert(key, v);
    Ok(v)
}

/// Moment-growth proxy for the `psi_r` norm:
/// `max_{p in {1,2,4,6,8}} (E|Y|^p)^{1/p} / p^{1/r}`.
///
/// Equivalent to the Orlicz norm only up to universal constant factors.
pub fn estimate_psi_r_norm(samples: &[f64], r: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::param("no samples"));
    }
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::param(format!("r must lie in (0, 2], got {r}")));
    }
    let len = samples.len() as f64;
    Ok([1.0f64, 2.0, 4.0, 6.0, 8.0]
        .iter()
        .map(|&p| {
            let moment = samples.iter().map(|y| y.abs().powf(p)).sum::<f64>() / len;
            moment.powf(1.0 / p) / p.powf(1.0 / r)
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H1Mode {
    /// Fresh columns were drawn under the generating spec for each direction.
    EnsembleLevel,
    /// Only the given instance was available: one sample per column, pooled
    /// across columns.
    InstanceLevel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub h1_mode: Option<H1Mode>,
    pub h1_psi_estimate: Option<f64>,
    pub h1_directions: usize,
    pub h1_samples_per_direction: usize,
    pub h2_max_deviation: f64,
    pub h2_threshold: f64,
    pub h2_pass: bool,
    pub columns: usize,
}

/// Exact `max_i | |X_i|^2/n - 1 |` for this instance against `(sqrt 2 - 1)/2`.
pub fn check_h2(a: &SensingMatrix) -> ConditionReport {
    let n = a.rows() as f64;
    let dev = a
        .column_norms_sq()
        .iter()
        .map(|s| (s / n - 1.0).abs())
        .fold(0.0, f64::max);
    ConditionReport {
        h1_mode: None,
        h1_psi_estimate: None,
        h1_directions: 0,
        h1_samples_per_direction: 0,
        h2_max_deviation: dev,
        h2_threshold: h2_threshold(),
        h2_pass: dev < h2_threshold(),
        columns: a.cols(),
    }
}

/// Empirical `psi_r` bound on linear forms `<X_i, y>` over random unit `y`.
///
/// For resamplable specs each direction gets `replicates` fresh columns and
/// the report is ensemble-level. Otherwise the `N` values `<X_i, y>` of the
/// instance are pooled and the report is flagged instance-level.
pub fn check_h1(
    a: &SensingMatrix,
    r: f64,
    directions: usize,
    replicates: usize,
    stream: &mut RngStream,
) -> Result<ConditionReport> {
    if directions < 10 {
        return Err(Error::param("need at least 10 directions"));
    }
    let n = a.rows();
    let mut report = check_h2(a);
    let mut worst: f64 = 0.0;
    let mode = if a.spec.is_resamplable() {
        H1Mode::EnsembleLevel
    } else {
        H1Mode::InstanceLevel
    };
    let mut per_direction = 0;
    for _ in 0..directions {
        let mut y = DVector::from_fn(n, |_, _| stream.gaussian());
        y /= y.norm();
        let values: Vec<f64> = match mode {
            H1Mode::EnsembleLevel => (0..replicates)
                .map(|_| sample_column(&a.spec, n, stream).map(|x| x.dot(&y)))
                .collect::<Result<_>>()?,
            H1Mode::InstanceLevel => a.entries().column_iter().map(|x| x.dot(&y)).collect(),
        };
        per_direction = values.len();
        worst = worst.max(estimate_psi_r_norm(&values, r)?);
    }
    report.h1_mode = Some(mode);
    report.h1_psi_estimate = Some(worst);
    report.h1_directions = directions;
    report.h1_samples_per_direction = per_direction;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Per-coordinate variance of the uniform measure on `B_p^n` by 1-D
    /// quadrature of the slice volume: the section at `x_1 = t` is a scaled
    /// copy of `B_p^{n-1}` with volume proportional to `(1-|t|^p)^{(n-1)/p}`.
    fn quadrature_variance(p: f64, n: usize) -> f64 {
        let steps = 200_000;
        let h = 1.0 / steps as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..steps {
            let t = (k as f64 + 0.5) * h;
            let w = (1.0 - t.powf(p)).max(0.0).powf((n as f64 - 1.0) / p);
            num += t * t * w;
            den += w;
        }
        num / den
    }

    #[test]
    fn quadrature_oracle_sanity() {
        assert!((quadrature_variance(2.0, 3) - 0.2).abs() < 1e-6);
        // large p approaches the cube, whose coordinates have variance 1/3
        assert!((quadrature_variance(200.0, 3) - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn lp_ball_membership_and_moments() {
        let mut s = RngStream::new(10, 0);
        let mut acc = 0.0;
        for _ in 0..100_000 {
            let x = sample_lp_ball_point(&mut s, 2.0, 3).unwrap();
            assert!(x.iter().map(|v| v.abs().powi(2)).sum::<f64>() <= 1.0 + 1e-12);
            acc += x.norm_squared();
        }
        assert!((acc / 1e5 - 0.6).abs() < 0.01);

        for p in [1.0, 1.5, 3.0] {
            for _ in 0..2000 {
                let x = sample_lp_ball_point(&mut s, p, 5).unwrap();
                assert!(x.iter().map(|v| v.abs().powf(p)).sum::<f64>() <= 1.0 + 1e-12);
            }
        }
        assert!(sample_lp_ball_point(&mut s, 0.5, 3).is_err());
    }

    #[test]
    fn cross_polytope_variance_matches_rejection_sampler() {
        let mut s = RngStream::new(11, 0);
        let mut rej = RngStream::new(11, 1);
        let n = 100_000;
        let mut ours = 0.0;
        for _ in 0..n {
            ours += sample_lp_ball_point(&mut s, 1.0, 2).unwrap()[0].powi(2);
        }
        let mut theirs = 0.0;
        let mut accepted = 0;
        while accepted < n {
            let (x, y) = (2.0 * rej.uniform01() - 1.0, 2.0 * rej.uniform01() - 1.0);
            if x.abs() + y.abs() <= 1.0 {
                theirs += x * x;
                accepted += 1;
            }
        }
        let (ours, theirs) = (ours / n as f64, theirs / n as f64);
        assert!((ours / theirs - 1.0).abs() < 0.02, "{ours} vs {theirs}");
        // exact value is 1/6
        assert!((ours - 1.0 / 6.0).abs() < 0.003);
    }

    #[test]
    fn scale_factor_matches_quadrature() {
        let mut s = RngStream::new(12, 0);
        let f = isotropic_scale_factor(2.0, 3, &mut s, 100_000).unwrap();
        assert!((f / 5f64.sqrt() - 1.0).abs() < 0.01);
        for (p, n) in [(1.0, 4), (1.5, 10), (3.0, 6)] {
            let exact = 1.0 / quadrature_variance(p, n).sqrt();
            let cached = cached_scale_factor(p, n).unwrap();
            assert!((cached / exact - 1.0).abs() < 0.01, "p={p} n={n}");
        }
        assert!(isotropic_scale_factor(2.0, 3, &mut s, 100).is_err());
    }

    #[test]
    fn scaled_lp_points_are_isotropic() {
        let n = 4;
        let a = generate_matrix(&EnsembleSpec::LpBallUniform { p: 1.0 }, n, 40_000, 3).unwrap();
        let cov = a.entries() * a.entries().transpose() / a.cols() as f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((cov[(i, j)] - target).abs() < 0.05, "cov[{i},{j}] = {}", cov[(i, j)]);
            }
        }
    }

    #[test]
    fn generated_columns_have_unit_second_moment() {
        let specs = [
            EnsembleSpec::Gaussian,
            EnsembleSpec::Rademacher,
            EnsembleSpec::IidEntries { r: 1.0 },
            EnsembleSpec::IidEntries { r: 1.5 },
            EnsembleSpec::LpBallUniform { p: 1.0 },
            EnsembleSpec::LpBallUniform { p: 2.0 },
            EnsembleSpec::SphereUniform,
        ];
        for spec in specs {
            let a = generate_matrix(&spec, 200, 200, 1).unwrap();
            let mean = a.column_norms_sq().iter().sum::<f64>() / (200.0 * 200.0);
            assert!((0.9..=1.1).contains(&mean), "{spec}: {mean}");
        }
        let g = generate_matrix(&EnsembleSpec::Gaussian, 100, 400, 8).unwrap();
        let mean = g.column_norms_sq().iter().sum::<f64>() / (100.0 * 400.0);
        assert!((mean - 1.0).abs() < 0.05);
    }

    #[test]
    fn generation_is_pure() {
        for spec in [EnsembleSpec::Gaussian, EnsembleSpec::LpBallUniform { p: 1.5 }] {
            let a = generate_matrix(&spec, 7, 9, 42).unwrap();
            let b = generate_matrix(&spec, 7, 9, 42).unwrap();
            assert_eq!(a, b);
            let c = generate_matrix(&spec, 7, 9, 43).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn sphere_columns_exact_norm() {
        let a = generate_matrix(&EnsembleSpec::SphereUniform, 37, 50, 2).unwrap();
        for s in a.column_norms_sq() {
            assert!((s.sqrt() / 37f64.sqrt() - 1.0).abs() < 1e-10);
        }
        let report = check_h2(&a);
        assert!(report.h2_max_deviation < 1e-10 && report.h2_pass);
    }

    #[test]
    fn masked_bernoulli_zero_columns() {
        let a = generate_matrix(&EnsembleSpec::MaskedBernoulli, 20, 400, 5).unwrap();
        let zeros = a.column_norms_sq().iter().filter(|&&s| s == 0.0).count();
        assert!(((zeros as f64 / 400.0) - 0.5).abs() < 0.05, "{zeros}");
        let report = check_h2(&a);
        // zero columns give exactly 1, kept columns |X|^2/n = 2 up to rounding
        assert!((report.h2_max_deviation - 1.0).abs() < 1e-12);
        assert!(!report.h2_pass);
    }

    /// Probability that all `N` columns of an `n x N` Gaussian matrix pass H2,
    /// from the exact chi-square law of `|X_i|^2`.
    fn chi2_pass_probability(n: usize, big_n: usize) -> f64 {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let chi = ChiSquared::new(n as f64).unwrap();
        let t = h2_threshold();
        let fail = chi.sf(n as f64 * (1.0 + t)) + chi.cdf(n as f64 * (1.0 - t));
        (1.0 - fail).powi(big_n as i32)
    }

    #[test]
    fn gaussian_h2_pass_rate_matches_chi_square() {
        for (n, big_n) in [(400, 100), (1000, 100)] {
            let expected = chi2_pass_probability(n, big_n);
            let passes = (0..100)
                .filter(|&seed| check_h2(&generate_matrix(&EnsembleSpec::Gaussian, n, big_n, seed).unwrap()).h2_pass)
                .count() as f64
                / 100.0;
            let sd = (expected * (1.0 - expected) / 100.0).sqrt().max(0.01);
            assert!((passes - expected).abs() <= 4.0 * sd, "n={n}: {passes} vs {expected}");
        }
        assert!(chi2_pass_probability(1000, 100) > 0.99);
    }

    #[test]
    fn psi_norm_estimator() {
        assert_eq!(estimate_psi_r_norm(&[0.0; 1000], 1.0).unwrap(), 0.0);
        assert!(estimate_psi_r_norm(&[], 1.0).is_err());
        let mut s = RngStream::new(13, 0);
        let exp: Vec<f64> = (0..100_000).map(|_| s.symmetric_weibull(1.0)).collect();
        let e = estimate_psi_r_norm(&exp, 1.0).unwrap();
        assert!((0.5..=8.0).contains(&e), "{e}");
        let gauss: Vec<f64> = (0..100_000).map(|_| s.gaussian()).collect();
        let e = estimate_psi_r_norm(&gauss, 2.0).unwrap();
        let exact = (8.0f64 / 3.0).sqrt();
        assert!((exact / 4.0..=exact * 4.0).contains(&e), "{e}");
    }

    #[test]
    fn h1_modes() {
        let mut s = RngStream::new(14, 0);
        let a = generate_matrix(&EnsembleSpec::IidEntries { r: 1.0 }, 30, 50, 1).unwrap();
        let rep = check_h1(&a, 1.0, 10, 1000, &mut s).unwrap();
        assert_eq!(rep.h1_mode, Some(H1Mode::EnsembleLevel));
        assert_eq!(rep.h1_samples_per_direction, 1000);
        let psi = rep.h1_psi_estimate.unwrap();
        assert!(psi > 0.3 && psi < 3.0, "{psi}");

        let hand = SensingMatrix::from_rows("hand", 2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
        let rep = check_h1(&hand, 1.0, 10, 1000, &mut s).unwrap();
        assert_eq!(rep.h1_mode, Some(H1Mode::InstanceLevel));
        assert_eq!(rep.h1_samples_per_direction, 3);
        assert!(check_h1(&hand, 1.0, 5, 1000, &mut s).is_err());
    }

    #[test]
    fn spec_validation_and_labels() {
        assert!(EnsembleSpec::IidEntries { r: 0.5 }.validate().is_err());
        assert!(EnsembleSpec::IidEntries { r: 2.5 }.validate().is_err());
        assert!(EnsembleSpec::LpBallUniform { p: 0.9 }.validate().is_err());
        assert!(generate_matrix(&EnsembleSpec::IidEntries { r: 3.0 }, 2, 2, 0).is_err());
        for spec in [
            EnsembleSpec::IidEntries { r: 1.5 },
            EnsembleSpec::Gaussian,
            EnsembleSpec::LpBallUniform { p: 1.25 },
            EnsembleSpec::MaskedBernoulli,
            EnsembleSpec::Custom { name: "hand".into() },
        ] {
            assert_eq!(spec.to_string().parse::<EnsembleSpec>().unwrap(), spec);
        }
        assert!("nonsense".parse::<EnsembleSpec>().is_err());
    }
}
