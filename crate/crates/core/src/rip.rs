//! Restricted isometry constants and the chaos quantities `A_m`, `B_m`, `C_m`.
//!
//! For `M = A / sqrt(n)` and a support `E`, the extreme values of `|Mz|^2` on
//! unit vectors supported in `E` are the extreme eigenvalues of the Gram
//! matrix `G_E = A_E^T A_E` divided by `n`. By eigenvalue interlacing these
//! extremes only widen as `E` grows, so scanning supports of size exactly `m`
//! gives the constant over all `m`-sparse vectors.
//!
//! The chaos quantity `B_m^2 = sup_{z in U_m} | |Az|^2 - sum z_i^2 |X_i|^2 |`
//! equals `max_E ||G_E - diag(G_E)||`: for `z` supported in `E` the bracket is
//! the quadratic form of the hollow Gram matrix, and the supremum of a
//! quadratic form's absolute value over the sphere is the spectral norm.
//!
//! Supports are visited in colexicographic order; ties go to the earliest
//! support, which keeps witnesses deterministic under parallel scans.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, check_budget, colex_block, colex_blocks, Colex};
use crate::ensembles::{check_h2, EnsembleSpec, SensingMatrix};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_symmetric_eigen, operator_norm_sym};
use crate::randsrc::{RngStream, ALGORITHM_ID};

pub const DEFAULT_SUPPORT_BUDGET: u128 = 2_000_000;

pub fn candes_threshold() -> f64 {
    2f64.sqrt() - 1.0
}

/// `delta_2m < sqrt(2) - 1`, strictly.
pub fn candes_criterion(delta_2m: f64) -> bool {
    delta_2m < candes_threshold()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSide {
    /// `|Mz|^2` overshoots: `lambda_max / n - 1` attains the constant.
    Upper,
    /// `|Mz|^2` undershoots: `1 - lambda_min / n` attains the constant.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    /// Maximum over a subset of supports; a lower bound on the exact value.
    Sampled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RipEntry {
    pub m: usize,
    pub delta: f64,
    pub witness_support: Vec<usize>,
    pub witness_side: WitnessSide,
    pub method: Method,
    pub supports_examined: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub spec: EnsembleSpec,
    pub seed: u64,
    pub algorithm_id: String,
}

impl MatrixMeta {
    pub fn of(a: &SensingMatrix) -> Self {
        Self {
            n: a.rows(),
            big_n: a.cols(),
            spec: a.spec.clone(),
            seed: a.seed,
            algorithm_id: ALGORITHM_ID.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RipReport {
    pub matrix: MatrixMeta,
    pub entries: Vec<RipEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaosStats {
    pub m: usize,
    pub a_m: f64,
    pub b_m: f64,
    pub c_m: f64,
    pub a_witness: Vec<usize>,
    pub b_witness: Vec<usize>,
    pub method: Method,
}

impl ChaosStats {
    pub fn b_m_sq(&self) -> f64 {
        self.b_m * self.b_m
    }
}

/// Full Gram matrix `A^T A`.
pub fn gram_full(a: &SensingMatrix) -> DMatrix<f64> {
    a.entries().tr_mul(a.entries())
}

fn sub_gram(gram: &DMatrix<f64>, support: &[usize]) -> DMatrix<f64> {
    let k = support.len();
    DMatrix::from_fn(k, k, |p, q| gram[(support[p], support[q])])
}

fn hollow(mut g: DMatrix<f64>) -> DMatrix<f64> {
    g.fill_diagonal(0.0);
    g
}

/// Best (value, support) per component over all `k`-subsets of `0..n`,
/// earliest colex support winning ties.
fn scan_supports<F>(n: usize, k: usize, components: usize, eval: F) -> Result<Vec<(f64, Vec<usize>)>>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    let merge = |best: &mut Vec<(f64, Vec<usize>)>, values: &[f64], support: &[usize]| {
        for (slot, &v) in best.iter_mut().zip(values) {
            if v > slot.0 || slot.1.is_empty() {
                *slot = (v, support.to_vec());
            }
        }
    };
    let per_block: Vec<Vec<(f64, Vec<usize>)>> = colex_blocks(n, k)
        .into_par_iter()
        .map(|max| {
            let mut best = vec![(f64::NEG_INFINITY, Vec::new()); components];
            for support in colex_block(max, k) {
                let values = eval(&support)?;
                merge(&mut best, &values, &support);
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut best = vec![(f64::NEG_INFINITY, Vec::new()); components];
    for block in per_block {
        for (c, (v, s)) in block.into_iter().enumerate() {
            if !s.is_empty() && (v > best[c].0 || best[c].1.is_empty()) {
                best[c] = (v, s);
            }
        }
    }
    Ok(best)
}

fn check_order(a: &SensingMatrix, m: usize) -> Result<()> {
    if m == 0 || m > a.cols() {
        return Err(Error::param(format!("order m = {m} must lie in 1..={}", a.cols())));
    }
    Ok(())
}

/// `(upper, lower)` deviations of `|A z|^2 / n` from 1 on support `E`.
fn support_deviation(gram: &DMatrix<f64>, support: &[usize], n: f64) -> Result<(f64, f64)> {
    let eig = jacobi_symmetric_eigen(&sub_gram(gram, support), false)?;
    Ok((eig.max() / n - 1.0, 1.0 - eig.min() / n))
}

fn entry_from(m: usize, upper: (f64, Vec<usize>), lower: (f64, Vec<usize>), method: Method, examined: u128) -> RipEntry {
    let (delta, witness_support, witness_side) = if upper.0 >= lower.0 {
        (upper.0, upper.1, WitnessSide::Upper)
    } else {
        (lower.0, lower.1, WitnessSide::Lower)
    };
    RipEntry {
        m,
        delta: delta.max(0.0),
        witness_support,
        witness_side,
        method,
        supports_examined: examined,
    }
}

/// Exact `delta_m(A / sqrt n)` by scanning all `C(N, m)` supports.
pub fn isometry_constant_exact(a: &SensingMatrix, m: usize, budget: u128) -> Result<RipEntry> {
    check_order(a, m)?;
    let count = binomial(a.cols(), m);
    check_budget(count, budget)?;
    let gram = gram_full(a);
    let n = a.rows() as f64;
    let best = scan_supports(a.cols(), m, 2, |s| {
        let (up, lo) = support_deviation(&gram, s, n)?;
        Ok(vec![up, lo])
    })?;
    let mut it = best.into_iter();
    Ok(entry_from(m, it.next().unwrap(), it.next().unwrap(), Method::Exact, count))
}

/// Exact report for every order in `orders`.
pub fn rip_report(a: &SensingMatrix, orders: &[usize], budget: u128) -> Result<RipReport> {
    let entries = orders
        .iter()
        .map(|&m| isometry_constant_exact(a, m, budget))
        .collect::<Result<_>>()?;
    Ok(RipReport {
        matrix: MatrixMeta::of(a),
        entries,
    })
}

/// Lower bound on `delta_m` from `trials` uniformly random supports. When
/// `trials >= C(N, m)` every support is scanned once instead.
pub fn isometry_constant_sampled(a: &SensingMatrix, m: usize, trials: usize, stream: &mut RngStream) -> Result<RipEntry> {
    check_order(a, m)?;
    if trials == 0 {
        return Err(Error::param("need at least one trial"));
    }
    let total = binomial(a.cols(), m);
    if trials as u128 >= total {
        let mut e = isometry_constant_exact(a, m, total)?;
        e.method = Method::Sampled;
        return Ok(e);
    }
    let gram = gram_full(a);
    let n = a.rows() as f64;
    let mut upper = (f64::NEG_INFINITY, Vec::new());
    let mut lower = (f64::NEG_INFINITY, Vec::new());
    for _ in 0..trials {
        let mut support = sample_indices(stream, a.cols(), m).into_vec();
        support.sort_unstable();
        let (up, lo) = support_deviation(&gram, &support, n)?;
        if up > upper.0 {
            upper = (up, support.clone());
        }
        if lo > lower.0 {
            lower = (lo, support);
        }
    }
    Ok(entry_from(m, upper, lower, Method::Sampled, trials as u128))
}

/// Exact `A_m`, `B_m`, `C_m` by scanning all supports of size `m`.
pub fn chaos_statistics(a: &SensingMatrix, m: usize, budget: u128) -> Result<ChaosStats> {
    check_order(a, m)?;
    check_budget(binomial(a.cols(), m), budget)?;
    let gram = gram_full(a);
    let best = scan_supports(a.cols(), m, 2, |s| {
        let g = sub_gram(&gram, s);
        let top = jacobi_symmetric_eigen(&g, false)?.max();
        let b2 = operator_norm_sym(&hollow(g))?;
        Ok(vec![top, b2])
    })?;
    let c_m = a.column_norms_sq().into_iter().fold(0.0, f64::max).sqrt();
    Ok(ChaosStats {
        m,
        a_m: best[0].0.max(0.0).sqrt(),
        b_m: best[1].0.max(0.0).sqrt(),
        c_m,
        a_witness: best[0].1.clone(),
        b_witness: best[1].1.clone(),
        method: Method::Exact,
    })
}

/// Lower bounds on `A_m` and `B_m` from random supports plus one greedy
/// support grown from the longest column. `C_m` is exact.
pub fn chaos_statistics_sampled(a: &SensingMatrix, m: usize, trials: usize, stream: &mut RngStream) -> Result<ChaosStats> {
    check_order(a, m)?;
    let gram = gram_full(a);
    let norms = a.column_norms_sq();
    let start = (0..a.cols()).fold(0, |b, i| if norms[i] > norms[b] { i } else { b });
    let mut greedy = vec![start];
    while greedy.len() < m {
        let mut best = (f64::NEG_INFINITY, 0);
        for j in (0..a.cols()).filter(|j| !greedy.contains(j)) {
            let mut s = greedy.clone();
            s.push(j);
            let top = jacobi_symmetric_eigen(&sub_gram(&gram, &s), false)?.max();
            if top > best.0 {
                best = (top, j);
            }
        }
        greedy.push(best.1);
    }
    greedy.sort_unstable();

    let mut candidates = vec![greedy];
    for _ in 0..trials {
        let mut s = sample_indices(stream, a.cols(), m).into_vec();
        s.sort_unstable();
        candidates.push(s);
    }
    let (mut a_best, mut b_best) = ((f64::NEG_INFINITY, Vec::new()), (f64::NEG_INFINITY, Vec::new()));
    for s in candidates {
        let g = sub_gram(&gram, &s);
        let top = jacobi_symmetric_eigen(&g, false)?.max();
        let b2 = operator_norm_sym(&hollow(g))?;
        if top > a_best.0 {
            a_best = (top, s.clone());
        }
        if b2 > b_best.0 {
            b_best = (b2, s);
        }
    }
    Ok(ChaosStats {
        m,
        a_m: a_best.0.max(0.0).sqrt(),
        b_m: b_best.0.max(0.0).sqrt(),
        c_m: norms.into_iter().fold(0.0, f64::max).sqrt(),
        a_witness: a_best.1,
        b_witness: b_best.1,
        method: Method::Sampled,
    })
}

/// Largest value of `| |Az|^2 - sum z_i^2 |X_i|^2 |` over `samples` random
/// unit `m`-sparse vectors (uniform support, Gaussian direction).
pub fn b_m_sq_monte_carlo(a: &SensingMatrix, m: usize, samples: usize, stream: &mut RngStream) -> Result<f64> {
    check_order(a, m)?;
    let gram = gram_full(a);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let support = sample_indices(stream, a.cols(), m).into_vec();
        let mut z = DVector::from_fn(m, |_, _| stream.gaussian());
        let norm = z.norm();
        if norm == 0.0 {
            continue;
        }
        z /= norm;
        let mut q = 0.0;
        for p in 0..m {
            for r in 0..m {
                if p != r {
                    q += z[p] * z[r] * gram[(support[p], support[r])];
                }
            }
        }
        best = best.max(q.abs());
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub m: usize,
    pub delta: f64,
    pub b_m_sq_over_n: f64,
    pub max_norm_deviation: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Slack allowed on the decomposition inequality for rounding.
pub const DECOMPOSITION_SLACK: f64 = 1e-10;

/// `delta_m(A/sqrt n) <= B_m^2/n + max_i | |X_i|^2/n - 1 |`.
pub fn rip_decomposition_check(a: &SensingMatrix, entry: &RipEntry, chaos: &ChaosStats) -> Result<DecompositionCheck> {
    if entry.m != chaos.m {
        return Err(Error::param("isometry entry and chaos statistics are for different orders"));
    }
    let dev = check_h2(a).h2_max_deviation;
    let b = chaos.b_m_sq() / a.rows() as f64;
    let rhs = b + dev;
    Ok(DecompositionCheck {
        m: entry.m,
        delta: entry.delta,
        b_m_sq_over_n: b,
        max_norm_deviation: dev,
        rhs,
        holds: entry.delta <= rhs + DECOMPOSITION_SLACK,
    })
}

/// Residual of `sum_{i != j} <x_i, x_j> = 4 * 2^{-K} sum_E sum_{i in E, j notin E} <x_i, x_j>`,
/// both sides computed by enumerating all `2^K` subsets.
pub fn halfsplit_identity_check(vectors: &[DVector<f64>]) -> Result<f64> {
    let k = vectors.len();
    if k > 16 {
        return Err(Error::param(format!("half-split enumeration supports K <= 16, got {k}")));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch("vectors of different lengths".into()));
    }
    let g = DMatrix::from_fn(k, k, |i, j| vectors[i].dot(&vectors[j]));
    let mut lhs = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                lhs += g[(i, j)];
            }
        }
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << k) {
        for i in (0..k).filter(|i| mask >> i & 1 == 1) {
            for j in (0..k).filter(|j| mask >> j & 1 == 0) {
                total += g[(i, j)];
            }
        }
    }
    let rhs = 4.0 * total / (1u64 << k) as f64;
    Ok((lhs - rhs).abs())
}

/// `delta_m` recomputed over every support of size at most `m`; used to
/// confirm that scanning size-`m` supports alone is enough.
pub fn isometry_constant_all_sizes(a: &SensingMatrix, m: usize) -> Result<f64> {
    check_order(a, m)?;
    let gram = gram_full(a);
    let n = a.rows() as f64;
    let mut best: f64 = 0.0;
    for k in 1..=m {
        for s in Colex::new(a.cols(), k) {
            let (up, lo) = support_deviation(&gram, &s, n)?;
            best = best.max(up).max(lo);
        }
    }
    Ok(best)
}
