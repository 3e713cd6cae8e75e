//! Recovery of sparse vectors by l1 minimization.
//!
//! Three routes decide whether every vector with a given sign pattern is the
//! unique solution of basis pursuit:
//!
//! * the dual certificate `gamma = min { ||A_{E^c}^T w||_inf : A_E^T w = s }`,
//!   which must be `< 1` with `A_E` injective;
//! * the signed null-space property on `ker A`, via
//!   `min { ||v_{E^c}||_1 : v in ker A, <s, v_E> = 1 } > 1`;
//! * direct basis-pursuit trials, used for boundary cases.
//!
//! The first two programs are LP duals of each other (the second optimum is
//! `1 / gamma`), but they are built from different data: the first from the
//! columns of `A`, the second from an orthonormal kernel basis.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{check_budget, colex_cmp, signed_support_count, Colex};
use crate::ensembles::SensingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{jacobi_symmetric_eigen, nullspace_basis, RANK_TOL};
use crate::randsrc::RngStream;
use crate::simplex::{solve_lp_free, LinearProgram, LpStats, LpStatus};

/// Relative accuracy for declaring a trial recovered.
pub const RECOVERY_TOL: f64 = 1e-7;
/// Half-width of the band around `gamma = 1` that is left undecided.
pub const CERTIFICATE_TOL: f64 = 1e-8;
pub const INDETERMINATE_TRIALS: usize = 20;
pub const DEFAULT_RECOVERY_BUDGET: u128 = 1_000_000;
/// Exhaustive null-space checks run only up to these sizes.
pub const NSP_MAX_KERNEL_DIM: usize = 12;
pub const NSP_MAX_COLUMNS: usize = 24;
const TRIAL_SEED: u64 = 0x5EED_1D37_A11C_0DE5;

/// Sorted support with one sign per index; indices are 0-based.
///
/// The text form used by the CLI is 1-based, e.g. `"1:+,3:-"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedSupport {
    indices: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedSupport {
    pub fn new(indices: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if indices.is_empty() || indices.len() != signs.len() {
            return Err(Error::param("a signed support needs one sign per index and at least one index"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("support indices must be strictly increasing"));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::param("signs must be +1 or -1"));
        }
        Ok(Self { indices, signs })
    }

    /// All-positive signs.
    pub fn positive(indices: Vec<usize>) -> Result<Self> {
        let k = indices.len();
        Self::new(indices, vec![1; k])
    }

    /// Signs from a bit pattern: the first index takes the most significant
    /// bit, and a set bit means `-1`.
    pub fn from_pattern(indices: Vec<usize>, pattern: u64) -> Result<Self> {
        let k = indices.len();
        let signs = (0..k)
            .map(|p| if pattern >> (k - 1 - p) & 1 == 1 { -1 } else { 1 })
            .collect();
        Self::new(indices, signs)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn pattern(&self) -> u64 {
        self.signs.iter().fold(0, |acc, &s| acc << 1 | u64::from(s < 0))
    }

    pub fn negated(&self) -> Self {
        Self {
            indices: self.indices.clone(),
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn check_range(&self, cols: usize) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i >= cols => Err(Error::IndexOutOfRange { index: i, len: cols }),
            _ => Ok(()),
        }
    }

    /// Relabel through `perm` (new column `k` is old column `perm[k]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut inverse = vec![usize::MAX; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        let mut pairs: Vec<(usize, i8)> = self
            .indices
            .iter()
            .zip(&self.signs)
            .map(|(&i, &s)| (inverse[i], s))
            .collect();
        pairs.sort_unstable();
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (&i, &s) in self.indices.iter().zip(&self.signs) {
            for b in (i as u64).to_le_bytes().into_iter().chain([s as u8]) {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

/// Size first, then colex support, then sign pattern.
impl Ord for SignedSupport {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| colex_cmp(&self.indices, &other.indices))
            .then_with(|| self.pattern().cmp(&other.pattern()))
    }
}

impl PartialOrd for SignedSupport {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SignedSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .indices
            .iter()
            .zip(&self.signs)
            .map(|(i, s)| format!("{}:{}", i + 1, if *s > 0 { '+' } else { '-' }))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for SignedSupport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (idx, sign) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected index:sign, got {part:?}")))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(Error::Parse("support indices are 1-based".into()));
            }
            let sign = match sign.trim() {
                "+" | "+1" => 1,
                "-" | "-1" => -1,
                other => return Err(Error::Parse(format!("bad sign {other:?}"))),
            };
            pairs.push((idx - 1, sign));
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parse("repeated index in support".into()));
        }
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }
}

/// Every signed support of size `k` over `0..n`, in canonical order.
pub fn signed_supports(n: usize, k: usize) -> impl Iterator<Item = SignedSupport> {
    Colex::new(n, k).flat_map(move |idx| {
        (0..1u64 << k).map(move |p| SignedSupport::from_pattern(idx.clone(), p).expect("valid by construction"))
    })
}

/// `z` with the signs of `s` and the given magnitudes on its support.
pub fn signed_vector(cols: usize, s: &SignedSupport, magnitudes: &[f64]) -> DVector<f64> {
    let mut z = DVector::zeros(cols);
    for ((&i, &sg), &m) in s.indices().iter().zip(s.signs()).zip(magnitudes) {
        z[i] = f64::from(sg) * m;
    }
    z
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisPursuit {
    pub solution: Vec<f64>,
    pub l1_objective: f64,
    pub lp: LpStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryOutcome {
    pub solution: Vec<f64>,
    pub success: bool,
    pub linf_error: f64,
    pub l1_objective: f64,
    pub lp: LpStats,
}

/// `min ||t||_1  s.t.  A t = y`, with `t = u - v`, `u, v >= 0`.
pub fn basis_pursuit(a: &SensingMatrix, y: &DVector<f64>) -> Result<BasisPursuit> {
    let (n, big_n) = (a.rows(), a.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("y has length {}, A has {n} rows", y.len())));
    }
    let mut m = DMatrix::zeros(n, 2 * big_n);
    m.view_mut((0, 0), (n, big_n)).copy_from(a.entries());
    m.view_mut((0, big_n), (n, big_n)).copy_from(&(-a.entries()));
    let lp = LinearProgram::new(vec![1.0; 2 * big_n], m, y.iter().copied().collect())?;
    let sol = crate::simplex::solve_lp(&lp)?.optimal()?;
    let t: Vec<f64> = (0..big_n).map(|i| sol.x[i] - sol.x[big_n + i]).collect();
    Ok(BasisPursuit {
        l1_objective: t.iter().map(|v| v.abs()).sum(),
        solution: t,
        lp: sol.stats(),
    })
}

/// Basis pursuit on `y = A z`, judged by distance to `z`.
pub fn exact_recovery_trial(a: &SensingMatrix, z: &DVector<f64>) -> Result<RecoveryOutcome> {
    if z.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!("z has length {}, A has {} columns", z.len(), a.cols())));
    }
    let y = a.entries() * z;
    let bp = basis_pursuit(a, &y)?;
    let z_inf = z.amax();
    let z_l1 = z.lp_norm(1);
    let linf_error = bp
        .solution
        .iter()
        .zip(z.iter())
        .map(|(t, z)| (t - z).abs())
        .fold(0.0, f64::max);
    // z itself is feasible, so an optimal t cannot have a larger l1 norm.
    if bp.l1_objective > z_l1 + 1e-8 * z_l1.max(1.0) {
        return Err(Error::Lp(LpStatus::NumericalBreakdown));
    }
    Ok(RecoveryOutcome {
        success: linf_error <= RECOVERY_TOL * z_inf.max(1.0),
        linf_error,
        l1_objective: bp.l1_objective,
        solution: bp.solution,
        lp: bp.lp,
    })
}

/// `argmin_t sum_i |y_i - <X_i, t>|`, via `y - A^T t = r+ - r-`.
pub fn decode_l1(a: &SensingMatrix, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, big_n) = (a.rows(), a.cols());
    if y.len() != big_n {
        return Err(Error::DimensionMismatch(format!("y has length {}, A has {big_n} columns", y.len())));
    }
    let cols = n + 2 * big_n;
    let mut m = DMatrix::zeros(big_n, cols);
    m.view_mut((0, 0), (big_n, n)).copy_from(&a.entries().transpose());
    for i in 0..big_n {
        m[(i, n + i)] = 1.0;
        m[(i, n + big_n + i)] = -1.0;
    }
    let mut c = vec![0.0; n];
    c.extend(std::iter::repeat_n(1.0, 2 * big_n));
    let lp = LinearProgram::new(c, m, y.iter().copied().collect())?;
    let free: Vec<bool> = (0..cols).map(|j| j < n).collect();
    let sol = solve_lp_free(&lp, &free)?.optimal()?;
    Ok(DVector::from_column_slice(&sol.x[..n]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateClass {
    Certified,
    Failed,
    Indeterminate,
}

impl CertificateClass {
    pub fn of(gamma: f64) -> Self {
        if gamma < 1.0 - CERTIFICATE_TOL {
            CertificateClass::Certified
        } else if gamma > 1.0 + CERTIFICATE_TOL {
            CertificateClass::Failed
        } else {
            CertificateClass::Indeterminate
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub support: SignedSupport,
    /// `None` when the program has no feasible point.
    pub gamma: Option<f64>,
    pub class: CertificateClass,
    pub rank_deficient: bool,
    pub w: Vec<f64>,
    pub lp: Option<LpStats>,
}

/// The certificate program over `[w (free, n), gamma, p, q]`:
/// `min gamma` with `A_E^T w = s` and `+-<X_j, w> - gamma + slack = 0` off `E`.
pub fn certificate_program(a: &SensingMatrix, s: &SignedSupport) -> Result<(LinearProgram, Vec<bool>)> {
    s.check_range(a.cols())?;
    let n = a.rows();
    let off: Vec<usize> = (0..a.cols()).filter(|&j| !s.contains(j)).collect();
    let k = s.len();
    let rows = k + 2 * off.len();
    let cols = n + 1 + 2 * off.len();
    let mut m = DMatrix::zeros(rows, cols);
    let mut b = vec![0.0; rows];
    for (r, (&i, &sg)) in s.indices().iter().zip(s.signs()).enumerate() {
        for l in 0..n {
            m[(r, l)] = a.entries()[(l, i)];
        }
        b[r] = f64::from(sg);
    }
    for (t, &j) in off.iter().enumerate() {
        let (r1, r2) = (k + 2 * t, k + 2 * t + 1);
        for l in 0..n {
            m[(r1, l)] = a.entries()[(l, j)];
            m[(r2, l)] = -a.entries()[(l, j)];
        }
        m[(r1, n)] = -1.0;
        m[(r2, n)] = -1.0;
        m[(r1, n + 1 + 2 * t)] = 1.0;
        m[(r2, n + 2 + 2 * t)] = 1.0;
    }
    let mut c = vec![0.0; cols];
    c[n] = 1.0;
    let free = (0..cols).map(|j| j < n).collect();
    Ok((LinearProgram::new(c, m, b)?, free))
}

fn columns_of(a: &SensingMatrix, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), idx.len(), |r, c| a.entries()[(r, idx[c])])
}

pub fn dual_certificate_value(a: &SensingMatrix, s: &SignedSupport) -> Result<Certificate> {
    s.check_range(a.cols())?;
    let rank_deficient = nullspace_basis(&columns_of(a, s.indices()))?.dim() > 0;
    let (lp, free) = certificate_program(a, s)?;
    let sol = solve_lp_free(&lp, &free)?;
    let n = a.rows();
    let (gamma, w, class) = match sol.status {
        LpStatus::Optimal => {
            let g = sol.x[n].max(0.0);
            let class = if rank_deficient { CertificateClass::Failed } else { CertificateClass::of(g) };
            (Some(g), sol.x[..n].to_vec(), class)
        }
        LpStatus::Infeasible => (None, Vec::new(), CertificateClass::Failed),
        other => return Err(Error::Lp(other)),
    };
    Ok(Certificate {
        support: s.clone(),
        gamma,
        class,
        rank_deficient,
        w,
        lp: Some(sol.stats()),
    })
}

/// Direct trials with magnitudes log-uniform on `[1e-3, 1e3]`; true when all succeed.
pub fn randomized_trials(a: &SensingMatrix, s: &SignedSupport, trials: usize, stream: &mut RngStream) -> Result<bool> {
    for _ in 0..trials {
        let mags: Vec<f64> = (0..s.len()).map(|_| 10f64.powf(6.0 * stream.uniform01() - 3.0)).collect();
        if !exact_recovery_trial(a, &signed_vector(a.cols(), s, &mags))?.success {
            return Ok(false);
        }
    }
    Ok(true)
}

fn trial_stream(a: &SensingMatrix, s: &SignedSupport) -> RngStream {
    RngStream::new(a.seed ^ TRIAL_SEED, s.fingerprint())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryCheckReport {
    pub m: usize,
    pub pass: bool,
    pub signed_supports_checked: u128,
    pub certified: usize,
    pub failed: usize,
    pub indeterminate: usize,
    /// Indeterminate supports for which every randomized trial succeeded.
    pub indeterminate_recovered: usize,
    /// Sorted by size, colex support, sign pattern.
    pub failures: Vec<SignedSupport>,
}

/// Verdict for one signed support: certified, or indeterminate but
/// recovered in every randomized trial.
pub fn recovery_verdict(a: &SensingMatrix, s: &SignedSupport) -> Result<(Certificate, bool)> {
    let cert = dual_certificate_value(a, s)?;
    let ok = match cert.class {
        CertificateClass::Certified => true,
        CertificateClass::Failed => false,
        CertificateClass::Indeterminate => randomized_trials(a, s, INDETERMINATE_TRIALS, &mut trial_stream(a, s))?,
    };
    Ok((cert, ok))
}

/// Check every signed support of size `1..=m`.
pub fn all_sparse_recovery_check(a: &SensingMatrix, m: usize, budget: u128) -> Result<RecoveryCheckReport> {
    if m == 0 || m > a.cols() {
        return Err(Error::param(format!("order m = {m} must lie in 1..={}", a.cols())));
    }
    let total = signed_support_count(a.cols(), m);
    check_budget(total, budget)?;
    let mut report = RecoveryCheckReport {
        m,
        pass: true,
        signed_supports_checked: total,
        certified: 0,
        failed: 0,
        indeterminate: 0,
        indeterminate_recovered: 0,
        failures: Vec::new(),
    };
    for k in 1..=m {
        let supports: Vec<SignedSupport> = signed_supports(a.cols(), k).collect();
        let verdicts: Vec<(Certificate, bool)> = supports
            .par_iter()
            .map(|s| recovery_verdict(a, s))
            .collect::<Result<_>>()?;
        for (cert, ok) in verdicts {
            match cert.class {
                CertificateClass::Certified => report.certified += 1,
                CertificateClass::Failed => report.failed += 1,
                CertificateClass::Indeterminate => {
                    report.indeterminate += 1;
                    if ok {
                        report.indeterminate_recovered += 1;
                    }
                }
            }
            if !ok {
                report.failures.push(cert.support);
            }
        }
    }
    report.failures.sort();
    report.pass = report.failures.is_empty();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NspMode {
    Exhaustive,
    /// Random kernel vectors only; can find violations but not certify.
    Sampled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NspVerdict {
    pub support: SignedSupport,
    /// `min ||v_{E^c}||_1` over kernel `v` with `<s, v_E> = 1`; `None` if infeasible.
    pub value: Option<f64>,
    /// Some nonzero kernel vector lives on `E`.
    pub kernel_on_support: bool,
    pub pass: bool,
    pub lp: Option<LpStats>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NspReport {
    pub m: usize,
    pub mode: NspMode,
    pub kernel_dim: usize,
    pub pass: bool,
    pub failures: Vec<SignedSupport>,
    /// Sampled mode: largest `||v_E||_1 / ||v_{E^c}||_1` seen with `|E| = m`.
    pub worst_ratio: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct NspOptions {
    pub budget: u128,
    pub samples: usize,
    pub seed: u64,
}

impl Default for NspOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_RECOVERY_BUDGET,
            samples: 20_000,
            seed: 0,
        }
    }
}

/// Orthonormal kernel basis of `A` as an `N x d` matrix.
pub fn kernel_matrix(a: &SensingMatrix) -> Result<DMatrix<f64>> {
    Ok(nullspace_basis(a.entries())?.as_matrix(a.cols()))
}

/// Signed null-space test for one signed support, given a kernel basis `v`.
///
/// Variables are kernel coordinates `c` (free) and `p, q >= 0` with
/// `(V c)_j = p_j - q_j` off `E`, `sum_i s_i (V c)_i = 1` on `E`; minimize `sum (p + q)`.
pub fn nsp_verdict(v: &DMatrix<f64>, s: &SignedSupport) -> Result<NspVerdict> {
    let (big_n, d) = v.shape();
    s.check_range(big_n)?;
    if d == 0 {
        return Ok(NspVerdict {
            support: s.clone(),
            value: None,
            kernel_on_support: false,
            pass: true,
            lp: None,
        });
    }
    let off: Vec<usize> = (0..big_n).filter(|&j| !s.contains(j)).collect();
    // V has orthonormal columns, so |V c| = |c| and the smallest singular
    // value of V restricted to E^c measures, in absolute terms, how close a
    // unit kernel vector can come to living on E.
    let v_off = DMatrix::from_fn(off.len(), d, |r, c| v[(off[r], c)]);
    let kernel_on_support = off.len() < d
        || jacobi_symmetric_eigen(&v_off.tr_mul(&v_off), false)?.min().max(0.0).sqrt() <= RANK_TOL;

    let rows = off.len() + 1;
    let cols = d + 2 * off.len();
    let mut m = DMatrix::zeros(rows, cols);
    for (r, &j) in off.iter().enumerate() {
        for t in 0..d {
            m[(r, t)] = v[(j, t)];
        }
        m[(r, d + 2 * r)] = -1.0;
        m[(r, d + 2 * r + 1)] = 1.0;
    }
    for (&i, &sg) in s.indices().iter().zip(s.signs()) {
        for t in 0..d {
            m[(off.len(), t)] += f64::from(sg) * v[(i, t)];
        }
    }
    let mut b = vec![0.0; rows];
    b[off.len()] = 1.0;
    let mut c = vec![0.0; d];
    c.extend(std::iter::repeat_n(1.0, 2 * off.len()));
    let lp = LinearProgram::new(c, m, b)?;
    let free: Vec<bool> = (0..cols).map(|j| j < d).collect();
    let sol = solve_lp_free(&lp, &free)?;
    let value = match sol.status {
        LpStatus::Optimal => Some(sol.objective.max(0.0)),
        LpStatus::Infeasible => None,
        other => return Err(Error::Lp(other)),
    };
    let pass = !kernel_on_support && value.is_none_or(|val| val > 1.0 + CERTIFICATE_TOL);
    Ok(NspVerdict {
        support: s.clone(),
        value,
        kernel_on_support,
        pass,
        lp: Some(sol.stats()),
    })
}

pub fn nullspace_property_check(a: &SensingMatrix, m: usize) -> Result<NspReport> {
    nullspace_property_check_with(a, m, &NspOptions::default())
}

/// `||v_E||_1 < ||v_{E^c}||_1` for all nonzero `v` in `ker A` and `|E| <= m`.
///
/// Exhaustive (one LP per signed support) when the kernel has dimension at
/// most [`NSP_MAX_KERNEL_DIM`] and `N <= NSP_MAX_COLUMNS`; otherwise random
/// kernel vectors are tested against their worst support and the report is
/// flagged [`NspMode::Sampled`].
pub fn nullspace_property_check_with(a: &SensingMatrix, m: usize, opts: &NspOptions) -> Result<NspReport> {
    if m == 0 || m > a.cols() {
        return Err(Error::param(format!("order m = {m} must lie in 1..={}", a.cols())));
    }
    let v = kernel_matrix(a)?;
    let d = v.ncols();
    if d <= NSP_MAX_KERNEL_DIM && a.cols() <= NSP_MAX_COLUMNS {
        check_budget(signed_support_count(a.cols(), m), opts.budget)?;
        let mut failures = Vec::new();
        for k in 1..=m {
            let supports: Vec<SignedSupport> = signed_supports(a.cols(), k).collect();
            let verdicts: Vec<NspVerdict> = supports.par_iter().map(|s| nsp_verdict(&v, s)).collect::<Result<_>>()?;
            failures.extend(verdicts.into_iter().filter(|x| !x.pass).map(|x| x.support));
        }
        failures.sort();
        return Ok(NspReport {
            m,
            mode: NspMode::Exhaustive,
            kernel_dim: d,
            pass: failures.is_empty(),
            failures,
            worst_ratio: None,
            samples: 0,
        });
    }

    let mut stream = RngStream::new(opts.seed, 0x4E5F);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for _ in 0..opts.samples {
        let c = DVector::from_fn(d, |_, _| stream.gaussian());
        let x = &v * c;
        let mut order: Vec<usize> = (0..a.cols()).collect();
        order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()));
        let top: f64 = order[..m].iter().map(|&i| x[i].abs()).sum();
        let rest: f64 = order[m..].iter().map(|&i| x[i].abs()).sum();
        let ratio = if rest > 0.0 { top / rest } else { f64::INFINITY };
        worst = worst.max(ratio);
        if ratio >= 1.0 {
            let mut idx = order[..m].to_vec();
            idx.sort_unstable();
            let signs = idx.iter().map(|&i| if x[i] < 0.0 { -1 } else { 1 }).collect();
            failures.push(SignedSupport::new(idx, signs)?);
        }
    }
    failures.sort();
    failures.dedup();
    Ok(NspReport {
        m,
        mode: NspMode::Sampled,
        kernel_dim: d,
        pass: failures.is_empty(),
        failures,
        worst_ratio: Some(worst),
        samples: opts.samples,
    })
}
