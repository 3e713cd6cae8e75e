//! Faces of `K(A) = conv(+-X_i)` and `K+(A) = conv(X_i)`.
//!
//! A signed selection `S` spans a face of `K(A)` when some functional `y`
//! takes the value 1 on every `s_i X_i` and stays strictly below 1 in absolute
//! value on the remaining columns. Strictness is made quantitative by
//! maximizing the slack `delta`:
//!
//! ```text
//! max delta   s.t.  <y, s_i X_i> = 1        (i in S)
//!                   +-<y, X_j> + delta <= 1 (j not in S)
//!                   delta <= 1
//! ```
//!
//! The cap keeps the program bounded when `S` uses every column. For `K+(A)`
//! the exposing hyperplane is affine, `<y, x> = alpha` with `alpha` free, and
//! `y` is boxed in `[-1, 1]^n` to fix the scale.
//!
//! A face is reported only when the selected points are also affinely
//! independent, so that they are exactly the vertex set of a simplex face.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, check_budget, signed_support_count, Colex};
use crate::ensembles::SensingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{gram_submatrix, jacobi_symmetric_eigen, RANK_TOL};
use crate::recovery::{
    all_sparse_recovery_check, certificate_program, kernel_matrix, nsp_verdict, recovery_verdict, signed_supports,
    RecoveryCheckReport, SignedSupport, DEFAULT_RECOVERY_BUDGET,
};
use crate::simplex::{solve_lp_free, LinearProgram, LpStats, LpStatus};

/// Slack `delta*` must exceed this for a strict face.
pub const FACE_MARGIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolytopeMode {
    /// `conv(+-X_i)`
    Central,
    /// `conv(X_i)`
    Positive,
}

impl std::str::FromStr for PolytopeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" => Ok(PolytopeMode::Central),
            "positive" => Ok(PolytopeMode::Positive),
            other => Err(Error::Parse(format!("unknown polytope mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceQueryResult {
    pub support: SignedSupport,
    pub mode: PolytopeMode,
    pub is_face: bool,
    /// Optimal slack; `None` when the equalities are inconsistent.
    pub margin: Option<f64>,
    /// Selected points are affinely independent.
    pub independent: bool,
    pub witness: Vec<f64>,
    /// Offset of the exposing hyperplane (1 in central mode).
    pub alpha: f64,
    pub lp: LpStats,
}

/// The face program. Columns are `[y (n, free), (alpha, free), delta (free), slacks]`;
/// `alpha` is present only in positive mode.
pub fn face_program(a: &SensingMatrix, s: &SignedSupport, mode: PolytopeMode) -> Result<(LinearProgram, Vec<bool>)> {
    s.check_range(a.cols())?;
    if mode == PolytopeMode::Positive && s.signs().iter().any(|&g| g < 0) {
        return Err(Error::param("positive-mode selections carry only + signs"));
    }
    let n = a.rows();
    let x = a.entries();
    let off: Vec<usize> = (0..a.cols()).filter(|&j| !s.contains(j)).collect();
    let k = s.len();
    let (alpha_col, delta_col) = match mode {
        PolytopeMode::Central => (None, n),
        PolytopeMode::Positive => (Some(n), n + 1),
    };
    let first_slack = delta_col + 1;
    let (ineq, box_rows) = match mode {
        PolytopeMode::Central => (2 * off.len(), 0),
        PolytopeMode::Positive => (off.len(), 2 * n),
    };
    let slacks = ineq + box_rows + 1;
    let rows = k + ineq + box_rows + 1;
    let cols = first_slack + slacks;
    let mut m = DMatrix::zeros(rows, cols);
    let mut b = vec![0.0; rows];

    for (r, (&i, &sg)) in s.indices().iter().zip(s.signs()).enumerate() {
        for l in 0..n {
            m[(r, l)] = f64::from(sg) * x[(l, i)];
        }
        match alpha_col {
            Some(ac) => m[(r, ac)] = -1.0,
            None => b[r] = 1.0,
        }
    }
    let mut r = k;
    let mut slack = first_slack;
    for &j in &off {
        let signs: &[f64] = match mode {
            PolytopeMode::Central => &[1.0, -1.0],
            PolytopeMode::Positive => &[1.0],
        };
        for &sg in signs {
            for l in 0..n {
                m[(r, l)] = sg * x[(l, j)];
            }
            m[(r, delta_col)] = 1.0;
            m[(r, slack)] = 1.0;
            match alpha_col {
                Some(ac) => m[(r, ac)] = -1.0,
                None => b[r] = 1.0,
            }
            r += 1;
            slack += 1;
        }
    }
    for l in 0..box_rows / 2 {
        for sg in [1.0, -1.0] {
            m[(r, l)] = sg;
            m[(r, slack)] = 1.0;
            b[r] = 1.0;
            r += 1;
            slack += 1;
        }
    }
    m[(r, delta_col)] = 1.0;
    m[(r, slack)] = 1.0;
    b[r] = 1.0;

    let mut c = vec![0.0; cols];
    c[delta_col] = -1.0;
    let free = (0..cols).map(|j| j < first_slack).collect();
    Ok((LinearProgram::new(c, m, b)?, free))
}

/// Independence of the selected points, from the Gram spectrum: linear in
/// central mode (the points sit on a hyperplane missing the origin, so this is
/// also affine independence), affine in positive mode via the lift `(x, 1)`.
fn points_independent(a: &SensingMatrix, s: &SignedSupport, mode: PolytopeMode) -> Result<bool> {
    let mut gram = gram_submatrix(a.entries(), s.indices())?;
    if mode == PolytopeMode::Positive {
        gram.add_scalar_mut(1.0);
    }
    let eig = jacobi_symmetric_eigen(&gram, false)?;
    Ok(eig.max() > 0.0 && eig.min().max(0.0).sqrt() > RANK_TOL * eig.max().sqrt())
}

pub fn is_face(a: &SensingMatrix, s: &SignedSupport, mode: PolytopeMode) -> Result<FaceQueryResult> {
    is_face_with(a, s, mode, FACE_MARGIN_TOL)
}

/// [`is_face`] with an explicit margin threshold (for fault injection).
pub fn is_face_with(a: &SensingMatrix, s: &SignedSupport, mode: PolytopeMode, threshold: f64) -> Result<FaceQueryResult> {
    let (lp, free) = face_program(a, s, mode)?;
    let sol = solve_lp_free(&lp, &free)?;
    let independent = points_independent(a, s, mode)?;
    let n = a.rows();
    let delta_col = if mode == PolytopeMode::Central { n } else { n + 1 };
    let (margin, witness, alpha) = match sol.status {
        LpStatus::Optimal => (
            Some(sol.x[delta_col]),
            sol.x[..n].to_vec(),
            if mode == PolytopeMode::Central { 1.0 } else { sol.x[n] },
        ),
        LpStatus::Infeasible => (None, Vec::new(), f64::NAN),
        other => return Err(Error::Lp(other)),
    };
    Ok(FaceQueryResult {
        support: s.clone(),
        mode,
        is_face: independent && margin.is_some_and(|d| d > threshold),
        margin,
        independent,
        witness,
        alpha,
        lp: sol.stats(),
    })
}

/// Every selection of size `k` for the given mode, in canonical order.
fn selections(cols: usize, k: usize, mode: PolytopeMode) -> Vec<SignedSupport> {
    match mode {
        PolytopeMode::Central => signed_supports(cols, k).collect(),
        PolytopeMode::Positive => Colex::new(cols, k)
            .map(|idx| SignedSupport::positive(idx).expect("valid by construction"))
            .collect(),
    }
}

fn selection_count(cols: usize, k: usize, mode: PolytopeMode) -> u128 {
    match mode {
        PolytopeMode::Central => binomial(cols, k).saturating_mul(1 << k.min(127)),
        PolytopeMode::Positive => binomial(cols, k),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexCensus {
    pub mode: PolytopeMode,
    pub expected: usize,
    pub vertices: usize,
    pub all_present: bool,
    pub non_vertices: Vec<SignedSupport>,
}

pub fn vertex_census(a: &SensingMatrix, mode: PolytopeMode) -> Result<VertexCensus> {
    vertex_census_with(a, mode, FACE_MARGIN_TOL)
}

pub fn vertex_census_with(a: &SensingMatrix, mode: PolytopeMode, threshold: f64) -> Result<VertexCensus> {
    let singles = selections(a.cols(), 1, mode);
    let results: Vec<FaceQueryResult> = singles
        .par_iter()
        .map(|s| is_face_with(a, s, mode, threshold))
        .collect::<Result<_>>()?;
    let non_vertices: Vec<SignedSupport> = results.into_iter().filter(|r| !r.is_face).map(|r| r.support).collect();
    Ok(VertexCensus {
        mode,
        expected: singles.len(),
        vertices: singles.len() - non_vertices.len(),
        all_present: non_vertices.is_empty(),
        non_vertices,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Some selection of size `verified_order + 1` is not a face.
    FailureFound,
    /// Every size up to `m_max` passed.
    ReachedMax,
    /// The next size would exceed the budget; the result is partial.
    BudgetExhausted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeighborlinessReport {
    pub mode: PolytopeMode,
    pub m_max: usize,
    pub verified_order: usize,
    pub vertex_count_full: bool,
    pub failures_at_next: Vec<SignedSupport>,
    pub stop: StopReason,
    pub budget: u128,
    pub budget_consumed: u128,
}

/// Largest `m* <= m_max` such that every selection of size `1..=m*` is a face.
///
/// Sizes are checked in increasing order; the scan stops at the first size
/// with a failure, or before a size whose selections would overrun `budget`
/// (the report is then flagged [`StopReason::BudgetExhausted`]).
pub fn neighborliness_order(a: &SensingMatrix, m_max: usize, budget: u128, mode: PolytopeMode) -> Result<NeighborlinessReport> {
    neighborliness_order_with(a, m_max, budget, mode, FACE_MARGIN_TOL)
}

pub fn neighborliness_order_with(
    a: &SensingMatrix,
    m_max: usize,
    budget: u128,
    mode: PolytopeMode,
    threshold: f64,
) -> Result<NeighborlinessReport> {
    if m_max == 0 || m_max > a.cols() {
        return Err(Error::param(format!("m_max = {m_max} must lie in 1..={}", a.cols())));
    }
    let mut report = NeighborlinessReport {
        mode,
        m_max,
        verified_order: 0,
        vertex_count_full: false,
        failures_at_next: Vec::new(),
        stop: StopReason::ReachedMax,
        budget,
        budget_consumed: 0,
    };
    for k in 1..=m_max {
        let count = selection_count(a.cols(), k, mode);
        if report.budget_consumed.saturating_add(count) > budget {
            report.stop = StopReason::BudgetExhausted;
            break;
        }
        report.budget_consumed += count;
        let results: Vec<FaceQueryResult> = selections(a.cols(), k, mode)
            .par_iter()
            .map(|s| is_face_with(a, s, mode, threshold))
            .collect::<Result<_>>()?;
        let failures: Vec<SignedSupport> = results.into_iter().filter(|r| !r.is_face).map(|r| r.support).collect();
        if k == 1 {
            report.vertex_count_full = failures.is_empty();
        }
        if !failures.is_empty() {
            report.failures_at_next = failures;
            report.stop = StopReason::FailureFound;
            break;
        }
        report.verified_order = k;
    }
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct CrossCheckOptions {
    /// Overrides [`FACE_MARGIN_TOL`] on the polytope side only.
    pub face_margin_threshold: Option<f64>,
    pub budget: Option<u128>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Disagreement {
    pub support: SignedSupport,
    pub face: FaceQueryResult,
    pub recovery_ok: bool,
    pub gamma: Option<f64>,
    pub face_program: serde_json::Value,
    pub certificate_program: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DonohoReport {
    pub m: usize,
    /// All `2N` vertices present and every selection of size `<= m` a face.
    pub polytope_side: bool,
    /// Every signed support of size `<= m` uniquely recovered.
    pub recovery_side: bool,
    pub agree: bool,
    pub census: VertexCensus,
    pub neighborliness: NeighborlinessReport,
    pub recovery: RecoveryCheckReport,
    /// Smallest signed support on which the two sides differ.
    pub witness: Option<Disagreement>,
}

pub fn donoho_cross_check(a: &SensingMatrix, m: usize) -> Result<DonohoReport> {
    donoho_cross_check_with(a, m, &CrossCheckOptions::default())
}

/// Compare the central-neighborliness side with exhaustive recovery at order `m`.
pub fn donoho_cross_check_with(a: &SensingMatrix, m: usize, opts: &CrossCheckOptions) -> Result<DonohoReport> {
    let budget = opts.budget.unwrap_or(DEFAULT_RECOVERY_BUDGET);
    let threshold = opts.face_margin_threshold.unwrap_or(FACE_MARGIN_TOL);
    check_budget(signed_support_count(a.cols(), m), budget)?;
    let census = vertex_census_with(a, PolytopeMode::Central, threshold)?;
    let neighborliness = neighborliness_order_with(a, m, budget, PolytopeMode::Central, threshold)?;
    let recovery = all_sparse_recovery_check(a, m, budget)?;
    let polytope_side = census.all_present && neighborliness.verified_order >= m;
    let recovery_side = recovery.pass;
    let agree = polytope_side == recovery_side;
    let witness = if agree {
        None
    } else {
        first_disagreement(a, m, threshold)?
    };
    Ok(DonohoReport {
        m,
        polytope_side,
        recovery_side,
        agree,
        census,
        neighborliness,
        recovery,
        witness,
    })
}

fn first_disagreement(a: &SensingMatrix, m: usize, threshold: f64) -> Result<Option<Disagreement>> {
    for k in 1..=m {
        for s in signed_supports(a.cols(), k) {
            let face = is_face_with(a, &s, PolytopeMode::Central, threshold)?;
            let (cert, ok) = recovery_verdict(a, &s)?;
            if face.is_face != ok {
                let (flp, _) = face_program(a, &s, PolytopeMode::Central)?;
                let (clp, _) = certificate_program(a, &s)?;
                return Ok(Some(Disagreement {
                    support: s,
                    face,
                    recovery_ok: ok,
                    gamma: cert.gamma,
                    face_program: serde_json::from_str(&flp.to_json()?)?,
                    certificate_program: serde_json::from_str(&clp.to_json()?)?,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreeWayRow {
    pub support: SignedSupport,
    pub face: bool,
    pub certificate: bool,
    pub nullspace: bool,
    pub margin: Option<f64>,
    pub gamma: Option<f64>,
    pub nsp_value: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreeWayReport {
    pub m: usize,
    pub signed_supports: usize,
    pub face_pass: bool,
    pub certificate_pass: bool,
    pub nullspace_pass: bool,
    /// Rows where the three verdicts are not all equal, in canonical order.
    pub disagreements: Vec<ThreeWayRow>,
}

/// Face, dual-certificate and null-space verdicts on every signed support of size `<= m`.
pub fn three_way_check(a: &SensingMatrix, m: usize, budget: u128) -> Result<ThreeWayReport> {
    if m == 0 || m > a.cols() {
        return Err(Error::param(format!("order m = {m} must lie in 1..={}", a.cols())));
    }
    check_budget(signed_support_count(a.cols(), m), budget)?;
    let v = kernel_matrix(a)?;
    let supports: Vec<SignedSupport> = (1..=m).flat_map(|k| signed_supports(a.cols(), k)).collect();
    let rows: Vec<ThreeWayRow> = supports
        .par_iter()
        .map(|s| {
            let face = is_face(a, s, PolytopeMode::Central)?;
            let (cert, ok) = recovery_verdict(a, s)?;
            let nsp = nsp_verdict(&v, s)?;
            Ok(ThreeWayRow {
                support: s.clone(),
                face: face.is_face,
                certificate: ok,
                nullspace: nsp.pass,
                margin: face.margin,
                gamma: cert.gamma,
                nsp_value: nsp.value,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ThreeWayReport {
        m,
        signed_supports: rows.len(),
        face_pass: rows.iter().all(|r| r.face),
        certificate_pass: rows.iter().all(|r| r.certificate),
        nullspace_pass: rows.iter().all(|r| r.nullspace),
        disagreements: rows
            .into_iter()
            .filter(|r| !(r.face == r.certificate && r.certificate == r.nullspace))
            .collect(),
    })
}
