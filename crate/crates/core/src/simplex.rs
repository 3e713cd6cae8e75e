//! Two-phase revised simplex for standard-form programs
//! `min c.x  s.t.  M x = b, x >= 0`.
//!
//! Pricing and the ratio test both follow Bland's rule, so the pivot sequence
//! is a deterministic function of the input and cycling cannot occur. The
//! basis inverse is kept explicitly, updated by elementary row operations and
//! recomputed from scratch every [`REFACTOR_EVERY`] pivots.
//!
//! All LP-backed decisions elsewhere in the crate read their thresholds from
//! the constants below.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primal feasibility tolerance, scaled by `1 + ||b||_inf`.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Reduced-cost optimality tolerance.
pub const REDUCED_COST_TOL: f64 = 1e-8;
/// Smallest admissible pivot magnitude.
pub const PIVOT_TOL: f64 = 1e-11;
/// Entries of the entering column below this are skipped in the ratio test.
const RATIO_TOL: f64 = 1e-9;
pub const REFACTOR_EVERY: usize = 50;
pub const MAX_ROWS: usize = 2000;
pub const MAX_COLS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: DMatrix<f64>,
    pub rhs: Vec<f64>,
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub max_residual: f64,
}

/// Solver bookkeeping carried alongside LP-backed verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpStats {
    pub status: LpStatus,
    pub iterations: usize,
    pub max_residual: f64,
}

impl LpSolution {
    pub fn stats(&self) -> LpStats {
        LpStats {
            status: self.status,
            iterations: self.iterations,
            max_residual: self.max_residual,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// The solution if optimal, otherwise the status as an error.
    pub fn optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            s => Err(Error::Lp(s)),
        }
    }
}

/// Self-describing JSON form of a program, for debugging dumps.
#[derive(Serialize, Deserialize)]
struct LpDump {
    format: String,
    sense: String,
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, constraints: DMatrix<f64>, rhs: Vec<f64>) -> Result<Self> {
        let lp = Self {
            objective,
            constraints,
            rhs,
            labels: None,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn rows(&self) -> usize {
        self.constraints.nrows()
    }

    pub fn cols(&self) -> usize {
        self.constraints.ncols()
    }

    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "objective has {} entries for {} columns",
                self.objective.len(),
                self.cols()
            )));
        }
        if self.rhs.len() != self.rows() {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} entries for {} rows",
                self.rhs.len(),
                self.rows()
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.cols() {
                return Err(Error::DimensionMismatch("one label per column".into()));
            }
        }
        if self.rhs.iter().chain(&self.objective).any(|v| !v.is_finite())
            || self.constraints.iter().any(|v| !v.is_finite())
        {
            return Err(Error::param("linear program data must be finite"));
        }
        if self.rows() > MAX_ROWS || self.cols() > MAX_COLS {
            return Err(Error::param(format!(
                "program is {}x{}, limit is {MAX_ROWS}x{MAX_COLS}",
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let dump = LpDump {
            format: "neighborly-lp/1".into(),
            sense: "minimize".into(),
            objective: self.objective.clone(),
            rows: self
                .constraints
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            rhs: self.rhs.clone(),
            labels: self.labels.clone(),
        };
        Ok(serde_json::to_string_pretty(&dump)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let dump: LpDump = serde_json::from_str(s)?;
        let cols = dump.objective.len();
        let rows = dump.rows.len();
        if dump.rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged constraint rows".into()));
        }
        let m = DMatrix::from_fn(rows, cols, |r, c| dump.rows[r][c]);
        let lp = Self {
            objective: dump.objective,
            constraints: m,
            rhs: dump.rhs,
            labels: dump.labels,
        };
        lp.validate()?;
        Ok(lp)
    }
}

struct Tableau<'a> {
    m: &'a DMatrix<f64>,
    b: DVector<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    xb: DVector<f64>,
    pivots_since_refactor: usize,
    iterations: usize,
    cap: usize,
}

enum Step {
    Optimal,
    Pivoted,
    Unbounded,
    Stop(LpStatus),
}

impl<'a> Tableau<'a> {
    /// Column `j` of `[M | I]`; indices `>= cols` are artificials.
    fn column(&self, j: usize) -> DVector<f64> {
        if j < self.cols {
            self.m.column(j).clone_owned()
        } else {
            let mut e = DVector::zeros(self.rows);
            e[j - self.cols] = 1.0;
            e
        }
    }

    fn dot_column(&self, y: &DVector<f64>, j: usize) -> f64 {
        if j < self.cols {
            self.m.column(j).dot(y)
        } else {
            y[j - self.cols]
        }
    }

    fn refactor(&mut self) -> std::result::Result<(), LpStatus> {
        let mut bmat = DMatrix::zeros(self.rows, self.rows);
        for (k, &j) in self.basis.iter().enumerate() {
            bmat.set_column(k, &self.column(j));
        }
        self.binv = bmat.try_inverse().ok_or(LpStatus::NumericalBreakdown)?;
        self.xb = &self.binv * &self.b;
        self.clamp();
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn clamp(&mut self) {
        for v in self.xb.iter_mut() {
            if *v < 0.0 && *v > -FEASIBILITY_TOL {
                *v = 0.0;
            }
        }
    }

    fn pivot(&mut self, r: usize, entering: usize, d: &DVector<f64>) -> std::result::Result<(), LpStatus> {
        let piv = d[r];
        if piv.abs() < PIVOT_TOL {
            return Err(LpStatus::NumericalBreakdown);
        }
        let theta = self.xb[r] / piv;
        for i in 0..self.rows {
            if i != r {
                self.xb[i] -= theta * d[i];
            }
        }
        self.xb[r] = theta;
        let pivot_row = self.binv.row(r) / piv;
        for i in 0..self.rows {
            if i != r && d[i] != 0.0 {
                let f = d[i];
                for c in 0..self.rows {
                    self.binv[(i, c)] -= f * pivot_row[c];
                }
            }
        }
        self.binv.set_row(r, &pivot_row);
        self.basis[r] = entering;
        self.clamp();
        self.iterations += 1;
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    /// One Bland iteration for the cost vector `cost` over columns `0..allowed`.
    fn step(&mut self, cost: &dyn Fn(usize) -> f64, allowed: usize, in_basis: &mut [bool]) -> Step {
        if self.iterations >= self.cap {
            return Step::Stop(LpStatus::IterationLimit);
        }
        let cb = DVector::from_iterator(self.rows, self.basis.iter().map(|&j| cost(j)));
        let y = self.binv.tr_mul(&cb);
        let entering = (0..allowed)
            .find(|&j| !in_basis[j] && cost(j) - self.dot_column(&y, j) < -REDUCED_COST_TOL);
        let Some(q) = entering else {
            return Step::Optimal;
        };
        let d = &self.binv * self.column(q);
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            if d[i] > RATIO_TOL {
                let ratio = self.xb[i].max(0.0) / d[i];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tol = 1e-12 * best.abs().max(1.0);
                        if ratio < best - tol || (ratio <= best + tol && self.basis[i] < self.basis[r]) {
                            Some((i, ratio.min(best)))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            return Step::Unbounded;
        };
        let old = self.basis[r];
        if let Err(s) = self.pivot(r, q, &d) {
            return Step::Stop(s);
        }
        in_basis[old] = false;
        in_basis[q] = true;
        Step::Pivoted
    }
}

/// Solve `min c.x s.t. M x = b, x >= 0`.
///
/// Returns `Err` only for malformed input; solver outcomes (infeasible,
/// unbounded, iteration cap, breakdown) are reported through
/// [`LpSolution::status`].
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let rows = lp.rows();
    let cols = lp.cols();
    let mut m = lp.constraints.clone();
    let mut b = DVector::from_column_slice(&lp.rhs);
    for i in 0..rows {
        if b[i] < 0.0 {
            b[i] = -b[i];
            m.row_mut(i).neg_mut();
        }
    }
    let b_inf = b.amax();
    let failed = |status, iterations| LpSolution {
        status,
        x: vec![0.0; cols],
        objective: f64::NAN,
        iterations,
        max_residual: f64::NAN,
    };

    let mut t = Tableau {
        m: &m,
        b: b.clone(),
        rows,
        cols,
        basis: (cols..cols + rows).collect(),
        binv: DMatrix::identity(rows, rows),
        xb: b.clone(),
        pivots_since_refactor: 0,
        iterations: 0,
        cap: 50 * (rows + cols),
    };
    let mut in_basis = vec![false; cols + rows];
    for j in cols..cols + rows {
        in_basis[j] = true;
    }

    // Phase I: minimize the sum of artificials.
    let phase1 = |j: usize| if j >= cols { 1.0 } else { 0.0 };
    loop {
        match t.step(&phase1, cols, &mut in_basis) {
            Step::Pivoted => {}
            Step::Optimal => break,
            Step::Unbounded => return Ok(failed(LpStatus::NumericalBreakdown, t.iterations)),
            Step::Stop(s) => return Ok(failed(s, t.iterations)),
        }
    }
    if t.refactor().is_err() {
        return Ok(failed(LpStatus::NumericalBreakdown, t.iterations));
    }
    let infeasibility: f64 = t
        .basis
        .iter()
        .zip(t.xb.iter())
        .filter(|(&j, _)| j >= cols)
        .map(|(_, &v)| v.abs())
        .sum();
    if infeasibility > FEASIBILITY_TOL * (1.0 + b_inf) {
        return Ok(failed(LpStatus::Infeasible, t.iterations));
    }

    // Drive zero-level artificials out of the basis where some structural
    // column can replace them; rows where none can are redundant and keep
    // their artificial pinned at zero.
    for r in 0..rows {
        if t.basis[r] < cols {
            continue;
        }
        let row = t.binv.row(r).transpose();
        let candidate = (0..cols).find(|&j| !in_basis[j] && t.m.column(j).dot(&row).abs() > RATIO_TOL);
        if let Some(j) = candidate {
            let d = &t.binv * t.column(j);
            let old = t.basis[r];
            if t.pivot(r, j, &d).is_err() {
                return Ok(failed(LpStatus::NumericalBreakdown, t.iterations));
            }
            in_basis[old] = false;
            in_basis[j] = true;
        }
    }

    // Phase II.
    let c = &lp.objective;
    let phase2 = |j: usize| if j < cols { c[j] } else { 0.0 };
    loop {
        match t.step(&phase2, cols, &mut in_basis) {
            Step::Pivoted => {}
            Step::Optimal => break,
            Step::Unbounded => return Ok(failed(LpStatus::Unbounded, t.iterations)),
            Step::Stop(s) => return Ok(failed(s, t.iterations)),
        }
    }
    if t.pivots_since_refactor > 0 && t.refactor().is_err() {
        return Ok(failed(LpStatus::NumericalBreakdown, t.iterations));
    }

    let mut x = vec![0.0; cols];
    for (k, &j) in t.basis.iter().enumerate() {
        if j < cols {
            x[j] = t.xb[k];
        }
    }
    let xv = DVector::from_column_slice(&x);
    let residual = (&lp.constraints * &xv - DVector::from_column_slice(&lp.rhs)).amax();
    let objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        iterations: t.iterations,
        max_residual: residual,
    })
}

/// Solve a program in which the variables flagged in `free` are unrestricted.
///
/// Each free variable `x_j` is split as `x_j = u_j - v_j` with `u_j, v_j >= 0`;
/// the returned point is recombined to the original variables.
pub fn solve_lp_free(lp: &LinearProgram, free: &[bool]) -> Result<LpSolution> {
    if free.len() != lp.cols() {
        return Err(Error::DimensionMismatch("one free flag per column".into()));
    }
    let extra: Vec<usize> = (0..lp.cols()).filter(|&j| free[j]).collect();
    let cols = lp.cols() + extra.len();
    let mut m = DMatrix::zeros(lp.rows(), cols);
    m.view_mut((0, 0), (lp.rows(), lp.cols())).copy_from(&lp.constraints);
    let mut c = lp.objective.clone();
    for (k, &j) in extra.iter().enumerate() {
        let col = -lp.constraints.column(j);
        m.set_column(lp.cols() + k, &col);
        c.push(-lp.objective[j]);
    }
    let split = LinearProgram {
        objective: c,
        constraints: m,
        rhs: lp.rhs.clone(),
        labels: None,
    };
    let mut sol = solve_lp(&split)?;
    let mut x = sol.x[..lp.cols()].to_vec();
    if sol.is_optimal() {
        for (k, &j) in extra.iter().enumerate() {
            x[j] -= sol.x[lp.cols() + k];
        }
    }
    sol.x = x;
    Ok(sol)
}
