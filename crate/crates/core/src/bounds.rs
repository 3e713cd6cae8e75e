//! Plug-in calculators for the probabilistic bounds, and Monte Carlo checks
//! that compare empirical tails and moments against them.
//!
//! The universal constants `C` and `c` of the underlying theorems are not
//! known numerically; every calculator takes them from [`BoundConstants`]
//! and nothing here should be read as a quantitative prediction unless the
//! constants were calibrated. All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randsrc::{weibull_variance, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundConstants {
    /// The large universal constant `C`.
    pub c_big: f64,
    /// The small universal constant `c`.
    pub c_small: f64,
    /// Thin-shell exponent on `theta`.
    pub c0: f64,
    /// Thin-shell exponent on `n`.
    pub c1: f64,
    /// Constant in `max_i |X_i| <= C0 K sqrt(n)`.
    pub c0_max: f64,
    pub theta: f64,
    pub theta_prime: f64,
    pub k: f64,
    pub k_prime: f64,
    pub psi: f64,
    pub r: f64,
    /// Use this `xi` instead of `psi K + K'`.
    pub xi: Option<f64>,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self {
            c_big: 1.0,
            c_small: 1.0,
            c0: 3.33,
            c1: 0.33,
            c0_max: 1.0,
            theta: 0.2,
            theta_prime: (2f64.sqrt() - 1.0) / 2.0,
            k: 1.0,
            k_prime: 1.0,
            psi: 1.0,
            r: 1.0,
            xi: None,
        }
    }
}

impl BoundConstants {
    pub fn xi(&self) -> f64 {
        self.xi.unwrap_or(self.psi * self.k + self.k_prime)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("C", self.c_big),
            ("c", self.c_small),
            ("c0", self.c0),
            ("c1", self.c1),
            ("C0", self.c0_max),
            ("psi", self.psi),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.theta > 0.0 && self.theta < 0.25) {
            return Err(Error::param(format!("theta must lie in (0, 1/4), got {}", self.theta)));
        }
        if !(self.theta_prime > 0.0 && self.theta_prime < 1.0) {
            return Err(Error::param(format!("theta' must lie in (0, 1), got {}", self.theta_prime)));
        }
        if !(self.k >= 1.0 && self.k_prime >= 1.0) {
            return Err(Error::param("K and K' must be at least 1"));
        }
        if !(1.0..=2.0).contains(&self.r) {
            return Err(Error::param(format!("r must lie in [1, 2], got {}", self.r)));
        }
        if let Some(xi) = self.xi {
            if !(xi > 0.0 && xi.is_finite()) {
                return Err(Error::param("xi must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UupBound {
    pub admissible: bool,
    /// `m log^{2/r}(2N / (theta m))`
    pub lhs: f64,
    /// `theta^2 n`
    pub rhs: f64,
    /// `C xi^2 theta n`
    pub bound_on_bm2: f64,
    pub failure_prob: f64,
}

/// Bound on `B_m^2` and its failure probability. `max_norm_tail` is the
/// caller's value for `P(max_i |X_i| >= K' sqrt n)`.
pub fn uup_bound(n: f64, big_n: f64, m: f64, consts: &BoundConstants, max_norm_tail: f64) -> Result<UupBound> {
    consts.validate()?;
    if m < 1.0 {
        return Err(Error::param("m must be at least 1"));
    }
    let theta = consts.theta;
    let log = (2.0 * big_n / (theta * m)).ln();
    let lhs = m * log.max(0.0).powf(2.0 / consts.r);
    let rhs = theta * theta * n;
    let failure_prob = (-consts.c_small * consts.k.powf(consts.r) * m.sqrt() * log).exp() + max_norm_tail;
    Ok(UupBound {
        admissible: lhs <= rhs,
        lhs,
        rhs,
        bound_on_bm2: consts.c_big * consts.xi().powi(2) * theta * n,
        failure_prob,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RipBound {
    pub rhs: f64,
    /// `C xi^2 sqrt(m/n) log^{1/r}(eN / (m sqrt(m/n)))`
    pub first_term: f64,
    pub log_argument: f64,
    /// Right-hand side at least 1: no isometry information.
    pub vacuous: bool,
    /// Log argument at most 1.
    pub log_flag: bool,
    /// `C exp(-c K^r sqrt(m) log(arg))`; the two remaining probability terms
    /// are properties of the ensemble and are left to the caller.
    pub leading_failure_term: f64,
}

pub fn rip_bound_rhs(n: f64, big_n: f64, m: f64, consts: &BoundConstants) -> Result<RipBound> {
    consts.validate()?;
    if !(m >= 1.0 && m <= n.min(big_n)) {
        return Err(Error::param(format!("need 1 <= m <= min(n, N), got m = {m}")));
    }
    let ratio = (m / n).sqrt();
    let arg = std::f64::consts::E * big_n / (m * ratio);
    let log = arg.ln();
    let first_term = consts.c_big * consts.xi().powi(2) * ratio * log.max(0.0).powf(1.0 / consts.r);
    let rhs = first_term + consts.theta_prime;
    Ok(RipBound {
        rhs,
        first_term,
        log_argument: arg,
        vacuous: rhs >= 1.0,
        log_flag: arg <= 1.0,
        leading_failure_term: consts.c_big * (-consts.c_small * consts.k.powf(consts.r) * m.sqrt() * log).exp(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeighborlinessThreshold {
    pub m_bar: u64,
    pub value: f64,
    pub log_argument: f64,
    /// Log argument at most 1; the formula is meaningless there.
    pub log_flag: bool,
}

fn threshold_from(numerator: f64, log_argument: f64, power: f64) -> NeighborlinessThreshold {
    let log = log_argument.ln();
    let value = if log > 0.0 { numerator / log.powf(power) } else { f64::INFINITY };
    NeighborlinessThreshold {
        m_bar: if value.is_finite() { value.floor().max(0.0) as u64 } else { u64::MAX },
        value,
        log_argument,
        log_flag: log_argument <= 1.0,
    }
}

/// `floor(c n / (psi^4 log^{2/r}(C psi^6 N / n)))`, for columns with
/// `psi_r` linear forms and concentrated norms.
pub fn neighborliness_threshold(n: f64, big_n: f64, consts: &BoundConstants) -> Result<NeighborlinessThreshold> {
    consts.validate()?;
    if !(n >= 1.0 && big_n >= n) {
        return Err(Error::param("need N >= n >= 1"));
    }
    let psi = consts.psi;
    Ok(threshold_from(
        consts.c_small * n / psi.powi(4),
        consts.c_big * psi.powi(6) * big_n / n,
        2.0 / consts.r,
    ))
}

/// `floor(c n / log^2(C N / n))`, for points uniform on an isotropic convex body.
pub fn neighborliness_threshold_convex_body(n: f64, big_n: f64, consts: &BoundConstants) -> Result<NeighborlinessThreshold> {
    consts.validate()?;
    if !(n >= 1.0 && big_n >= n) {
        return Err(Error::param("need N >= n >= 1"));
    }
    Ok(threshold_from(consts.c_small * n, consts.c_big * big_n / n, 2.0))
}

/// `2 exp(-t^2 / (4 sum ||Y_i||_{psi_1}^2 + 2 t psi))`.
pub fn bernstein_tail(t: f64, psi1_norms: &[f64], psi: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param("t must be positive"));
    }
    if psi1_norms.iter().any(|&v| v > psi || v < 0.0) {
        return Err(Error::param("psi must dominate every psi_1 norm"));
    }
    let s: f64 = psi1_norms.iter().map(|v| v * v).sum();
    Ok(2.0 * (-t * t / (4.0 * s + 2.0 * t * psi)).exp())
}

/// `||a||_{r*}` with `1/r + 1/r* = 1`; `r = 1` gives the sup norm.
pub fn conjugate_norm(a: &[f64], r: f64) -> f64 {
    if r <= 1.0 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        let q = r / (r - 1.0);
        a.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `2 exp(-c min(t^2 / ||a||_2^2, t^r / ||a||_{r*}^r))` for sums `sum a_i Y_i`
/// of symmetric variables with `P(|Y_i| >= t) = exp(-t^r)`.
pub fn weibull_tail_bound(t: f64, a: &[f64], r: f64, c: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&r) {
        return Err(Error::param(format!("r must lie in [1, 2], got {r}")));
    }
    if t < 0.0 {
        return Err(Error::param("t must be nonnegative"));
    }
    let l2 = a.iter().map(|v| v * v).sum::<f64>();
    let lr = conjugate_norm(a, r).powf(r);
    if l2 == 0.0 {
        return Ok(if t > 0.0 { 0.0 } else { 2.0 });
    }
    let e = (t * t / l2).min(t.powf(r) / lr);
    Ok(2.0 * (-c * e).exp())
}

/// `2 exp(-c min(t^2 / (n b^2), (t / b)^s))`.
pub fn mixed_tail_bound(t: f64, n: f64, b: f64, s: f64, c: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&s) {
        return Err(Error::param(format!("s must lie in [1/2, 1], got {s}")));
    }
    if t < 0.0 || !(b > 0.0) || !(n > 0.0) {
        return Err(Error::param("need t >= 0, b > 0, n > 0"));
    }
    Ok(2.0 * (-c * (t * t / (n * b * b)).min((t / b).powf(s))).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ThinShellExponent {
    /// `c theta^{c0} n^{c1}`.
    Proven,
    /// Conjectured improvement `c(theta) n^{1/2}`, with `c(theta)` supplied.
    Conjectural { c_theta: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThinShell {
    pub exponent: f64,
    pub prob: f64,
    /// `N <= exp(exponent)`.
    pub precondition_ok: bool,
    pub conjectural: bool,
}

/// `C exp(-exponent)` bounding `P(max_i | |X_i|^2/n - 1 | >= theta)`.
pub fn thin_shell_prob(n: f64, big_n: f64, theta: f64, consts: &BoundConstants, mode: ThinShellExponent) -> Result<ThinShell> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::param(format!("theta must lie in (0, 1], got {theta}")));
    }
    let exponent = match mode {
        ThinShellExponent::Proven => consts.c_small * theta.powf(consts.c0) * n.powf(consts.c1),
        ThinShellExponent::Conjectural { c_theta } => c_theta * n.sqrt(),
    };
    Ok(ThinShell {
        exponent,
        prob: consts.c_big * (-exponent).exp(),
        precondition_ok: big_n.ln() <= exponent,
        conjectural: matches!(mode, ThinShellExponent::Conjectural { .. }),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxNorm {
    /// `exp(-K sqrt n)`: probability that `max_i |X_i| > C0 K sqrt n`.
    pub prob: f64,
    /// `N <= exp(sqrt n)`.
    pub precondition_ok: bool,
}

impl MaxNorm {
    pub fn radius(n: f64, k: f64, c0_max: f64) -> f64 {
        c0_max * k * n.sqrt()
    }
}

pub fn max_norm_prob(n: f64, big_n: f64, k: f64) -> Result<MaxNorm> {
    if k < 1.0 {
        return Err(Error::param("K must be at least 1"));
    }
    Ok(MaxNorm {
        prob: (-k * n.sqrt()).exp(),
        precondition_ok: big_n.ln() <= n.sqrt(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmLower {
    /// `c (sqrt n + sqrt m log(2N/m) + t)`
    pub threshold: f64,
    /// `min(c, e^{-t})`
    pub prob_floor: f64,
}

pub fn am_lower_bound(n: f64, big_n: f64, m: f64, t: f64, c: f64) -> Result<AmLower> {
    if t < 1.0 {
        return Err(Error::param("t must be at least 1"));
    }
    if !(m >= 1.0 && m <= big_n) {
        return Err(Error::param("need 1 <= m <= N"));
    }
    Ok(AmLower {
        threshold: c * (n.sqrt() + m.sqrt() * (2.0 * big_n / m).ln() + t),
        prob_floor: c.min((-t).exp()),
    })
}

/// Draws of `sum_i a_i Y_i` with `P(|Y_i| >= t) = exp(-t^r)`.
pub fn weibull_sums(a: &[f64], r: f64, samples: usize, stream: &mut RngStream) -> Vec<f64> {
    (0..samples)
        .map(|_| a.iter().map(|&ai| ai * stream.symmetric_weibull(r)).sum())
        .collect()
}

/// Fraction of `|x| >= t`.
pub fn empirical_survival(samples: &[f64], t: f64) -> f64 {
    samples.iter().filter(|x| x.abs() >= t).count() as f64 / samples.len() as f64
}

pub const MOMENT_ORDERS: [f64; 4] = [2.0, 4.0, 6.0, 8.0];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentGrowthReport {
    pub r: f64,
    pub samples: usize,
    /// `(E |sum a_i Z_i|^p)^{1/p}` for `p` in [`MOMENT_ORDERS`].
    pub moments: Vec<f64>,
    /// `sqrt(p) ||a||_2 + p^{1/r} ||a||_{r*}`
    pub references: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Moment growth of `sum a_i Z_i`, `Z_i` symmetric Weibull(`r`) scaled to variance one.
pub fn moment_growth_check(r: f64, a: &[f64], stream: &mut RngStream, samples: usize) -> Result<MomentGrowthReport> {
    if samples < 10_000 {
        return Err(Error::param("moment estimates need at least 10^4 samples"));
    }
    if !(1.0..=2.0).contains(&r) {
        return Err(Error::param(format!("r must lie in [1, 2], got {r}")));
    }
    let scale = weibull_variance(r)?.sqrt();
    let sums: Vec<f64> = weibull_sums(a, r, samples, stream).into_iter().map(|s| s / scale).collect();
    let l2 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let lr = conjugate_norm(a, r);
    let mut moments = Vec::new();
    let mut references = Vec::new();
    for p in MOMENT_ORDERS {
        let m = sums.iter().map(|s| s.abs().powf(p)).sum::<f64>() / samples as f64;
        moments.push(m.powf(1.0 / p));
        references.push(p.sqrt() * l2 + p.powf(1.0 / r) * lr);
    }
    let ratios: Vec<f64> = moments.iter().zip(&references).map(|(m, b)| m / b).collect();
    Ok(MomentGrowthReport {
        r,
        samples,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        moments,
        references,
        ratios,
    })
}

/// Formulas reachable through [`evaluate_formula`].
pub const FORMULAS: [&str; 7] = ["rip", "uup", "neighborly", "bernstein", "weibull", "thinshell", "amlower"];

/// Parameters for [`evaluate_formula`]; unused fields are ignored.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FormulaParams {
    pub n: Option<f64>,
    #[serde(rename = "N")]
    pub big_n: Option<f64>,
    pub m: Option<f64>,
    pub t: Option<f64>,
    pub theta: Option<f64>,
    /// Coefficients for `weibull`, psi_1 norms for `bernstein`.
    pub a: Vec<f64>,
    /// Tail exponent for `weibull`; defaults to `constants.r`.
    pub r: Option<f64>,
    pub max_norm_tail: Option<f64>,
    /// `neighborly`: use the convex-body variant.
    pub convex_body: bool,
    /// `thinshell`: set to use the conjectural `c(theta) sqrt n` exponent.
    pub c_theta: Option<f64>,
    pub constants: BoundConstants,
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::param(format!("missing parameter {name:?}")))
}

/// Evaluate one named calculator and return its result as JSON.
pub fn evaluate_formula(formula: &str, p: &FormulaParams) -> Result<serde_json::Value> {
    let k = &p.constants;
    k.validate()?;
    let v = match formula {
        "rip" => serde_json::to_value(rip_bound_rhs(need(p.n, "n")?, need(p.big_n, "N")?, need(p.m, "m")?, k)?)?,
        "uup" => serde_json::to_value(uup_bound(
            need(p.n, "n")?,
            need(p.big_n, "N")?,
            need(p.m, "m")?,
            k,
            p.max_norm_tail.unwrap_or(0.0),
        )?)?,
        "neighborly" => {
            let (n, big_n) = (need(p.n, "n")?, need(p.big_n, "N")?);
            let t = if p.convex_body {
                neighborliness_threshold_convex_body(n, big_n, k)?
            } else {
                neighborliness_threshold(n, big_n, k)?
            };
            serde_json::to_value(t)?
        }
        "bernstein" => serde_json::json!({ "prob": bernstein_tail(need(p.t, "t")?, &p.a, k.psi)? }),
        "weibull" => {
            let r = p.r.unwrap_or(k.r);
            serde_json::json!({ "prob": weibull_tail_bound(need(p.t, "t")?, &p.a, r, k.c_small)? })
        }
        "thinshell" => {
            let mode = match p.c_theta {
                Some(c_theta) => ThinShellExponent::Conjectural { c_theta },
                None => ThinShellExponent::Proven,
            };
            let theta = p.theta.unwrap_or(k.theta);
            serde_json::to_value(thin_shell_prob(need(p.n, "n")?, need(p.big_n, "N")?, theta, k, mode)?)?
        }
        "amlower" => serde_json::to_value(am_lower_bound(
            need(p.n, "n")?,
            need(p.big_n, "N")?,
            need(p.m, "m")?,
            p.t.unwrap_or(1.0),
            k.c_small,
        )?)?,
        other => return Err(Error::param(format!("unknown formula {other:?}; expected one of {FORMULAS:?}"))),
    };
    Ok(v)
}
