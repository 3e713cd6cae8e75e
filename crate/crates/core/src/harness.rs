//! Experiment configuration, phase-transition sweeps and the self-test battery.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bounds::BoundConstants;
use crate::ensembles::{check_h2, generate_matrix, EnsembleSpec, SensingMatrix};
use crate::error::{Error, Result};
use crate::polytope::{donoho_cross_check_with, neighborliness_order, three_way_check, CrossCheckOptions, PolytopeMode};
use crate::randsrc::{ks_statistic, RngStream, ALGORITHM_ID};
use crate::recovery::{all_sparse_recovery_check, exact_recovery_trial, DEFAULT_RECOVERY_BUDGET};
use crate::rip::{
    b_m_sq_monte_carlo, candes_criterion, chaos_statistics, halfsplit_identity_check, isometry_constant_all_sizes,
    isometry_constant_exact, isometry_constant_sampled, rip_decomposition_check, DEFAULT_SUPPORT_BUDGET,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const PHASE_COLUMNS: &str = "m,trials,successes,success_rate,mean_delta_sampled,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Magnitudes {
    /// `+-1` on the support.
    #[default]
    Sign,
    /// Standard Gaussian values on the support.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleSpec,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub support_budget: u128,
    pub recovery_budget: u128,
    /// Random supports per trial for `mean_delta_sampled`; 0 disables it.
    pub rip_trials: usize,
    pub magnitudes: Magnitudes,
    pub output: Option<String>,
    pub constants: BoundConstants,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ensemble: EnsembleSpec::Gaussian,
            n: 50,
            big_n: 100,
            m_grid: vec![0, 1, 5, 10, 15, 20, 25],
            trials: 200,
            seed: 0,
            support_budget: DEFAULT_SUPPORT_BUDGET,
            recovery_budget: DEFAULT_RECOVERY_BUDGET,
            rip_trials: 50,
            magnitudes: Magnitudes::Sign,
            output: None,
            constants: BoundConstants::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if !self.ensemble.is_resamplable() {
            return Err(Error::param("experiments need a resamplable ensemble"));
        }
        if self.n == 0 || self.big_n == 0 {
            return Err(Error::param("n and N must be positive"));
        }
        if self.m_grid.is_empty() {
            return Err(Error::param("m_grid must not be empty"));
        }
        if let Some(&m) = self.m_grid.iter().find(|&&m| m > self.big_n) {
            return Err(Error::param(format!("m = {m} exceeds N = {}", self.big_n)));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be positive"));
        }
        if self.support_budget == 0 || self.recovery_budget == 0 {
            return Err(Error::param("budgets must be positive"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_delta_sampled: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub config: ExperimentConfig,
    pub rows: Vec<PhaseRow>,
}

/// Seed of the matrix used in trial `t` of row `m`.
pub fn trial_seed(seed: u64, m: usize, t: usize) -> u64 {
    RngStream::new(seed, ((m as u64) << 32) | t as u64).next_u64()
}

fn run_trial(cfg: &ExperimentConfig, m: usize, t: usize) -> Result<(bool, f64)> {
    let seed = trial_seed(cfg.seed, m, t);
    let a = generate_matrix(&cfg.ensemble, cfg.n, cfg.big_n, seed)?;
    let mut stream = RngStream::new(seed, u64::MAX);
    let mut z = DVector::zeros(cfg.big_n);
    for i in sample_indices(&mut stream, cfg.big_n, m) {
        z[i] = match cfg.magnitudes {
            Magnitudes::Sign => stream.rademacher(),
            Magnitudes::Gaussian => stream.gaussian(),
        };
    }
    let success = exact_recovery_trial(&a, &z)?.success;
    let delta = if m == 0 || cfg.rip_trials == 0 || m > cfg.n {
        f64::NAN
    } else {
        isometry_constant_sampled(&a, m, cfg.rip_trials, &mut stream)?.delta
    };
    Ok((success, delta))
}

/// Success frequency of basis pursuit for each sparsity in the grid; every
/// trial draws a fresh matrix and a fresh sparse vector.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<PhaseDiagram> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.m_grid.len());
    for &m in &cfg.m_grid {
        let results: Vec<(bool, f64)> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, m, t))
            .collect::<Result<_>>()?;
        let successes = results.iter().filter(|r| r.0).count();
        let mean_delta = if results.iter().any(|r| r.1.is_nan()) {
            f64::NAN
        } else {
            results.iter().map(|r| r.1).sum::<f64>() / cfg.trials as f64
        };
        rows.push(PhaseRow {
            m,
            trials: cfg.trials,
            successes,
            success_rate: successes as f64 / cfg.trials as f64,
            mean_delta_sampled: mean_delta,
        });
    }
    Ok(PhaseDiagram {
        config: cfg.clone(),
        rows,
    })
}

/// CSV with a `#` metadata header; the `config` line alone reproduces the file.
pub fn phase_csv(d: &PhaseDiagram) -> Result<String> {
    let c = &d.config;
    let mut out = String::new();
    let _ = writeln!(out, "# neighborly phase transition");
    let _ = writeln!(out, "# tool_version={TOOL_VERSION}");
    let _ = writeln!(out, "# algorithm_id={ALGORITHM_ID}");
    let _ = writeln!(out, "# seed={}", c.seed);
    let _ = writeln!(out, "# spec={}", c.ensemble);
    let _ = writeln!(out, "# n={} N={}", c.n, c.big_n);
    let _ = writeln!(out, "# constants={}", serde_json::to_string(&c.constants)?);
    let _ = writeln!(out, "# config={}", serde_json::to_string(c)?);
    out.push_str(PHASE_COLUMNS);
    out.push('\n');
    for r in &d.rows {
        let delta = if r.mean_delta_sampled.is_nan() {
            String::new()
        } else {
            format!("{:.12}", r.mean_delta_sampled)
        };
        let _ = writeln!(out, "{},{},{},{:.6},{},{}", r.m, r.trials, r.successes, r.success_rate, delta, c.seed);
    }
    Ok(out)
}

/// Recover the configuration embedded in a phase CSV.
pub fn config_from_phase_csv(text: &str) -> Result<ExperimentConfig> {
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("# config="))
        .ok_or_else(|| Error::Parse("no '# config=' line in header".into()))?;
    ExperimentConfig::from_json(line)
}

/// Largest rise of the success rate between consecutive grid rows, in units
/// of the binomial standard error of the difference.
pub fn max_rise_in_sigmas(rows: &[PhaseRow]) -> f64 {
    rows.windows(2)
        .map(|w| {
            let (p, q) = (w[0].success_rate, w[1].success_rate);
            let var = p * (1.0 - p) / w[0].trials as f64 + q * (1.0 - q) / w[1].trials as f64;
            let rise = q - p;
            if rise <= 0.0 {
                0.0
            } else if var == 0.0 {
                f64::INFINITY
            } else {
                rise / var.sqrt()
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Quick,
    Full,
}

impl std::str::FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Tier::Quick),
            "full" => Ok(Tier::Full),
            other => Err(Error::Parse(format!("unknown tier {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelftestOptions {
    /// Corrupt the face-margin threshold used by the equivalence battery.
    pub face_margin_threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub cases: usize,
    pub seconds: f64,
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelftestReport {
    pub tier: Tier,
    pub tool_version: String,
    pub algorithm_id: String,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, usize, serde_json::Value)>) -> Result<CheckResult> {
    let start = Instant::now();
    let (pass, cases, detail) = f()?;
    Ok(CheckResult {
        name: name.to_string(),
        pass,
        cases,
        seconds: start.elapsed().as_secs_f64(),
        detail,
    })
}

fn hand_matrix() -> SensingMatrix {
    SensingMatrix::from_rows("hand", 2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]).expect("fixed matrix")
}

/// The `three_way_equivalence` self-test check.
pub fn check_equivalence(tier: Tier, opts: &SelftestOptions) -> Result<CheckResult> {
    timed("three_way_equivalence", || check_equivalence_body(tier, opts))
}

fn check_equivalence_body(tier: Tier, opts: &SelftestOptions) -> Result<(bool, usize, serde_json::Value)> {
    let (seeds, m_max) = match tier {
        Tier::Quick => (4u64, 2),
        Tier::Full => (50u64, 3),
    };
    let cross = CrossCheckOptions {
        face_margin_threshold: opts.face_margin_threshold,
        budget: None,
    };
    let mut instances = vec![hand_matrix()];
    for seed in 0..seeds {
        instances.push(generate_matrix(&EnsembleSpec::Gaussian, 8, 12, seed)?);
    }
    let mut supports = 0;
    for a in &instances {
        let m = m_max.min(a.cols());
        let three = three_way_check(a, m, DEFAULT_RECOVERY_BUDGET)?;
        supports += three.signed_supports;
        if let Some(row) = three.disagreements.first() {
            return Ok((false, supports, serde_json::json!({ "seed": a.seed, "three_way_disagreement": row })));
        }
        for k in 1..=m {
            let d = donoho_cross_check_with(a, k, &cross)?;
            if !d.agree {
                return Ok((
                    false,
                    supports,
                    serde_json::json!({ "seed": a.seed, "m": k, "witness": d.witness }),
                ));
            }
        }
    }
    Ok((true, supports, serde_json::json!({ "instances": instances.len(), "m_max": m_max })))
}

/// The `rip_identities` self-test check.
pub fn check_rip(tier: Tier) -> Result<CheckResult> {
    timed("rip_identities", || check_rip_body(tier))
}

fn check_rip_body(tier: Tier) -> Result<(bool, usize, serde_json::Value)> {
    let count = if tier == Tier::Quick { 10 } else { 100 };
    let mut worst_slack = f64::INFINITY;
    for seed in 0..count {
        let a = generate_matrix(&EnsembleSpec::Gaussian, 6, 10, 1000 + seed)?;
        let mut prev = 0.0;
        for m in 1..=3 {
            let e = isometry_constant_exact(&a, m, DEFAULT_SUPPORT_BUDGET)?;
            let c = chaos_statistics(&a, m, DEFAULT_SUPPORT_BUDGET)?;
            let dec = rip_decomposition_check(&a, &e, &c)?;
            worst_slack = worst_slack.min(dec.rhs - dec.delta);
            let detail = serde_json::json!({ "seed": a.seed, "m": m, "delta": e.delta, "rhs": dec.rhs });
            if !dec.holds || e.delta + 1e-12 < prev {
                return Ok((false, seed as usize, detail));
            }
            if m == 1 && (e.delta - check_h2(&a).h2_max_deviation).abs() > 1e-12 {
                return Ok((false, seed as usize, detail));
            }
            if (isometry_constant_all_sizes(&a, m)? - e.delta).abs() > 1e-12 {
                return Ok((false, seed as usize, detail));
            }
            prev = e.delta;
        }
    }
    Ok((true, count as usize, serde_json::json!({ "min_decomposition_slack": worst_slack })))
}

/// The `chaos_inequalities` self-test check.
pub fn check_chaos(tier: Tier) -> Result<CheckResult> {
    timed("chaos_inequalities", || check_chaos_body(tier))
}

fn check_chaos_body(tier: Tier) -> Result<(bool, usize, serde_json::Value)> {
    let (count, mc) = if tier == Tier::Quick { (10, 10_000) } else { (100, 100_000) };
    for seed in 0..count {
        let a = generate_matrix(&EnsembleSpec::IidEntries { r: 1.0 }, 6, 10, 2000 + seed)?;
        let mut stream = RngStream::new(a.seed, 7);
        for m in 1..=3 {
            let c = chaos_statistics(&a, m, DEFAULT_SUPPORT_BUDGET)?;
            let mc_value = b_m_sq_monte_carlo(&a, m, mc, &mut stream)?;
            let ok = (m > 1 || c.b_m == 0.0)
                && (c.a_m.powi(2) - c.b_m_sq()).abs() <= c.c_m.powi(2) + 1e-9
                && mc_value <= c.b_m_sq() + 1e-9;
            if !ok {
                return Ok((false, seed as usize, serde_json::json!({ "seed": a.seed, "m": m, "stats": c })));
            }
        }
    }
    Ok((true, count as usize, serde_json::json!({ "monte_carlo_samples": mc })))
}

/// The `halfsplit_identity` self-test check.
pub fn check_halfsplit(tier: Tier) -> Result<CheckResult> {
    timed("halfsplit_identity", || check_halfsplit_body(tier))
}

fn check_halfsplit_body(tier: Tier) -> Result<(bool, usize, serde_json::Value)> {
    let count = if tier == Tier::Quick { 20 } else { 50 };
    let mut stream = RngStream::new(3, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let k = 1 + stream.below(8);
        let dim = 1 + stream.below(6);
        let v: Vec<DVector<f64>> = (0..k).map(|_| DVector::from_fn(dim, |_, _| stream.gaussian())).collect();
        let scale: f64 = v.iter().map(|x| x.norm_squared()).sum();
        worst = worst.max(halfsplit_identity_check(&v)? / scale);
    }
    Ok((worst <= 1e-10, count, serde_json::json!({ "worst_relative_residual": worst })))
}

/// The `sampler_ks` self-test check.
pub fn check_samplers(tier: Tier) -> Result<CheckResult> {
    timed("sampler_ks", || check_samplers_body(tier))
}

fn check_samplers_body(tier: Tier) -> Result<(bool, usize, serde_json::Value)> {
    let samples = if tier == Tier::Quick { 10_000 } else { 100_000 };
    // KS critical value at level 0.001.
    let crit = 1.95 / (samples as f64).sqrt();
    let mut s = RngStream::new(11, 0);
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::param(e.to_string()))?;
    let g: Vec<f64> = (0..samples).map(|_| s.gaussian()).collect();
    let u: Vec<f64> = (0..samples).map(|_| s.uniform01()).collect();
    let e: Vec<f64> = (0..samples).map(|_| s.symmetric_weibull(1.0).abs()).collect();
    let w: Vec<f64> = (0..samples).map(|_| s.symmetric_weibull(1.5).abs()).collect();
    let stats = [
        ks_statistic(g, |x| normal.cdf(x)),
        ks_statistic(u, |x| x.clamp(0.0, 1.0)),
        ks_statistic(e, |x| 1.0 - (-x).exp()),
        ks_statistic(w, |x| 1.0 - (-x.powf(1.5)).exp()),
    ];
    Ok((
        stats.iter().all(|d| *d < crit),
        stats.len(),
        serde_json::json!({ "ks": stats, "critical": crit }),
    ))
}

/// Random m-sparse recovery trials on one instance; returns the failures.
pub fn random_recovery_trials(a: &SensingMatrix, m: usize, trials: usize, stream: &mut RngStream) -> Result<usize> {
    let mut failures = 0;
    for _ in 0..trials {
        let mut z = DVector::zeros(a.cols());
        for i in sample_indices(stream, a.cols(), m) {
            z[i] = stream.gaussian();
        }
        if !exact_recovery_trial(a, &z)?.success {
            failures += 1;
        }
    }
    Ok(failures)
}

/// The `candes_implies_recovery` self-test check.
pub fn check_candes(tier: Tier) -> Result<CheckResult> {
    timed("candes_implies_recovery", || check_candes_body(tier))
}

fn check_candes_body(tier: Tier) -> Result<(bool, usize, serde_json::Value)> {
    let count = if tier == Tier::Quick { 2 } else { 6 };
    let mut instances: Vec<(SensingMatrix, usize)> = Vec::new();
    for seed in 0..count {
        instances.push((generate_matrix(&EnsembleSpec::SphereUniform, 64, 16, 3000 + seed)?, 1));
    }
    if tier == Tier::Full {
        instances.push((spike_hadamard(6)?, 2));
    }
    let mut qualifying = Vec::new();
    for (a, m) in &instances {
        let d = isometry_constant_exact(a, 2 * m, 20_000_000)?;
        if !candes_criterion(d.delta) {
            continue;
        }
        let mut stream = RngStream::new(a.seed, 0xca);
        let failures = random_recovery_trials(a, *m, 100, &mut stream)?;
        let exhaustive = *m > 1 || all_sparse_recovery_check(a, *m, DEFAULT_RECOVERY_BUDGET)?.pass;
        let row = serde_json::json!({ "spec": a.spec.to_string(), "seed": a.seed, "m": m, "delta_2m": d.delta, "failures": failures });
        if failures > 0 || !exhaustive {
            return Ok((false, qualifying.len() + 1, row));
        }
        qualifying.push(row);
    }
    Ok((!qualifying.is_empty(), qualifying.len(), serde_json::json!({ "qualifying_instances": qualifying })))
}

/// The `hand_instance` self-test check.
pub fn check_hand() -> Result<CheckResult> {
    timed("hand_instance", || check_hand_body())
}

fn check_hand_body() -> Result<(bool, usize, serde_json::Value)> {
    let a = hand_matrix();
    let d1 = isometry_constant_exact(&a, 1, 10)?.delta;
    let d2 = isometry_constant_exact(&a, 2, 10)?.delta;
    let b2 = chaos_statistics(&a, 2, 10)?.b_m_sq();
    let nb = neighborliness_order(&a, 2, 100, PolytopeMode::Central)?;
    let witness = nb.failures_at_next.first().map(|s| s.indices().to_vec());
    let e3 = exact_recovery_trial(&a, &DVector::from_vec(vec![0.0, 0.0, 1.0]))?.success;
    let e12 = exact_recovery_trial(&a, &DVector::from_vec(vec![1.0, 1.0, 0.0]))?.success;
    let pass = (d1 - 0.5).abs() < 1e-10
        && (d2 - (1.0 + 5f64.sqrt()) / 4.0).abs() < 1e-10
        && (b2 - 1.0).abs() < 1e-10
        && nb.verified_order == 1
        && witness.as_deref() == Some(&[0, 1][..])
        && e3
        && !e12;
    Ok((
        pass,
        6,
        serde_json::json!({ "delta_1": d1, "delta_2": d2, "b_2_sq": b2, "order": nb.verified_order, "witness": witness }),
    ))
}

/// Run the cross-oracle battery. The report never errors on a failed check;
/// `Err` means a check could not run at all.
pub fn run_selftest(tier: Tier, opts: &SelftestOptions) -> Result<SelftestReport> {
    let checks = vec![
        check_hand()?,
        check_equivalence(tier, opts)?,
        check_rip(tier)?,
        check_chaos(tier)?,
        check_halfsplit(tier)?,
        check_samplers(tier)?,
        check_candes(tier)?,
    ];
    Ok(SelftestReport {
        tier,
        tool_version: TOOL_VERSION.to_string(),
        algorithm_id: ALGORITHM_ID.to_string(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Sylvester Hadamard matrix of order `2^k`.
pub fn hadamard(k: u32) -> DMatrix<f64> {
    let mut h = DMatrix::from_element(1, 1, 1.0);
    for _ in 0..k {
        let s = h.nrows();
        let mut next = DMatrix::zeros(2 * s, 2 * s);
        next.view_mut((0, 0), (s, s)).copy_from(&h);
        next.view_mut((0, s), (s, s)).copy_from(&h);
        next.view_mut((s, 0), (s, s)).copy_from(&h);
        next.view_mut((s, s), (s, s)).copy_from(&(-&h));
        h = next;
    }
    h
}

/// `[sqrt(n) I | H]` with `n = 2^k`: every column has norm `sqrt(n)` and the
/// two halves have coherence `1/sqrt(n)`.
pub fn spike_hadamard(k: u32) -> Result<SensingMatrix> {
    let n = 1usize << k;
    let mut m = DMatrix::zeros(n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(DMatrix::identity(n, n) * (n as f64).sqrt()));
    m.view_mut((0, n), (n, n)).copy_from(&hadamard(k));
    SensingMatrix::new(m, EnsembleSpec::Custom { name: format!("spike_hadamard_{n}") }, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n: 6,
            big_n: 12,
            m_grid: vec![0, 1, 2, 3],
            trials: 5,
            seed: 7,
            rip_trials: 10,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(small().validate().is_ok());
        let bad = [
            ExperimentConfig { m_grid: vec![], ..small() },
            ExperimentConfig { trials: 0, ..small() },
            ExperimentConfig { m_grid: vec![13], ..small() },
            ExperimentConfig { support_budget: 0, ..small() },
            ExperimentConfig {
                ensemble: EnsembleSpec::Custom { name: "x".into() },
                ..small()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
        let parsed = ExperimentConfig::from_json(r#"{"n": 10, "N": 30, "ensemble": {"kind": "rademacher"}}"#).unwrap();
        assert_eq!(parsed.big_n, 30);
        assert_eq!(parsed.ensemble, EnsembleSpec::Rademacher);
        assert_eq!(parsed.trials, 200);
    }

    #[test]
    fn phase_rows_and_reproducibility() {
        let d = run_phase_transition(&small()).unwrap();
        assert_eq!(d.rows.len(), 4);
        assert_eq!(d.rows[0].success_rate, 1.0);
        assert!(d.rows[0].mean_delta_sampled.is_nan());
        assert!(d.rows.iter().all(|r| r.trials == 5 && (0.0..=1.0).contains(&r.success_rate)));
        let csv = phase_csv(&d).unwrap();
        let cfg = config_from_phase_csv(&csv).unwrap();
        assert_eq!(cfg, small());
        assert_eq!(phase_csv(&run_phase_transition(&cfg).unwrap()).unwrap(), csv);
        assert!(csv.lines().any(|l| l == PHASE_COLUMNS));
    }

    #[test]
    fn rise_statistic() {
        let row = |m, s| PhaseRow {
            m,
            trials: 100,
            successes: s,
            success_rate: s as f64 / 100.0,
            mean_delta_sampled: 0.0,
        };
        assert_eq!(max_rise_in_sigmas(&[row(1, 100), row(2, 90), row(3, 80)]), 0.0);
        let r = max_rise_in_sigmas(&[row(1, 50), row(2, 60)]);
        assert!((r - 0.1 / (0.25f64 / 100.0 + 0.24 / 100.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spike_hadamard_structure() {
        let h = hadamard(3);
        assert_eq!(h.tr_mul(&h), DMatrix::identity(8, 8) * 8.0);
        let a = spike_hadamard(3).unwrap();
        assert!(a.column_norms_sq().iter().all(|v| (v - 8.0).abs() < 1e-12));
    }

    #[test]
    fn quick_selftest_passes_and_fault_is_caught() {
        let r = run_selftest(Tier::Quick, &SelftestOptions::default()).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
        let faulty = SelftestOptions {
            face_margin_threshold: Some(0.5),
        };
        let f = run_selftest(Tier::Quick, &faulty).unwrap();
        assert!(!f.pass);
        let eq = f.checks.iter().find(|c| c.name == "three_way_equivalence").unwrap();
        assert!(!eq.pass);
        assert!(eq.detail["witness"]["support"].is_object());
    }
}
