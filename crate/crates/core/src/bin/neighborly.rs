//! Command-line front end. Every command prints JSON (or CSV for `phase`)
//! on stdout. Exit codes: 0 pass, 1 assertion failure, 2 usage, 3 budget refusal.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use neighborly::bounds::{evaluate_formula, FormulaParams};
use neighborly::ensembles::{generate_matrix, EnsembleSpec, SensingMatrix};
use neighborly::harness::{phase_csv, run_phase_transition, run_selftest, ExperimentConfig, Magnitudes, SelftestOptions, Tier};
use neighborly::matrix_io::{read_matrix, to_csv, write_matrix};
use neighborly::polytope::{donoho_cross_check_with, neighborliness_order, CrossCheckOptions, PolytopeMode};
use neighborly::randsrc::RngStream;
use neighborly::recovery::{all_sparse_recovery_check, decode_l1, recovery_verdict, SignedSupport, DEFAULT_RECOVERY_BUDGET};
use neighborly::rip::{
    chaos_statistics, chaos_statistics_sampled, isometry_constant_exact, isometry_constant_sampled, MatrixMeta, RipReport,
    DEFAULT_SUPPORT_BUDGET,
};
use neighborly::Error;

#[derive(Parser)]
#[command(name = "neighborly", version, about = "Isometry constants, l1 recovery and neighborliness of random polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded random matrix (CSV, or JSON when --out ends in .json).
    Gen {
        #[arg(long, default_value = "gaussian")]
        ensemble: EnsembleSpec,
        #[arg(long)]
        n: usize,
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Isometry constants of A/sqrt(n).
    Rip {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_SUPPORT_BUDGET as f64)]
        budget: f64,
        /// Random supports instead of exhaustive enumeration (lower bound).
        #[arg(long)]
        sampled: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The chaos quantities A_m, B_m, C_m.
    Chaos {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_SUPPORT_BUDGET as f64)]
        budget: f64,
        #[arg(long)]
        sampled: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dual-certificate verdict for one signed support ("1:+,3:-", 1-based),
    /// or for every signed support of size <= m.
    Recover {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, conflicts_with = "m")]
        support: Option<SignedSupport>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_RECOVERY_BUDGET as f64)]
        budget: f64,
    },
    /// Minimize ||y - A^T t||_1 over t.
    Decode {
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated values, or @file with whitespace/comma separated values.
        #[arg(long)]
        y: String,
    },
    /// Largest verified neighborliness order.
    Neighborly {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "central")]
        mode: PolytopeMode,
        #[arg(long)]
        mmax: usize,
        #[arg(long, default_value_t = DEFAULT_RECOVERY_BUDGET as f64)]
        budget: f64,
    },
    /// Polytope faces versus l1 recovery at order m.
    Crosscheck {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        budget: Option<f64>,
        /// Override the face-margin threshold (fault injection).
        #[arg(long)]
        face_threshold: Option<f64>,
    },
    /// Phase-transition sweep. Flags override fields of --config.
    Phase {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        ensemble: Option<EnsembleSpec>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "N")]
        big_n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        m_grid: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        rip_trials: Option<usize>,
        #[arg(long)]
        gaussian_magnitudes: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a bound calculator; constants are user-supplied (default C = c = 1).
    Bounds {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(neighborly::bounds::FORMULAS))]
        formula: String,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Cross-oracle self-test battery.
    Selftest {
        #[arg(long, default_value = "quick")]
        tier: Tier,
        #[arg(long)]
        inject_face_threshold: Option<f64>,
    },
}

/// Outcome of a command: its JSON/CSV text and whether its assertion held.
struct Output {
    text: String,
    pass: bool,
}

fn json(v: &impl Serialize, pass: bool) -> Result<Output, Error> {
    Ok(Output {
        text: serde_json::to_string_pretty(v)?,
        pass,
    })
}

fn budget(v: f64) -> Result<u128, Error> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("budget must be a positive number, got {v}")));
    }
    Ok(v as u128)
}

fn load(path: &Path) -> Result<SensingMatrix, Error> {
    read_matrix(path)
}

fn parse_values(arg: &str) -> Result<DVector<f64>, Error> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    let vals = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DVector::from_vec(vals))
}

fn run(cmd: Command) -> Result<Output, Error> {
    match cmd {
        Command::Gen {
            ensemble,
            n,
            big_n,
            seed,
            out,
        } => {
            let a = generate_matrix(&ensemble, n, big_n, seed)?;
            match out {
                Some(path) => {
                    write_matrix(&a, &path)?;
                    json(&MatrixMeta::of(&a), true)
                }
                None => Ok(Output {
                    text: to_csv(&a),
                    pass: true,
                }),
            }
        }
        Command::Rip {
            matrix,
            m,
            budget: b,
            sampled,
            seed,
        } => {
            let a = load(&matrix)?;
            let b = budget(b)?;
            let mut stream = RngStream::new(seed, 0);
            let entries = m
                .iter()
                .map(|&k| match sampled {
                    Some(trials) => isometry_constant_sampled(&a, k, trials, &mut stream),
                    None => isometry_constant_exact(&a, k, b),
                })
                .collect::<Result<Vec<_>, _>>()?;
            json(
                &RipReport {
                    matrix: MatrixMeta::of(&a),
                    entries,
                },
                true,
            )
        }
        Command::Chaos {
            matrix,
            m,
            budget: b,
            sampled,
            seed,
        } => {
            let a = load(&matrix)?;
            let b = budget(b)?;
            let mut stream = RngStream::new(seed, 0);
            let stats = m
                .iter()
                .map(|&k| match sampled {
                    Some(trials) => chaos_statistics_sampled(&a, k, trials, &mut stream),
                    None => chaos_statistics(&a, k, b),
                })
                .collect::<Result<Vec<_>, _>>()?;
            json(&serde_json::json!({ "matrix": MatrixMeta::of(&a), "chaos": stats }), true)
        }
        Command::Recover {
            matrix,
            support,
            m,
            budget: b,
        } => {
            let a = load(&matrix)?;
            match (support, m) {
                (Some(s), _) => {
                    let (cert, ok) = recovery_verdict(&a, &s)?;
                    json(&serde_json::json!({ "support": s.to_string(), "recovers": ok, "certificate": cert }), ok)
                }
                (None, Some(m)) => {
                    let r = all_sparse_recovery_check(&a, m, budget(b)?)?;
                    let pass = r.pass;
                    json(&r, pass)
                }
                (None, None) => Err(Error::InvalidParameter("give --support or --m".into())),
            }
        }
        Command::Decode { matrix, y } => {
            let a = load(&matrix)?;
            let y = parse_values(&y)?;
            let t = decode_l1(&a, &y)?;
            let residual = &y - a.entries().transpose() * &t;
            json(
                &serde_json::json!({ "t": t.as_slice(), "residual_l1": residual.lp_norm(1) }),
                true,
            )
        }
        Command::Neighborly {
            matrix,
            mode,
            mmax,
            budget: b,
        } => {
            let a = load(&matrix)?;
            json(&neighborliness_order(&a, mmax, budget(b)?, mode)?, true)
        }
        Command::Crosscheck {
            matrix,
            m,
            budget: b,
            face_threshold,
        } => {
            let a = load(&matrix)?;
            let opts = CrossCheckOptions {
                face_margin_threshold: face_threshold,
                budget: b.map(budget).transpose()?,
            };
            let r = donoho_cross_check_with(&a, m, &opts)?;
            let pass = r.agree;
            json(&r, pass)
        }
        Command::Phase {
            config,
            ensemble,
            n,
            big_n,
            m_grid,
            trials,
            seed,
            rip_trials,
            gaussian_magnitudes,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
                None => ExperimentConfig::default(),
            };
            if let Some(v) = ensemble {
                cfg.ensemble = v;
            }
            if let Some(v) = n {
                cfg.n = v;
            }
            if let Some(v) = big_n {
                cfg.big_n = v;
            }
            if let Some(v) = m_grid {
                cfg.m_grid = v;
            }
            if let Some(v) = trials {
                cfg.trials = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = rip_trials {
                cfg.rip_trials = v;
            }
            if gaussian_magnitudes {
                cfg.magnitudes = Magnitudes::Gaussian;
            }
            if let Some(v) = out {
                cfg.output = Some(v.display().to_string());
            }
            let csv = phase_csv(&run_phase_transition(&cfg)?)?;
            match &cfg.output {
                Some(path) => {
                    std::fs::write(path, &csv)?;
                    Ok(Output {
                        text: format!("wrote {path}"),
                        pass: true,
                    })
                }
                None => Ok(Output { text: csv, pass: true }),
            }
        }
        Command::Bounds { formula, json: params } => {
            let p: FormulaParams = match params {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => FormulaParams::default(),
            };
            eprintln!(
                "note: constants are user-supplied (C = {}, c = {}); results are not quantitative predictions",
                p.constants.c_big, p.constants.c_small
            );
            let v = evaluate_formula(&formula, &p)?;
            json(&serde_json::json!({ "formula": formula, "params": p, "result": v }), true)
        }
        Command::Selftest {
            tier,
            inject_face_threshold,
        } => {
            let r = run_selftest(
                tier,
                &SelftestOptions {
                    face_margin_threshold: inject_face_threshold,
                },
            )?;
            let pass = r.pass;
            json(&r, pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(out) => {
            if out.text.ends_with('\n') {
                print!("{}", out.text);
            } else {
                println!("{}", out.text);
            }
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::BudgetExceeded { .. } => 3,
                Error::InvalidParameter(_)
                | Error::Parse(_)
                | Error::DimensionMismatch(_)
                | Error::IndexOutOfRange { .. }
                | Error::Io(_)
                | Error::Json(_) => 2,
                _ => 1,
            })
        }
    }
}
