//! Shared definition of the Weibull tail-domination experiment. The fitted
//! constants live in `fixtures/tail_constants.json`; regenerate them with
//! `cargo test --test tail_constants -- --ignored`.

#![allow(dead_code)]

use neighborly::bounds::{conjugate_norm, empirical_survival, weibull_sums};
use neighborly::randsrc::RngStream;
use serde::{Deserialize, Serialize};

pub const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/tail_constants.json");
pub const SAMPLES: usize = 100_000;
pub const FIT_SEED: u64 = 2024;
/// Multiples of `||a||_2`.
pub const T_GRID: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 4.0];
pub const R_VALUES: [f64; 3] = [1.0, 1.5, 2.0];
/// Safety factor applied to the smallest admissible constant.
pub const SAFETY: f64 = 0.5;

pub fn profiles() -> Vec<(&'static str, Vec<f64>)> {
    vec![
        ("ones", vec![1.0; 10]),
        ("harmonic", (1..=10).map(|i| 1.0 / i as f64).collect()),
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailConstant {
    pub profile: String,
    pub r: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFixture {
    pub samples: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    pub safety: f64,
    pub constants: Vec<TailConstant>,
}

pub fn l2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The exponent `min(t^2/||a||_2^2, t^r/||a||_{r*}^r)` of the Weibull bound.
pub fn weibull_exponent(t: f64, a: &[f64], r: f64) -> f64 {
    (t * t / l2(a).powi(2)).min(t.powf(r) / conjugate_norm(a, r).powf(r))
}

pub fn stream_id(profile: usize, r_index: usize) -> u64 {
    (profile * 16 + r_index) as u64
}

/// `(t, empirical survival)` over the grid.
pub fn survival_curve(a: &[f64], r: f64, seed: u64, id: u64) -> Vec<(f64, f64)> {
    let mut stream = RngStream::new(seed, id);
    let sums = weibull_sums(a, r, SAMPLES, &mut stream);
    T_GRID
        .iter()
        .map(|k| {
            let t = k * l2(a);
            (t, empirical_survival(&sums, t))
        })
        .collect()
}

/// Largest `c` with `2 exp(-c e(t)) >= S(t)` on every grid point, times [`SAFETY`].
pub fn fit_constant(a: &[f64], r: f64, curve: &[(f64, f64)]) -> f64 {
    let c_max = curve
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .map(|&(t, s)| (2.0 / s).ln() / weibull_exponent(t, a, r))
        .fold(f64::INFINITY, f64::min);
    SAFETY * c_max
}

pub fn fit_all() -> TailFixture {
    let mut constants = Vec::new();
    for (pi, (name, a)) in profiles().into_iter().enumerate() {
        for (ri, &r) in R_VALUES.iter().enumerate() {
            let curve = survival_curve(&a, r, FIT_SEED, stream_id(pi, ri));
            constants.push(TailConstant {
                profile: name.to_string(),
                r,
                c: fit_constant(&a, r, &curve),
            });
        }
    }
    TailFixture {
        samples: SAMPLES,
        seed: FIT_SEED,
        t_grid: T_GRID.to_vec(),
        safety: SAFETY,
        constants,
    }
}

pub fn load_fixture() -> TailFixture {
    let text = std::fs::read_to_string(FIXTURE).expect("tail constants fixture");
    serde_json::from_str(&text).expect("valid tail constants fixture")
}
