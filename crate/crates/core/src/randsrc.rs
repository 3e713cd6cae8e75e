//! Seeded pseudorandom streams and the scalar samplers behind every ensemble.
//!
//! A stream is identified by `(seed, stream_id, ALGORITHM_ID)`. The core
//! generator is xoshiro256++; its 256-bit state is expanded from the seed and
//! the stream id with SplitMix64, so distinct stream ids give independent
//! looking streams without jump tables. Samplers return canonical-parameter
//! variates; variance normalization belongs to [`crate::ensembles`].

use rand::{RngCore, SeedableRng};
use rand_distr::{Distribution, Gamma};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier written into every output that depends on random draws.
pub const ALGORITHM_ID: &str = "xoshiro256pp-splitmix64";

const STREAM_MIX: u64 = 0xD1B5_4A32_D192_ED03;

/// Reproducibility key of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub stream_id: u64,
}

#[derive(Debug, Clone)]
pub struct RngStream {
    key: StreamKey,
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut outer = SplitMix64::seed_from_u64(seed);
        let mixed = outer.next_u64() ^ stream_id.wrapping_mul(STREAM_MIX);
        let mut expander = SplitMix64::seed_from_u64(mixed);
        let inner = Xoshiro256PlusPlus::from_rng(&mut expander);
        Self {
            key: StreamKey { seed, stream_id },
            inner,
        }
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn seed(&self) -> u64 {
        self.key.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.key.stream_id
    }

    pub fn algorithm_id(&self) -> &'static str {
        ALGORITHM_ID
    }

    /// Uniform variate in `[0, 1)` with 53 random bits.
    pub fn uniform01(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform variate in `(0, 1]`, safe to pass to `ln`.
    pub fn uniform_open01(&mut self) -> f64 {
        1.0 - self.uniform01()
    }

    /// Uniform index in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.uniform01() * bound as f64) as usize % bound
    }

    /// Standard normal variate by the Marsaglia polar method. The second
    /// variate of each accepted pair is discarded so that the stream state is
    /// the generator state and nothing else.
    pub fn gaussian(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform01() - 1.0;
            let v = 2.0 * self.uniform01() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    pub fn rademacher(&mut self) -> f64 {
        if self.inner.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Symmetric variate with `P(|Y| >= t) = exp(-t^r)`, not variance-normalized.
    ///
    /// # Panics
    ///
    /// If `r <= 0`.
    pub fn symmetric_weibull(&mut self, r: f64) -> f64 {
        assert!(r > 0.0, "Weibull shape must be positive, got {r}");
        let magnitude = (-self.uniform_open01().ln()).powf(1.0 / r);
        self.rademacher() * magnitude
    }

    /// Exponential variate with mean `1 / rate`.
    pub fn exponential(&mut self, rate: f64) -> Result<f64> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::param(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(-self.uniform_open01().ln() / rate)
    }

    /// Symmetric exponential with variance one (Laplace with scale `1/sqrt 2`).
    pub fn symmetric_exponential(&mut self) -> f64 {
        self.symmetric_weibull(1.0) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Gamma variate with the given shape and unit scale.
    pub fn gamma(&mut self, shape: f64) -> Result<f64> {
        let dist = Gamma::new(shape, 1.0)
            .map_err(|e| Error::param(format!("gamma shape {shape}: {e}")))?;
        Ok(dist.sample(self))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `E Y^2 = Gamma(1 + 2/r)` for the unnormalized symmetric Weibull variate.
pub fn weibull_variance(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::param(format!("Weibull shape must be positive, got {r}")));
    }
    Ok(statrs::function::gamma::gamma(1.0 + 2.0 / r))
}

/// Kolmogorov-Smirnov statistic of `xs` against an exact CDF.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(n: usize, mut f: impl FnMut() -> f64) -> Vec<f64> {
        (0..n).map(|_| f()).collect()
    }

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn variance(xs: &[f64]) -> f64 {
        let m = mean(xs);
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    }

    // Asymptotic KS critical value at level 0.001 is 1.95 / sqrt(n).
    const KS_CRIT_1E4: f64 = 1.95 / 100.0;

    fn normal_cdf(x: f64) -> f64 {
        0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn same_key_same_sequence() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..1000 {
            assert_eq!(a.uniform01().to_bits(), b.uniform01().to_bits());
            assert_eq!(a.gaussian().to_bits(), b.gaussian().to_bits());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(7, 0);
        let mut b = RngStream::new(7, 1);
        let xs = draws(10_000, || a.uniform01());
        let ys = draws(10_000, || b.uniform01());
        assert_ne!(xs, ys);
        // sample correlation of independent uniforms: sd = 1/sqrt(n) = 0.01
        let (mx, my) = (mean(&xs), mean(&ys));
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.len() as f64;
        let corr = cov / (variance(&xs) * variance(&ys)).sqrt();
        assert!(corr.abs() < 0.04, "corr {corr}");
    }

    #[test]
    fn uniform_range_and_mean() {
        let mut s = RngStream::new(1, 0);
        let xs = draws(100_000, || s.uniform01());
        assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
        assert!((mean(&xs) - 0.5).abs() < 0.01);
        assert!(ks_statistic(xs[..10_000].to_vec(), |x| x.clamp(0.0, 1.0)) < KS_CRIT_1E4);
    }

    #[test]
    fn gaussian_moments_and_ks() {
        let mut s = RngStream::new(2, 0);
        let xs = draws(100_000, || s.gaussian());
        assert!(mean(&xs).abs() < 0.015);
        assert!((variance(&xs) - 1.0).abs() < 0.02);
        assert!(ks_statistic(xs[..10_000].to_vec(), normal_cdf) < KS_CRIT_1E4);
    }

    #[test]
    fn weibull_survival_and_variance() {
        let mut s = RngStream::new(3, 0);
        let xs = draws(100_000, || s.symmetric_weibull(1.0));
        let tail = xs.iter().filter(|x| x.abs() >= 2.0).count() as f64 / xs.len() as f64;
        assert!((tail - (-2.0f64).exp()).abs() < 0.005, "tail {tail}");
        assert!(mean(&xs).abs() < 0.02);

        let ys = draws(100_000, || s.symmetric_weibull(2.0));
        assert!((variance(&ys) - 1.0).abs() < 0.02);

        for r in [1.0, 1.5, 2.0] {
            let zs = draws(10_000, || s.symmetric_weibull(r));
            let cdf = |x: f64| {
                let half = 0.5 * (-x.abs().powf(r)).exp();
                if x < 0.0 {
                    half
                } else {
                    1.0 - half
                }
            };
            assert!(ks_statistic(zs, cdf) < KS_CRIT_1E4, "r = {r}");
        }
    }

    #[test]
    fn weibull_variance_values() {
        // integral oracle: E Y^2 = int_0^inf 2t exp(-t^r) dt, midpoint rule
        let integral = |r: f64| {
            let h = 1e-4;
            (0..400_000)
                .map(|k| {
                    let t = (k as f64 + 0.5) * h;
                    2.0 * t * (-t.powf(r)).exp() * h
                })
                .sum::<f64>()
        };
        assert!((weibull_variance(1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((weibull_variance(2.0).unwrap() - 1.0).abs() < 1e-12);
        let r = 4.0 / 3.0;
        let v = weibull_variance(r).unwrap();
        assert!((v - integral(r)).abs() < 1e-6 * v);
        let mut s = RngStream::new(4, 0);
        let xs = draws(200_000, || s.symmetric_weibull(r));
        let mc = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((mc / v - 1.0).abs() < 0.01, "mc {mc} vs {v}");
        assert!(weibull_variance(0.0).is_err());
    }

    #[test]
    fn rademacher_and_exponential() {
        let mut s = RngStream::new(5, 0);
        let xs = draws(100_000, || s.rademacher());
        assert!(xs.iter().all(|&x| x == 1.0 || x == -1.0));
        assert!(mean(&xs).abs() < 0.015);

        let es = draws(100_000, || s.exponential(1.0).unwrap());
        assert!(es.iter().all(|&e| e >= 0.0));
        assert!((mean(&es) - 1.0).abs() < 0.02);
        assert!(ks_statistic(es[..10_000].to_vec(), |x| 1.0 - (-x).exp()) < KS_CRIT_1E4);

        let ls = draws(100_000, || s.symmetric_exponential());
        assert!((variance(&ls) - 1.0).abs() < 0.02);

        assert!(s.exponential(0.0).is_err());
        assert!(s.exponential(-1.0).is_err());
    }

    #[test]
    fn gamma_mean() {
        let mut s = RngStream::new(6, 0);
        let xs = draws(100_000, || s.gamma(0.5).unwrap());
        // Gamma(k, 1): mean k, sd sqrt(k / n)
        assert!((mean(&xs) - 0.5).abs() < 4.0 * (0.5f64 / 1e5).sqrt());
    }
}
