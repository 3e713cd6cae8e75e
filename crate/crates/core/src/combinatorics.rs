//! Support enumeration in colexicographic order and budget arithmetic.

use crate::error::{Error, Result};

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of signed supports of size `1..=m` drawn from `n` indices.
pub fn signed_support_count(n: usize, m: usize) -> u128 {
    (1..=m.min(n))
        .map(|k| binomial(n, k).saturating_mul(1u128 << k.min(127)))
        .fold(0u128, |a, b| a.saturating_add(b))
}

pub(crate) fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        Err(Error::BudgetExceeded { required, budget })
    } else {
        Ok(())
    }
}

/// All `k`-subsets of `0..n` in colexicographic order.
///
/// Colex order compares the largest element first, so the subsets whose
/// maximum is `j` form one contiguous block. [`colex_blocks`] exposes those
/// blocks for parallel scans that still reduce in a fixed order.
#[derive(Debug, Clone)]
pub struct Colex {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Colex {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Colex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        if k == 0 {
            self.done = true;
            return Some(out);
        }
        let mut i = 0;
        loop {
            let limit = if i + 1 < k { self.current[i + 1] } else { self.n };
            if self.current[i] + 1 < limit {
                self.current[i] += 1;
                for (j, c) in self.current.iter_mut().enumerate().take(i) {
                    *c = j;
                }
                break;
            }
            i += 1;
            if i == k {
                self.done = true;
                break;
            }
        }
        Some(out)
    }
}

/// Colex block with largest element `max`: every `(k-1)`-subset of `0..max`
/// with `max` appended, in colex order.
pub fn colex_block(max: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    Colex::new(max, k - 1).map(move |mut s| {
        s.push(max);
        s
    })
}

/// Largest elements that start a nonempty colex block of `k`-subsets of `0..n`.
pub fn colex_blocks(n: usize, k: usize) -> std::ops::Range<usize> {
    if k == 0 || k > n {
        0..0
    } else {
        (k - 1)..n
    }
}

/// Colex comparison of two equal-length sorted index sets.
pub fn colex_cmp(a: &[usize], b: &[usize]) -> std::cmp::Ordering {
    a.iter().rev().cmp(b.iter().rev())
}
