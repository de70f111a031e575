//! Indexing and product laws over blocks of letters.

use crate::error::{Error, Result};
use crate::prob::{plog2p, Channel};

/// Mixed-radix index of a block, first letter most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radix {
    pub base: usize,
    pub len: usize,
    pub count: usize,
}

impl Radix {
    pub fn new(base: usize, len: usize, limit: usize, what: &str) -> Result<Self> {
        let count = checked_pow(base, len).filter(|&c| c <= limit).ok_or_else(|| {
            Error::GuardExceeded(format!("{what}: {base}^{len} blocks exceed the limit {limit}"))
        })?;
        Ok(Radix { base, len, count })
    }

    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.len];
        for slot in out.iter_mut().rev() {
            *slot = idx % self.base;
            idx /= self.base;
        }
        out
    }

    pub fn index(&self, letters: &[usize]) -> Result<usize> {
        if letters.len() != self.len {
            return Err(Error::DimensionMismatch(format!("block of length {} where {} is expected", letters.len(), self.len)));
        }
        letters.iter().try_fold(0usize, |acc, &a| {
            if a >= self.base {
                Err(Error::OutOfRange(format!("letter {a} outside an alphabet of size {}", self.base)))
            } else {
                Ok(acc * self.base + a)
            }
        })
    }
}

pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// Product law `P(a^N) = ∏ p(a_i)` for every block index.
pub fn product_law(p: &[f64], radix: Radix) -> Vec<f64> {
    (0..radix.count).map(|i| radix.digits(i).iter().map(|&a| p[a]).product()).collect()
}

/// `P(b^N | a^N) = ∏ W(b_i | a_i)` for one input block.
pub fn block_row(ch: &Channel, input: &[usize], out: Radix) -> Vec<f64> {
    (0..out.count)
        .map(|j| out.digits(j).iter().zip(input).map(|(&b, &a)| ch.get(a, b)).product())
        .collect()
}

/// Full memoryless kernel between block alphabets.
pub fn block_kernel(ch: &Channel, input: Radix, out: Radix) -> Vec<Vec<f64>> {
    (0..input.count).map(|i| block_row(ch, &input.digits(i), out)).collect()
}

/// Entropy of unnormalised masses, in bits.
pub fn entropy_of(masses: impl IntoIterator<Item = f64>) -> f64 {
    -masses.into_iter().map(plog2p).sum::<f64>()
}
