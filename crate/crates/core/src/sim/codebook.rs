//! Seeded random codebooks split into equal sub-codes.

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::block::checked_pow;
use crate::error::{Error, Result};
use crate::prob::Distribution;

/// Largest codebook accepted by [`build_codebook`].
pub const MAX_CODEWORDS: usize = 1 << 20;
/// Largest channel-input block space accepted by [`build_codebook`].
pub const MAX_INPUT_BLOCKS: usize = 1 << 20;

/// Shape and generator of a codebook of `m1 = m * m2` words of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodebookSpec {
    pub m1: usize,
    pub m: usize,
    pub m2: usize,
    pub n: usize,
    pub px_star: Distribution,
    pub seed: u64,
}

impl CodebookSpec {
    pub fn new(m: usize, m2: usize, n: usize, px_star: Distribution, seed: u64) -> Result<Self> {
        let m1 = m
            .checked_mul(m2)
            .ok_or_else(|| Error::GuardExceeded(format!("{m} * {m2} codewords")))?;
        let spec = CodebookSpec { m1, m, m2, n, px_star, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m2 == 0 || self.n == 0 {
            return Err(Error::OutOfRange("codebook sizes and block length must be positive".into()));
        }
        if self.m.checked_mul(self.m2) != Some(self.m1) {
            return Err(Error::OutOfRange(format!(
                "M1 = {} is not M * M2 = {} * {}",
                self.m1, self.m, self.m2
            )));
        }
        if self.m1 > MAX_CODEWORDS {
            return Err(Error::GuardExceeded(format!("{} codewords", self.m1)));
        }
        if checked_pow(self.px_star.len(), self.n).is_none_or(|c| c > MAX_INPUT_BLOCKS) {
            return Err(Error::GuardExceeded(format!(
                "{}^{} channel input blocks",
                self.px_star.len(),
                self.n
            )));
        }
        Ok(())
    }
}

/// Codewords `x_0 .. x_{m1-1}`; sub-code `t` holds words `t*m2 .. (t+1)*m2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codebook {
    pub spec: CodebookSpec,
    pub words: Vec<Vec<usize>>,
}

impl Codebook {
    pub fn word(&self, index: usize) -> &[usize] {
        &self.words[index]
    }

    pub fn subcode(&self, t: usize) -> &[Vec<usize>] {
        &self.words[t * self.spec.m2..(t + 1) * self.spec.m2]
    }
}

/// Draws every component independently from `px_star` with a ChaCha8 stream
/// seeded by `spec.seed`.
pub fn build_codebook(spec: &CodebookSpec) -> Result<Codebook> {
    spec.validate()?;
    let sampler = WeightedIndex::new(spec.px_star.probs())
        .map_err(|e| Error::InvalidDistribution(format!("codeword law: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let words = (0..spec.m1)
        .map(|_| (0..spec.n).map(|_| sampler.sample(&mut rng)).collect())
        .collect();
    Ok(Codebook { spec: spec.clone(), words })
}
