use rand::Rng;

use super::{FiniteDistribution, ProbError, Result};

/// A length-`n` block of alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block(pub Vec<usize>);

impl Block {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn validate(&self, alphabet: usize) -> Result<()> {
        for &s in &self.0 {
            if s >= alphabet {
                return Err(ProbError::SymbolOutOfRange {
                    symbol: s,
                    alphabet,
                });
            }
        }
        Ok(())
    }

    /// Mixed-radix rank of the block (first symbol most significant).
    pub fn rank(&self, alphabet: usize) -> usize {
        self.0.iter().fold(0, |acc, &s| acc * alphabet + s)
    }

    /// Inverse of [`rank`](Self::rank).
    pub fn from_rank(mut rank: usize, alphabet: usize, n: usize) -> Self {
        let mut symbols = vec![0; n];
        for slot in symbols.iter_mut().rev() {
            *slot = rank % alphabet;
            rank /= alphabet;
        }
        Block(symbols)
    }
}

/// `alphabet^n` when it fits the cap, else a capacity error.
pub fn block_space_size(alphabet: usize, n: usize, cap: usize) -> Result<usize> {
    let mut size: usize = 1;
    for _ in 0..n {
        size = size.checked_mul(alphabet).unwrap_or(usize::MAX);
        if size > cap {
            return Err(ProbError::EnumerationCap {
                required: size,
                cap,
            });
        }
    }
    Ok(size)
}

/// Every block of length `n` over the alphabet, in rank order.
pub fn enumerate_blocks(alphabet: usize, n: usize, cap: usize) -> Result<Vec<Block>> {
    let size = block_space_size(alphabet, n, cap)?;
    Ok((0..size)
        .map(|r| Block::from_rank(r, alphabet, n))
        .collect())
}

/// The `n`-fold i.i.d. extension of a single-letter distribution.
///
/// Block probabilities are point-evaluable for any `n`; full enumeration is
/// allowed only while the block space fits the cap.
#[derive(Debug, Clone)]
pub struct BlockDistribution {
    base: FiniteDistribution,
    n: usize,
    cap: usize,
}

impl BlockDistribution {
    pub fn new(base: FiniteDistribution, n: usize, cap: usize) -> Result<Self> {
        if n < 1 {
            return Err(ProbError::Empty);
        }
        Ok(BlockDistribution { base, n, cap })
    }

    pub fn base(&self) -> &FiniteDistribution {
        &self.base
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn prob(&self, block: &Block) -> f64 {
        debug_assert_eq!(block.len(), self.n);
        block.symbols().iter().map(|&s| self.base.prob(s)).product()
    }

    pub fn log_prob(&self, block: &Block) -> f64 {
        block
            .symbols()
            .iter()
            .map(|&s| self.base.log_prob(s))
            .sum()
    }

    /// All blocks in rank order; errors past the cap (point evaluation
    /// remains available).
    pub fn enumerate(&self) -> Result<Vec<Block>> {
        enumerate_blocks(self.base.alphabet_size(), self.n, self.cap)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Block {
        Block((0..self.n).map(|_| self.base.sample(rng)).collect())
    }
}

/// Draw a block of `n` i.i.d. symbols from the distribution.
pub fn sample_block<R: Rng>(dist: &FiniteDistribution, n: usize, rng: &mut R) -> Block {
    Block((0..n).map(|_| dist.sample(rng)).collect())
}
