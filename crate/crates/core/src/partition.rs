//! Keyed green/red vocabulary partition.
//!
//! The green list is the prefix of a forward Fisher-Yates shuffle of
//! `0..|V|` driven by [`CounterRng`]: at position `i` the element swapped in
//! is drawn uniformly from `i..|V|`. Positions past the green prefix never
//! influence it, so the shuffle stops after `green_count` swaps.

use crate::error::Result;
use crate::hash::{seed_for, CounterRng};
use crate::params::green_count;
use crate::vocab::TokenId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    words: Vec<u64>,
    green_count: usize,
    vocab_size: usize,
}

impl Partition {
    #[inline]
    pub fn is_green(&self, id: TokenId) -> bool {
        let i = id as usize;
        i < self.vocab_size && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn green_count(&self) -> usize {
        self.green_count
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn green_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        (0..self.vocab_size as TokenId).filter(|&i| self.is_green(i))
    }
}

/// Partition for `seed`, with `floor(gamma * vocab_size)` green tokens.
pub fn partition(seed: u64, gamma: f64, vocab_size: usize) -> Result<Partition> {
    let k = green_count(gamma, vocab_size)?;
    let mut p = Partitioner::new(vocab_size, k);
    Ok(p.partition(seed))
}

/// Reusable shuffle workspace for a fixed vocabulary size and green-list size.
#[derive(Debug, Clone)]
pub struct Partitioner {
    vocab_size: usize,
    green_count: usize,
    scratch: Vec<TokenId>,
}

impl Partitioner {
    pub fn new(vocab_size: usize, green_count: usize) -> Self {
        assert!(green_count >= 1 && green_count < vocab_size, "invalid green list size");
        Self { vocab_size, green_count, scratch: Vec::with_capacity(vocab_size) }
    }

    pub fn for_gamma(gamma: f64, vocab_size: usize) -> Result<Self> {
        Ok(Self::new(vocab_size, green_count(gamma, vocab_size)?))
    }

    pub fn green_count(&self) -> usize {
        self.green_count
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Green token ids for `seed`, in shuffle order.
    pub fn green_list(&mut self, seed: u64) -> &[TokenId] {
        self.scratch.clear();
        self.scratch.extend(0..self.vocab_size as TokenId);
        let mut rng = CounterRng::new(seed);
        let n = self.vocab_size as u64;
        for i in 0..self.green_count {
            let j = i + rng.below(n - i as u64) as usize;
            self.scratch.swap(i, j);
        }
        &self.scratch[..self.green_count]
    }

    pub fn partition(&mut self, seed: u64) -> Partition {
        let mut words = vec![0u64; self.vocab_size.div_ceil(64)];
        for &id in self.green_list(seed) {
            words[id as usize / 64] |= 1 << (id % 64);
        }
        Partition { words, green_count: self.green_count, vocab_size: self.vocab_size }
    }

    pub fn contains(&mut self, seed: u64, token: TokenId) -> bool {
        self.green_list(seed).contains(&token)
    }

    /// Whether `token` is green at a step whose predecessor is `prev`.
    pub fn is_green_after(&mut self, key: u64, prev: TokenId, token: TokenId) -> bool {
        self.contains(seed_for(key, prev), token)
    }
}
