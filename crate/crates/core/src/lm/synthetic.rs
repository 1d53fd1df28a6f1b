//! Synthetic token models with controlled entropy profiles.

use std::collections::HashMap;
use std::sync::RwLock;

use super::{entropy_of_logits, TokenModel};
use crate::error::{Error, Result};
use crate::hash::{mix64, CounterRng};
use crate::vocab::{TokenId, Vocabulary};

/// Constant logits: every step is uniform over the vocabulary.
#[derive(Debug, Clone)]
pub struct UniformModel {
    vocab: Vocabulary,
}

impl UniformModel {
    pub fn new(vocab: Vocabulary) -> Self {
        Self { vocab }
    }
}

impl TokenModel for UniformModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn logits(&self, _context: &[TokenId]) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.vocab.len()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BimodalConfig {
    pub vocab_size: usize,
    pub seed: u64,
    /// Share of steps drawn from the low-entropy mode.
    pub low_fraction: f64,
    /// Target entropy range (nats) of low-mode steps.
    pub low_entropy: (f64, f64),
    /// Target entropy range (nats) of high-mode steps.
    pub high_entropy: (f64, f64),
    /// Key each step on the previous token as well as the position. When false
    /// the entropy sequence is identical for every continuation.
    pub keyed_on_prev: bool,
}

impl Default for BimodalConfig {
    fn default() -> Self {
        Self {
            vocab_size: 64,
            seed: 0x5EED,
            low_fraction: 0.7,
            low_entropy: (0.02, 0.2),
            high_entropy: (0.8, 3.0),
            keyed_on_prev: true,
        }
    }
}

const SPECIAL_LOGIT: f64 = -60.0;
const MAX_SCALE: f64 = 64.0;

/// A model whose steps fall in a spiky mode (one near-certain continuation)
/// or a flat mode (several plausible continuations), like code completion.
///
/// Each step draws Gaussian logits from a generator keyed on
/// `(seed, position, previous token)`, then scales them by bisection so the
/// step entropy hits a target drawn from its mode's range. `<unk>` and
/// `<bos>` get negligible mass.
#[derive(Debug)]
pub struct BimodalModel {
    vocab: Vocabulary,
    config: BimodalConfig,
    cache: RwLock<HashMap<(TokenId, usize), Vec<f64>>>,
}

impl BimodalModel {
    pub fn new(config: BimodalConfig) -> Result<Self> {
        if config.vocab_size < 8 {
            return Err(Error::config("bimodal model needs at least 8 tokens"));
        }
        if !(0.0..=1.0).contains(&config.low_fraction) {
            return Err(Error::config("low_fraction must lie in [0,1]"));
        }
        let max_h = ((config.vocab_size - 2) as f64).ln();
        for (lo, hi) in [config.low_entropy, config.high_entropy] {
            if !(lo > 0.0 && lo <= hi && hi < max_h) {
                return Err(Error::config("entropy ranges must satisfy 0 < lo <= hi < ln(|V|-2)"));
            }
        }
        let vocab = Vocabulary::synthetic(config.vocab_size)?;
        Ok(Self { vocab, config, cache: RwLock::new(HashMap::new()) })
    }

    pub fn config(&self) -> &BimodalConfig {
        &self.config
    }

    fn compute(&self, prev: TokenId, position: usize) -> Vec<f64> {
        let c = &self.config;
        let v = c.vocab_size;
        let key_prev = if c.keyed_on_prev { prev as u64 + 1 } else { 0 };
        let seed = mix64(c.seed ^ mix64(position as u64) ^ mix64(key_prev.rotate_left(32)));
        let mut rng = CounterRng::new(seed);
        let low = rng.next_f64() < c.low_fraction;
        let (lo, hi) = if low { c.low_entropy } else { c.high_entropy };
        let target = lo + (hi - lo) * rng.next_f64();

        let mut g: Vec<f64> = (0..v).map(|_| rng.next_gaussian()).collect();
        if low {
            let top = 2 + rng.below(v as u64 - 2) as usize;
            let max = g[2..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            g[top] = max + 3.0;
        }
        let scaled = |s: f64| -> Vec<f64> {
            g.iter()
                .enumerate()
                .map(|(i, &x)| if i < 2 { SPECIAL_LOGIT } else { s * x })
                .collect()
        };
        // Entropy falls monotonically as the scale grows.
        let (mut a, mut b) = (0.0, MAX_SCALE);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if entropy_of_logits(&scaled(mid), 1.0) > target {
                a = mid;
            } else {
                b = mid;
            }
        }
        scaled(0.5 * (a + b))
    }
}

impl TokenModel for BimodalModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn logits(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        let prev = context.last().copied().unwrap_or(self.vocab.bos_id());
        let key = (if self.config.keyed_on_prev { prev } else { 0 }, context.len());
        if let Some(l) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(l.clone());
        }
        let l = self.compute(prev, context.len());
        self.cache.write().expect("cache lock").insert(key, l.clone());
        Ok(l)
    }
}
