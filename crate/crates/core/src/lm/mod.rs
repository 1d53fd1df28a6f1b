//! Token-probability backends and the entropy used to gate the watermark.

mod ngram;
mod replay;
mod synthetic;

pub use ngram::{train_ngram, NGramModel, NGRAM_HEADER};
pub use replay::ReplayModel;
pub use synthetic::{BimodalConfig, BimodalModel, UniformModel};

use crate::error::Result;
use crate::vocab::{TokenId, Vocabulary};

/// Anything that maps a context to a next-token logit vector.
///
/// `logits` must be deterministic in `context`, return exactly `vocab().len()`
/// finite values, and must not depend on call order. The context is the prompt
/// followed by the tokens generated so far; an empty context means "start of text".
pub trait TokenModel: Send + Sync {
    fn vocab(&self) -> &Vocabulary;
    fn logits(&self, context: &[TokenId]) -> Result<Vec<f64>>;
}

impl<M: TokenModel + ?Sized> TokenModel for &M {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }
    fn logits(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        (**self).logits(context)
    }
}

impl<M: TokenModel + ?Sized> TokenModel for Box<M> {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }
    fn logits(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        (**self).logits(context)
    }
}

/// Tempered softmax with max-subtraction.
pub fn softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(logits.len());
    softmax_into(logits, temperature, &mut out);
    out
}

pub fn softmax_into(logits: &[f64], temperature: f64, out: &mut Vec<f64>) {
    out.clear();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inv_t = 1.0 / temperature;
    out.extend(logits.iter().map(|&l| ((l - max) * inv_t).exp()));
    let sum: f64 = out.iter().sum();
    let inv = 1.0 / sum;
    out.iter_mut().for_each(|p| *p *= inv);
}

/// Natural-log probabilities at temperature 1.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&l| l - lse).collect()
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Entropy of the unmodified next-token distribution. Generation and detection
/// both call this, so a detector sees exactly the value the generator gated on.
pub fn entropy_at<M: TokenModel + ?Sized>(
    model: &M,
    context: &[TokenId],
    entropy_temperature: f64,
) -> Result<f64> {
    let logits = model.logits(context)?;
    Ok(entropy_of_logits(&logits, entropy_temperature))
}

pub fn entropy_of_logits(logits: &[f64], entropy_temperature: f64) -> f64 {
    shannon_entropy(&softmax(logits, entropy_temperature))
}
