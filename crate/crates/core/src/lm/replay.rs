use super::TokenModel;
use crate::error::{Error, Result};
use crate::generator::GenerationTrace;
use crate::vocab::{TokenId, Vocabulary};

/// Replays logit vectors recorded in a generation trace, one per step.
///
/// Step `t` is addressed by the context length: a context of
/// `prompt_len + t` tokens yields the `t`-th stored vector.
#[derive(Debug, Clone)]
pub struct ReplayModel {
    vocab: Vocabulary,
    prompt_len: usize,
    steps: Vec<Vec<f64>>,
}

impl ReplayModel {
    pub fn new(vocab: Vocabulary, prompt_len: usize, steps: Vec<Vec<f64>>) -> Result<Self> {
        if let Some((t, s)) = steps.iter().enumerate().find(|(_, s)| s.len() != vocab.len()) {
            return Err(Error::data(format!(
                "step {t} stores {} logits for a vocabulary of {}",
                s.len(),
                vocab.len()
            )));
        }
        if steps.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::data("replayed logits must be finite"));
        }
        Ok(Self { vocab, prompt_len, steps })
    }

    /// Requires a trace recorded with logits.
    pub fn from_trace(trace: &GenerationTrace, vocab: Vocabulary) -> Result<Self> {
        let steps = trace
            .steps
            .iter()
            .map(|s| {
                s.logits
                    .clone()
                    .ok_or_else(|| Error::data(format!("trace step {} has no recorded logits", s.t)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vocab, trace.prompt.len(), steps)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl TokenModel for ReplayModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn logits(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        let t = context
            .len()
            .checked_sub(self.prompt_len)
            .ok_or_else(|| Error::data("context shorter than the recorded prompt"))?;
        self.steps.get(t).cloned().ok_or_else(|| {
            Error::data(format!("replay has {} steps, step {t} requested", self.steps.len()))
        })
    }
}
