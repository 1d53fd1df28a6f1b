//! Built-in desk-scale setups: an n-gram model over a bundled Python corpus
//! and the synthetic bimodal-entropy model.

use crate::error::Result;
use crate::lm::{train_ngram, BimodalConfig, BimodalModel, NGramModel};
use crate::tokenizer::Tokenizer;
use crate::vocab::{TokenId, Vocabulary};

pub const PYTHON_CORPUS: &str = include_str!("../data/python_corpus.txt");
const DOC_SEPARATOR: &str = "#%%\n";

pub const NGRAM_ORDER: usize = 4;
pub const NGRAM_ALPHA: f64 = 0.1;
pub const NGRAM_BACKOFF: f64 = 0.4;

/// Generic code-stub prefixes carrying no task information.
pub const GENERAL_PROMPTS: [&str; 5] = [
    "def solve(*args):\n    \"\"\"\n    Returns the answer.\n    \"\"\"\n",
    "# solution.py\ndef solve(*args):\n",
    "def run(*args, **kwargs):\n    \"\"\"\n    Implements the task.\n    \"\"\"\n",
    "# A short helper function\n\ndef helper(values):\n",
    "import sys\n\n\ndef main(args):\n",
];

pub fn python_documents() -> Vec<&'static str> {
    PYTHON_CORPUS.split(DOC_SEPARATOR).filter(|d| !d.trim().is_empty()).collect()
}

/// An n-gram model trained on the bundled corpus, with the first line of each
/// document as a generation prompt.
#[derive(Debug)]
pub struct NGramTestbed {
    pub tokenizer: Tokenizer,
    pub vocab: Vocabulary,
    pub model: NGramModel,
    pub documents: Vec<Vec<TokenId>>,
    pub prompts: Vec<Vec<TokenId>>,
}

impl NGramTestbed {
    pub fn new() -> Result<Self> {
        Self::with_order(NGRAM_ORDER)
    }

    pub fn with_order(order: usize) -> Result<Self> {
        let tokenizer = Tokenizer::code();
        let docs = python_documents();
        let mut pieces: Vec<&str> = docs.iter().flat_map(|d| tokenizer.split(d)).collect();
        pieces.extend(GENERAL_PROMPTS.iter().flat_map(|p| tokenizer.split(p)));
        let vocab = Vocabulary::from_tokens(pieces);
        let documents: Vec<Vec<TokenId>> = docs.iter().map(|d| tokenizer.tokenize(d, &vocab)).collect();
        let model = train_ngram(&documents, vocab.clone(), order, NGRAM_ALPHA, NGRAM_BACKOFF)?;
        let prompts = docs
            .iter()
            .map(|d| {
                let first = d.split_inclusive('\n').next().unwrap_or(d);
                tokenizer.tokenize(first, &vocab)
            })
            .collect();
        Ok(Self { tokenizer, vocab, model, documents, prompts })
    }

    /// A model of a different order over the same corpus and vocabulary.
    pub fn retrain(&self, order: usize) -> Result<NGramModel> {
        train_ngram(&self.documents, self.vocab.clone(), order, NGRAM_ALPHA, NGRAM_BACKOFF)
    }

    pub fn general_prompts(&self) -> Vec<Vec<TokenId>> {
        GENERAL_PROMPTS.iter().map(|p| self.tokenizer.tokenize(p, &self.vocab)).collect()
    }

    pub fn detokenize(&self, ids: &[TokenId]) -> String {
        self.tokenizer.detokenize(ids, &self.vocab)
    }
}

/// The bimodal model with `count` single-token prompts.
pub fn bimodal(config: BimodalConfig, count: usize) -> Result<(BimodalModel, Vec<Vec<TokenId>>)> {
    let model = BimodalModel::new(config)?;
    let v = model.config().vocab_size;
    let prompts = (0..count).map(|i| vec![(2 + i % (v - 2)) as TokenId]).collect();
    Ok((model, prompts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{entropy_at, TokenModel};

    #[test]
    fn corpus_splits_into_documents() {
        let docs = python_documents();
        assert!(docs.len() > 50);
        assert!(docs.iter().all(|d| !d.contains("#%%")));
    }

    #[test]
    fn testbed_has_no_unknown_prompt_tokens() {
        let tb = NGramTestbed::new().unwrap();
        let unk = tb.vocab.unk_id();
        assert!(tb.general_prompts().iter().flatten().all(|&t| t != unk));
        assert!(tb.documents.iter().flatten().all(|&t| t != unk));
        assert_eq!(tb.prompts.len(), tb.documents.len());
        assert_eq!(tb.model.vocab().len(), tb.vocab.len());
    }

    #[test]
    fn corpus_entropy_is_mixed() {
        let tb = NGramTestbed::new().unwrap();
        let doc = &tb.documents[10];
        let hs: Vec<f64> = (0..doc.len()).map(|t| entropy_at(&tb.model, &doc[..t], 1.0).unwrap()).collect();
        assert!(hs.iter().any(|&h| h < 0.6));
        assert!(hs.iter().any(|&h| h > 1.5));
    }
}
