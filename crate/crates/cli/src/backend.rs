//! Model selection: a trained n-gram file or one of the built-in testbeds.

use std::path::PathBuf;

use sweetmark::corpus::load_texts;
use sweetmark::lm::{BimodalConfig, NGramModel};
use sweetmark::testbed::{bimodal, NGramTestbed, GENERAL_PROMPTS};
use sweetmark::tokenizer::TokenizerMode;
use sweetmark::{TokenId, TokenModel, Tokenizer, Vocabulary};

use crate::config::Resolver;
use crate::failure::Failure;

pub struct Backend {
    pub model: Box<dyn TokenModel>,
    pub tokenizer: Tokenizer,
    /// Default generation prompts.
    pub prompts: Vec<Vec<TokenId>>,
    /// Text the model was built from, when known.
    pub documents: Vec<Vec<TokenId>>,
    /// Rendering glue between tokens; synthetic vocabularies have no whitespace tokens.
    pub joiner: &'static str,
}

impl Backend {
    pub fn vocab(&self) -> &Vocabulary {
        self.model.vocab()
    }

    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        if self.joiner.is_empty() {
            return self.tokenizer.tokenize(text, self.vocab());
        }
        // Token-per-word input: whitespace only separates.
        text.split_whitespace().map(|w| self.vocab().id_or_unk(w)).collect()
    }

    pub fn token_text(&self, id: TokenId) -> &str {
        self.vocab().token(id).unwrap_or(sweetmark::vocab::UNK_TOKEN)
    }

    pub fn decode(&self, ids: &[TokenId]) -> String {
        ids.iter().map(|&i| self.token_text(i)).collect::<Vec<_>>().join(self.joiner)
    }

    pub fn general_prompts(&self) -> Vec<Vec<TokenId>> {
        GENERAL_PROMPTS.iter().map(|p| self.encode(p)).collect()
    }
}

pub fn parse_tokenizer(s: &str) -> Result<Tokenizer, Failure> {
    match s {
        "code" => Ok(Tokenizer::new(TokenizerMode::Code)),
        "whitespace" => Ok(Tokenizer::new(TokenizerMode::Whitespace)),
        other => Err(Failure::config(format!("unknown tokenizer {other:?} (code, whitespace)"))),
    }
}

#[derive(Debug, Default, Clone, clap::Args)]
pub struct ModelArgs {
    /// N-gram model file written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Vocabulary file matching `--model`.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Built-in model when no `--model` is given: `ngram` or `bimodal`.
    #[arg(long)]
    pub testbed: Option<String>,
    /// Tokenizer for text input: `code` or `whitespace`.
    #[arg(long)]
    pub tokenizer: Option<String>,
}

impl ModelArgs {
    pub fn load(&self, r: &mut Resolver) -> anyhow::Result<Backend> {
        let model = r.optional_text("model", self.model.as_ref().map(|p| p.display().to_string()));
        let vocab = r.optional_text("vocab", self.vocab.as_ref().map(|p| p.display().to_string()));
        match model {
            Some(model) => {
                let tokenizer = parse_tokenizer(&r.text("tokenizer", self.tokenizer.clone(), "code"))?;
                let vocab = vocab.ok_or_else(|| Failure::config("--model needs --vocab"))?;
                let vocab = Vocabulary::load(&vocab)?;
                let model = NGramModel::load(&model, vocab)?;
                let prompts = vec![Vec::new()];
                Ok(Backend {
                    model: Box::new(model),
                    tokenizer,
                    prompts,
                    documents: Vec::new(),
                    joiner: "",
                })
            }
            None => {
                let testbed = r.text("testbed", self.testbed.clone(), "ngram");
                builtin(&testbed)
            }
        }
    }
}

pub fn builtin(name: &str) -> anyhow::Result<Backend> {
    match name {
        "ngram" => {
            let tb = NGramTestbed::new()?;
            Ok(Backend {
                tokenizer: tb.tokenizer,
                prompts: tb.prompts,
                documents: tb.documents,
                model: Box::new(tb.model),
                joiner: "",
            })
        }
        "bimodal" => {
            let (model, prompts) = bimodal(BimodalConfig::default(), 16)?;
            Ok(Backend {
                model: Box::new(model),
                tokenizer: Tokenizer::whitespace(),
                prompts,
                documents: Vec::new(),
                joiner: " ",
            })
        }
        other => Err(Failure::config(format!("unknown testbed {other:?} (ngram, bimodal)")).into()),
    }
}

/// Texts from a JSONL corpus, tokenized for the backend.
pub fn load_corpus(backend: &Backend, path: &str) -> anyhow::Result<Vec<Vec<TokenId>>> {
    let texts = load_texts(path)?;
    if texts.is_empty() {
        return Err(Failure::data(format!("corpus {path} holds no documents")).into());
    }
    Ok(texts.iter().map(|t| backend.encode(t)).collect())
}
