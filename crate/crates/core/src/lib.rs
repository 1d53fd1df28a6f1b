//! Keyed green/red-list watermarking for token-by-token generation, with
//! optional entropy gating.

pub mod attack;
pub mod calibration;
pub mod corpus;
pub mod detector;
pub mod error;
pub mod eval;
pub mod generator;
pub mod hash;
pub mod lm;
pub mod params;
pub mod testbed;
pub mod partition;
pub mod theory;
pub mod tokenizer;
pub mod vocab;

pub use detector::{detect, detect_with_general_prompts, detect_with_surrogate, z_score, DetectionReport, PromptMode};
pub use error::{Error, Result};
pub use generator::{generate, generate_unwatermarked, GenerationTrace, SamplerConfig};
pub use lm::TokenModel;
pub use params::WatermarkParams;
pub use tokenizer::Tokenizer;
pub use vocab::{TokenId, Vocabulary};
