//! Gated green-token counting and the one-sided z-test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::seed_for;
use crate::lm::{entropy_of_logits, TokenModel};
use crate::params::WatermarkParams;
use crate::partition::Partitioner;
use crate::vocab::TokenId;

/// `(n_green - gamma n) / sqrt(n gamma (1 - gamma))`.
pub fn z_score(n_green: usize, n_scored: usize, gamma: f64) -> Result<f64> {
    if n_scored == 0 {
        return Err(Error::UndefinedStatistic("no scored tokens".into()));
    }
    if n_green > n_scored {
        return Err(Error::config(format!("{n_green} green tokens out of {n_scored} scored")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::config("gamma must lie in (0,1)"));
    }
    let n = n_scored as f64;
    Ok((n_green as f64 - gamma * n) / (n * gamma * (1.0 - gamma)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptMode {
    Gold,
    GeneralAveraged,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenAnnotation {
    pub t: usize,
    pub token: TokenId,
    #[serde(rename = "H")]
    pub entropy: f64,
    pub gated: bool,
    /// Only computed for gated tokens.
    pub green: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    /// Total tokens examined.
    pub n_tokens: usize,
    /// Tokens that passed the entropy gate.
    pub n_gated: usize,
    /// Green tokens among the gated ones.
    pub n_green: usize,
    /// Null green rate actually used: `floor(gamma |V|) / |V|`.
    pub gamma: f64,
    pub z: f64,
    pub verdict: bool,
    pub z_threshold: f64,
    pub tau: Option<f64>,
    pub prompt_mode: PromptMode,
    pub annotations: Vec<TokenAnnotation>,
}

impl DetectionReport {
    fn from_counts(
        params: &WatermarkParams,
        gamma: f64,
        n_green: usize,
        prompt_mode: PromptMode,
        annotations: Vec<TokenAnnotation>,
    ) -> Result<Self> {
        let n_gated = annotations.iter().filter(|a| a.gated).count();
        let z = z_score(n_green, n_gated, gamma)?;
        Ok(Self {
            n_tokens: annotations.len(),
            n_gated,
            n_green,
            gamma,
            z,
            verdict: z > params.z_threshold,
            z_threshold: params.z_threshold,
            tau: params.tau,
            prompt_mode,
            annotations,
        })
    }
}

/// Detection with the generating model supplying the entropies.
pub fn detect<M: TokenModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    text: &[TokenId],
    params: &WatermarkParams,
) -> Result<DetectionReport> {
    let mode = if prompt.is_empty() { PromptMode::None } else { PromptMode::Gold };
    score(model, prompt, text, params, mode)
}

/// Detection where a different model estimates the entropies. Partitions only
/// depend on the key and the previous token, so `gen_model` is consulted for
/// its vocabulary alone.
pub fn detect_with_surrogate<G, S>(
    gen_model: &G,
    surrogate: &S,
    prompt: &[TokenId],
    text: &[TokenId],
    params: &WatermarkParams,
) -> Result<DetectionReport>
where
    G: TokenModel + ?Sized,
    S: TokenModel + ?Sized,
{
    if gen_model.vocab().len() != surrogate.vocab().len()
        || gen_model.vocab().content_hash() != surrogate.vocab().content_hash()
    {
        return Err(Error::config("surrogate model uses a different vocabulary"));
    }
    detect(surrogate, prompt, text, params)
}

/// Runs detection once per candidate prompt and averages the z-scores.
/// Prompts whose detection is undefined are dropped.
pub fn detect_with_general_prompts<M: TokenModel + ?Sized>(
    model: &M,
    prompts: &[Vec<TokenId>],
    text: &[TokenId],
    params: &WatermarkParams,
) -> Result<DetectionReport> {
    if prompts.is_empty() {
        return Err(Error::config("at least one prompt is required"));
    }
    let mut first: Option<DetectionReport> = None;
    let mut zs = Vec::with_capacity(prompts.len());
    for p in prompts {
        match score(model, p, text, params, PromptMode::GeneralAveraged) {
            Ok(r) => {
                zs.push(r.z);
                first.get_or_insert(r);
            }
            Err(Error::UndefinedStatistic(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let mut report = first.ok_or_else(|| {
        Error::UndefinedStatistic("every prompt left no gated tokens".into())
    })?;
    report.z = zs.iter().sum::<f64>() / zs.len() as f64;
    report.verdict = report.z > params.z_threshold;
    Ok(report)
}

/// One `(prompt, text)` pair per entry; results keep input order.
pub fn detect_batch<M: TokenModel + ?Sized>(
    model: &M,
    items: &[(Vec<TokenId>, Vec<TokenId>)],
    params: &WatermarkParams,
) -> Vec<Result<DetectionReport>> {
    items.par_iter().map(|(p, t)| detect(model, p, t, params)).collect()
}

fn score<M: TokenModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    text: &[TokenId],
    params: &WatermarkParams,
    mode: PromptMode,
) -> Result<DetectionReport> {
    let vocab = model.vocab();
    let v = vocab.len();
    params.bind(v)?;
    let gamma = params.effective_gamma(v)?;
    let mut partitioner = Partitioner::for_gamma(params.gamma, v)?;
    let mut context = Vec::with_capacity(prompt.len() + text.len());
    context.extend_from_slice(prompt);
    // Out-of-range ids are scored as unknown tokens.
    let clamp = |t: TokenId| if (t as usize) < v { t } else { vocab.unk_id() };
    context.iter_mut().for_each(|t| *t = clamp(*t));

    let mut annotations = Vec::with_capacity(text.len());
    let mut n_green = 0;
    for (t, &raw) in text.iter().enumerate() {
        let token = clamp(raw);
        let entropy = if params.tau.is_some() {
            let logits = model.logits(&context)?;
            if logits.len() != v {
                return Err(Error::config("model output does not match its vocabulary"));
            }
            entropy_of_logits(&logits, params.entropy_temperature)
        } else {
            f64::NAN
        };
        let gated = params.is_gated(entropy);
        let green = gated.then(|| {
            let prev = context.last().copied().unwrap_or(vocab.bos_id());
            partitioner.contains(seed_for(params.key, prev), token)
        });
        n_green += usize::from(green == Some(true));
        annotations.push(TokenAnnotation { t, token, entropy, gated, green });
        context.push(token);
    }
    DetectionReport::from_counts(params, gamma, n_green, mode, annotations)
}
