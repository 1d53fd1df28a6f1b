//! Entropy-gated watermarked sampling and the persisted generation trace.
//!
//! Per step: logits from the model, entropy of the unmodified distribution,
//! and, when the step is gated in, `delta` added to the green logits of the
//! partition keyed by the previous token. The (possibly boosted) logits are
//! then tempered, nucleus-truncated and sampled with a counter-based stream,
//! one uniform draw per step. The draw count does not depend on the
//! watermark, so a `delta = 0` run reproduces an unwatermarked run exactly.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{seed_for, CounterRng};
use crate::lm::{entropy_of_logits, softmax_into, TokenModel};
use crate::params::{ParamsSummary, WatermarkParams};
use crate::partition::Partitioner;
use crate::vocab::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: usize,
    /// Draw `i` of a run is `mix64(rng_seed + i)`, so seeds `s` and `s + 1`
    /// share all but one draw. Independent runs should use mixed seeds such
    /// as [`crate::eval::sample_seed`].
    pub rng_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { temperature: 0.2, top_p: 0.95, max_tokens: 200, rng_seed: 0 }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::config("sampling temperature must be positive"));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::config("top_p must lie in (0,1]"));
        }
        if self.max_tokens == 0 {
            return Err(Error::config("max_tokens must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStep {
    pub t: usize,
    pub token: TokenId,
    /// Entropy (nats) of the unmodified distribution.
    #[serde(rename = "H")]
    pub entropy: f64,
    #[serde(rename = "wm")]
    pub watermarked: bool,
    /// Green membership of the emitted token; only defined on watermarked steps.
    pub green: Option<bool>,
    /// Log-probability under the distribution actually sampled from.
    #[serde(rename = "logp")]
    pub logprob: f64,
    /// Log-probability under the unmodified model at temperature 1.
    #[serde(rename = "base_logp")]
    pub base_logprob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationTrace {
    pub prompt: Vec<TokenId>,
    /// `None` for unwatermarked runs.
    pub params: Option<ParamsSummary>,
    pub vocab_hash: String,
    pub vocab_size: usize,
    pub sampler: SamplerConfig,
    pub steps: Vec<GenerationStep>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceHeader {
    kind: String,
    version: u32,
    params: Option<ParamsSummary>,
    vocab_hash: String,
    vocab_size: usize,
    sampler: SamplerConfig,
    prompt: Vec<TokenId>,
}

impl GenerationTrace {
    pub fn tokens(&self) -> Vec<TokenId> {
        self.steps.iter().map(|s| s.token).collect()
    }

    /// Mean base-model log-likelihood per generated token.
    pub fn mean_base_logprob(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.base_logprob).sum::<f64>() / self.steps.len() as f64
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = TraceHeader {
            kind: "header".into(),
            version: 1,
            params: self.params.clone(),
            vocab_hash: self.vocab_hash.clone(),
            vocab_size: self.vocab_size,
            sampler: self.sampler,
            prompt: self.prompt.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for s in &self.steps {
            serde_json::to_writer(&mut w, s)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()));
        let head = lines.next().ok_or_else(|| Error::data("empty trace file"))??;
        let header: TraceHeader = serde_json::from_str(&head)
            .map_err(|e| Error::data(format!("bad trace header: {e}")))?;
        if header.kind != "header" || header.version != 1 {
            return Err(Error::data("unsupported trace header"));
        }
        let mut steps = Vec::new();
        for (i, line) in lines.enumerate() {
            let step: GenerationStep = serde_json::from_str(&line?)
                .map_err(|e| Error::data(format!("bad trace step {i}: {e}")))?;
            if step.t != i {
                return Err(Error::data(format!("trace step {i} is labelled t={}", step.t)));
            }
            steps.push(step);
        }
        Ok(Self {
            prompt: header.prompt,
            params: header.params,
            vocab_hash: header.vocab_hash,
            vocab_size: header.vocab_size,
            sampler: header.sampler,
            steps,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    /// Store every step's raw logits so the trace can drive a [`crate::lm::ReplayModel`].
    pub record_logits: bool,
}

/// Watermarked generation.
pub fn generate<M: TokenModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    params: &WatermarkParams,
    sampler: &SamplerConfig,
) -> Result<(Vec<TokenId>, GenerationTrace)> {
    let trace = generate_with(model, prompt, Some(params), sampler, GenerateOptions::default())?;
    Ok((trace.tokens(), trace))
}

/// Plain sampling with the same loop and random stream, no watermark.
pub fn generate_unwatermarked<M: TokenModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    sampler: &SamplerConfig,
) -> Result<Vec<TokenId>> {
    let mut out = Vec::with_capacity(sampler.max_tokens);
    run(model, prompt, None, sampler, false, |step| out.push(step.token))?;
    Ok(out)
}

/// Full-control entry point; `params == None` samples without a watermark.
pub fn generate_with<M: TokenModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    params: Option<&WatermarkParams>,
    sampler: &SamplerConfig,
    options: GenerateOptions,
) -> Result<GenerationTrace> {
    let vocab = model.vocab();
    let mut steps = Vec::with_capacity(sampler.max_tokens);
    run(model, prompt, params, sampler, true, |mut step| {
        if !options.record_logits {
            step.logits = None;
        }
        steps.push(step)
    })?;
    Ok(GenerationTrace {
        prompt: prompt.to_vec(),
        params: params.map(WatermarkParams::summary),
        vocab_hash: vocab.content_hash(),
        vocab_size: vocab.len(),
        sampler: *sampler,
        steps,
    })
}

fn run<M: TokenModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    params: Option<&WatermarkParams>,
    sampler: &SamplerConfig,
    full: bool,
    mut emit: impl FnMut(GenerationStep),
) -> Result<()> {
    sampler.validate()?;
    let vocab = model.vocab();
    let v = vocab.len();
    if let Some(p) = params {
        p.bind(v)?;
    }
    if let Some(&bad) = prompt.iter().find(|&&t| t as usize >= v) {
        return Err(Error::config(format!("prompt token {bad} outside vocabulary of {v}")));
    }
    let mut partitioner = params.map(|p| Partitioner::for_gamma(p.gamma, v)).transpose()?;
    let entropy_t = params.map_or(1.0, |p| p.entropy_temperature);
    let mut rng = CounterRng::new(sampler.rng_seed);
    let mut context = Vec::with_capacity(prompt.len() + sampler.max_tokens);
    context.extend_from_slice(prompt);
    let mut probs = Vec::with_capacity(v);
    let mut order: Vec<TokenId> = Vec::with_capacity(v);

    for t in 0..sampler.max_tokens {
        let mut logits = model.logits(&context)?;
        if logits.len() != v {
            return Err(Error::config(format!(
                "model returned {} logits for a vocabulary of {v}",
                logits.len()
            )));
        }
        let needs_entropy = full || params.is_some_and(|p| p.tau.is_some());
        let entropy = if needs_entropy { entropy_of_logits(&logits, entropy_t) } else { f64::NAN };
        let raw = full.then(|| logits.clone());
        let base_lse = if full { log_sum_exp(&logits) } else { 0.0 };

        let gated = params.filter(|p| p.is_gated(entropy));
        let green_list = match (gated, partitioner.as_mut()) {
            (Some(p), Some(pt)) => {
                let prev = context.last().copied().unwrap_or(vocab.bos_id());
                let list = pt.green_list(seed_for(p.key, prev));
                for &g in list {
                    logits[g as usize] += p.delta;
                }
                Some(list)
            }
            _ => None,
        };

        softmax_into(&logits, sampler.temperature, &mut probs);
        let (token, q) = sample_nucleus(&probs, sampler.top_p, rng.next_f64(), &mut order);
        context.push(token);
        if full {
            let raw = raw.expect("full mode keeps logits");
            emit(GenerationStep {
                t,
                token,
                entropy,
                watermarked: green_list.is_some(),
                green: green_list.map(|l| l.contains(&token)),
                logprob: q.ln(),
                base_logprob: raw[token as usize] - base_lse,
                logits: Some(raw),
            });
        } else {
            emit(GenerationStep {
                t,
                token,
                entropy,
                watermarked: false,
                green: None,
                logprob: q.ln(),
                base_logprob: f64::NAN,
                logits: None,
            });
        }
    }
    Ok(())
}

fn log_sum_exp(l: &[f64]) -> f64 {
    let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + l.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Samples from the smallest probability-sorted prefix whose mass reaches
/// `top_p` (boundary token included), renormalised. Returns the token and its
/// probability under the truncated distribution.
pub fn sample_nucleus(probs: &[f64], top_p: f64, u: f64, order: &mut Vec<TokenId>) -> (TokenId, f64) {
    debug_assert!((0.0..1.0).contains(&u));
    if top_p >= 1.0 {
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = i;
            if u < acc {
                return (i as TokenId, p);
            }
        }
        return (last as TokenId, probs[last]);
    }

    order.clear();
    order.extend(0..probs.len() as TokenId);
    order.sort_unstable_by(|&a, &b| {
        probs[b as usize].total_cmp(&probs[a as usize]).then(a.cmp(&b))
    });
    let mut mass = 0.0;
    let mut size = order.len();
    for (n, &id) in order.iter().enumerate() {
        mass += probs[id as usize];
        if mass >= top_p {
            size = n + 1;
            break;
        }
    }
    let target = u * mass;
    let mut acc = 0.0;
    for &id in &order[..size] {
        acc += probs[id as usize];
        if target < acc {
            return (id, probs[id as usize] / mass);
        }
    }
    let id = order[size - 1];
    (id, probs[id as usize] / mass)
}
