use std::io::BufRead;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use serde_json::{json, Value};

use sweetmark::attack::{attack_curve, rename_seed};
use sweetmark::calibration::{
    calibrate, collect_samples, default_grid, DEFAULT_CALIBRATION_SEED, DEFAULT_GRID_POINTS, DEFAULT_PARTITIONS,
};
use sweetmark::corpus::load_texts;
use sweetmark::eval::{auroc, generate_set, pairs_of, roc_curve, sweep, tpr_at_fpr, Label, ScoredSample, SweepConfig};
use sweetmark::generator::{generate_with, GenerateOptions};
use sweetmark::lm::{softmax, train_ngram, NGramModel, ReplayModel};
use sweetmark::testbed::python_documents;
use sweetmark::theory::theory_report;
use sweetmark::tokenizer::TokenizerMode;
use sweetmark::{
    detect, detect_with_general_prompts, detect_with_surrogate, DetectionReport, GenerationTrace, SamplerConfig,
    TokenId, TokenModel, Vocabulary, WatermarkParams,
};

use crate::backend::{load_corpus, parse_tokenizer, Backend, ModelArgs};
use crate::config::{parse_list, parse_tau, parse_tau_list, Resolver};
use crate::failure::Failure;
use crate::output::{csv_field, Output};
use crate::render;

/// Offset separating negative-class sample seeds from positive-class ones.
const HUMAN_SEED_OFFSET: u64 = 1 << 32;

#[derive(Debug, Default, Clone, Args)]
pub struct WatermarkArgs {
    /// Green-list ratio.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Logit boost for green tokens.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Entropy threshold in nats; `none` for the ungated scheme.
    #[arg(long)]
    pub tau: Option<String>,
    /// Secret key, decimal or 0x hex.
    #[arg(long, env = "SWEETMARK_KEY", hide_env_values = true)]
    pub key: Option<String>,
    #[arg(long)]
    pub z_threshold: Option<f64>,
    /// Softmax temperature used for the gating entropy.
    #[arg(long)]
    pub entropy_temperature: Option<f64>,
}

impl WatermarkArgs {
    pub fn resolve(&self, r: &mut Resolver) -> anyhow::Result<WatermarkParams> {
        let d = WatermarkParams::default();
        let tau = match self.tau.clone() {
            Some(t) => parse_tau(&t)?,
            None => match r.optional_text("tau", None) {
                Some(t) => parse_tau(&t)?,
                None => d.tau,
            },
        };
        r.record("tau", tau.map_or(Value::Null, Value::from));
        let (key, defaulted) = r.secret_key(self.key.clone())?;
        if defaulted {
            eprintln!("warning: no key given; using the default key 0 (set --key or SWEETMARK_KEY)");
        }
        let p = WatermarkParams {
            gamma: r.value("gamma", self.gamma, d.gamma)?,
            delta: r.value("delta", self.delta, d.delta)?,
            tau,
            key,
            z_threshold: r.value("z_threshold", self.z_threshold, d.z_threshold)?,
            entropy_temperature: r.value("entropy_temperature", self.entropy_temperature, d.entropy_temperature)?,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Default, Clone, Args)]
pub struct SamplerArgs {
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub top_p: Option<f64>,
    #[arg(long)]
    pub max_tokens: Option<usize>,
    /// Sampling seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SamplerArgs {
    pub fn resolve(&self, r: &mut Resolver) -> anyhow::Result<SamplerConfig> {
        let d = SamplerConfig::default();
        let s = SamplerConfig {
            temperature: r.value("temperature", self.temperature, d.temperature)?,
            top_p: r.value("top_p", self.top_p, d.top_p)?,
            max_tokens: r.value("max_tokens", self.max_tokens, d.max_tokens)?,
            rng_seed: r.value("seed", self.seed, d.rng_seed)?,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Text given inline or as a file.
#[derive(Debug, Default, Clone, Args)]
pub struct PromptArgs {
    /// Prompt text.
    #[arg(long, conflicts_with = "prompt_file")]
    pub prompt: Option<String>,
    #[arg(long)]
    pub prompt_file: Option<PathBuf>,
}

impl PromptArgs {
    fn text(&self) -> anyhow::Result<String> {
        match (&self.prompt, &self.prompt_file) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(p)) => Ok(std::fs::read_to_string(p)?),
            (None, None) => Ok(String::new()),
        }
    }
}

fn prompts_from_file(backend: &Backend, path: &std::path::Path) -> anyhow::Result<Vec<Vec<TokenId>>> {
    let texts = load_texts(path)?;
    if texts.is_empty() {
        return Err(Failure::data(format!("{} holds no prompts", path.display())).into());
    }
    Ok(texts.iter().map(|t| backend.encode(t)).collect())
}

// ---------------------------------------------------------------- train

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// JSONL corpus with a "text" field per line.
    #[arg(long, conflicts_with = "builtin")]
    pub corpus: Option<PathBuf>,
    /// Train on the bundled Python corpus.
    #[arg(long)]
    pub builtin: bool,
    #[arg(long)]
    pub order: Option<usize>,
    /// Additive smoothing at the unigram level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Multiplier per backoff level.
    #[arg(long)]
    pub backoff: Option<f64>,
    #[arg(long)]
    pub tokenizer: Option<String>,
    /// Where to write the model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Where to write the vocabulary.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
}

pub fn train(args: &TrainArgs, r: &mut Resolver, out: &Output) -> anyhow::Result<()> {
    let texts: Vec<String> = if args.builtin {
        r.record("corpus", Value::String("builtin".into()));
        python_documents().into_iter().map(str::to_string).collect()
    } else {
        let path = r
            .optional_text("corpus", args.corpus.as_ref().map(|p| p.display().to_string()))
            .ok_or_else(|| Failure::config("train needs --corpus or --builtin"))?;
        load_texts(&path)?
    };
    let tokenizer = parse_tokenizer(&r.text("tokenizer", args.tokenizer.clone(), "code"))?;
    let order = r.value("order", args.order, sweetmark::testbed::NGRAM_ORDER)?;
    let alpha = r.value("alpha", args.alpha, sweetmark::testbed::NGRAM_ALPHA)?;
    let backoff = r.value("backoff", args.backoff, sweetmark::testbed::NGRAM_BACKOFF)?;
    let model_path = r
        .optional_text("model", args.model.as_ref().map(|p| p.display().to_string()))
        .ok_or_else(|| Failure::config("train needs --model for the output model path"))?;
    let vocab_path = r
        .optional_text("vocab", args.vocab.as_ref().map(|p| p.display().to_string()))
        .ok_or_else(|| Failure::config("train needs --vocab for the output vocabulary path"))?;

    let vocab = Vocabulary::from_tokens(texts.iter().flat_map(|t| tokenizer.split(t)));
    let docs: Vec<Vec<TokenId>> = texts.iter().map(|t| tokenizer.tokenize(t, &vocab)).collect();
    let model = train_ngram(&docs, vocab.clone(), order, alpha, backoff)?;
    vocab.save(&vocab_path)?;
    model.save(&model_path)?;
    let summary = json!({
        "documents": docs.len(),
        "tokens": docs.iter().map(Vec::len).sum::<usize>(),
        "vocab_size": vocab.len(),
        "vocab_hash": vocab.content_hash(),
        "order": order,
        "model": model_path,
        "vocab": vocab_path,
    });
    out.emit_json(summary, &r.effective())
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenerateFormat {
    /// JSONL trace: a header line then one line per step.
    Trace,
    /// JSON array of generated token ids.
    Tokens,
    /// Generated text.
    Text,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub watermark: WatermarkArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub prompt: PromptArgs,
    /// Sample without a watermark.
    #[arg(long)]
    pub no_watermark: bool,
    /// Store raw logits per step so the trace can be replayed.
    #[arg(long)]
    pub record_logits: bool,
    #[arg(long, value_enum, default_value = "trace")]
    pub format: GenerateFormat,
}

pub fn generate(args: &GenerateArgs, r: &mut Resolver, out: &Output, pretty: bool) -> anyhow::Result<()> {
    let backend = args.model.load(r)?;
    let params = if args.no_watermark {
        r.record("watermark", Value::Bool(false));
        None
    } else {
        Some(args.watermark.resolve(r)?)
    };
    let sampler = args.sampler.resolve(r)?;
    let prompt = backend.encode(&args.prompt.text()?);
    let trace = generate_with(
        backend.model.as_ref(),
        &prompt,
        params.as_ref(),
        &sampler,
        GenerateOptions { record_logits: args.record_logits },
    )?;
    let mut body = Vec::new();
    match args.format {
        GenerateFormat::Trace => trace.write_jsonl(&mut body)?,
        GenerateFormat::Tokens => {
            serde_json::to_writer(&mut body, &trace.tokens())?;
            body.push(b'\n');
        }
        GenerateFormat::Text => body.extend_from_slice(backend.decode(&trace.tokens()).as_bytes()),
    }
    if pretty {
        println!("{}", render::steps(&backend, &prompt, &trace.steps));
        println!("{}", render::legend());
        if !out.is_file() {
            return Ok(());
        }
    }
    out.emit(&body, &r.effective(), None)
}

// ---------------------------------------------------------------- detect

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub watermark: WatermarkArgs,
    /// Trace written by `generate`; supplies prompt and tokens.
    #[arg(long, conflicts_with_all = ["text", "text_file"])]
    pub trace: Option<PathBuf>,
    /// Text to score.
    #[arg(long, conflicts_with = "text_file")]
    pub text: Option<String>,
    #[arg(long)]
    pub text_file: Option<PathBuf>,
    #[command(flatten)]
    pub prompt: PromptArgs,
    /// Average z over generic prompts instead of using the real one.
    #[arg(long)]
    pub general_prompts: bool,
    /// JSONL prompts for `--general-prompts`; the bundled set otherwise.
    #[arg(long, requires = "general_prompts")]
    pub prompts_file: Option<PathBuf>,
    /// N-gram model over the same vocabulary that supplies the entropies.
    #[arg(long, conflicts_with = "replay")]
    pub surrogate: Option<PathBuf>,
    /// Trace recorded with `--record-logits` whose logits supply the entropies.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

pub fn detect_cmd(args: &DetectArgs, r: &mut Resolver, out: &Output, pretty: bool) -> anyhow::Result<()> {
    let backend = args.model.load(r)?;
    let params = args.watermark.resolve(r)?;
    let (prompt, text) = match &args.trace {
        Some(path) => {
            let trace = GenerationTrace::load(path)?;
            if trace.vocab_hash != backend.vocab().content_hash() {
                return Err(Failure::config("trace was generated with a different vocabulary").into());
            }
            (trace.prompt.clone(), trace.tokens())
        }
        None => {
            let text = match (&args.text, &args.text_file) {
                (Some(t), _) => t.clone(),
                (None, Some(p)) => std::fs::read_to_string(p)?,
                (None, None) => return Err(Failure::config("detect needs --trace, --text or --text-file").into()),
            };
            (backend.encode(&args.prompt.text()?), backend.encode(&text))
        }
    };
    let model: &dyn TokenModel = backend.model.as_ref();
    let report: DetectionReport = if args.general_prompts {
        let prompts = match &args.prompts_file {
            Some(p) => prompts_from_file(&backend, p)?,
            None => backend.general_prompts(),
        };
        detect_with_general_prompts(model, &prompts, &text, &params)?
    } else if let Some(path) = &args.surrogate {
        let surrogate = NGramModel::load(path, backend.vocab().clone())?;
        detect_with_surrogate(model, &surrogate, &prompt, &text, &params)?
    } else if let Some(path) = &args.replay {
        let replay = ReplayModel::from_trace(&GenerationTrace::load(path)?, backend.vocab().clone())?;
        detect(&replay, &prompt, &text, &params)?
    } else {
        detect(model, &prompt, &text, &params)?
    };
    if pretty {
        println!("{}", render::annotations(&backend, &prompt, &report.annotations));
        println!("{}", render::legend());
        println!(
            "z = {:.3} over {} scored tokens ({} green, gamma {:.4}); verdict: {}",
            report.z,
            report.n_gated,
            report.n_green,
            report.gamma,
            if report.verdict { "watermarked" } else { "not watermarked" }
        );
        if !out.is_file() {
            return Ok(());
        }
    }
    out.emit_json(serde_json::to_value(&report)?, &r.effective())
}

// ---------------------------------------------------------------- calibrate

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub watermark: WatermarkArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// JSONL corpus; defaults to the testbed's own documents.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Random partitions per position.
    #[arg(long)]
    pub partitions: Option<usize>,
    #[arg(long)]
    pub calibration_seed: Option<u64>,
    /// Comma-separated thresholds; otherwise an even grid over [0, ln |V|].
    #[arg(long)]
    pub taus: Option<String>,
    #[arg(long)]
    pub grid_points: Option<usize>,
}

pub fn calibrate_cmd(args: &CalibrateArgs, r: &mut Resolver, out: &Output) -> anyhow::Result<()> {
    let backend = args.model.load(r)?;
    // The key plays no part in calibration.
    let d = WatermarkParams::default();
    let params = WatermarkParams {
        gamma: r.value("gamma", args.watermark.gamma, d.gamma)?,
        delta: r.value("delta", args.watermark.delta, d.delta)?,
        entropy_temperature: r.value(
            "entropy_temperature",
            args.watermark.entropy_temperature,
            d.entropy_temperature,
        )?,
        ..d
    };
    params.validate()?;
    let corpus = match r.optional_text("corpus", args.corpus.as_ref().map(|p| p.display().to_string())) {
        Some(path) => load_corpus(&backend, &path)?,
        None if !backend.documents.is_empty() => backend.documents.clone(),
        None => {
            let sampler = args.sampler.resolve(r)?;
            generate_set(backend.model.as_ref(), &backend.prompts, None, &sampler, 100, sampler.rng_seed)?
                .into_iter()
                .map(|t| {
                    let mut doc = t.prompt.clone();
                    doc.extend(t.tokens());
                    doc
                })
                .collect()
        }
    };
    let partitions = r.value("partitions", args.partitions, DEFAULT_PARTITIONS)?;
    let seed = r.value("calibration_seed", args.calibration_seed, DEFAULT_CALIBRATION_SEED)?;
    let grid = match r.optional_text("taus", args.taus.clone()) {
        Some(t) => parse_list::<f64>(&t, "tau")?,
        None => default_grid(backend.vocab().len(), r.value("grid_points", args.grid_points, DEFAULT_GRID_POINTS)?),
    };
    let v = backend.vocab().len();
    let gamma = params.effective_gamma(v)?;
    let samples = collect_samples(backend.model.as_ref(), &corpus, &params, partitions, seed)?;
    let curve = calibrate(&samples, gamma, &grid)?;
    let mut body = Vec::new();
    curve.write_csv(&mut body)?;
    let summary = json!({
        "positions": samples.len(),
        "best_interval": [curve.best_interval.0, curve.best_interval.1],
        "best_z_prime": curve.best_z_prime,
        "argmax_tau": curve.argmax_tau(),
    });
    eprintln!(
        "best z' = {:.5} for tau in [{}, {}]",
        curve.best_z_prime, curve.best_interval.0, curve.best_interval.1
    );
    out.emit(&body, &r.effective(), Some(summary))
}

// ---------------------------------------------------------------- theory

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Trace recorded with `--record-logits`.
    #[arg(long, conflicts_with_all = ["text", "text_file"])]
    pub trace: Option<PathBuf>,
    /// Text whose next-token distributions the model supplies.
    #[arg(long, conflicts_with = "text_file")]
    pub text: Option<String>,
    #[arg(long)]
    pub text_file: Option<PathBuf>,
    #[command(flatten)]
    pub prompt: PromptArgs,
    /// Spike-entropy gate; defaults to the midpoint of the attainable range.
    #[arg(long)]
    pub tau_spike: Option<f64>,
}

pub fn theory_cmd(args: &TheoryArgs, r: &mut Resolver, out: &Output) -> anyhow::Result<()> {
    let d = WatermarkParams::default();
    let gamma = r.value("gamma", args.gamma, d.gamma)?;
    let delta = r.value("delta", args.delta, d.delta)?;
    let tau_spike = r.optional("tau_spike", args.tau_spike)?;
    let distributions: Vec<Vec<f64>> = match &args.trace {
        Some(path) => {
            let trace = GenerationTrace::load(path)?;
            trace
                .steps
                .iter()
                .map(|s| {
                    s.logits
                        .as_ref()
                        .map(|l| softmax(l, 1.0))
                        .ok_or_else(|| Failure::data(format!("trace step {} has no logits", s.t)))
                })
                .collect::<Result<_, _>>()?
        }
        None => {
            let backend = args.model.load(r)?;
            let text = match (&args.text, &args.text_file) {
                (Some(t), _) => t.clone(),
                (None, Some(p)) => std::fs::read_to_string(p)?,
                (None, None) => return Err(Failure::config("theory needs --trace, --text or --text-file").into()),
            };
            let mut context = backend.encode(&args.prompt.text()?);
            let text = backend.encode(&text);
            let mut dists = Vec::with_capacity(text.len());
            for &t in &text {
                dists.push(softmax(&backend.model.logits(&context)?, 1.0));
                context.push(t);
            }
            dists
        }
    };
    if distributions.is_empty() {
        return Err(Failure::data("no tokens to analyse").into());
    }
    let report = theory_report(&distributions, gamma, delta, tau_spike)?;
    out.emit_json(serde_json::to_value(&report)?, &r.effective())
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Secret key, decimal or 0x hex.
    #[arg(long, env = "SWEETMARK_KEY", hide_env_values = true)]
    pub key: Option<String>,
    /// Comma-separated green-list ratios.
    #[arg(long)]
    pub gammas: Option<String>,
    /// Comma-separated boosts.
    #[arg(long)]
    pub deltas: Option<String>,
    /// Comma-separated thresholds; `none` adds the ungated scheme.
    #[arg(long)]
    pub taus: Option<String>,
    #[arg(long)]
    pub n_machine: Option<usize>,
    #[arg(long)]
    pub n_human: Option<usize>,
    #[arg(long)]
    pub harness_seed: Option<u64>,
    #[arg(long)]
    pub fpr_cap: Option<f64>,
    #[arg(long)]
    pub entropy_temperature: Option<f64>,
    /// JSONL prompts; the testbed prompts otherwise.
    #[arg(long)]
    pub prompts_file: Option<PathBuf>,
}

pub fn sweep_cmd(args: &SweepArgs, r: &mut Resolver, out: &Output) -> anyhow::Result<()> {
    let backend = args.model.load(r)?;
    let sampler = args.sampler.resolve(r)?;
    let (key, defaulted) = r.secret_key(args.key.clone())?;
    if defaulted {
        eprintln!("warning: no key given; using the default key 0 (set --key or SWEETMARK_KEY)");
    }
    let gammas = parse_list::<f64>(&r.text("gammas", args.gammas.clone(), "0.1,0.25,0.5"), "gamma")?;
    let deltas = parse_list::<f64>(&r.text("deltas", args.deltas.clone(), "0.5,1,2,3,4"), "delta")?;
    let taus = parse_tau_list(&r.text("taus", args.taus.clone(), "none,0.3,0.6,0.9,1.2"))?;
    let entropy_temperature = r.value("entropy_temperature", args.entropy_temperature, 1.0)?;
    let n_machine = r.value("n_machine", args.n_machine, 200)?;
    let n_human = r.value("n_human", args.n_human, 200)?;
    let harness_seed = r.value("harness_seed", args.harness_seed, 0)?;
    let fpr_cap = r.value("fpr_cap", args.fpr_cap, 0.05)?;
    let prompts = match &args.prompts_file {
        Some(p) => prompts_from_file(&backend, p)?,
        None => backend.prompts.clone(),
    };
    let mut grid = Vec::new();
    for &gamma in &gammas {
        for &delta in &deltas {
            for &tau in &taus {
                let p = WatermarkParams { gamma, delta, tau, key, entropy_temperature, ..WatermarkParams::default() };
                p.validate()?;
                grid.push(p);
            }
        }
    }
    if grid.is_empty() {
        return Err(Failure::config("the sweep grid is empty").into());
    }
    let model = backend.model.as_ref();
    let human = pairs_of(&generate_set(
        model,
        &prompts,
        None,
        &sampler,
        n_human,
        harness_seed.wrapping_add(HUMAN_SEED_OFFSET),
    )?);
    let config = SweepConfig { sampler, n_machine, harness_seed, fpr_cap };
    let result = sweep(model, &prompts, &grid, &config, &human)?;
    let mut body = Vec::new();
    result.write_csv(&mut body)?;
    let summary = json!({ "points": result.rows.len(), "baseline_loglik": result.baseline_loglik });
    out.emit(&body, &r.effective(), Some(summary))
}

// ---------------------------------------------------------------- attack

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub watermark: WatermarkArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Comma-separated renaming fractions.
    #[arg(long)]
    pub rhos: Option<String>,
    /// Rename runs per fraction.
    #[arg(long)]
    pub rename_seeds: Option<usize>,
    #[arg(long)]
    pub n_machine: Option<usize>,
    #[arg(long)]
    pub harness_seed: Option<u64>,
    /// Bootstrap resamples for the first-vs-last fraction interval.
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub bootstrap_seed: Option<u64>,
}

pub fn attack_cmd(args: &AttackArgs, r: &mut Resolver, out: &Output) -> anyhow::Result<()> {
    let backend = args.model.load(r)?;
    if backend.tokenizer.mode() != TokenizerMode::Code || !backend.joiner.is_empty() {
        return Err(Failure::config("the renaming attack needs a model over code tokens").into());
    }
    let params = args.watermark.resolve(r)?;
    let sampler = args.sampler.resolve(r)?;
    let rhos = parse_list::<f64>(&r.text("rhos", args.rhos.clone(), "0,0.25,0.5,0.75,1"), "rho")?;
    if rhos.is_empty() || rhos.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Failure::config("rho values must lie in [0,1]").into());
    }
    let n_seeds = r.value("rename_seeds", args.rename_seeds, sweetmark::attack::DEFAULT_RENAME_SEEDS)?;
    let n = r.value("n_machine", args.n_machine, 200)?;
    let harness_seed = r.value("harness_seed", args.harness_seed, 0)?;
    let resamples = r.value("resamples", args.resamples, 1000)?;
    let level = r.value("level", args.level, 0.95)?;
    let bootstrap_seed = r.value("bootstrap_seed", args.bootstrap_seed, 0)?;

    let model = backend.model.as_ref();
    let machine = generate_set(model, &backend.prompts, Some(&params), &sampler, n, harness_seed)?;
    let human = pairs_of(&generate_set(
        model,
        &backend.prompts,
        None,
        &sampler,
        n,
        harness_seed.wrapping_add(HUMAN_SEED_OFFSET),
    )?);
    let codes: Vec<(Vec<TokenId>, String)> = machine
        .iter()
        .map(|t| (t.prompt.clone(), backend.decode(&t.tokens())))
        .filter(|(_, c)| backend.tokenizer.lex(c).is_ok())
        .collect();
    let dropped = machine.len() - codes.len();
    let seeds: Vec<u64> = (0..n_seeds).map(|i| rename_seed(harness_seed, i)).collect();
    let curve = attack_curve(&codes, &human, model, &backend.tokenizer, &params, &rhos, &seeds)?;
    let (first, last) = (rhos[0], rhos[rhos.len() - 1]);
    let ci = curve.bootstrap_difference(first, last, resamples, level, bootstrap_seed)?;
    let mut body = Vec::new();
    curve.write_csv(&mut body)?;
    let summary = json!({
        "unattacked_auroc": curve.unattacked_auroc,
        "mean_auroc_by_rho": curve.mean_by_rho(),
        "difference": { "rho_a": first, "rho_b": last, "interval": ci },
        "unlexable_dropped": dropped,
    });
    eprintln!(
        "AUROC drop from rho={first} to rho={last}: {:.4} ({}% interval [{:.4}, {:.4}])",
        ci.estimate,
        level * 100.0,
        ci.lower,
        ci.upper
    );
    out.emit(&body, &r.effective(), Some(summary))
}

// ---------------------------------------------------------------- roc

#[derive(Debug, Args)]
pub struct RocArgs {
    /// JSONL with `{"score": <number>, "label": "machine" | "human"}` per line.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub fpr_cap: Option<f64>,
    /// Write the ROC points as CSV instead of a JSON summary.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Deserialize)]
struct ScoreLine {
    score: f64,
    label: Label,
}

pub fn roc_cmd(args: &RocArgs, r: &mut Resolver, out: &Output) -> anyhow::Result<()> {
    let fpr_cap = r.value("fpr_cap", args.fpr_cap, 0.05)?;
    r.record("scores", Value::String(args.scores.display().to_string()));
    let file = std::fs::File::open(&args.scores)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", args.scores.display())))?;
    let mut samples = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: ScoreLine =
            serde_json::from_str(&line).map_err(|e| Failure::data(format!("scores line {}: {e}", i + 1)))?;
        samples.push(ScoredSample::new(s.score, s.label, 0));
    }
    let curve = roc_curve(&samples)?;
    if args.csv {
        let mut body = String::from("fpr,tpr\n");
        for (f, t) in &curve {
            body.push_str(&format!("{},{}\n", csv_field(&f.to_string()), csv_field(&t.to_string())));
        }
        return out.emit(body.as_bytes(), &r.effective(), None);
    }
    let (tpr, threshold) = tpr_at_fpr(&samples, fpr_cap)?;
    let n_machine = samples.iter().filter(|s| s.label == Label::Machine).count();
    let summary = json!({
        "n_machine": n_machine,
        "n_human": samples.len() - n_machine,
        "auroc": auroc(&samples)?,
        "fpr_cap": fpr_cap,
        "tpr_at_fpr": tpr,
        "threshold": threshold.is_finite().then_some(threshold),
        "curve": curve,
    });
    out.emit_json(summary, &r.effective())
}
