use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{auroc, labelled, tpr_at_fpr};
use crate::detector::{detect, z_score, DetectionReport};
use crate::error::{Error, Result};
use crate::generator::{generate_with, GenerateOptions, GenerationTrace, SamplerConfig};
use crate::hash::mix64;
use crate::lm::TokenModel;
use crate::params::WatermarkParams;
use crate::vocab::TokenId;

/// A prompt and the text that followed it.
pub type Pair = (Vec<TokenId>, Vec<TokenId>);

/// Seed of sample `index` in a harness run. Every grid point reuses the same
/// per-sample seeds so differences between points are not sampling noise.
pub fn sample_seed(harness_seed: u64, index: usize) -> u64 {
    mix64(harness_seed.wrapping_add(index as u64))
}

/// `n` generations cycling through `prompts`; `params == None` disables the watermark.
pub fn generate_set<M: TokenModel + ?Sized>(
    model: &M,
    prompts: &[Vec<TokenId>],
    params: Option<&WatermarkParams>,
    sampler: &SamplerConfig,
    n: usize,
    harness_seed: u64,
) -> Result<Vec<GenerationTrace>> {
    if prompts.is_empty() {
        return Err(Error::config("at least one prompt is required"));
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let s = sampler.with_seed(sample_seed(harness_seed, i));
            generate_with(model, &prompts[i % prompts.len()], params, &s, GenerateOptions::default())
        })
        .collect()
}

pub fn pairs_of(traces: &[GenerationTrace]) -> Vec<Pair> {
    traces.iter().map(|t| (t.prompt.clone(), t.tokens())).collect()
}

/// z-scores in input order, `None` where the statistic is undefined.
pub fn score_pairs<M: TokenModel + ?Sized>(
    model: &M,
    pairs: &[Pair],
    params: &WatermarkParams,
) -> Result<Vec<Option<f64>>> {
    pairs
        .par_iter()
        .map(|(p, t)| match detect(model, p, t, params) {
            Ok(r) => Ok(Some(r.z)),
            Err(Error::UndefinedStatistic(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// z-score of the report restricted to its first `t` tokens. Gating and
/// green flags at a position only depend on the tokens before it, so this
/// equals detecting the truncated text.
pub fn prefix_z(report: &DetectionReport, t: usize) -> Option<f64> {
    let head = &report.annotations[..t.min(report.annotations.len())];
    let gated = head.iter().filter(|a| a.gated).count();
    let green = head.iter().filter(|a| a.green == Some(true)).count();
    z_score(green, gated, report.gamma).ok()
}

/// AUROC at each truncation length. Lengths where either class has fewer than
/// `min_per_class` defined scores are left out.
pub fn detectability_at_t<M: TokenModel + ?Sized>(
    machine: &[Pair],
    human: &[Pair],
    model: &M,
    params: &WatermarkParams,
    t_grid: &[usize],
    min_per_class: usize,
) -> Result<Vec<(usize, f64)>> {
    if t_grid.is_empty() {
        return Err(Error::config("truncation grid is empty"));
    }
    let full = |pairs: &[Pair]| -> Result<Vec<DetectionReport>> {
        pairs
            .par_iter()
            .filter(|(_, t)| !t.is_empty())
            .map(|(p, t)| match detect(model, p, t, params) {
                Ok(r) => Ok(Some(r)),
                Err(Error::UndefinedStatistic(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .filter_map(|r| r.transpose())
            .collect()
    };
    let (m_reports, h_reports) = (full(machine)?, full(human)?);
    let mut out = Vec::new();
    for &t in t_grid {
        let m: Vec<f64> = m_reports.iter().filter_map(|r| prefix_z(r, t)).collect();
        let h: Vec<f64> = h_reports.iter().filter_map(|r| prefix_z(r, t)).collect();
        if m.len() >= min_per_class && h.len() >= min_per_class && !m.is_empty() && !h.is_empty() {
            out.push((t, auroc(&labelled(&m, &h))?));
        }
    }
    Ok(out)
}

/// Rows not dominated under `(quality, auroc)`, both larger-is-better.
/// Rows with a NaN coordinate are never marked.
pub fn pareto_mask(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(q, a)| {
            !q.is_nan()
                && !a.is_nan()
                && !points.iter().any(|&(q2, a2)| q2 >= q && a2 >= a && (q2 > q || a2 > a))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sampler: SamplerConfig,
    pub n_machine: usize,
    pub harness_seed: u64,
    pub fpr_cap: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { sampler: SamplerConfig::default(), n_machine: 200, harness_seed: 0, fpr_cap: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub delta: f64,
    pub tau: Option<f64>,
    pub mean_z_machine: f64,
    /// NaN when either class has no defined score.
    pub auroc: f64,
    pub tpr_at_fpr: f64,
    /// Mean per-token base-model log-likelihood of the watermarked generations
    /// minus that of unwatermarked generations with the same seeds.
    pub quality_proxy: f64,
    pub machine_undefined_rate: f64,
    pub human_undefined_rate: f64,
    pub pareto: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub baseline_loglik: f64,
}

fn mean_loglik(traces: &[GenerationTrace]) -> f64 {
    let (sum, n) = traces.iter().flat_map(|t| &t.steps).fold((0.0, 0usize), |(s, n), st| {
        (s + st.base_logprob, n + 1)
    });
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn defined(scores: &[Option<f64>]) -> (Vec<f64>, f64) {
    let v: Vec<f64> = scores.iter().flatten().copied().collect();
    let undefined = if scores.is_empty() { 0.0 } else { 1.0 - v.len() as f64 / scores.len() as f64 };
    (v, undefined)
}

pub fn sweep<M: TokenModel + ?Sized>(
    model: &M,
    prompts: &[Vec<TokenId>],
    grid: &[WatermarkParams],
    config: &SweepConfig,
    human: &[Pair],
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::config("parameter grid is empty"));
    }
    if config.n_machine == 0 || human.is_empty() {
        return Err(Error::config("sweep needs machine and human samples"));
    }
    let baseline =
        generate_set(model, prompts, None, &config.sampler, config.n_machine, config.harness_seed)?;
    let baseline_loglik = mean_loglik(&baseline);
    let mut rows = Vec::with_capacity(grid.len());
    for params in grid {
        let traces = generate_set(
            model,
            prompts,
            Some(params),
            &config.sampler,
            config.n_machine,
            config.harness_seed,
        )?;
        let (m, m_undef) = defined(&score_pairs(model, &pairs_of(&traces), params)?);
        let (h, h_undef) = defined(&score_pairs(model, human, params)?);
        let (auc, tpr) = if m.is_empty() || h.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let samples = labelled(&m, &h);
            (auroc(&samples)?, tpr_at_fpr(&samples, config.fpr_cap)?.0)
        };
        rows.push(SweepRow {
            gamma: params.gamma,
            delta: params.delta,
            tau: params.tau,
            mean_z_machine: if m.is_empty() { f64::NAN } else { m.iter().sum::<f64>() / m.len() as f64 },
            auroc: auc,
            tpr_at_fpr: tpr,
            quality_proxy: mean_loglik(&traces) - baseline_loglik,
            machine_undefined_rate: m_undef,
            human_undefined_rate: h_undef,
            pareto: false,
        });
    }
    let mask = pareto_mask(&rows.iter().map(|r| (r.quality_proxy, r.auroc)).collect::<Vec<_>>());
    rows.iter_mut().zip(mask).for_each(|(r, m)| r.pareto = m);
    Ok(SweepResult { rows, baseline_loglik })
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "gamma,delta,tau,mean_z_machine,auroc,tpr_at_fpr,quality_proxy,machine_undefined_rate,human_undefined_rate,pareto"
        )?;
        for r in &self.rows {
            let tau = r.tau.map(|t| t.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.gamma,
                r.delta,
                tau,
                r.mean_z_machine,
                r.auroc,
                r.tpr_at_fpr,
                r.quality_proxy,
                r.machine_undefined_rate,
                r.human_undefined_rate,
                r.pareto
            )?;
        }
        Ok(())
    }
}
