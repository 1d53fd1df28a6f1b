//! Identifier-renaming attack and the resulting detection degradation.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{auroc, labelled, score_pairs, BootstrapInterval, Pair};
use crate::hash::{mix64, CounterRng};
use crate::lm::TokenModel;
use crate::params::WatermarkParams;
use crate::tokenizer::{LexemeKind, Tokenizer};
use crate::vocab::TokenId;

pub const DEFAULT_RENAME_SEEDS: usize = 5;
const STRING_PREFIXES: &[&str] = &["r", "b", "f", "u", "rb", "br", "fr", "rf"];
const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenamePlan {
    /// Share of distinct identifiers to rename, in `[0, 1]`.
    pub fraction: f64,
    pub name_length_range: (usize, usize),
    pub seed: u64,
    /// Identifiers never renamed, on top of keywords and builtins.
    #[serde(default)]
    pub exclude: BTreeSet<String>,
}

impl RenamePlan {
    pub fn new(fraction: f64, seed: u64) -> Self {
        Self { fraction, name_length_range: (2, 5), seed, exclude: BTreeSet::new() }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::config("rename fraction must lie in [0,1]"));
        }
        let (lo, hi) = self.name_length_range;
        if lo < 1 || lo > hi {
            return Err(Error::config("invalid name length range"));
        }
        Ok(())
    }

    /// Old name to fresh name for the identifiers selected in `code`.
    pub fn mapping(&self, code: &str, tokenizer: &Tokenizer) -> Result<BTreeMap<String, String>> {
        self.validate()?;
        let lexemes = tokenizer.lex(code).map_err(|e| match e {
            Error::Lex { offset, message } => {
                Error::data(format!("attack input does not lex at byte {offset}: {message}"))
            }
            other => other,
        })?;
        let mut seen = BTreeSet::new();
        let mut candidates = Vec::new();
        for l in lexemes.iter().filter(|l| l.kind == LexemeKind::Identifier) {
            if seen.insert(l.text) && !tokenizer.is_protected(l.text) && !self.exclude.contains(l.text) {
                candidates.push(l.text);
            }
        }
        let take = (self.fraction * candidates.len() as f64).ceil() as usize;
        let mut rng = CounterRng::new(self.seed);
        for i in 0..take {
            let j = i + rng.below((candidates.len() - i) as u64) as usize;
            candidates.swap(i, j);
        }
        let mut taken: BTreeSet<String> = seen.iter().map(|s| s.to_string()).collect();
        let mut mapping = BTreeMap::new();
        for old in &candidates[..take] {
            let fresh = loop {
                let name = self.fresh_name(&mut rng);
                if !taken.contains(&name)
                    && !tokenizer.is_protected(&name)
                    && !STRING_PREFIXES.contains(&name.as_str())
                {
                    break name;
                }
            };
            taken.insert(fresh.clone());
            mapping.insert(old.to_string(), fresh);
        }
        Ok(mapping)
    }

    fn fresh_name(&self, rng: &mut CounterRng) -> String {
        let (lo, hi) = self.name_length_range;
        let len = lo + rng.below((hi - lo + 1) as u64) as usize;
        let mut s = String::with_capacity(len);
        s.push(FIRST[rng.below(FIRST.len() as u64) as usize] as char);
        for _ in 1..len {
            s.push(REST[rng.below(REST.len() as u64) as usize] as char);
        }
        s
    }
}

/// Rewrites every occurrence of each selected identifier. Renaming is purely
/// lexical: scopes, attributes and shadowing are not distinguished.
pub fn rename_identifiers(code: &str, plan: &RenamePlan, tokenizer: &Tokenizer) -> Result<String> {
    let mapping = plan.mapping(code, tokenizer)?;
    if mapping.is_empty() {
        return Ok(code.to_string());
    }
    let lexemes = tokenizer.lex(code)?;
    let mut out = String::with_capacity(code.len());
    for l in lexemes {
        match (l.kind, mapping.get(l.text)) {
            (LexemeKind::Identifier, Some(new)) => out.push_str(new),
            _ => out.push_str(l.text),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRow {
    pub rho: f64,
    pub seed: u64,
    pub auroc: f64,
    /// Machine z-scores in input order; `None` where undefined.
    #[serde(skip)]
    pub machine_scores: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackCurve {
    pub unattacked_auroc: f64,
    pub rows: Vec<AttackRow>,
    #[serde(skip)]
    pub human_scores: Vec<f64>,
}

/// Seed of the `i`-th rename run.
pub fn rename_seed(base: u64, i: usize) -> u64 {
    mix64(base ^ mix64(i as u64 + 1))
}

fn auc_of(machine: &[Option<f64>], human: &[f64]) -> Result<f64> {
    let m: Vec<f64> = machine.iter().flatten().copied().collect();
    auroc(&labelled(&m, human))
}

/// For every `(rho, seed)` cell: rename each watermarked code, re-tokenize,
/// re-detect with its prompt, and compute AUROC against the fixed human set.
/// The unattacked reference is computed on the re-tokenized original code.
pub fn attack_curve<M: TokenModel + ?Sized>(
    codes: &[(Vec<TokenId>, String)],
    human: &[Pair],
    model: &M,
    tokenizer: &Tokenizer,
    params: &WatermarkParams,
    rho_grid: &[f64],
    seeds: &[u64],
) -> Result<AttackCurve> {
    if seeds.is_empty() {
        return Err(Error::config("at least one rename seed is required"));
    }
    let vocab = model.vocab();
    let human_scores: Vec<f64> = score_pairs(model, human, params)?.into_iter().flatten().collect();
    let to_pairs = |texts: Vec<String>| -> Vec<Pair> {
        codes.iter().zip(texts).map(|((p, _), t)| (p.clone(), tokenizer.tokenize(&t, vocab))).collect()
    };
    let original = to_pairs(codes.iter().map(|(_, c)| c.clone()).collect());
    let unattacked_auroc = auc_of(&score_pairs(model, &original, params)?, &human_scores)?;

    let mut rows = Vec::new();
    for &rho in rho_grid {
        for &seed in seeds {
            let renamed = codes
                .par_iter()
                .map(|(_, c)| rename_identifiers(c, &RenamePlan::new(rho, seed), tokenizer))
                .collect::<Result<Vec<_>>>()?;
            let machine_scores = score_pairs(model, &to_pairs(renamed), params)?;
            rows.push(AttackRow { rho, seed, auroc: auc_of(&machine_scores, &human_scores)?, machine_scores });
        }
    }
    Ok(AttackCurve { unattacked_auroc, rows, human_scores })
}

impl AttackCurve {
    /// Mean AUROC over seeds for each `rho`, in grid order.
    pub fn mean_by_rho(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(rho, _, _)| *rho == r.rho) {
                Some(e) => {
                    e.1 += r.auroc;
                    e.2 += 1;
                }
                None => out.push((r.rho, r.auroc, 1)),
            }
        }
        out.into_iter().map(|(rho, s, n)| (rho, s / n as f64)).collect()
    }

    /// Percentile bootstrap of `mean AUROC(rho_a) - mean AUROC(rho_b)`, means
    /// taken over rename seeds. Machine texts (shared by all cells) and human
    /// texts are resampled independently.
    pub fn bootstrap_difference(
        &self,
        rho_a: f64,
        rho_b: f64,
        resamples: usize,
        level: f64,
        seed: u64,
    ) -> Result<BootstrapInterval> {
        let cells = |rho: f64| -> Vec<&AttackRow> { self.rows.iter().filter(|r| r.rho == rho).collect() };
        let (a, b) = (cells(rho_a), cells(rho_b));
        if a.is_empty() || b.is_empty() || resamples == 0 {
            return Err(Error::config("both rho values must be on the grid"));
        }
        let mean_auc = |rows: &[&AttackRow], idx: Option<(&[usize], &[usize])>| -> Result<f64> {
            let mut total = 0.0;
            for r in rows {
                total += match idx {
                    None => auc_of(&r.machine_scores, &self.human_scores)?,
                    Some((mi, hi)) => {
                        let m: Vec<Option<f64>> = mi.iter().map(|&i| r.machine_scores[i]).collect();
                        let h: Vec<f64> = hi.iter().map(|&i| self.human_scores[i]).collect();
                        auc_of(&m, &h)?
                    }
                };
            }
            Ok(total / rows.len() as f64)
        };
        let estimate = mean_auc(&a, None)? - mean_auc(&b, None)?;
        let (nm, nh) = (a[0].machine_scores.len(), self.human_scores.len());
        let mut rng = CounterRng::new(seed);
        let mut diffs = Vec::with_capacity(resamples);
        for _ in 0..resamples {
            let mi: Vec<usize> = (0..nm).map(|_| rng.below(nm as u64) as usize).collect();
            let hi: Vec<usize> = (0..nh).map(|_| rng.below(nh as u64) as usize).collect();
            diffs.push(mean_auc(&a, Some((&mi, &hi)))? - mean_auc(&b, Some((&mi, &hi)))?);
        }
        diffs.sort_by(f64::total_cmp);
        let tail = (1.0 - level) / 2.0;
        let pick = |q: f64| diffs[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
        Ok(BootstrapInterval { estimate, lower: pick(tail), upper: pick(1.0 - tail), level })
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "rho,seed,auroc")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.rho, r.seed, r.auroc)?;
        }
        Ok(())
    }
}
