//! Count-based n-gram model with stupid backoff.
//!
//! Every document is prefixed with `<bos>` before counting. Scoring looks for
//! the longest context suffix that has seen the candidate token; each level
//! of backoff multiplies the relative frequency by `backoff_factor`, and the
//! unigram level is additively smoothed so every token keeps some mass. The
//! scores are then renormalised over the vocabulary.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use super::TokenModel;
use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocabulary};

pub const NGRAM_HEADER: &str = "#sweetmark-ngram v1";

#[derive(Debug, Clone, PartialEq)]
struct Successors {
    total: u64,
    /// Sorted by token id.
    next: Vec<(TokenId, u64)>,
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    vocab: Vocabulary,
    order: usize,
    smoothing_alpha: f64,
    backoff_factor: f64,
    /// `tables[k]` maps a length-`k` context to its successor counts.
    tables: Vec<HashMap<Vec<TokenId>, Successors>>,
}

pub fn train_ngram(
    corpus: &[Vec<TokenId>],
    vocab: Vocabulary,
    order: usize,
    smoothing_alpha: f64,
    backoff_factor: f64,
) -> Result<NGramModel> {
    if corpus.iter().all(Vec::is_empty) {
        return Err(Error::data("cannot train on an empty corpus"));
    }
    check_hyper(order, smoothing_alpha, backoff_factor)?;
    let v = vocab.len();
    if let Some(bad) = corpus.iter().flatten().find(|&&t| t as usize >= v) {
        return Err(Error::data(format!("corpus token {bad} outside vocabulary of {v}")));
    }

    let mut raw: Vec<HashMap<Vec<TokenId>, BTreeMap<TokenId, u64>>> = vec![HashMap::new(); order];
    let bos = vocab.bos_id();
    for doc in corpus {
        let mut seq = Vec::with_capacity(doc.len() + 1);
        seq.push(bos);
        seq.extend_from_slice(doc);
        for pos in 1..seq.len() {
            let next = seq[pos];
            for (k, table) in raw.iter_mut().enumerate() {
                if k > pos {
                    break;
                }
                let ctx = seq[pos - k..pos].to_vec();
                *table.entry(ctx).or_default().entry(next).or_default() += 1;
            }
        }
    }

    let tables = raw
        .into_iter()
        .map(|t| {
            t.into_iter()
                .map(|(ctx, counts)| {
                    let total = counts.values().sum();
                    (ctx, Successors { total, next: counts.into_iter().collect() })
                })
                .collect()
        })
        .collect();
    Ok(NGramModel { vocab, order, smoothing_alpha, backoff_factor, tables })
}

fn check_hyper(order: usize, alpha: f64, backoff: f64) -> Result<()> {
    if order < 1 {
        return Err(Error::config("n-gram order must be at least 1"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::config("smoothing alpha must be positive"));
    }
    if !(backoff > 0.0 && backoff <= 1.0) {
        return Err(Error::config("backoff factor must lie in (0,1]"));
    }
    Ok(())
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing_alpha(&self) -> f64 {
        self.smoothing_alpha
    }

    pub fn backoff_factor(&self) -> f64 {
        self.backoff_factor
    }

    /// Next-token probabilities; strictly positive and normalised.
    pub fn probabilities(&self, context: &[TokenId]) -> Vec<f64> {
        let v = self.vocab.len();
        let bos = self.vocab.bos_id();
        // Effective history: <bos> followed by the context.
        let max_k = self.order - 1;
        let hist_len = (context.len() + 1).min(max_k);
        let hist: Vec<TokenId> = if context.len() >= hist_len {
            context[context.len() - hist_len..].to_vec()
        } else {
            std::iter::once(bos).chain(context.iter().copied()).collect()
        };

        let uni = &self.tables[0][&Vec::new()];
        let denom = uni.total as f64 + self.smoothing_alpha * v as f64;
        let base = self.backoff_factor.powi(hist_len as i32);
        let floor = base * self.smoothing_alpha / denom;
        let mut scores = vec![floor; v];
        for &(w, c) in &uni.next {
            scores[w as usize] = base * (c as f64 + self.smoothing_alpha) / denom;
        }
        for k in 1..=hist_len {
            if let Some(s) = self.tables[k].get(&hist[hist_len - k..]) {
                let f = self.backoff_factor.powi((hist_len - k) as i32) / s.total as f64;
                for &(w, c) in &s.next {
                    scores[w as usize] = f * c as f64;
                }
            }
        }
        let sum: f64 = scores.iter().sum();
        scores.iter_mut().for_each(|x| *x /= sum);
        scores
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{NGRAM_HEADER}")?;
        writeln!(w, "order {}", self.order)?;
        writeln!(w, "alpha {}", self.smoothing_alpha)?;
        writeln!(w, "backoff {}", self.backoff_factor)?;
        writeln!(w, "vocab_size {}", self.vocab.len())?;
        for (k, table) in self.tables.iter().enumerate() {
            let mut keys: Vec<&Vec<TokenId>> = table.keys().collect();
            keys.sort();
            writeln!(w, "table {k} {}", keys.len())?;
            for ctx in keys {
                let s = &table[ctx];
                let ctx_s: Vec<String> = ctx.iter().map(|t| t.to_string()).collect();
                let next_s: Vec<String> = s.next.iter().map(|(t, c)| format!("{t}:{c}")).collect();
                writeln!(w, "{}\t{}", ctx_s.join(" "), next_s.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R, vocab: Vocabulary) -> Result<Self> {
        let mut lines = r.lines();
        let mut next_line = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::data(format!("model file truncated before {what}")))
        };
        if next_line("header")? != NGRAM_HEADER {
            return Err(Error::data("not a sweetmark n-gram file"));
        }
        let order: usize = parse_field(&next_line("order")?, "order")?;
        let alpha: f64 = parse_field(&next_line("alpha")?, "alpha")?;
        let backoff: f64 = parse_field(&next_line("backoff")?, "backoff")?;
        let vsize: usize = parse_field(&next_line("vocab_size")?, "vocab_size")?;
        check_hyper(order, alpha, backoff).map_err(|e| Error::data(e.to_string()))?;
        if vsize != vocab.len() {
            return Err(Error::config(format!(
                "model was trained with {vsize} tokens but vocabulary has {}",
                vocab.len()
            )));
        }
        let mut tables = Vec::with_capacity(order);
        for k in 0..order {
            let head = next_line("table header")?;
            let parts: Vec<&str> = head.split(' ').collect();
            if parts.len() != 3 || parts[0] != "table" || parts[1] != k.to_string() {
                return Err(Error::data(format!("bad table header {head:?}")));
            }
            let n: usize = parts[2].parse().map_err(|_| Error::data("bad table size"))?;
            let mut table = HashMap::with_capacity(n);
            for _ in 0..n {
                let line = next_line("table row")?;
                let (ctx_s, next_s) =
                    line.split_once('\t').ok_or_else(|| Error::data("table row lacks a tab"))?;
                let ctx = parse_ids(ctx_s, vsize)?;
                if ctx.len() != k {
                    return Err(Error::data(format!("context of length {} in table {k}", ctx.len())));
                }
                let mut next = Vec::new();
                for item in next_s.split(' ').filter(|s| !s.is_empty()) {
                    let (t, c) = item.split_once(':').ok_or_else(|| Error::data("bad count"))?;
                    let t = parse_ids(t, vsize)?[0];
                    let c: u64 = c.parse().map_err(|_| Error::data("bad count"))?;
                    next.push((t, c));
                }
                if next.is_empty() || !next.windows(2).all(|w| w[0].0 < w[1].0) {
                    return Err(Error::data("successor list empty or unsorted"));
                }
                let total = next.iter().map(|&(_, c)| c).sum();
                table.insert(ctx, Successors { total, next });
            }
            tables.push(table);
        }
        if !tables[0].contains_key(&Vec::new()) {
            return Err(Error::data("model has no unigram table"));
        }
        Ok(Self { vocab, order, smoothing_alpha: alpha, backoff_factor: backoff, tables })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, vocab: Vocabulary) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f), vocab)
    }
}

fn parse_field<T: std::str::FromStr>(line: &str, name: &str) -> Result<T> {
    line.strip_prefix(name)
        .and_then(|rest| rest.strip_prefix(' '))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::data(format!("expected `{name} <value>`, got {line:?}")))
}

fn parse_ids(s: &str, vsize: usize) -> Result<Vec<TokenId>> {
    s.split(' ')
        .filter(|x| !x.is_empty())
        .map(|x| {
            let id: TokenId = x.parse().map_err(|_| Error::data(format!("bad token id {x:?}")))?;
            if id as usize >= vsize {
                return Err(Error::data(format!("token id {id} out of range")));
            }
            Ok(id)
        })
        .collect()
}

impl TokenModel for NGramModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn logits(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        Ok(self.probabilities(context).into_iter().map(f64::ln).collect())
    }
}
