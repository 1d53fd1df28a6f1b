//! Choosing an entropy threshold from corpus statistics via the pseudo-metric
//! `z' = E[N_h / N] * (E[P_G | H > tau] - gamma)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::mix64;
use crate::lm::{entropy_of_logits, softmax, TokenModel};
use crate::params::WatermarkParams;
use crate::partition::Partitioner;
use crate::vocab::TokenId;

pub const DEFAULT_PARTITIONS: usize = 500;
/// Seed of the partition stream used for calibration. Unrelated to any
/// watermark key.
pub const DEFAULT_CALIBRATION_SEED: u64 = 0x00CA_11B2_A7E5_EED5;
pub const DEFAULT_GRID_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    #[serde(rename = "H")]
    pub entropy: f64,
    /// Green mass of the boosted distribution, averaged over random partitions.
    pub p_green: f64,
}

/// Green mass after boosting a green set holding mass `g` by `delta`.
fn boosted_green_mass(g: f64, boost: f64) -> f64 {
    let num = g * boost;
    num / (num + 1.0 - g)
}

/// One sample per position of every corpus document. Position `t` of a
/// document is scored with the document prefix before it as context.
pub fn collect_samples<M: TokenModel + ?Sized>(
    model: &M,
    corpus: &[Vec<TokenId>],
    params: &WatermarkParams,
    partitions: usize,
    seed: u64,
) -> Result<Vec<CalibrationSample>> {
    if partitions == 0 {
        return Err(Error::config("at least one partition is required"));
    }
    if corpus.iter().all(Vec::is_empty) {
        return Err(Error::data("calibration corpus is empty"));
    }
    let v = model.vocab().len();
    params.bind(v)?;
    let k = params.green_count(v)?;
    let boost = params.delta.exp();

    let per_doc: Vec<Result<Vec<CalibrationSample>>> = corpus
        .par_iter()
        .enumerate()
        .map(|(d, doc)| {
            let mut partitioner = Partitioner::new(v, k);
            let mut out = Vec::with_capacity(doc.len());
            for t in 0..doc.len() {
                let logits = model.logits(&doc[..t])?;
                let entropy = entropy_of_logits(&logits, params.entropy_temperature);
                let p = softmax(&logits, 1.0);
                let base = mix64(seed ^ mix64(d as u64) ^ mix64((t as u64).rotate_left(32)));
                let mut acc = 0.0;
                for j in 0..partitions as u64 {
                    let g: f64 = partitioner
                        .green_list(mix64(base.wrapping_add(j)))
                        .iter()
                        .map(|&i| p[i as usize])
                        .sum();
                    acc += boosted_green_mass(g, boost);
                }
                out.push(CalibrationSample { entropy, p_green: acc / partitions as f64 });
            }
            Ok(out)
        })
        .collect();
    let mut samples = Vec::new();
    for doc in per_doc {
        samples.extend(doc?);
    }
    Ok(samples)
}

/// Share of samples passing the gate and their mean `P_G`.
fn gate_stats(samples: &[CalibrationSample], tau: f64) -> (f64, Option<f64>) {
    let (mut n, mut sum) = (0usize, 0.0);
    for s in samples.iter().filter(|s| s.entropy > tau) {
        n += 1;
        sum += s.p_green;
    }
    let frac = if samples.is_empty() { 0.0 } else { n as f64 / samples.len() as f64 };
    (frac, (n > 0).then(|| sum / n as f64))
}

/// Zero when no sample passes the gate.
pub fn z_prime(samples: &[CalibrationSample], tau: f64, gamma: f64) -> f64 {
    match gate_stats(samples, tau) {
        (frac, Some(pg)) => frac * (pg - gamma),
        (_, None) => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub tau: f64,
    pub frac_gated: f64,
    pub mean_pg: Option<f64>,
    pub z_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub gamma: f64,
    pub rows: Vec<CalibrationRow>,
    /// Inclusive `tau` range of the first maximal run of grid points within
    /// `1e-12` of the best `z'`.
    pub best_interval: (f64, f64),
    pub best_z_prime: f64,
}

pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn calibrate(samples: &[CalibrationSample], gamma: f64, grid: &[f64]) -> Result<CalibrationCurve> {
    if grid.is_empty() {
        return Err(Error::config("calibration grid is empty"));
    }
    if grid.windows(2).any(|w| !matches!(w[0].partial_cmp(&w[1]), Some(o) if o.is_le())) {
        return Err(Error::config("calibration grid must be sorted"));
    }
    let rows: Vec<CalibrationRow> = grid
        .iter()
        .map(|&tau| {
            let (frac_gated, mean_pg) = gate_stats(samples, tau);
            let z_prime = mean_pg.map_or(0.0, |pg| frac_gated * (pg - gamma));
            CalibrationRow { tau, frac_gated, mean_pg, z_prime }
        })
        .collect();
    let best = rows.iter().map(|r| r.z_prime).fold(f64::NEG_INFINITY, f64::max);
    let first = rows.iter().position(|r| r.z_prime >= best - TIE_TOLERANCE).expect("non-empty grid");
    let last = rows[first..]
        .iter()
        .position(|r| r.z_prime < best - TIE_TOLERANCE)
        .map_or(rows.len() - 1, |off| first + off - 1);
    Ok(CalibrationCurve {
        gamma,
        best_interval: (rows[first].tau, rows[last].tau),
        best_z_prime: best,
        rows,
    })
}

/// `points` equally spaced thresholds over `[0, ln |V|]`.
pub fn default_grid(vocab_size: usize, points: usize) -> Vec<f64> {
    let top = (vocab_size as f64).ln();
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect(),
    }
}

impl CalibrationCurve {
    pub fn argmax_tau(&self) -> f64 {
        self.best_interval.0
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau,frac_gated,mean_pg,z_prime")?;
        for r in &self.rows {
            let pg = r.mean_pg.map(|x| x.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{}", r.tau, r.frac_gated, pg, r.z_prime)?;
        }
        Ok(())
    }
}
