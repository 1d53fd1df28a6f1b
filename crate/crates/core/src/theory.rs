//! Spike entropy, the green-probability lower bound, and the z-score lower
//! bounds for ungated and gated detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::CounterRng;
use crate::partition::Partitioner;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub modulus: f64,
}

impl BoundParams {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::config("gamma must lie in (0,1)"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::config("delta must be finite and non-negative"));
        }
        let e = delta.exp_m1();
        let denom = 1.0 + e * gamma;
        Ok(Self { gamma, delta, alpha: delta.exp() / denom, modulus: (1.0 - gamma) * e / denom })
    }

    /// `(1/(1+m), 1/(1+m/|V|))`: spike entropy at a one-hot and at a uniform vector.
    pub fn spike_range(&self, vocab_size: usize) -> (f64, f64) {
        (1.0 / (1.0 + self.modulus), 1.0 / (1.0 + self.modulus / vocab_size as f64))
    }

    fn z_bound(&self, n: usize, s: f64) -> f64 {
        let g = self.gamma;
        g * (n as f64).sqrt() * (self.alpha * s - 1.0) / (g * (1.0 - g)).sqrt()
    }
}

/// `sum_k p_k / (1 + m p_k)`.
pub fn spike_entropy(p: &[f64], modulus: f64) -> f64 {
    p.iter().map(|&x| x / (1.0 + modulus * x)).sum()
}

/// Lower bound `gamma * alpha * S(p, m)` on the chance that a boosted step emits a green token.
pub fn green_prob_lower_bound(p: &[f64], gamma: f64, delta: f64) -> Result<f64> {
    let b = BoundParams::new(gamma, delta)?;
    Ok(gamma * b.alpha * spike_entropy(p, b.modulus))
}

/// Per-token spike entropies with a gating threshold on the same scale.
/// A token counts as gated when `S_t >= tau_spike`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub spikes: Vec<f64>,
    pub tau_spike: f64,
}

impl EntropyProfile {
    pub fn new(spikes: Vec<f64>, tau_spike: f64) -> Self {
        Self { spikes, tau_spike }
    }

    pub fn n(&self) -> usize {
        self.spikes.len()
    }

    pub fn n_high(&self) -> usize {
        self.spikes.iter().filter(|&&s| s >= self.tau_spike).count()
    }

    pub fn n_low(&self) -> usize {
        self.n() - self.n_high()
    }

    pub fn s_bar(&self) -> Option<f64> {
        (!self.spikes.is_empty()).then(|| self.spikes.iter().sum::<f64>() / self.n() as f64)
    }

    pub fn s_h_bar(&self) -> Option<f64> {
        let n_h = self.n_high();
        (n_h > 0).then(|| {
            self.spikes.iter().filter(|&&s| s >= self.tau_spike).sum::<f64>() / n_h as f64
        })
    }
}

/// Bound on the ungated z-score: `gamma sqrt(N) (alpha S_bar - 1) / sqrt(gamma (1 - gamma))`.
pub fn wllm_z_lower_bound(profile: &EntropyProfile, gamma: f64, delta: f64) -> Result<f64> {
    let b = BoundParams::new(gamma, delta)?;
    let s = profile.s_bar().ok_or_else(|| Error::UndefinedStatistic("empty profile".into()))?;
    Ok(b.z_bound(profile.n(), s))
}

/// The same bound restricted to gated tokens.
pub fn sweet_z_lower_bound(profile: &EntropyProfile, gamma: f64, delta: f64) -> Result<f64> {
    let b = BoundParams::new(gamma, delta)?;
    let s = profile
        .s_h_bar()
        .ok_or_else(|| Error::UndefinedStatistic("no token passes the spike-entropy gate".into()))?;
    Ok(b.z_bound(profile.n_high(), s))
}

/// `N_l / N <= 1 - ((alpha S_bar - 1) / (alpha S_h_bar - 1))^2`.
pub fn theorem1_assumption_holds(profile: &EntropyProfile, gamma: f64, delta: f64) -> Result<bool> {
    let b = BoundParams::new(gamma, delta)?;
    let s = profile.s_bar().ok_or_else(|| Error::UndefinedStatistic("empty profile".into()))?;
    let sh = profile
        .s_h_bar()
        .ok_or_else(|| Error::UndefinedStatistic("no token passes the spike-entropy gate".into()))?;
    let high = b.alpha * sh - 1.0;
    if high <= 0.0 {
        return Err(Error::Inapplicable(format!("alpha * S_h_bar = {} <= 1", b.alpha * sh)));
    }
    let ratio = (b.alpha * s - 1.0) / high;
    Ok(profile.n_low() as f64 / profile.n() as f64 <= 1.0 - ratio * ratio)
}

/// Monte-Carlo estimate of the green-emission probability for one step:
/// each draw picks a fresh partition, boosts it by `delta` and samples a
/// token. Returns the hit rate and its standard error.
pub fn empirical_green_probability(
    p: &[f64],
    green_count: usize,
    delta: f64,
    draws: usize,
    seed: u64,
) -> (f64, f64) {
    let v = p.len();
    let mut partitioner = Partitioner::new(v, green_count);
    let mut rng = CounterRng::new(seed);
    let boost = delta.exp();
    let mut hits = 0usize;
    for _ in 0..draws {
        let list = partitioner.green_list(rng.next_u64());
        let g: f64 = list.iter().map(|&i| p[i as usize]).sum();
        let pg = g * boost / (g * boost + 1.0 - g);
        hits += usize::from(rng.next_f64() < pg);
    }
    let rate = hits as f64 / draws as f64;
    (rate, (rate * (1.0 - rate) / draws as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssumptionStatus {
    Holds,
    Fails,
    Inapplicable,
}

/// Everything the bounds say about one sequence of next-token distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub bound: BoundParams,
    pub vocab_size: usize,
    pub tau_spike: f64,
    pub spike_range: (f64, f64),
    pub n: usize,
    pub n_low: usize,
    pub n_high: usize,
    pub s_bar: f64,
    pub s_h_bar: Option<f64>,
    pub wllm_z_bound: f64,
    pub sweet_z_bound: Option<f64>,
    pub assumption: AssumptionStatus,
    pub sweet_bound_at_least_wllm: Option<bool>,
    /// Mean green-probability bound over all steps.
    pub mean_green_prob_bound: f64,
}

/// Midpoint of the attainable spike-entropy range.
pub fn default_tau_spike(bound: &BoundParams, vocab_size: usize) -> f64 {
    let (lo, hi) = bound.spike_range(vocab_size);
    0.5 * (lo + hi)
}

pub fn theory_report(
    distributions: &[Vec<f64>],
    gamma: f64,
    delta: f64,
    tau_spike: Option<f64>,
) -> Result<TheoryReport> {
    let bound = BoundParams::new(gamma, delta)?;
    let vocab_size = distributions
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::data("no distributions to analyse"))?;
    let tau_spike = tau_spike.unwrap_or_else(|| default_tau_spike(&bound, vocab_size));
    let spikes: Vec<f64> = distributions.iter().map(|p| spike_entropy(p, bound.modulus)).collect();
    let mean_green_prob_bound =
        spikes.iter().map(|s| gamma * bound.alpha * s).sum::<f64>() / spikes.len() as f64;
    let profile = EntropyProfile::new(spikes, tau_spike);
    let wllm = wllm_z_lower_bound(&profile, gamma, delta)?;
    let sweet = sweet_z_lower_bound(&profile, gamma, delta).ok();
    let assumption = match theorem1_assumption_holds(&profile, gamma, delta) {
        Ok(true) => AssumptionStatus::Holds,
        Ok(false) => AssumptionStatus::Fails,
        Err(Error::Inapplicable(_) | Error::UndefinedStatistic(_)) => AssumptionStatus::Inapplicable,
        Err(e) => return Err(e),
    };
    Ok(TheoryReport {
        bound,
        vocab_size,
        tau_spike,
        spike_range: bound.spike_range(vocab_size),
        n: profile.n(),
        n_low: profile.n_low(),
        n_high: profile.n_high(),
        s_bar: profile.s_bar().unwrap_or(f64::NAN),
        s_h_bar: profile.s_h_bar(),
        wllm_z_bound: wllm,
        sweet_z_bound: sweet,
        assumption,
        sweet_bound_at_least_wllm: sweet.map(|s| s >= wllm),
        mean_green_prob_bound,
    })
}
