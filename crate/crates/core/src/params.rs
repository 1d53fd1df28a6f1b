use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Green-list ratio, logit boost, optional entropy gate and the secret key.
///
/// `tau == None` is the ungated scheme: every step is watermarked and scored.
/// With `Some(tau)` only steps whose entropy is strictly above `tau` are.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkParams {
    pub gamma: f64,
    pub delta: f64,
    pub tau: Option<f64>,
    pub key: u64,
    pub z_threshold: f64,
    /// Temperature of the softmax used only to compute the gating entropy.
    pub entropy_temperature: f64,
}

impl Default for WatermarkParams {
    fn default() -> Self {
        Self {
            gamma: 0.25,
            delta: 3.0,
            tau: Some(0.6),
            key: 0,
            z_threshold: 4.0,
            entropy_temperature: 1.0,
        }
    }
}

impl WatermarkParams {
    pub fn new(gamma: f64, delta: f64, tau: Option<f64>, key: u64) -> Result<Self> {
        let p = Self { gamma, delta, tau, key, ..Self::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_tau(mut self, tau: Option<f64>) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_key(mut self, key: u64) -> Self {
        self.key = key;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::config(format!("gamma must lie in (0,1), got {}", self.gamma)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::config(format!("delta must be finite and >= 0, got {}", self.delta)));
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::config(format!("tau must be finite and >= 0, got {t}")));
            }
        }
        if !(self.entropy_temperature > 0.0 && self.entropy_temperature.is_finite()) {
            return Err(Error::config("entropy temperature must be positive"));
        }
        if !self.z_threshold.is_finite() {
            return Err(Error::config("z threshold must be finite"));
        }
        Ok(())
    }

    /// Size of the green list for a vocabulary of `vocab_size` tokens: `floor(gamma * |V|)`,
    /// which must leave both lists non-empty.
    pub fn green_count(&self, vocab_size: usize) -> Result<usize> {
        green_count(self.gamma, vocab_size)
    }

    /// Realised green fraction `floor(gamma * |V|) / |V|`; the null green rate.
    pub fn effective_gamma(&self, vocab_size: usize) -> Result<f64> {
        Ok(self.green_count(vocab_size)? as f64 / vocab_size as f64)
    }

    /// Validates the parameters against a vocabulary size.
    pub fn bind(&self, vocab_size: usize) -> Result<()> {
        self.validate()?;
        self.green_count(vocab_size).map(|_| ())
    }

    /// Whether a step with entropy `h` carries (and is scored for) the watermark.
    #[inline]
    pub fn is_gated(&self, h: f64) -> bool {
        match self.tau {
            None => true,
            Some(t) => h > t,
        }
    }

    pub fn key_fingerprint(&self) -> String {
        key_fingerprint(self.key)
    }

    /// Public description of the parameters; the key appears only as its fingerprint.
    pub fn summary(&self) -> ParamsSummary {
        let mut s = ParamsSummary {
            gamma: self.gamma,
            delta: self.delta,
            tau: self.tau,
            z_threshold: self.z_threshold,
            entropy_temperature: self.entropy_temperature,
            boost_order: BOOST_ORDER.to_string(),
            key_fingerprint: self.key_fingerprint(),
            fingerprint: String::new(),
        };
        s.fingerprint = s.compute_fingerprint();
        s
    }
}

/// The boost is added to raw logits, before sampling temperature and nucleus truncation.
pub const BOOST_ORDER: &str = "pre-temperature";

pub fn green_count(gamma: f64, vocab_size: usize) -> Result<usize> {
    if vocab_size < 2 {
        return Err(Error::config("vocabulary must hold at least two tokens"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::config(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let k = (gamma * vocab_size as f64).floor() as usize;
    if k < 1 || k > vocab_size - 1 {
        return Err(Error::config(format!(
            "green list size floor({gamma} * {vocab_size}) = {k} leaves an empty list"
        )));
    }
    Ok(k)
}

pub fn key_fingerprint(key: u64) -> String {
    let digest = Sha256::digest([b"sweetmark-key:".as_slice(), &key.to_le_bytes()].concat());
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsSummary {
    pub gamma: f64,
    pub delta: f64,
    pub tau: Option<f64>,
    pub z_threshold: f64,
    pub entropy_temperature: f64,
    pub boost_order: String,
    pub key_fingerprint: String,
    /// Hash over every field above.
    pub fingerprint: String,
}

impl ParamsSummary {
    fn compute_fingerprint(&self) -> String {
        let canon = format!(
            "gamma={};delta={};tau={:?};z={};entropy_t={};order={};key={}",
            self.gamma,
            self.delta,
            self.tau,
            self.z_threshold,
            self.entropy_temperature,
            self.boost_order,
            self.key_fingerprint
        );
        let digest = Sha256::digest(canon.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
