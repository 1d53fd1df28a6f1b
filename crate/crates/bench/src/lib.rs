//! Shared inputs for the benchmarks.

use sweetmark::eval::{generate_set, labelled, ScoredSample};
use sweetmark::testbed::NGramTestbed;
use sweetmark::{GenerationTrace, Result, SamplerConfig, WatermarkParams};

pub struct Fixture {
    pub testbed: NGramTestbed,
    pub params: WatermarkParams,
    pub traces: Vec<GenerationTrace>,
}

/// The n-gram testbed with a few watermarked 200-token generations.
pub fn fixture() -> Result<Fixture> {
    let testbed = NGramTestbed::new()?;
    let params = WatermarkParams::new(0.25, 2.0, Some(0.6), 0xB3AC4)?;
    let sampler = SamplerConfig { temperature: 1.0, ..SamplerConfig::default() };
    let traces = generate_set(&testbed.model, &testbed.prompts, Some(&params), &sampler, 8, 1)?;
    Ok(Fixture { testbed, params, traces })
}

/// `n` scores per class with overlapping deterministic spreads.
pub fn scores(n: usize) -> Vec<ScoredSample> {
    let spread = |i: usize, shift: f64| ((i * 7919) % n) as f64 / n as f64 * 4.0 + shift;
    let machine: Vec<f64> = (0..n).map(|i| spread(i, 1.0)).collect();
    let human: Vec<f64> = (0..n).map(|i| spread(i + 1, 0.0)).collect();
    labelled(&machine, &human)
}
