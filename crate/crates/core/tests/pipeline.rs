use sweetmark::eval::{generate_set, pairs_of, sample_seed, score_pairs};
use sweetmark::generator::{generate_with, GenerateOptions};
use sweetmark::lm::{BimodalConfig, NGramModel, ReplayModel, UniformModel};
use sweetmark::partition::Partitioner;
use sweetmark::testbed::{bimodal, NGramTestbed};
use sweetmark::{
    detect, detect_with_general_prompts, detect_with_surrogate, generate, generate_unwatermarked,
    GenerationTrace, SamplerConfig, TokenModel, Vocabulary, WatermarkParams,
};

fn sampler(temperature: f64, top_p: f64, max_tokens: usize, rng_seed: u64) -> SamplerConfig {
    SamplerConfig { temperature, top_p, max_tokens, rng_seed }
}

#[test]
fn huge_delta_makes_every_ngram_token_green() {
    let tb = NGramTestbed::new().unwrap();
    let params = WatermarkParams::new(0.25, 100.0, None, 9).unwrap();
    let mut partitioner = Partitioner::for_gamma(0.25, tb.vocab.len()).unwrap();
    let mut steps = 0;
    for (i, prompt) in tb.prompts.iter().take(5).enumerate() {
        let (ids, trace) = generate(&tb.model, prompt, &params, &sampler(1.0, 1.0, 200, i as u64)).unwrap();
        let mut prev = *prompt.last().unwrap();
        for &t in &ids {
            assert!(partitioner.is_green_after(9, prev, t));
            prev = t;
        }
        assert!(trace.steps.iter().all(|s| s.green == Some(true)));
        steps += ids.len();
    }
    assert_eq!(steps, 1000);
}

#[test]
fn uniform_model_green_rate_matches_closed_form() {
    let model = UniformModel::new(Vocabulary::synthetic(50).unwrap());
    let params = WatermarkParams::new(0.25, 3.0, None, 1234).unwrap();
    let (mut green, mut total) = (0usize, 0usize);
    for i in 0..50 {
        // Nearby raw seeds share draws, so spread them out.
        let (_, trace) = generate(&model, &[], &params, &sampler(1.0, 1.0, 200, sample_seed(40, i))).unwrap();
        green += trace.steps.iter().filter(|s| s.green == Some(true)).count();
        total += trace.steps.len();
    }
    // 12 of 50 tokens are green.
    let g = 12.0 / 50.0;
    let e = 3f64.exp();
    let want = g * e / (g * e + 1.0 - g);
    let rate = green as f64 / total as f64;
    assert_eq!(total, 10_000);
    assert!((rate - want).abs() < 0.02, "rate {rate}, want {want}");
    assert!((rate - 0.870).abs() < 0.02, "rate {rate}");
}

#[test]
fn distinct_seeds_give_distinct_text() {
    let tb = NGramTestbed::new().unwrap();
    let a = generate_unwatermarked(&tb.model, &tb.prompts[0], &sampler(1.0, 0.95, 100, 1)).unwrap();
    let b = generate_unwatermarked(&tb.model, &tb.prompts[0], &sampler(1.0, 0.95, 100, 2)).unwrap();
    assert_ne!(a, b);
    let c = generate_unwatermarked(&tb.model, &[], &sampler(0.2, 0.95, 50, 3)).unwrap();
    assert_eq!(c.len(), 50);
}

#[test]
fn zero_delta_matches_plain_sampling_on_every_testbed() {
    let tb = NGramTestbed::new().unwrap();
    let (bm, bp) = bimodal(BimodalConfig::default(), 4).unwrap();
    let models: [(&dyn TokenModel, &Vec<u32>); 2] = [(&tb.model, &tb.prompts[3]), (&bm, &bp[1])];
    for (model, prompt) in models {
        for tau in [None, Some(0.6)] {
            let params = WatermarkParams::new(0.5, 0.0, tau, 77).unwrap();
            let s = sampler(0.7, 0.9, 120, 5);
            let (ids, _) = generate(model, prompt, &params, &s).unwrap();
            assert_eq!(ids, generate_unwatermarked(model, prompt, &s).unwrap());
        }
    }
}

#[test]
fn gated_set_is_a_subset_of_the_ungated_one() {
    let cfg = BimodalConfig { keyed_on_prev: false, ..BimodalConfig::default() };
    let (model, prompts) = bimodal(cfg, 4).unwrap();
    let wllm = WatermarkParams::new(0.25, 2.0, None, 5).unwrap();
    let sweet = wllm.clone().with_tau(Some(0.6));
    let (_, trace) = generate(&model, &prompts[0], &sweet, &sampler(1.0, 0.95, 200, 8)).unwrap();
    let text = trace.tokens();
    let a = detect(&model, &prompts[0], &text, &wllm).unwrap();
    let b = detect(&model, &prompts[0], &text, &sweet).unwrap();
    assert_eq!(a.n_gated, text.len());
    assert!(b.n_gated < a.n_gated && b.n_gated > 0);
    for (x, y) in a.annotations.iter().zip(&b.annotations) {
        if y.gated {
            assert!(x.gated);
            assert_eq!(x.green, y.green);
        }
    }
}

#[test]
fn replayed_logits_reproduce_detection() {
    let tb = NGramTestbed::new().unwrap();
    let params = WatermarkParams::new(0.25, 3.0, Some(0.6), 31).unwrap();
    let prompt = &tb.prompts[7];
    let trace = generate_with(
        &tb.model,
        prompt,
        Some(&params),
        &sampler(1.0, 0.95, 80, 2),
        GenerateOptions { record_logits: true },
    )
    .unwrap();
    let replay = ReplayModel::from_trace(&trace, tb.vocab.clone()).unwrap();
    let text = trace.tokens();
    let live = detect(&tb.model, prompt, &text, &params).unwrap();
    let replayed = detect(&replay, prompt, &text, &params).unwrap();
    assert_eq!(live, replayed);
    assert!(live.verdict);

    let bare = generate_with(&tb.model, prompt, Some(&params), &sampler(1.0, 0.95, 5, 2), GenerateOptions::default())
        .unwrap();
    assert!(ReplayModel::from_trace(&bare, tb.vocab.clone()).is_err());
}

#[test]
fn general_prompts_track_gold_prompt_scores() {
    let tb = NGramTestbed::new().unwrap();
    let params = WatermarkParams::new(0.25, 3.0, Some(0.6), 0x5EC2E7).unwrap();
    let traces = generate_set(&tb.model, &tb.prompts, Some(&params), &sampler(1.0, 0.95, 200, 0), 40, 21).unwrap();
    let general = tb.general_prompts();
    let mut ratios: Vec<f64> = traces
        .iter()
        .map(|t| {
            let text = t.tokens();
            let gold = detect(&tb.model, &t.prompt, &text, &params).unwrap().z;
            let avg = detect_with_general_prompts(&tb.model, &general, &text, &params).unwrap().z;
            avg / gold
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2];
    assert!((median - 1.0).abs() <= 0.25, "median ratio {median}");
}

#[test]
fn surrogate_detection_stays_close_to_self_detection() {
    let tb = NGramTestbed::new().unwrap();
    let surrogate = tb.retrain(2).unwrap();
    let params = WatermarkParams::new(0.25, 3.0, Some(0.6), 0x5EC2E7).unwrap();
    let s = sampler(1.0, 0.95, 30, 0);
    let machine = pairs_of(&generate_set(&tb.model, &tb.prompts, Some(&params), &s, 150, 31).unwrap());
    let human = pairs_of(&generate_set(&tb.model, &tb.prompts, None, &s, 150, 32).unwrap());
    let own = |pairs: &[(Vec<u32>, Vec<u32>)]| -> Vec<f64> {
        score_pairs(&tb.model, pairs, &params).unwrap().into_iter().flatten().collect()
    };
    let other = |pairs: &[(Vec<u32>, Vec<u32>)]| -> Vec<f64> {
        pairs
            .iter()
            .filter_map(|(p, t)| detect_with_surrogate(&tb.model, &surrogate, p, t, &params).ok().map(|r| r.z))
            .collect()
    };
    use sweetmark::eval::{auroc, labelled};
    let base = auroc(&labelled(&own(&machine), &own(&human))).unwrap();
    let sur = auroc(&labelled(&other(&machine), &other(&human))).unwrap();
    assert!(base - sur < 0.15, "self {base}, surrogate {sur}");

    let foreign = UniformModel::new(Vocabulary::synthetic(tb.vocab.len()).unwrap());
    assert!(detect_with_surrogate(&tb.model, &foreign, &machine[0].0, &machine[0].1, &params).is_err());
}

#[test]
fn saved_artifacts_reload_to_identical_detection() {
    let dir = tempfile::tempdir().unwrap();
    let tb = NGramTestbed::new().unwrap();
    let params = WatermarkParams::new(0.5, 2.0, Some(0.9), 4).unwrap();
    let prompt = &tb.prompts[2];
    let (_, trace) = generate(&tb.model, prompt, &params, &sampler(1.0, 0.95, 60, 6)).unwrap();

    let vocab_path = dir.path().join("vocab.txt");
    let model_path = dir.path().join("model.ngram");
    let trace_path = dir.path().join("trace.jsonl");
    tb.vocab.save(&vocab_path).unwrap();
    tb.model.save(&model_path).unwrap();
    trace.save(&trace_path).unwrap();

    let vocab = Vocabulary::load(&vocab_path).unwrap();
    assert_eq!(vocab, tb.vocab);
    let model = NGramModel::load(&model_path, vocab).unwrap();
    let reloaded = GenerationTrace::load(&trace_path).unwrap();
    assert_eq!(reloaded, trace);
    let a = detect(&tb.model, prompt, &trace.tokens(), &params).unwrap();
    let b = detect(&model, &reloaded.prompt, &reloaded.tokens(), &params).unwrap();
    assert_eq!(a, b);
}
