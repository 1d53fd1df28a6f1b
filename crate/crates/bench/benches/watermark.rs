use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sweetmark::eval::{auroc, tpr_at_fpr};
use sweetmark::partition::Partitioner;
use sweetmark::{detect, generate, SamplerConfig, TokenModel};
use sweetmark_bench::{fixture, scores};

fn partition(c: &mut Criterion) {
    let mut g = c.benchmark_group("green_list");
    for v in [336usize, 32_000] {
        let mut p = Partitioner::for_gamma(0.25, v).unwrap();
        let mut seed = 0u64;
        g.bench_with_input(BenchmarkId::from_parameter(v), &v, |b, _| {
            b.iter(|| {
                seed = seed.wrapping_add(1);
                black_box(p.green_list(seed).len())
            })
        });
    }
    g.finish();
}

fn model_and_detection(c: &mut Criterion) {
    let f = fixture().unwrap();
    let trace = &f.traces[0];
    let tokens = trace.tokens();
    let mut context = trace.prompt.clone();
    context.extend_from_slice(&tokens[..100]);

    c.bench_function("ngram_logits", |b| b.iter(|| f.testbed.model.logits(black_box(&context)).unwrap()));
    c.bench_function("detect_200", |b| {
        b.iter(|| detect(&f.testbed.model, &trace.prompt, black_box(&tokens), &f.params).unwrap().z)
    });
    let sampler = SamplerConfig { temperature: 1.0, max_tokens: 50, ..SamplerConfig::default() };
    c.bench_function("generate_50", |b| {
        b.iter(|| generate(&f.testbed.model, &f.testbed.prompts[0], &f.params, &sampler).unwrap().0.len())
    });
}

fn metrics(c: &mut Criterion) {
    let s = scores(1000);
    c.bench_function("auroc_2000", |b| b.iter(|| auroc(black_box(&s)).unwrap()));
    c.bench_function("tpr_at_fpr_2000", |b| b.iter(|| tpr_at_fpr(black_box(&s), 0.01).unwrap()));
}

criterion_group!(benches, partition, model_and_detection, metrics);
criterion_main!(benches);
