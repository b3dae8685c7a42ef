use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use prodqa_core::corpus::{build_vocabulary, Vocabulary, BOS, EOS};
use prodqa_core::metrics::{bleu1, rouge_l, rouge_n};
use prodqa_core::minigen::{generate, DecodeConfig, GeneratorConfig, GeneratorParams, Seq2SeqExample};
use prodqa_core::relevancy::{rank_candidates, RelevancyConfig, RelevancyModel};
use prodqa_core::synth;

fn words(n: usize, offset: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{}", (i * 7 + offset) % 40)).collect()
}

fn metrics(c: &mut Criterion) {
    let hyp = words(60, 0);
    let reference = words(60, 3);
    c.bench_function("rouge_n/60", |b| {
        b.iter(|| rouge_n(black_box(&hyp), black_box(&reference), 2))
    });
    c.bench_function("rouge_l/60", |b| {
        b.iter(|| rouge_l(black_box(&hyp), black_box(&reference)))
    });
    let hyps: Vec<_> = (0..200).map(|i| words(20, i)).collect();
    let refs: Vec<_> = (0..200).map(|i| words(20, i + 1)).collect();
    c.bench_function("bleu1/200", |b| {
        b.iter(|| bleu1(black_box(&hyps), black_box(&refs)).unwrap())
    });
}

fn small_generator(vocab: &Vocabulary) -> GeneratorParams {
    let cfg = GeneratorConfig {
        d_model: 32,
        n_heads: 2,
        n_encoder_layers: 2,
        n_decoder_layers: 2,
        ffn_dim: 64,
        max_src_len: 64,
        max_tgt_len: 16,
        dropout: 0.0,
        seed: 1,
    };
    GeneratorParams::new(cfg, vocab.len()).unwrap()
}

fn generator(c: &mut Criterion) {
    let recs = synth::generation_world(50, 2).records;
    let vocab = build_vocabulary(&recs, 2000).unwrap();
    let params = small_generator(&vocab);
    let src: Vec<u32> = (0..64).map(|i| 6 + (i % (vocab.len() as u32 - 6))).collect();
    let ex = Seq2SeqExample {
        src: src.clone(),
        tgt: [&[BOS][..], &src[..14], &[EOS][..]].concat(),
    };
    c.bench_function("generator/loss_and_grad", |b| {
        b.iter(|| params.loss_and_grad(black_box(&ex), &mut None).unwrap())
    });
    c.bench_function("generator/greedy16", |b| {
        b.iter(|| generate(&params, black_box(&src), &DecodeConfig::greedy(16)).unwrap())
    });
    c.bench_function("generator/beam4x16", |b| {
        b.iter(|| generate(&params, black_box(&src), &DecodeConfig::beam(4, 16)).unwrap())
    });
}

fn relevancy(c: &mut Criterion) {
    let recs = synth::relevancy_world(20, 3);
    let vocab = build_vocabulary(&recs, 1000).unwrap();
    let cfg = RelevancyConfig {
        d_model: 32,
        ..RelevancyConfig::default()
    };
    let model = RelevancyModel::new(cfg, vocab).unwrap();
    let q = &recs[0];
    c.bench_function("relevancy/rank_question", |b| {
        b.iter(|| rank_candidates(black_box(q), &model, 5).unwrap())
    });
}

criterion_group!(benches, metrics, generator, relevancy);
criterion_main!(benches);
