mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::toks;
use prodqa_core::ambiguity::QuestionType;
use prodqa_core::metrics::*;

fn random_tokens(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| ["a", "b", "c", "d", "e"][rng.random_range(0..5)].to_string())
        .collect()
}

#[test]
fn rouge_matches_oracle_on_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let c = random_tokens(&mut rng, 9);
        let r = random_tokens(&mut rng, 9);
        for n in 1..=3 {
            let got = rouge_n(&c, &r, n);
            let (p, rec, f) = common::rouge_n(&c, &r, n);
            assert!((got.precision - p).abs() < 1e-9 && (got.recall - rec).abs() < 1e-9 && (got.f1 - f).abs() < 1e-9);
        }
        let got = rouge_l(&c, &r);
        let (p, rec, f) = common::rouge_l(&c, &r);
        assert!((got.precision - p).abs() < 1e-9 && (got.recall - rec).abs() < 1e-9 && (got.f1 - f).abs() < 1e-9);
        assert_eq!(lcs_len(&c, &r), common::lcs(&c, &r));
    }
}

#[test]
fn bleu_matches_oracle_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let n = rng.random_range(1..5);
        let cands: Vec<_> = (0..n).map(|_| random_tokens(&mut rng, 7)).collect();
        let refs: Vec<_> = (0..n).map(|_| random_tokens(&mut rng, 7)).collect();
        let got = bleu1(&cands, &refs).unwrap();
        assert!((got - common::bleu1(&cands, &refs)).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&got));
    }
}

#[test]
fn worked_examples() {
    let r = rouge_n(&toks("sound quality is good"), &toks("the sound is good"), 1);
    assert!((r.precision - 0.75).abs() < 1e-12 && (r.recall - 0.75).abs() < 1e-12 && (r.f1 - 0.75).abs() < 1e-12);
    let r = rouge_n(&toks("a b c"), &toks("a b d"), 2);
    assert!((r.f1 - 0.5).abs() < 1e-12);
    let x = toks("a b c d");
    for n in 1..=4 {
        assert_eq!(rouge_n(&x, &x, n).f1, 1.0);
    }
    let r = rouge_l(&toks("a b c d"), &toks("a c b d"));
    assert!((r.f1 - 0.75).abs() < 1e-12);
    assert_eq!(rouge_l(&x, &[]).f1, 0.0);
    assert_eq!(rouge_l(&x, &x).f1, 1.0);

    let b = bleu1(&[toks("good phone")], &[toks("good phone yes")]).unwrap();
    assert!((b - (1.0f64 - 1.5).exp()).abs() < 1e-12);
    assert!((b - 0.6065).abs() < 1e-4);
    assert_eq!(bleu1(std::slice::from_ref(&x), std::slice::from_ref(&x)).unwrap(), 1.0);
    let b = bleu1(&[toks("good good good")], &[toks("good phone")]).unwrap();
    assert!((b - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(bleu1(&[vec![]], &[toks("a")]).unwrap(), 0.0);
    assert!(bleu1(std::slice::from_ref(&x), &[]).is_err());
    assert!((brevity_penalty(2, 3) - (1.0f64 - 1.5).exp()).abs() < 1e-12);
    assert_eq!(brevity_penalty(4, 3), 1.0);
}

#[test]
fn classification_examples() {
    assert!((f1_score(0.873, 0.872) - 0.8725).abs() < 5e-4);
    let m = classification_metrics(&[true, false, true], &[true, false, true]).unwrap();
    assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
    let preds = [true, true, true, false, false, false, false, false, false, false];
    let labels = [true, true, false, true, false, false, false, false, false, false];
    let m = classification_metrics(&preds, &labels).unwrap();
    assert_eq!(
        m.counts,
        ConfusionCounts {
            tp: 2,
            fp: 1,
            fn_: 1,
            tn: 6
        }
    );
    assert!((m.accuracy - 0.8).abs() < 1e-12);
    assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    assert!(classification_metrics(&[true], &[true, false]).is_err());
    let m = classification_metrics(&[false, false], &[false, false]).unwrap();
    assert_eq!((m.precision, m.recall), (0.0, 0.0));
    assert!(!m.warnings.is_empty());
}

#[test]
fn report_matches_naive_recomputation() {
    let items = [
        ("is it good", "yes it is good", "yes good"),
        ("is it bad", "no", "no it is bad"),
        ("how is it", "it is fine", "fine"),
        ("what color", "black", "it is black"),
        ("does it work", "yes", "yes"),
        ("is battery ok", "battery is ok", "yes battery is ok"),
        ("why slow", "processor", "slow processor"),
        ("is it heavy", "no , light", "no it is light"),
        ("where made", "india", "made in india"),
        ("can it charge fast", "yes fast", "yes it charges fast"),
    ];
    let scores: Vec<QuestionScore> = items
        .iter()
        .enumerate()
        .map(|(i, (q, h, r))| {
            let qtype = prodqa_core::ambiguity::classify_question(q).unwrap();
            QuestionScore::compute(&i.to_string(), qtype, h, r)
        })
        .collect();
    let report = aggregate_report("full", scores);
    for qtype in [QuestionType::Dichotomous, QuestionType::WH] {
        let rows: Vec<_> = items
            .iter()
            .filter(|(q, _, _)| prodqa_core::ambiguity::classify_question(q).unwrap() == qtype)
            .collect();
        let mut r1 = 0.0;
        let mut rl = 0.0;
        let mut hyps = Vec::new();
        let mut refs = Vec::new();
        for (_, h, r) in &rows {
            r1 += common::rouge_n(&toks(h), &toks(r), 1).2;
            rl += common::rouge_l(&toks(h), &toks(r)).2;
            hyps.push(toks(h));
            refs.push(toks(r));
        }
        let b = report.bucket(qtype).unwrap();
        assert_eq!(b.count, rows.len());
        assert!((b.rouge1 - 100.0 * r1 / rows.len() as f64).abs() < 1e-9);
        assert!((b.rouge_l - 100.0 * rl / rows.len() as f64).abs() < 1e-9);
        assert!((b.bleu1 - 100.0 * common::bleu1(&hyps, &refs)).abs() < 1e-9);
    }
    let table = render_table(std::slice::from_ref(&report));
    assert!(table.contains("full"));
    let json: EvalReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json, report);
}

fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..10)
        .prop_map(|v| v.into_iter().map(str::to_string).collect())
}

proptest! {
    #[test]
    fn self_similarity(x in tokens()) {
        for n in 1..=x.len().min(4) {
            prop_assert_eq!(rouge_n(&x, &x, n).f1, 1.0);
        }
        if !x.is_empty() {
            prop_assert_eq!(rouge_l(&x, &x).f1, 1.0);
        }
    }

    #[test]
    fn appending_a_reference_token_keeps_recall(c in tokens(), r in prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 1..8), pick in 0usize..8) {
        let r: Vec<String> = r.into_iter().map(str::to_string).collect();
        let before = rouge_n(&c, &r, 1).recall;
        let mut c2 = c.clone();
        c2.push(r[pick % r.len()].clone());
        prop_assert!(rouge_n(&c2, &r, 1).recall >= before);
    }

    #[test]
    fn bleu_bounds(c in tokens(), r in tokens()) {
        let b = bleu1(std::slice::from_ref(&c), std::slice::from_ref(&r)).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
        if !c.is_empty() && c.len() >= r.len() {
            prop_assert_eq!(brevity_penalty(c.len(), r.len()), 1.0);
        }
    }

    #[test]
    fn swapping_predictions_and_labels(p in prop::collection::vec(any::<bool>(), 1..30), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l: Vec<bool> = p.iter().map(|_| rng.random_bool(0.5)).collect();
        let a = classification_metrics(&p, &l).unwrap();
        let b = classification_metrics(&l, &p).unwrap();
        prop_assert!((a.precision - b.recall).abs() < 1e-12);
        prop_assert!((a.recall - b.precision).abs() < 1e-12);
    }
}
