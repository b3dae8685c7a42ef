//! Seeded synthetic product corpora.
//!
//! Every question asks about one aspect of a phone. A candidate is relevant
//! exactly when it mentions that aspect. Distractors mention another aspect
//! and reuse the question's filler words, so plain word overlap is a weak
//! signal. Duplicate Q&A answers are generic, so only the duplicate question
//! tells relevant and irrelevant pairs apart.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambiguity::{Polarity, QuestionType};
use crate::corpus::{Candidate, QuestionRecord, Source};

pub const ASPECTS: &[&str] = &[
    "battery",
    "camera",
    "display",
    "sound",
    "charging",
    "processor",
    "storage",
    "speaker",
    "fingerprint",
    "network",
    "gaming",
    "weight",
    "glass",
    "heating",
    "wifi",
    "bluetooth",
];

pub const POSITIVE: &[&str] = &["great", "excellent", "good"];
pub const NEGATIVE: &[&str] = &["poor", "bad", "terrible"];

const DICHOTOMOUS_Q: &[&str] = &[
    "is the {a} good on this phone ?",
    "does this phone have a good {a} ?",
    "is {a} of this phone ok ?",
    "can i trust the {a} of this phone ?",
];
const WH_Q: &[&str] = &[
    "how is the {a} of this phone ?",
    "what about the {a} ?",
    "how good is the {a} on this phone ?",
];

const OPINION_REVIEW: &[&str] = &["the {a} is {op} .", "{op} {a} for the price", "i found the {a} {op}"];
const NEUTRAL_REVIEW: &[&str] = &["i use the {a} daily", "the {a} came as described"];
const DISTRACTOR_REVIEW: &[&str] = &["good phone but the {a} is {op}", "this phone is good , {a} is {op}"];
const DUP_QUESTION: &[&str] = &[
    "is the {a} {op} ?",
    "how is the {a} ?",
    "is the {a} good on this phone ?",
];
const GENERIC_ANSWER: &[&str] = &["yes", "no", "yes it is", "not really", "i think so", "depends on usage"];
const SPEC_KEY: &[&str] = &["{a} type", "{a} details"];
const SPEC_VALUE: &[&str] = &["standard", "version 2", "4 units", "included"];

fn fill(template: &str, aspect: &str, op: &str) -> String {
    template.replace("{a}", aspect).replace("{op}", op)
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty template list")
}

fn opinion(rng: &mut ChaCha8Rng, polarity: Polarity) -> &'static str {
    match polarity {
        Polarity::Negative => pick(rng, NEGATIVE),
        _ => pick(rng, POSITIVE),
    }
}

fn random_polarity(rng: &mut ChaCha8Rng) -> Polarity {
    if rng.random_bool(0.5) {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

fn other_aspect(rng: &mut ChaCha8Rng, aspect: &str) -> &'static str {
    loop {
        let b = pick(rng, ASPECTS);
        if b != aspect {
            return b;
        }
    }
}

fn question_text(rng: &mut ChaCha8Rng, aspect: &str, qtype: QuestionType) -> String {
    let t = match qtype {
        QuestionType::Dichotomous => pick(rng, DICHOTOMOUS_Q),
        QuestionType::WH => pick(rng, WH_Q),
    };
    fill(t, aspect, "")
}

/// One candidate about `aspect`, of the given source.
fn candidate_about(rng: &mut ChaCha8Rng, id: String, source: Source, aspect: &str, distractor: bool) -> Candidate {
    match source {
        Source::Review => {
            let p = random_polarity(rng);
            let op = opinion(rng, p);
            let t = if rng.random_bool(0.25) {
                pick(rng, NEUTRAL_REVIEW)
            } else if distractor {
                pick(rng, DISTRACTOR_REVIEW)
            } else {
                pick(rng, OPINION_REVIEW)
            };
            Candidate::review(id, fill(t, aspect, op))
        }
        Source::DuplicateQA => {
            let p = random_polarity(rng);
            let op = opinion(rng, p);
            let q = fill(pick(rng, DUP_QUESTION), aspect, op);
            Candidate::duplicate_qa(id, q, pick(rng, GENERIC_ANSWER))
        }
        Source::Spec => Candidate::spec(id, fill(pick(rng, SPEC_KEY), aspect, ""), pick(rng, SPEC_VALUE)),
    }
}

fn random_source(rng: &mut ChaCha8Rng) -> Source {
    match rng.random_range(0..10) {
        0..=5 => Source::Review,
        6..=7 => Source::DuplicateQA,
        _ => Source::Spec,
    }
}

/// Labeled corpus for relevance training. Each question has 8 to 11
/// candidates, 2 to 4 of them relevant; WH questions make up about 40%.
pub fn relevancy_world(questions: usize, seed: u64) -> Vec<QuestionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..questions)
        .map(|i| {
            let aspect = pick(&mut rng, ASPECTS);
            let qtype = if rng.random_bool(0.4) {
                QuestionType::WH
            } else {
                QuestionType::Dichotomous
            };
            let question = question_text(&mut rng, aspect, qtype);
            let relevant = rng.random_range(2..=4);
            let total = rng.random_range(8..=11);
            let mut cands: Vec<Candidate> = (0..total)
                .map(|j| {
                    let source = random_source(&mut rng);
                    let rel = j < relevant;
                    let about = if rel { aspect } else { other_aspect(&mut rng, aspect) };
                    candidate_about(&mut rng, String::new(), source, about, !rel).with_label(rel)
                })
                .collect();
            cands.shuffle(&mut rng);
            for (j, c) in cands.iter_mut().enumerate() {
                c.id = format!("c{j}");
            }
            QuestionRecord::new(format!("r{i}"), question, cands).expect("synthetic question has words")
        })
        .collect()
}

/// Answered corpus plus the ids of questions with planted conflicting
/// opinions.
#[derive(Debug, Clone)]
pub struct GenerationWorld {
    pub records: Vec<QuestionRecord>,
    pub conflicted: BTreeSet<String>,
    /// Per record, the ids of the relevant reviews that agree with the
    /// reference.
    pub evidence: Vec<Vec<String>>,
}

/// Answered corpus. The reference restates the opinion of the relevant
/// review(s). Half of the dichotomous questions carry a planted conflict:
/// two reviews share the majority opinion and one review states the
/// opposite. Distractors mention other aspects without opinion words.
pub fn generation_world(questions: usize, seed: u64) -> GenerationWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut conflicted = BTreeSet::new();
    let mut records = Vec::with_capacity(questions);
    let mut evidence = Vec::with_capacity(questions);
    for i in 0..questions {
        let id = format!("g{i}");
        let aspect = pick(&mut rng, ASPECTS);
        let qtype = if rng.random_bool(0.4) {
            QuestionType::WH
        } else {
            QuestionType::Dichotomous
        };
        let question = question_text(&mut rng, aspect, qtype);
        let polarity = random_polarity(&mut rng);
        let op = opinion(&mut rng, polarity);
        let conflict = qtype == QuestionType::Dichotomous && rng.random_bool(0.5);

        let mut cands = vec![Candidate::review("e", fill("the {a} is {op} .", aspect, op))];
        if conflict {
            cands.push(Candidate::review("e", fill("i found the {a} {op}", aspect, op)));
            let minority = opinion(&mut rng, polarity.opposite());
            cands.push(Candidate::review("", fill("the {a} is {op} .", aspect, minority)));
            conflicted.insert(id.clone());
        }
        let distractors = rng.random_range(5..=7);
        for _ in 0..distractors {
            let b = other_aspect(&mut rng, aspect);
            let c = match random_source(&mut rng) {
                Source::Review => Candidate::review("", fill(pick(&mut rng, NEUTRAL_REVIEW), b, "")),
                Source::DuplicateQA => Candidate::duplicate_qa(
                    "",
                    fill("is the {a} good on this phone ?", b, ""),
                    pick(&mut rng, GENERIC_ANSWER),
                ),
                Source::Spec => candidate_about(&mut rng, String::new(), Source::Spec, b, true),
            };
            cands.push(c);
        }
        cands.shuffle(&mut rng);
        let mut support = Vec::new();
        for (j, c) in cands.iter_mut().enumerate() {
            if c.id == "e" {
                support.push(format!("c{j}"));
            }
            c.id = format!("c{j}");
        }
        evidence.push(support);
        let body = fill("the {a} is {op}", aspect, op);
        let answer = match (qtype, polarity) {
            (QuestionType::WH, _) => body,
            (_, Polarity::Negative) => format!("no , {body}"),
            _ => format!("yes , {body}"),
        };
        records.push(
            QuestionRecord::new(id, question, cands)
                .expect("synthetic question has words")
                .with_answer(answer),
        );
    }
    GenerationWorld {
        records,
        conflicted,
        evidence,
    }
}

/// `n` (source, target) pairs: the question with its supporting reviews
/// as context, and the reference answer.
pub fn copy_pairs(n: usize, seed: u64) -> Vec<(String, String)> {
    let world = generation_world(n, seed);
    world
        .records
        .iter()
        .zip(&world.evidence)
        .map(|(r, ids)| {
            let support: Vec<Candidate> = r.candidates.iter().filter(|c| ids.contains(&c.id)).cloned().collect();
            let ctx = crate::harness::render_context(r, &support, usize::MAX);
            (ctx.text, r.reference_answer.clone().unwrap_or_default())
        })
        .collect()
}

pub const D1_QUESTIONS: usize = 1638;
pub const D1_CANDIDATES: usize = 15122;
pub const D1_RELEVANT: usize = 8670;

/// A labeled corpus with the question, candidate and relevant totals of
/// the reference relevancy training set. Per-source relevant counts are
/// 5397 of 8622 reviews, 2338 of 3500 duplicate pairs and 935 of 3000 specs.
pub fn d1_scale_fixture(seed: u64) -> Vec<QuestionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots: Vec<(Source, bool)> = Vec::with_capacity(D1_CANDIDATES);
    for (source, total, rel) in [
        (Source::Review, 8622, 5397),
        (Source::DuplicateQA, 3500, 2338),
        (Source::Spec, 3000, 935),
    ] {
        slots.extend((0..total).map(|i| (source, i < rel)));
    }
    slots.shuffle(&mut rng);
    let base = D1_CANDIDATES / D1_QUESTIONS;
    let extra = D1_CANDIDATES % D1_QUESTIONS;
    let mut sizes: Vec<usize> = (0..D1_QUESTIONS).map(|i| base + (i < extra) as usize).collect();
    sizes.shuffle(&mut rng);

    let mut next = slots.into_iter();
    sizes
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let aspect = pick(&mut rng, ASPECTS);
            let qtype = if rng.random_bool(0.4) {
                QuestionType::WH
            } else {
                QuestionType::Dichotomous
            };
            let question = question_text(&mut rng, aspect, qtype);
            let cands = (0..n)
                .map(|j| {
                    let (source, rel) = next.next().expect("slot count matches sizes");
                    let about = if rel { aspect } else { other_aspect(&mut rng, aspect) };
                    candidate_about(&mut rng, format!("c{j}"), source, about, !rel).with_label(rel)
                })
                .collect();
            QuestionRecord::new(format!("d{i}"), question, cands).expect("synthetic question has words")
        })
        .collect()
}
