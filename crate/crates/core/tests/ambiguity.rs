use proptest::prelude::*;

use prodqa_core::ambiguity::{
    classify_question, filter_by_majority, filter_for_training, Polarity, PolarityClassifier, QuestionType,
    SentimentClassifier, WH_WORDS,
};
use prodqa_core::corpus::Candidate;

const PHRASES: &[&str] = &[
    "battery is good",
    "battery is not good",
    "camera is terrible",
    "display size 15.8 cm",
    "never had a bad day with it",
    "sound quality is very low class",
    "excellent phone",
    "charging speed is slow",
    "box contents",
    "no complaints , great",
];

fn pool() -> impl Strategy<Value = Vec<Candidate>> {
    prop::collection::vec(0..PHRASES.len(), 0..12).prop_map(|idx| {
        idx.into_iter()
            .enumerate()
            .map(|(i, p)| Candidate::review(format!("c{i}"), PHRASES[p]))
            .collect()
    })
}

fn ids(cs: &[Candidate]) -> Vec<String> {
    cs.iter().map(|c| c.id.clone()).collect()
}

fn is_ordered_subset(sub: &[Candidate], all: &[Candidate]) -> bool {
    let mut it = all.iter();
    sub.iter().all(|s| it.any(|a| a == s))
}

proptest! {
    #[test]
    fn majority_filter_properties(cands in pool()) {
        let clf = SentimentClassifier::default();
        let out = filter_by_majority(&cands, &clf);
        prop_assert!(is_ordered_subset(&out.kept, &cands));
        prop_assert_eq!(out.decisions.len(), cands.len());
        let again = filter_by_majority(&out.kept, &clf);
        prop_assert_eq!(ids(&again.kept), ids(&out.kept));
        let opinions: Vec<Polarity> = out
            .kept
            .iter()
            .map(|c| clf.polarity(&c.text))
            .filter(|&p| p != Polarity::Neutral)
            .collect();
        if !out.ambiguous {
            prop_assert!(opinions.windows(2).all(|w| w[0] == w[1]));
        }
        // neutral candidates survive
        for c in &cands {
            if clf.polarity(&c.text) == Polarity::Neutral {
                prop_assert!(out.kept.contains(c));
            }
        }
    }

    #[test]
    fn training_filter_properties(cands in pool(), label in 0..PHRASES.len()) {
        let clf = SentimentClassifier::default();
        let answer = PHRASES[label];
        let lp = clf.polarity(answer);
        let out = filter_for_training(&cands, answer, &clf);
        prop_assert!(is_ordered_subset(&out.kept, &cands));
        for c in &cands {
            let p = clf.polarity(&c.text);
            if p == lp || p == Polarity::Neutral || lp == Polarity::Neutral {
                prop_assert!(out.kept.contains(c));
            } else {
                prop_assert!(!out.kept.contains(c));
            }
        }
        let again = filter_for_training(&out.kept, answer, &clf);
        prop_assert_eq!(ids(&again.kept), ids(&out.kept));
    }

    #[test]
    fn non_wh_first_word_is_dichotomous(first in "[a-z]{1,8}", rest in "[a-z ]{0,20}") {
        let q = format!("{first} {rest}?");
        let t = classify_question(&q).unwrap();
        if !WH_WORDS.contains(&first.as_str()) {
            prop_assert_eq!(t, QuestionType::Dichotomous);
        } else {
            prop_assert_eq!(t, QuestionType::WH);
        }
    }

    #[test]
    fn polarity_is_deterministic(text in "[a-z ,.!]{0,60}") {
        let clf = SentimentClassifier::default();
        prop_assert_eq!(clf.polarity(&text), clf.polarity(&text));
    }
}

/// Polarity taken from the first letter of the text: P, N, anything else
/// neutral.
struct Tagged;

impl PolarityClassifier for Tagged {
    fn polarity(&self, text: &str) -> Polarity {
        match text.chars().next() {
            Some('P') => Polarity::Positive,
            Some('N') => Polarity::Negative,
            _ => Polarity::Neutral,
        }
    }
}

fn tagged(tags: &str) -> Vec<Candidate> {
    tags.chars()
        .enumerate()
        .map(|(i, t)| Candidate::review(format!("c{i}"), t.to_string()))
        .collect()
}

#[test]
fn majority_worked_examples() {
    let out = filter_by_majority(&tagged("NNPU"), &Tagged);
    assert_eq!(ids(&out.kept), ["c0", "c1", "c3"]);
    assert!(!out.ambiguous);

    let out = filter_by_majority(&tagged("PN"), &Tagged);
    assert_eq!(out.kept.len(), 2);
    assert!(out.ambiguous);

    let out = filter_by_majority(&tagged("UU"), &Tagged);
    assert_eq!(out.kept.len(), 2);
    assert!(!out.ambiguous);
}

#[test]
fn training_examples() {
    // Positive label, candidates [Neg, Neg, Neutral]
    let out = filter_for_training(&tagged("NNU"), "P", &Tagged);
    assert_eq!(ids(&out.kept), ["c2"]);
    let out = filter_for_training(&tagged("NPU"), "U", &Tagged);
    assert_eq!(out.kept.len(), 3);
    let out = filter_for_training(&tagged("UUU"), "P", &Tagged);
    assert_eq!(out.kept.len(), 3);
}

#[test]
fn question_type_examples() {
    assert_eq!(
        classify_question("does phn have theatre sound quality?").unwrap(),
        QuestionType::Dichotomous
    );
    assert_eq!(
        classify_question("how to handle ABC game. graphics and game performance?").unwrap(),
        QuestionType::WH
    );
    assert_eq!(
        classify_question("is this gorilla glass in this device....??").unwrap(),
        QuestionType::Dichotomous
    );
    assert!(classify_question("").is_err());
}

#[test]
fn polarity_examples() {
    let clf = SentimentClassifier::default();
    assert_eq!(clf.polarity("sound quality is good"), Polarity::Positive);
    assert_eq!(clf.polarity("sound quality is not good"), Polarity::Negative);
    assert_eq!(clf.polarity("Display Size: 15.8 cm"), Polarity::Neutral);
}

#[test]
fn lexicon_oracle_on_shipped_lexicon() {
    let lex = include_str!("../data/lexicon.tsv");
    let clf = SentimentClassifier::default();
    for line in lex.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (term, sign) = line.split_once('\t').unwrap();
        let want = if sign.trim() == "+1" {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        assert_eq!(clf.polarity(&format!("it is {term}")), want, "{term}");
        assert_eq!(
            clf.polarity(&format!("it is not {term}")),
            want.opposite(),
            "not {term}"
        );
        // punctuation closes the negation scope
        assert_eq!(clf.polarity(&format!("not , {term}")), want, "not , {term}");
    }
}
