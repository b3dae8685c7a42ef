use std::io::Write as _;

use proptest::prelude::*;

use prodqa_core::corpus::*;
use prodqa_core::synth;

// (review, hand-segmented sentences)
const SEGMENTED: &[(&str, &[&str])] = &[
    ("sound quality is very low class", &["sound quality is very low class"]),
    ("display poor. battery good.", &["display poor.", "battery good."]),
    ("good!!!", &["good!!!"]),
    ("Great phone! Love it.", &["Great phone!", "Love it."]),
    ("Is it waterproof? No.", &["Is it waterproof?", "No."]),
    ("Battery lasts 1.5 days. Nice.", &["Battery lasts 1.5 days.", "Nice."]),
    (
        "Dr. Rao recommended it. Works fine",
        &["Dr. Rao recommended it.", "Works fine"],
    ),
    ("Camera, battery, etc. are fine.", &["Camera, battery, etc. are fine."]),
    ("wow...really good", &["wow...really good"]),
    ("wow... really good", &["wow...", "really good"]),
    ("price is ok । value good", &["price is ok । value good"]),
    ("  spaces   everywhere .  ok  ", &["spaces everywhere .", "ok"]),
    ("no terminal here", &["no terminal here"]),
    ("Really?! Yes.", &["Really?!", "Yes."]),
    ("one. two. three.", &["one.", "two.", "three."]),
    (
        "version 2.0 is out. update now!",
        &["version 2.0 is out.", "update now!"],
    ),
    ("e.g. the charger. it heats", &["e.g. the charger.", "it heats"]),
    ("bad phone. !!!", &["bad phone. !!!"]),
    ("... starts with dots. ends", &["... starts with dots.", "ends"]),
    ("mast phone hai. paisa vasool!", &["mast phone hai.", "paisa vasool!"]),
    ("screen is 6.5in.next line", &["screen is 6.5in.next line"]),
    ("ok", &["ok"]),
    ("It's good. It's cheap.", &["It's good.", "It's cheap."]),
    ("Mr. and Mrs. Smith loved it.", &["Mr. and Mrs. Smith loved it."]),
    (
        "Fast delivery!!! Good packing!!!",
        &["Fast delivery!!!", "Good packing!!!"],
    ),
    ("hmm?", &["hmm?"]),
    ("worst. phone. ever.", &["worst.", "phone.", "ever."]),
    ("I paid Rs. 15,000. Worth it.", &["I paid Rs.", "15,000.", "Worth it."]),
    ("vs. the old model? better.", &["vs. the old model?", "better."]),
    ("good\nbad. ugly", &["good bad.", "ugly"]),
];

#[test]
fn hand_segmented_reviews() {
    assert_eq!(SEGMENTED.len(), 30);
    for (review, expected) in SEGMENTED {
        let got = split_sentences(review);
        assert_eq!(got, *expected, "review {review:?}");
        let cands = split_review(review);
        assert_eq!(cands.len(), expected.len());
        assert!(cands.iter().all(|c| c.source == Source::Review));
    }
    assert!(split_review("   \n ").is_empty());
}

fn non_ws(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

proptest! {
    #[test]
    fn splitting_preserves_characters(review in "[a-z .!?,]{0,60}") {
        let joined: String = split_sentences(&review).concat();
        prop_assert_eq!(non_ws(&joined), non_ws(&review));
    }

    #[test]
    fn tokenize_is_pure(text in "[A-Za-z ,.?!]{0,40}") {
        let v = Vocabulary::from_texts(["good phone battery ."].into_iter(), 50).unwrap();
        prop_assert_eq!(v.tokenize(&text), v.tokenize(&text));
    }

    #[test]
    fn prefilter_is_a_capped_subset(words in prop::collection::vec(prop::sample::select(vec!["battery", "screen", "good", "phone", "camera", "bad"]), 1..40), cap in 1usize..6) {
        let cands: Vec<Candidate> = words
            .chunks(2)
            .enumerate()
            .map(|(i, w)| match i % 3 {
                0 => Candidate::review(i.to_string(), w.join(" ")),
                1 => Candidate::duplicate_qa(i.to_string(), format!("is {} ok", w[0]), w.join(" ")),
                _ => Candidate::spec(i.to_string(), w[0], w.join(" ")),
            })
            .collect();
        let q = "is the battery good";
        let out = prefilter(q, &cands, cap).unwrap();
        for s in Source::ALL {
            prop_assert!(out.iter().filter(|c| c.source == s).count() <= cap);
        }
        let mut ids: Vec<&str> = out.iter().map(|c| c.id.as_str()).collect();
        for c in &out {
            prop_assert!(cands.contains(c));
        }
        let scores: Vec<f64> = out.iter().map(|c| prodqa_core::relevancy::lexical_score(q, c)).collect();
        prop_assert!(scores.windows(2).all(|w| w[0] >= w[1]));
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), out.len());
    }
}

#[test]
fn prefilter_surfaces_overlapping_reviews() {
    let q = "does the fingerprint sensor work";
    let mut cands: Vec<Candidate> = (0..20)
        .map(|i| Candidate::review(format!("r{i}"), format!("packaging number {i} arrived on time")))
        .collect();
    cands[7] = Candidate::review("hit1", "fingerprint is quick");
    cands[13] = Candidate::review("hit2", "the sensor works in the dark");
    let out = prefilter(q, &cands, 5).unwrap();
    assert_eq!(out.len(), 5);
    // Brute-force overlap count against the question's content words.
    let qwords: Vec<String> = prodqa_core::corpus::text::content_words(q);
    let overlap = |c: &Candidate| {
        let cw = prodqa_core::corpus::text::content_words(&c.text);
        qwords
            .iter()
            .filter(|w| cw.contains(w) && !["does", "the"].contains(&w.as_str()))
            .count()
    };
    let mut hits: Vec<&str> = cands.iter().filter(|c| overlap(c) > 0).map(|c| c.id.as_str()).collect();
    hits.sort();
    assert_eq!(hits, ["hit1", "hit2"]);
    let mut top: Vec<&str> = out[..2].iter().map(|c| c.id.as_str()).collect();
    top.sort();
    assert_eq!(top, hits);
}

#[test]
fn spec_candidates() {
    let c = spec_candidate("Display Size", "15.8 cm (6.22 inch)").unwrap();
    assert_eq!(c.source, Source::Spec);
    assert_eq!(c.text, "15.8 cm (6.22 inch)");
    assert_eq!(c.aux_text.as_deref(), Some("Display Size"));
    assert!(spec_candidate("Display Colors", "16.7M").is_ok());
    assert!(spec_candidate("", "x").is_err());
}

#[test]
fn vocabulary_examples() {
    let recs = vec![QuestionRecord::new("q", "good good phone", vec![]).unwrap()];
    let v = build_vocabulary(&recs, 10).unwrap();
    assert_eq!(v.token(SPECIALS.len() as u32), Some("good"));
    assert!(v.id("phone").is_some());
    for (i, s) in SPECIALS.iter().enumerate() {
        assert_eq!(v.id(s), Some(i as u32));
    }

    let text: String = (0..20).map(|i| format!("w{i:02} ")).collect();
    let recs = vec![QuestionRecord::new("q", format!("is {text}"), vec![]).unwrap()];
    assert_eq!(build_vocabulary(&recs, 8).unwrap().len(), 8);
    assert!(build_vocabulary(&[], 10).is_err());

    let v = Vocabulary::from_texts(["gorilla glass ?"], 20).unwrap();
    let ids = v.tokenize("Gorilla glass???");
    assert_eq!(
        ids,
        [v.id("gorilla").unwrap(), v.id("glass").unwrap(), v.id("?").unwrap()]
    );
    assert!(v.tokenize("").is_empty());
    assert_eq!(v.tokenize("zebra yak quokka"), [UNK, UNK, UNK]);
    for (i, t) in v.tokens().iter().enumerate() {
        assert_eq!(v.id(t), Some(i as u32));
    }
}

#[test]
fn detokenize_round_trip_on_fixture_strings() {
    let mut strings: Vec<String> = SEGMENTED.iter().map(|(r, _)| r.to_string()).collect();
    strings.extend(
        [
            "Gorilla glass???",
            "Good phone.",
            "How is the camera?",
            "Display Size: 15.8 cm (6.22 inch)",
            "16.7M colors",
            "it's not bad, it's ok",
            "Battery: 5000 mAh",
            "no , the battery is poor",
            "yes , the screen is great",
            "what is the weight ?",
            "RAM 4 GB | ROM 64 GB",
            "does it support 5G???",
            "Worth   it !!!",
            "price <sep> value",
            "superb!! clarity",
            "Sound is LOUD",
            "macro lens - decent",
            "ok. ok. ok.",
            "Charging takes 2.5 hrs",
            "\"best\" phone",
        ]
        .map(str::to_string),
    );
    assert_eq!(strings.len(), 50);
    let v = Vocabulary::from_texts(strings.iter().map(String::as_str), 10_000).unwrap();
    for s in &strings {
        let ids = v.tokenize(s);
        assert!(!ids.contains(&UNK), "{s:?}");
        assert_eq!(v.detokenize(&ids), word_tokens(s).join(" "));
        assert_eq!(v.tokenize(&v.detokenize(&ids)), ids);
    }
}

fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    for l in lines {
        writeln!(f, "{l}").unwrap();
    }
    f
}

#[test]
fn parsing_fixtures() {
    let f = write_lines(&[
        r#"{"id":"1","question":"is the battery good?","candidates":[{"id":"a","source":"review","text":"battery good","relevant":true},{"id":"b","source":"spec","aux_text":"Battery","text":"5000 mAh","relevant":true},{"id":"c","source":"dup_qa","aux_text":"battery ok?","text":"yes","relevant":false}]}"#,
        r#"{"id":"2","question":"what color is it","candidates":[{"id":"a","source":"review","text":"black","relevant":true},{"id":"b","source":"review","text":"nice","relevant":false}]}"#,
    ]);
    let c = parse_relevancy_corpus(f.path()).unwrap();
    assert_eq!(c.records.len(), 2);
    let labels: Vec<bool> = c
        .records
        .iter()
        .flat_map(|r| r.candidates.iter().map(|c| c.relevance_label.unwrap()))
        .collect();
    assert_eq!(labels.len(), 5);
    assert_eq!(c.stats.candidate_count, 5);

    let f = write_lines(&[
        r#"{"id":"1","question":"q?","candidates":[]}"#,
        r#"{"id":"2","question":"q?","candidates":[{"id":"a","source":"spec","text":"x","relevant":true}]}"#,
    ]);
    let e = parse_relevancy_corpus(f.path()).unwrap_err().to_string();
    assert!(e.contains("line 2") && e.contains("aux_text"), "{e}");

    let f = write_lines(&[
        r#"{"id":"1","question":"q?","candidates":[{"id":"a","source":"blog","text":"x","relevant":true}]}"#,
    ]);
    let e = parse_relevancy_corpus(f.path()).unwrap_err().to_string();
    assert!(e.contains("line 1") && e.contains("source"), "{e}");

    let f = write_lines(&[r#"{"id":"1","question":"q?","candidates":[{"id":"a","source":"review","text":"x"}]}"#]);
    assert!(parse_relevancy_corpus(f.path())
        .unwrap_err()
        .to_string()
        .contains("relevant"));

    let twelve: Vec<String> = (0..12)
        .map(|i| format!(r#"{{"id":"c{i}","source":"review","text":"fine"}}"#))
        .collect();
    let big = format!(
        r#"{{"id":"3","question":"is it ok","answer":"yes","candidates":[{}]}}"#,
        twelve.join(",")
    );
    let f = write_lines(&[
        r#"{"id":"1","question":"is it ok","answer":"yes","candidates":[{"id":"a","source":"review","text":"ok"}]}"#,
        r#"{"id":"2","question":"is it ok","answer":"no","candidates":[]}"#,
        &big,
    ]);
    let c = parse_generation_corpus(f.path()).unwrap();
    assert_eq!(c.records.len(), 3);
    assert_eq!(c.records[2].candidates.len(), 12);
    assert_eq!(c.stats.unanswerable, 1);
    assert!(c.records.iter().all(|r| r.reference_answer.is_some()));

    let f = write_lines(&[r#"{"id":"1","question":"is it ok","candidates":[]}"#]);
    assert!(parse_generation_corpus(f.path())
        .unwrap_err()
        .to_string()
        .contains("answer"));
}

#[test]
fn write_then_parse_round_trip() {
    let world = synth::generation_world(20, 3);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("gen.jsonl");
    write_corpus(&p, &world.records).unwrap();
    assert_eq!(parse_generation_corpus(&p).unwrap().records, world.records);

    let recs = synth::relevancy_world(20, 4);
    let p = dir.path().join("rel.jsonl");
    write_corpus(&p, &recs).unwrap();
    let back = parse_relevancy_corpus(&p).unwrap();
    assert_eq!(back.records, recs);
    assert_eq!(back.stats, CorpusStats::from_records(&back.records));
}

#[test]
fn d1_scale_statistics() {
    let recs = synth::d1_scale_fixture(0);
    let s = CorpusStats::from_records(&recs);
    assert_eq!(s.question_count, 1638);
    assert_eq!(s.candidate_count, 15122);
    assert_eq!(s.relevant_count, 8670);
    assert_eq!(s.review_count + s.dup_qa_count + s.spec_count, 15122);

    let n = recs.len() as f64;
    let reviews = recs
        .iter()
        .flat_map(|r| &r.candidates)
        .filter(|c| c.source == Source::Review)
        .count();
    assert!((s.avg_reviews - reviews as f64 / n).abs() < 1e-12);
    assert!((s.avg_candidates - 15122.0 / 1638.0).abs() < 1e-12);
    let wh = recs
        .iter()
        .filter(|r| r.qtype() == prodqa_core::QuestionType::WH)
        .count();
    assert_eq!(s.wh_count, wh);
    assert!((s.wh_fraction - wh as f64 / n).abs() < 1e-12);
}

#[test]
fn inference_records_need_no_id_or_labels() {
    use prodqa_core::corpus::{parse_record, CorpusTask};
    let line = r#"{"question":"is it loud?","candidates":[{"id":"a","source":"review","text":"very quiet. not loud at all"}]}"#;
    let r = parse_record(line, 1, CorpusTask::Inference).unwrap();
    assert_eq!(r.id, "query");
    assert!(r.reference_answer.is_none());
    assert_eq!(r.candidates.len(), 2);
    let err = parse_record(line, 4, CorpusTask::Generation).unwrap_err().to_string();
    assert!(err.contains("line 4") && err.contains("`id`"), "{err}");
}
