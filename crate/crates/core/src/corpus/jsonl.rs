//! JSONL wire format for the relevancy (labeled) and generation corpora.
//!
//! Relevancy record:
//! `{"id", "question", "candidates": [{"id", "source", "text", "aux_text"?, "relevant"}]}`
//!
//! Generation record: the same without `relevant`, plus `"answer"`.
//! Inference records (answering requests) may omit `id`, `answer` and
//! `relevant`.
//! `source` is one of `review`, `dup_qa`, `spec`. Unknown fields are rejected.
//! Multi-sentence review texts are split into one candidate per sentence
//! with ids `<id>.<n>`; the label, if any, is copied to each sentence.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use super::stats::CorpusStats;
use super::text::split_sentences;
use super::types::{Candidate, QuestionRecord, Source};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusTask {
    Relevancy,
    Generation,
    Inference,
}

/// Parsed records plus the statistics computed at ingestion.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<QuestionRecord>,
    pub stats: CorpusStats,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCandidate {
    id: String,
    source: String,
    text: String,
    #[serde(default)]
    aux_text: Option<String>,
    #[serde(default)]
    relevant: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    #[serde(default)]
    id: Option<String>,
    question: String,
    candidates: Vec<WireCandidate>,
    #[serde(default)]
    answer: Option<String>,
}

pub fn parse_source(tag: &str) -> Option<Source> {
    Source::ALL.into_iter().find(|s| s.as_str() == tag)
}

/// Parses one JSON line into a record; `line` is only used for errors.
pub fn parse_record(json: &str, line: usize, task: CorpusTask) -> Result<QuestionRecord> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let wire: WireRecord = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let field = if path == "." {
            missing_field(&inner).unwrap_or_else(|| "<record>".into())
        } else {
            path
        };
        Error::schema(line, field, inner)
    })?;

    let id = match (task, wire.id) {
        (CorpusTask::Inference, None) => "query".to_string(),
        (_, None) => return Err(Error::schema(line, "id", "missing field `id`")),
        (_, Some(id)) => id,
    };
    if wire.question.trim().is_empty() {
        return Err(Error::schema(line, "question", "question is empty"));
    }
    let answer = match (task, wire.answer) {
        (CorpusTask::Generation, None) => {
            return Err(Error::schema(
                line,
                "answer",
                "generation records require a reference answer",
            ))
        }
        (CorpusTask::Generation, Some(a)) if a.trim().is_empty() => {
            return Err(Error::schema(line, "answer", "reference answer is empty"))
        }
        (_, a) => a,
    };

    let mut candidates = Vec::with_capacity(wire.candidates.len());
    for (i, wc) in wire.candidates.into_iter().enumerate() {
        let at = |f: &str| format!("candidates[{i}].{f}");
        let source = parse_source(&wc.source).ok_or_else(|| {
            Error::schema(
                line,
                at("source"),
                format!("unknown source tag `{}` (expected review, dup_qa or spec)", wc.source),
            )
        })?;
        match (task, wc.relevant) {
            (CorpusTask::Relevancy, None) => {
                return Err(Error::schema(
                    line,
                    at("relevant"),
                    "relevancy candidates require a label",
                ))
            }
            (CorpusTask::Generation, Some(_)) => {
                return Err(Error::schema(
                    line,
                    at("relevant"),
                    "labels are not allowed in generation records",
                ))
            }
            _ => {}
        }
        let cand = Candidate {
            id: wc.id,
            source,
            text: wc.text,
            aux_text: wc.aux_text,
            relevance_label: wc.relevant,
        };
        cand.validate().map_err(|(f, msg)| Error::schema(line, at(f), msg))?;
        if source == Source::Review {
            let sentences = split_sentences(&cand.text);
            if sentences.len() > 1 {
                for (n, s) in sentences.into_iter().enumerate() {
                    candidates.push(Candidate {
                        id: format!("{}.{n}", cand.id),
                        text: s,
                        ..cand.clone()
                    });
                }
                continue;
            }
        }
        candidates.push(cand);
    }

    let mut rec = QuestionRecord::new(id, wire.question, candidates)
        .map_err(|e| Error::schema(line, "question", e.to_string()))?;
    rec.reference_answer = answer;
    Ok(rec)
}

fn missing_field(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("missing field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

pub fn parse_corpus(path: &Path, task: CorpusTask) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_record(&line, i + 1, task)?);
    }
    let stats = CorpusStats::from_records(&records);
    if stats.unanswerable > 0 {
        log::info!(
            "{}: {} question(s) have no candidates",
            path.display(),
            stats.unanswerable
        );
    }
    Ok(Corpus { records, stats })
}

/// Labeled corpus: every candidate must carry `relevant`.
pub fn parse_relevancy_corpus(path: &Path) -> Result<Corpus> {
    parse_corpus(path, CorpusTask::Relevancy)
}

/// Generation corpus: every record must carry `answer`.
pub fn parse_generation_corpus(path: &Path) -> Result<Corpus> {
    parse_corpus(path, CorpusTask::Generation)
}

pub fn write_corpus(path: &Path, records: &[QuestionRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const D1: &str = r#"{"id":"q1","question":"is the battery good?","candidates":[{"id":"c1","source":"review","text":"battery is great","relevant":true},{"id":"c2","source":"spec","text":"5000 mAh","aux_text":"Battery Capacity","relevant":true},{"id":"c3","source":"dup_qa","text":"yes","aux_text":"battery ok?","relevant":false}]}
{"id":"q2","question":"how is the camera?","candidates":[{"id":"c1","source":"review","text":"camera is poor","relevant":true},{"id":"c2","source":"review","text":"fast charging","relevant":false}]}
"#;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_labeled_fixture() {
        let f = write_tmp(D1);
        let corpus = parse_relevancy_corpus(f.path()).unwrap();
        assert_eq!(corpus.records.len(), 2);
        let labels: Vec<bool> = corpus
            .records
            .iter()
            .flat_map(|r| r.candidates.iter().map(|c| c.relevance_label.unwrap()))
            .collect();
        assert_eq!(labels, [true, true, false, true, false]);
        assert_eq!(corpus.stats.candidate_count, 5);
    }

    fn err_of(line: &str, task: CorpusTask) -> (usize, String) {
        match parse_record(line, 7, task).unwrap_err() {
            Error::Schema { line, field, .. } => (line, field),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn spec_without_key_names_line_and_field() {
        let line = r#"{"id":"q","question":"x?","candidates":[{"id":"c","source":"spec","text":"v","relevant":true}]}"#;
        assert_eq!(
            err_of(line, CorpusTask::Relevancy),
            (7, "candidates[0].aux_text".into())
        );
    }

    #[test]
    fn schema_errors() {
        let unknown =
            r#"{"id":"q","question":"x?","candidates":[{"id":"c","source":"blog","text":"v","relevant":true}]}"#;
        assert_eq!(err_of(unknown, CorpusTask::Relevancy).1, "candidates[0].source");
        let unlabeled = r#"{"id":"q","question":"x?","candidates":[{"id":"c","source":"review","text":"v"}]}"#;
        assert_eq!(err_of(unlabeled, CorpusTask::Relevancy).1, "candidates[0].relevant");
        assert_eq!(err_of(unlabeled, CorpusTask::Generation).1, "answer");
        let no_question = r#"{"id":"q","candidates":[]}"#;
        assert_eq!(err_of(no_question, CorpusTask::Generation).1, "question");
        let bad_type =
            r#"{"id":"q","question":"x?","candidates":[{"id":"c","source":"review","text":"v","relevant":"yes"}]}"#;
        assert_eq!(err_of(bad_type, CorpusTask::Relevancy).1, "candidates[0].relevant");
    }

    #[test]
    fn generation_records() {
        let d2 = r#"{"id":"a","question":"is it good?","answer":"yes","candidates":[]}
{"id":"b","question":"how is it?","answer":"fine","candidates":[{"id":"c","source":"review","text":"ok. not bad."}]}
{"id":"c","question":"does it heat?","answer":"no","candidates":[{"id":"c","source":"dup_qa","aux_text":"heating?","text":"no"}]}
"#;
        let f = write_tmp(d2);
        let corpus = parse_generation_corpus(f.path()).unwrap();
        assert_eq!(corpus.records.len(), 3);
        assert!(corpus.records.iter().all(|r| r.reference_answer.is_some()));
        assert_eq!(corpus.stats.unanswerable, 1);
        let ids: Vec<_> = corpus.records[1].candidates.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["c.0", "c.1"]);
        let labeled = r#"{"id":"a","question":"q?","answer":"y","candidates":[{"id":"c","source":"review","text":"t","relevant":true}]}"#;
        assert_eq!(err_of(labeled, CorpusTask::Generation).1, "candidates[0].relevant");
    }

    #[test]
    fn accepts_large_candidate_pools() {
        let cands: Vec<String> = (0..12)
            .map(|i| format!(r#"{{"id":"c{i}","source":"review","text":"sentence {i}"}}"#))
            .collect();
        let line = format!(
            r#"{{"id":"q","question":"is it ok?","answer":"yes","candidates":[{}]}}"#,
            cands.join(",")
        );
        let rec = parse_record(&line, 1, CorpusTask::Generation).unwrap();
        assert_eq!(rec.candidates.len(), 12);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let f = write_tmp(D1);
        let corpus = parse_relevancy_corpus(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_corpus(out.path(), &corpus.records).unwrap();
        let again = parse_relevancy_corpus(out.path()).unwrap();
        assert_eq!(again.records, corpus.records);
    }
}
