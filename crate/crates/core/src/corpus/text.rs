//! Word-level text normalization and rule-based sentence splitting.
//!
//! Tokens are lowercased. A word is a maximal run of non-whitespace,
//! non-punctuation characters; `.` or `,` between two digits and an
//! apostrophe between two letters stay inside the word (`16.7m`, `it's`).
//! Every punctuation character becomes its own token, with a run of the
//! same character collapsed into one (`???` -> `?`). The special markers
//! from [`super::vocab::SPECIALS`] are recognized verbatim.

use super::types::Candidate;
use super::vocab::SPECIALS;

const EXTRA_PUNCT: &[char] = &[
    '।', '॥', '…', '“', '”', '‘', '’', '–', '—', '¡', '¿', '«', '»', '•', '·',
];

pub(crate) fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || EXTRA_PUNCT.contains(&c)
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !is_punct(c)
}

/// Splits text into lowercased word and punctuation tokens.
pub fn word_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '<' {
            if let Some(special) = special_at(&chars, i) {
                out.push(special.to_string());
                i += special.chars().count();
                continue;
            }
        }
        if is_punct(c) {
            let mut j = i + 1;
            while j < chars.len() && chars[j] == c {
                j += 1;
            }
            out.push(c.to_string());
            i = j;
            continue;
        }
        let start = i;
        let mut j = i + 1;
        while j < chars.len() {
            let d = chars[j];
            if is_word_char(d) {
                j += 1;
                continue;
            }
            let (prev, next) = (chars[j - 1], chars.get(j + 1).copied());
            let joins_number =
                (d == '.' || d == ',') && prev.is_ascii_digit() && next.is_some_and(|n| n.is_ascii_digit());
            let joins_word = (d == '\'' || d == '’') && prev.is_alphabetic() && next.is_some_and(|n| n.is_alphabetic());
            if joins_number || joins_word {
                j += 2;
            } else {
                break;
            }
        }
        out.push(chars[start..j].iter().collect());
        i = j;
    }
    out
}

fn special_at(chars: &[char], i: usize) -> Option<&'static str> {
    SPECIALS.iter().copied().find(|s| {
        let n = s.chars().count();
        i + n <= chars.len() && chars[i..i + n].iter().copied().eq(s.chars())
    })
}

/// Word tokens re-joined with single spaces.
pub fn normalize(text: &str) -> String {
    word_tokens(text).join(" ")
}

/// Tokens that carry lexical content: no punctuation, no special markers.
pub fn content_words(text: &str) -> Vec<String> {
    word_tokens(text)
        .into_iter()
        .filter(|t| !is_punct_token(t) && !SPECIALS.contains(&t.as_str()))
        .collect()
}

pub(crate) fn is_punct_token(t: &str) -> bool {
    let mut cs = t.chars();
    matches!((cs.next(), cs.next()), (Some(c), None) if is_punct(c))
}

const TERMINALS: [char; 3] = ['.', '!', '?'];

// Lowercased, without the trailing period.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "eg", "ie", "approx", "appx", "inc",
    "ltd",
];

/// Splits a review into sentences.
///
/// A sentence ends after a run of `.`, `!` or `?` that is followed by
/// whitespace or the end of the text. A lone `.` does not end a sentence
/// after a known abbreviation or between two digits. The danda is not a
/// terminal. Segments without any word character are glued onto the
/// previous sentence so no non-whitespace character is lost. Whitespace
/// inside each sentence is collapsed to single spaces.
pub fn split_sentences(review: &str) -> Vec<String> {
    let chars: Vec<char> = review.chars().collect();
    let mut raw: Vec<String> = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if !TERMINALS.contains(&chars[i]) {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < chars.len() && TERMINALS.contains(&chars[i]) {
            i += 1;
        }
        let at_boundary = i == chars.len() || chars[i].is_whitespace();
        let single_period = i - run_start == 1 && chars[run_start] == '.';
        if at_boundary && !(single_period && is_abbreviation(&chars[start..run_start])) {
            raw.push(chars[start..i].iter().collect());
            start = i;
        }
    }
    if start < chars.len() {
        raw.push(chars[start..].iter().collect());
    }

    let mut out: Vec<String> = Vec::new();
    let mut pending = String::new();
    for seg in raw {
        let seg = collapse_whitespace(&seg);
        if seg.is_empty() {
            continue;
        }
        if !seg.chars().any(is_word_char) {
            match out.last_mut() {
                Some(prev) => {
                    prev.push(' ');
                    prev.push_str(&seg);
                }
                None => {
                    if !pending.is_empty() {
                        pending.push(' ');
                    }
                    pending.push_str(&seg);
                }
            }
            continue;
        }
        if pending.is_empty() {
            out.push(seg);
        } else {
            out.push(format!("{} {seg}", std::mem::take(&mut pending)));
        }
    }
    if !pending.is_empty() {
        out.push(pending);
    }
    out
}

fn is_abbreviation(before: &[char]) -> bool {
    let word: String = before
        .iter()
        .rev()
        .take_while(|c| !c.is_whitespace())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let word = word.to_lowercase();
    let word = word.trim_start_matches(|c: char| is_punct(c) && c != '.');
    ABBREVIATIONS.contains(&word)
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One review candidate per sentence, with ids `0`, `1`, ...
pub fn split_review(review: &str) -> Vec<Candidate> {
    split_sentences(review)
        .into_iter()
        .enumerate()
        .map(|(i, s)| Candidate::review(i.to_string(), s))
        .collect()
}
