//! Brute-force reference implementations shared by the test targets.
#![allow(dead_code)]

/// n-grams as owned token vectors, in order.
pub fn ngrams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].to_vec()).collect()
}

fn count(xs: &[Vec<String>], x: &[String]) -> usize {
    xs.iter().filter(|y| y.as_slice() == x).count()
}

/// Clipped multiset overlap by linear scans.
pub fn overlap(cand: &[Vec<String>], refs: &[Vec<String>]) -> usize {
    let mut seen: Vec<&Vec<String>> = Vec::new();
    let mut total = 0;
    for g in cand {
        if seen.contains(&g) {
            continue;
        }
        seen.push(g);
        total += count(cand, g).min(count(refs, g));
    }
    total
}

pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// (precision, recall, f1).
pub fn rouge_n(cand: &[String], refs: &[String], n: usize) -> (f64, f64, f64) {
    let c = ngrams(cand, n);
    let r = ngrams(refs, n);
    if c.is_empty() || r.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let o = overlap(&c, &r) as f64;
    let p = o / c.len() as f64;
    let rec = o / r.len() as f64;
    (p, rec, f_measure(p, rec))
}

/// LCS length by memoized recursion over suffixes.
pub fn lcs(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], i: usize, j: usize, memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if i == a.len() || j == b.len() {
            return 0;
        }
        if let Some(v) = memo[i][j] {
            return v;
        }
        let v = if a[i] == b[j] {
            1 + go(a, b, i + 1, j + 1, memo)
        } else {
            go(a, b, i + 1, j, memo).max(go(a, b, i, j + 1, memo))
        };
        memo[i][j] = Some(v);
        v
    }
    let mut memo = vec![vec![None; b.len()]; a.len()];
    go(a, b, 0, 0, &mut memo)
}

pub fn rouge_l(cand: &[String], refs: &[String]) -> (f64, f64, f64) {
    if cand.is_empty() || refs.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let l = lcs(cand, refs) as f64;
    let p = l / cand.len() as f64;
    let r = l / refs.len() as f64;
    (p, r, f_measure(p, r))
}

/// Corpus BLEU-1 with clipping and the scalar brevity penalty.
pub fn bleu1(cands: &[Vec<String>], refs: &[Vec<String>]) -> f64 {
    let mut matched = 0usize;
    let mut c_len = 0usize;
    let mut r_len = 0usize;
    for (c, r) in cands.iter().zip(refs) {
        matched += overlap(&ngrams(c, 1), &ngrams(r, 1));
        c_len += c.len();
        r_len += r.len();
    }
    if c_len == 0 {
        return 0.0;
    }
    let precision = matched as f64 / c_len as f64;
    let bp = if c_len >= r_len {
        1.0
    } else {
        (1.0 - r_len as f64 / c_len as f64).exp()
    };
    precision * bp
}

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// `-ln(exp(l[y]) / sum exp(l))` written out directly.
pub fn naive_cross_entropy(logits: &[f64], y: usize) -> f64 {
    let z: f64 = logits.iter().map(|v| v.exp()).sum();
    -(logits[y].exp() / z).ln()
}
