//! Exact-match and token-bag F1 with SQuAD answer normalization.

use std::collections::HashMap;

use super::DataError;

/// Lowercase, drop ASCII punctuation, drop the articles `a`/`an`/`the` and
/// collapse whitespace.
pub fn normalize_answer(s: &str) -> String {
    let lowered = s.to_lowercase();
    let no_punct: String = lowered.chars().filter(|c| !c.is_ascii_punctuation()).collect();
    no_punct
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn exact_match(prediction: &str, gold: &str) -> bool {
    normalize_answer(prediction) == normalize_answer(gold)
}

pub fn f1(prediction: &str, gold: &str) -> f64 {
    let p = normalize_answer(prediction);
    let g = normalize_answer(gold);
    let p_toks: Vec<&str> = p.split_whitespace().collect();
    let g_toks: Vec<&str> = g.split_whitespace().collect();
    if p_toks.is_empty() || g_toks.is_empty() {
        return if p_toks.len() == g_toks.len() { 1.0 } else { 0.0 };
    }
    let mut bag: HashMap<&str, usize> = HashMap::new();
    for t in &g_toks {
        *bag.entry(t).or_default() += 1;
    }
    let mut common = 0usize;
    for t in &p_toks {
        if let Some(c) = bag.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / p_toks.len() as f64;
    let recall = common as f64 / g_toks.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Max over golds of EM (0/1) and F1 (in [0, 1]).
pub fn em_f1(prediction: &str, golds: &[impl AsRef<str>]) -> Result<(f64, f64), DataError> {
    if golds.is_empty() {
        return Err(DataError::EmptyGolds);
    }
    let em = golds
        .iter()
        .any(|g| exact_match(prediction, g.as_ref()));
    let f = golds
        .iter()
        .map(|g| f1(prediction, g.as_ref()))
        .fold(0.0, f64::max);
    Ok((if em { 1.0 } else { 0.0 }, f))
}
