/// A token with character offsets (Unicode scalar values, not bytes) into the
/// text it was cut from. SQuAD `answer_start` values use the same unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// Splits text into maximal alphanumeric runs; every other non-whitespace
/// character becomes a token on its own.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run: Option<(usize, String)> = None;

    let flush = |run: &mut Option<(usize, String)>, end: usize, tokens: &mut Vec<Token>| {
        if let Some((start, surface)) = run.take() {
            tokens.push(Token {
                normalized: surface.to_lowercase(),
                surface,
                char_start: start,
                char_end: end,
            });
        }
    };

    let mut count = 0;
    for (i, c) in text.chars().enumerate() {
        count = i + 1;
        if c.is_alphanumeric() {
            match &mut run {
                Some((_, s)) => s.push(c),
                None => run = Some((i, c.to_string())),
            }
            continue;
        }
        flush(&mut run, i, &mut tokens);
        if !c.is_whitespace() {
            tokens.push(Token {
                surface: c.to_string(),
                normalized: c.to_lowercase().collect(),
                char_start: i,
                char_end: i + 1,
            });
        }
    }
    flush(&mut run, count, &mut tokens);
    tokens
}

/// Maps an answer given as a character range onto 1-based inclusive token
/// positions. Returns `None` when the range overlaps no token.
pub fn align_answer(tokens: &[Token], answer_text: &str, char_start: usize) -> Option<(usize, usize)> {
    let char_end = char_start + answer_text.chars().count();
    if char_end <= char_start {
        return None;
    }
    let overlaps = |t: &Token| t.char_end > char_start && t.char_start < char_end;
    let first = tokens.iter().position(overlaps)?;
    let last = tokens.iter().rposition(overlaps)?;
    Some((first + 1, last + 1))
}

/// Text of the passage covered by the 1-based inclusive token span.
pub fn span_text(passage: &str, tokens: &[Token], a_s: usize, a_e: usize) -> String {
    let start = tokens[a_s - 1].char_start;
    let end = tokens[a_e - 1].char_end;
    passage.chars().skip(start).take(end - start).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn splits_trailing_punctuation() {
        let t = tokenize("lesson plan.");
        assert_eq!(surfaces("lesson plan."), ["lesson", "plan", "."]);
        assert_eq!((t[0].char_start, t[0].char_end), (0, 6));
        assert_eq!((t[1].char_start, t[1].char_end), (7, 11));
        assert_eq!((t[2].char_start, t[2].char_end), (11, 12));
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \n\t").is_empty());
    }

    #[test]
    fn apostrophe_is_its_own_token() {
        let norm: Vec<String> = tokenize("Brooklyn's").into_iter().map(|t| t.normalized).collect();
        assert_eq!(norm, ["brooklyn", "'", "s"]);
    }

    #[test]
    fn offsets_are_in_chars() {
        let t = tokenize("café au lait");
        assert_eq!((t[1].char_start, t[1].char_end), (5, 7));
    }

    #[test]
    fn aligns_multi_token_answer() {
        let passage = "Teachers may use a lesson plan to facilitate student learning.";
        let toks = tokenize(passage);
        let start = passage.find("lesson plan").unwrap();
        assert_eq!(align_answer(&toks, "lesson plan", start), Some((5, 6)));
        assert_eq!(span_text(passage, &toks, 5, 6), "lesson plan");
    }

    #[test]
    fn aligns_single_char_and_mid_token() {
        let passage = "use lesson plans daily";
        let toks = tokenize(passage);
        assert_eq!(align_answer(&toks, "e", 2), Some((1, 1)));
        let start = passage.find("plan").unwrap();
        assert_eq!(align_answer(&toks, "plan", start), Some((3, 3)));
    }

    #[test]
    fn whitespace_only_answer_is_unalignable() {
        let toks = tokenize("a  b");
        assert_eq!(align_answer(&toks, " ", 1), None);
        assert_eq!(align_answer(&toks, "", 0), None);
    }

    proptest! {
        #[test]
        fn tokens_reconstruct_source(text in "[a-zA-Z0-9 .,'é\\-]{0,40}") {
            let chars: Vec<char> = text.chars().collect();
            let toks = tokenize(&text);
            let mut rebuilt = String::new();
            let mut cursor = 0;
            for t in &toks {
                prop_assert!(t.char_start < t.char_end);
                prop_assert!(t.char_start >= cursor);
                let gap: String = chars[cursor..t.char_start].iter().collect();
                prop_assert!(gap.chars().all(char::is_whitespace));
                rebuilt.push_str(&gap);
                let surface: String = chars[t.char_start..t.char_end].iter().collect();
                prop_assert_eq!(&surface, &t.surface);
                rebuilt.push_str(&surface);
                cursor = t.char_end;
            }
            rebuilt.extend(&chars[cursor..]);
            prop_assert_eq!(rebuilt, text);
        }

        #[test]
        fn alignment_covers_answer(text in "[a-z]{1,6}( [a-z]{1,6}){0,8}", a in 0usize..40, len in 1usize..10) {
            let n = text.chars().count();
            let start = a % n;
            let end = (start + len).min(n);
            let answer: String = text.chars().skip(start).take(end - start).collect();
            let toks = tokenize(&text);
            if let Some((s, e)) = align_answer(&toks, &answer, start) {
                prop_assert!(1 <= s && s <= e && e <= toks.len());
                let covered_start = toks[s - 1].char_start;
                let covered_end = toks[e - 1].char_end;
                let trimmed_start = start + (answer.len() - answer.trim_start().len());
                let trimmed_end = end - (answer.len() - answer.trim_end().len());
                prop_assert!(covered_start <= trimmed_start && trimmed_end <= covered_end);
            } else {
                prop_assert!(answer.trim().is_empty());
            }
        }
    }
}
