//! Rule-based tokenization and sentence segmentation.
//!
//! Tokens are lowercased. Punctuation is detached from word edges and kept
//! as tokens in its own right, so `?` and `,` can act as features later.
//! A small emoticon lexicon and decimal numbers are preserved whole, and a
//! run of two or more dots is kept as a single ellipsis token.

/// Emoticons preserved as single tokens (matched on the lowercased chunk).
const EMOTICONS: [&str; 5] = [":)", ":(", ":d", ";)", ":p"];

/// Split raw text into sentence strings.
///
/// Newlines are authoritative when present (the corpus sources are
/// line-segmented). Otherwise a run of `.?!` followed by whitespace ends a
/// sentence.
pub fn segment_sentences(text: &str) -> Vec<String> {
    if text.contains('\n') {
        return text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
    }
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '?' | '!') {
            while let Some(&next) = chars.peek() {
                if matches!(next, '.' | '?' | '!') {
                    current.push(next);
                    chars.next();
                } else {
                    break;
                }
            }
            if chars.peek().is_none_or(|next| next.is_whitespace()) {
                let s = current.trim();
                if !s.is_empty() {
                    sentences.push(s.to_string());
                }
                current.clear();
            }
        }
    }
    let tail = current.trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

/// Tokenize one sentence (or any text span) into lowercase tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let lowered = chunk.to_lowercase();
        emit_chunk(&lowered.chars().collect::<Vec<_>>(), &mut tokens);
    }
    tokens
}

fn is_emoticon(chars: &[char]) -> bool {
    let s: String = chars.iter().collect();
    EMOTICONS.contains(&s.as_str())
}

fn is_decimal_number(chars: &[char]) -> bool {
    let mut digits = false;
    let mut seps = 0usize;
    for &c in chars {
        if c.is_ascii_digit() {
            digits = true;
        } else if c == '.' || c == ',' {
            seps += 1;
        } else {
            return false;
        }
    }
    digits && seps <= 1
}

/// Length of the punctuation token starting at the front of `chars`:
/// a run of dots collapses into one ellipsis token, any other
/// non-alphanumeric character stands alone.
fn leading_punct_len(chars: &[char]) -> usize {
    if chars[0] == '.' {
        chars.iter().take_while(|&&c| c == '.').count()
    } else {
        1
    }
}

fn trailing_punct_len(chars: &[char]) -> usize {
    let last = chars[chars.len() - 1];
    if last == '.' {
        chars.iter().rev().take_while(|&&c| c == '.').count()
    } else {
        1
    }
}

fn emit_chunk(chars: &[char], out: &mut Vec<String>) {
    if chars.is_empty() {
        return;
    }
    if is_emoticon(chars) || is_decimal_number(chars) {
        out.push(chars.iter().collect());
        return;
    }
    if !chars[0].is_alphanumeric() {
        let n = leading_punct_len(chars);
        out.push(chars[..n].iter().collect());
        emit_chunk(&chars[n..], out);
        return;
    }
    if !chars[chars.len() - 1].is_alphanumeric() {
        let n = trailing_punct_len(chars);
        let split = chars.len() - n;
        emit_chunk(&chars[..split], out);
        out.push(chars[split..].iter().collect());
        return;
    }
    out.push(chars.iter().collect());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text)
    }

    #[test]
    fn lowercases_and_splits_on_whitespace() {
        assert_eq!(toks("I was late"), ["i", "was", "late"]);
    }

    #[test]
    fn keeps_emoticons_whole() {
        assert_eq!(toks("I was late :)"), ["i", "was", "late", ":)"]);
        assert_eq!(toks(":( ;)"), [":(", ";)"]);
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
        assert!(toks("   ").is_empty());
    }

    #[test]
    fn detaches_trailing_punctuation() {
        assert_eq!(toks("room,"), ["room", ","]);
        assert_eq!(toks("late!"), ["late", "!"]);
    }

    #[test]
    fn detaches_leading_punctuation() {
        assert_eq!(toks("\"room\""), ["\"", "room", "\""]);
        assert_eq!(toks("(room)."), ["(", "room", ")", "."]);
    }

    #[test]
    fn keeps_internal_apostrophes_and_hyphens() {
        assert_eq!(toks("it's a well-known fact."), ["it's", "a", "well-known", "fact", "."]);
        assert_eq!(toks("don't."), ["don't", "."]);
    }

    #[test]
    fn ellipsis_is_one_token() {
        assert_eq!(toks("wait..."), ["wait", "..."]);
        assert_eq!(toks("wait.."), ["wait", ".."]);
        assert_eq!(toks("wait. go"), ["wait", ".", "go"]);
    }

    #[test]
    fn numbers_survive() {
        assert_eq!(toks("in 2014 it cost 3.5 dollars"), ["in", "2014", "it", "cost", "3.5", "dollars"]);
        assert_eq!(toks("1,300 tokens"), ["1,300", "tokens"]);
    }

    #[test]
    fn question_marks_are_tokens() {
        assert_eq!(toks("really? yes!"), ["really", "?", "yes", "!"]);
    }

    #[test]
    fn segments_on_newlines_when_present() {
        assert_eq!(
            segment_sentences("I ran .\nI hid ."),
            ["I ran .", "I hid ."]
        );
        assert_eq!(segment_sentences("one\n\n two \n"), ["one", "two"]);
    }

    #[test]
    fn punctuation_fallback_segmentation() {
        assert_eq!(
            segment_sentences("I ran. I hid. Then what"),
            ["I ran.", "I hid.", "Then what"]
        );
        assert_eq!(segment_sentences("What?! Really."), ["What?!", "Really."]);
        // no split when punctuation is not followed by whitespace
        assert_eq!(segment_sentences("see 3.5 above"), ["see 3.5 above"]);
    }
}
