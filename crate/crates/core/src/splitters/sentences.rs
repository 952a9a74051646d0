use serde::{Deserialize, Serialize};

use crate::corpus::TextSpan;

/// A sentence and its character span in the raw text it was cut from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub span: TextSpan,
}

fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || ('\u{FF10}'..='\u{FF19}').contains(&c)
}

/// Split raw text after every full-stop mark and at every newline.
///
/// Candidates are trimmed of surrounding whitespace and dropped when empty,
/// so a newline right after a full stop does not create an empty sentence.
/// A `.` between two digits is a decimal point, not a full stop.
pub fn split_sentences(raw_text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = raw_text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut push = |start: usize, end: usize| {
        let mut s = start;
        let mut e = end;
        while s < e && chars[s].is_whitespace() {
            s += 1;
        }
        while e > s && chars[e - 1].is_whitespace() {
            e -= 1;
        }
        if s < e {
            sentences.push(Sentence {
                text: chars[s..e].iter().collect(),
                span: TextSpan::new(s, e),
            });
        }
    };
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '。' | '．' => {
                push(start, i + 1);
                start = i + 1;
            }
            '.' => {
                let decimal = i > 0
                    && is_digit(chars[i - 1])
                    && chars.get(i + 1).copied().is_some_and(is_digit);
                if !decimal {
                    push(start, i + 1);
                    start = i + 1;
                }
            }
            '\n' => {
                push(start, i);
                start = i + 1;
            }
            _ => {}
        }
    }
    push(start, chars.len());
    sentences
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(raw: &str) -> Vec<String> {
        split_sentences(raw).into_iter().map(|s| s.text).collect()
    }

    #[test]
    fn fullstop_ends_sentence() {
        assert_eq!(texts("A。B。"), ["A。", "B。"]);
    }

    #[test]
    fn newline_without_fullstop() {
        assert_eq!(texts("A\nB。"), ["A", "B。"]);
    }

    #[test]
    fn newline_after_fullstop_adds_nothing() {
        assert_eq!(texts("A。\nB"), ["A。", "B"]);
    }

    #[test]
    fn decimals_kept() {
        assert_eq!(texts("CK 4.5 up. next"), ["CK 4.5 up.", "next"]);
    }

    #[test]
    fn spans_lossless() {
        let raw = "  x y 。\n\n z";
        for s in split_sentences(raw) {
            assert_eq!(s.span.slice(raw), s.text);
        }
        assert_eq!(texts(raw), ["x y 。", "z"]);
    }

    #[test]
    fn blank_input() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences(" \n \n").is_empty());
    }
}
