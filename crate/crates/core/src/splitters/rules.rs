use super::{attaches_left, BoundarySet};
use crate::tokenize::{LexiconHooks, Token, TokenTag};

pub const DEFAULT_FULLSTOP_MARKS: [&str; 3] = ["。", "．", "."];

fn default_marks() -> Vec<String> {
    DEFAULT_FULLSTOP_MARKS.iter().map(|s| s.to_string()).collect()
}

/// Boundary after every non-final full-stop mark.
pub fn split_fullstop(sentence_index: usize, tokens: &[Token]) -> BoundarySet {
    split_fullstop_with(sentence_index, tokens, &default_marks())
}

pub fn split_fullstop_with(sentence_index: usize, tokens: &[Token], marks: &[String]) -> BoundarySet {
    let candidates = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.tag == TokenTag::FullStop && marks.contains(&t.surface))
        .map(|(i, _)| i);
    BoundarySet::from_candidates(sentence_index, candidates, tokens.len())
}

/// Full-stop boundaries plus, for each verb, a boundary right before the next
/// independent noun. The search for that noun skips non-independent nouns
/// and ends at the next verb.
pub fn split_fullstop_verb(sentence_index: usize, tokens: &[Token], hooks: &LexiconHooks) -> BoundarySet {
    split_fullstop_verb_with(sentence_index, tokens, hooks, &default_marks())
}

pub(crate) fn split_fullstop_verb_with(
    sentence_index: usize,
    tokens: &[Token],
    hooks: &LexiconHooks,
    marks: &[String],
) -> BoundarySet {
    let mut candidates = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if !hooks.is_verb(token) {
            continue;
        }
        for (j, next) in tokens.iter().enumerate().skip(i + 1) {
            if hooks.is_verb(next) {
                break;
            }
            if hooks.is_noun(next) && !hooks.is_non_independent(next) {
                candidates.push(j - 1);
                break;
            }
        }
    }
    split_fullstop_with(sentence_index, tokens, marks).union(&BoundarySet::from_candidates(
        sentence_index,
        candidates,
        tokens.len(),
    ))
}

/// Clause stand-in: boundaries after commas, after verbs, and after a case
/// particle that follows a verbal noun. A predicate boundary directly
/// followed by a comma or full stop moves onto that mark.
pub fn split_clauses(sentence_index: usize, tokens: &[Token], hooks: &LexiconHooks) -> BoundarySet {
    let mut candidates = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if token.tag == TokenTag::Comma {
            candidates.push(i);
        } else if hooks.is_verb(token) {
            if !attaches_left(tokens, i) {
                candidates.push(i);
            }
        } else if hooks.is_verbal_noun(token)
            && tokens.get(i + 1).is_some_and(|t| hooks.is_particle(t))
            && !attaches_left(tokens, i + 1)
        {
            candidates.push(i + 1);
        }
    }
    BoundarySet::from_candidates(sentence_index, candidates, tokens.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::{tokenize, SurfaceSet};

    fn hooks() -> LexiconHooks {
        LexiconHooks {
            verb_list: SurfaceSet::new(["V"]),
            noun_list: SurfaceSet::new(["n", "m"]),
            non_independent_list: SurfaceSet::new(["ndep"]),
            verbal_noun_list: SurfaceSet::new(["vn"]),
            particle_list: SurfaceSet::new(["wo"]),
            ..Default::default()
        }
    }

    fn toks(text: &str) -> Vec<Token> {
        tokenize(text, &hooks())
    }

    #[test]
    fn fullstop_internal_only() {
        assert_eq!(split_fullstop(0, &toks("w 。 w 。")).positions(), [1]);
        assert!(split_fullstop(0, &toks("w w")).is_empty());
        assert_eq!(split_fullstop(0, &toks("。 w")).positions(), [0]);
    }

    #[test]
    fn fullstop_marks_configurable() {
        let tokens = toks("a . b 。 c");
        assert_eq!(split_fullstop(0, &tokens).positions(), [1, 3]);
        let only_maru = vec!["。".to_string()];
        assert_eq!(split_fullstop_with(0, &tokens, &only_maru).positions(), [3]);
    }

    #[test]
    fn verb_then_noun() {
        assert_eq!(split_fullstop_verb(0, &toks("V n"), &hooks()).positions(), [0]);
    }

    #[test]
    fn non_independent_noun_not_split() {
        assert!(split_fullstop_verb(0, &toks("V x ndep"), &hooks()).is_empty());
    }

    #[test]
    fn verb_rule_left_to_right() {
        assert_eq!(
            split_fullstop_verb(0, &toks("V a n V b m"), &hooks()).positions(),
            [1, 4]
        );
    }

    #[test]
    fn fullstop_verb_includes_fullstop() {
        assert_eq!(
            split_fullstop_verb(0, &toks("a 。 V n 。"), &hooks()).positions(),
            [1, 2]
        );
    }

    #[test]
    fn clause_after_comma() {
        assert_eq!(split_clauses(0, &toks("w , w"), &hooks()).positions(), [1]);
    }

    #[test]
    fn clause_after_predicate() {
        assert_eq!(split_clauses(0, &toks("w V w"), &hooks()).positions(), [1]);
    }

    #[test]
    fn clause_none() {
        assert!(split_clauses(0, &toks("a b c 。"), &hooks()).is_empty());
    }

    #[test]
    fn clause_verbal_noun_particle() {
        assert_eq!(split_clauses(0, &toks("a vn wo b"), &hooks()).positions(), [2]);
        assert!(split_clauses(0, &toks("a vn b"), &hooks()).is_empty());
    }

    #[test]
    fn predicate_before_comma_deduplicated() {
        assert_eq!(split_clauses(0, &toks("a V , b"), &hooks()).positions(), [2]);
    }
}
