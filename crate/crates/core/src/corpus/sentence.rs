//! Rule-based sentence splitter for French text.
//!
//! A boundary is placed after a whitespace-delimited token ending in `.`, `!`,
//! `?` or `…` (optionally followed by closing quotes or brackets) when the next
//! token starts with an uppercase letter or an opening quote. Periods after a
//! known abbreviation or a single-letter initial never split. Decimal points
//! are never followed by whitespace, so they never split either.

use std::collections::HashSet;

const BUNDLED_ABBREVIATIONS: &str = include_str!("../../resources/abbreviations_fr.txt");

const CLOSERS: &[char] = &['"', '\'', '»', '”', '’', ')', ']'];
const OPENERS: &[char] = &['"', '\'', '«', '“', '‘', '(', '['];

#[derive(Debug, Clone)]
pub struct SentenceTokenizer {
    abbreviations: HashSet<String>,
}

impl Default for SentenceTokenizer {
    fn default() -> Self {
        Self::french()
    }
}

impl SentenceTokenizer {
    /// Tokenizer using the bundled French abbreviation list.
    pub fn french() -> Self {
        Self::from_list(BUNDLED_ABBREVIATIONS)
    }

    /// Builds a tokenizer from a list with one abbreviation per line and `#` comments.
    pub fn from_list(list: &str) -> Self {
        let abbreviations = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let mut entry = l.to_lowercase();
                if !entry.ends_with('.') {
                    entry.push('.');
                }
                entry
            })
            .collect();
        Self { abbreviations }
    }

    pub fn is_abbreviation(&self, token: &str) -> bool {
        self.abbreviations.contains(&token.to_lowercase())
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let mut sentences = Vec::new();
        let mut start = 0;
        for i in 0..tokens.len() {
            let last = i + 1 == tokens.len();
            let prev = i.checked_sub(1).map(|p| tokens[p]);
            if last || self.ends_sentence(prev, tokens[i], tokens[i + 1]) {
                sentences.push(tokens[start..=i].join(" "));
                start = i + 1;
            }
        }
        sentences
    }

    fn ends_sentence(&self, prev: Option<&str>, token: &str, next: &str) -> bool {
        let mut core = token.trim_end_matches(CLOSERS);
        // a lone closing quote inherits the terminal of the token before it
        if core.is_empty() {
            core = prev.map(|p| p.trim_end_matches(CLOSERS)).unwrap_or_default();
        }
        let Some(terminal) = core.chars().last() else {
            return false;
        };
        if !matches!(terminal, '.' | '!' | '?' | '…') {
            return false;
        }
        let starts_new = next
            .chars()
            .next()
            .is_some_and(|c| c.is_uppercase() || OPENERS.contains(&c));
        if !starts_new {
            return false;
        }
        if terminal == '.' {
            let word = core.trim_start_matches(OPENERS);
            if self.is_abbreviation(word) || is_initial(word) {
                return false;
            }
        }
        true
    }
}

fn is_initial(word: &str) -> bool {
    let mut chars = word.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_alphabetic())
}

/// Splits with the bundled French tokenizer.
pub fn sentence_tokenize(text: &str) -> Vec<String> {
    SentenceTokenizer::french().tokenize(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_plain_sentences() {
        assert_eq!(
            sentence_tokenize("Il pleut. Elle sort."),
            vec!["Il pleut.", "Elle sort."]
        );
    }

    #[test]
    fn abbreviations_do_not_split() {
        let tok = SentenceTokenizer::french();
        assert!(tok.is_abbreviation("M."));
        assert!(tok.is_abbreviation("Mme."));
        assert!(tok.is_abbreviation("etc."));
        assert_eq!(tok.tokenize("M. Dupont arrive."), vec!["M. Dupont arrive."]);
        assert_eq!(
            tok.tokenize("Voir av. Foch. Puis rentrer."),
            vec!["Voir av. Foch.", "Puis rentrer."]
        );
    }

    #[test]
    fn decimals_and_lowercase_continuations_do_not_split() {
        assert_eq!(
            sentence_tokenize("Prix: 3.50 euros aujourd'hui."),
            vec!["Prix: 3.50 euros aujourd'hui."]
        );
        assert_eq!(
            sentence_tokenize("Il est 3 h. et demie."),
            vec!["Il est 3 h. et demie."]
        );
    }

    #[test]
    fn quotes_and_other_terminals() {
        assert_eq!(
            sentence_tokenize("Il a dit « non ». « Pourquoi ? » Personne ne sait!"),
            vec!["Il a dit « non ».", "« Pourquoi ? »", "Personne ne sait!"]
        );
        assert_eq!(
            sentence_tokenize("Tu viens? Oui! Bien."),
            vec!["Tu viens?", "Oui!", "Bien."]
        );
        assert_eq!(sentence_tokenize("J. Dupont parle."), vec!["J. Dupont parle."]);
        assert!(sentence_tokenize("   ").is_empty());
    }

    #[test]
    fn custom_list_with_comments() {
        let tok = SentenceTokenizer::from_list("# comment\nenv\n\nMgr.\n");
        assert!(tok.is_abbreviation("env."));
        assert!(tok.is_abbreviation("mgr."));
        assert!(!tok.is_abbreviation("M."));
    }

    proptest! {
        #[test]
        fn coverage_and_nonempty(words in prop::collection::vec("[A-Za-zéà]{1,6}[.!?]?", 0..30)) {
            let text = words.join(" ");
            let sentences = sentence_tokenize(&text);
            prop_assert!(sentences.iter().all(|s| !s.trim().is_empty()));
            let joined = sentences.join(" ");
            let normalize = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
            prop_assert_eq!(normalize(&joined), normalize(&text));
        }
    }
}
