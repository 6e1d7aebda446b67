//! Bundled word lists. Every list can also be loaded from a one-entry-per-line
//! file; blank lines and `#` comments are ignored.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use super::Pos;

#[derive(Debug, Clone, Default)]
pub struct WordList(BTreeSet<String>);

impl WordList {
    pub fn parse(text: &str) -> WordList {
        WordList(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<String> for WordList {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        WordList(iter.into_iter().map(|w| w.to_lowercase()).collect())
    }
}

/// Every lexical resource the text toolkit consults.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub pos: HashMap<String, Pos>,
    pub stopwords: WordList,
    pub positive: WordList,
    pub negative: WordList,
    pub negations: WordList,
    pub given_names: WordList,
    pub honorifics: WordList,
}

impl Lexicons {
    pub fn bundled() -> &'static Lexicons {
        static LEX: OnceLock<Lexicons> = OnceLock::new();
        LEX.get_or_init(|| Lexicons {
            pos: parse_pos(include_str!("../../data/pos_lexicon.tsv")),
            stopwords: WordList::parse(include_str!("../../data/stopwords.txt")),
            positive: WordList::parse(include_str!("../../data/positive.txt")),
            negative: WordList::parse(include_str!("../../data/negative.txt")),
            negations: WordList::parse(include_str!("../../data/negations.txt")),
            given_names: WordList::parse(include_str!("../../data/given_names.txt")),
            honorifics: WordList::parse(include_str!("../../data/honorifics.txt")),
        })
    }

    pub fn is_negation(&self, lower: &str) -> bool {
        self.negations.contains(lower) || lower.ends_with("n't")
    }
}

fn parse_pos(text: &str) -> HashMap<String, Pos> {
    text.lines()
        .filter_map(|l| {
            let (w, t) = l.split_once('\t')?;
            Some((w.trim().to_lowercase(), Pos::from_tag(t.trim())?))
        })
        .collect()
}
