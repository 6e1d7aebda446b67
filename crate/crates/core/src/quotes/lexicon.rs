use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::textkit::{cosine, EmbeddingTable};

pub const DEFAULT_NEIGHBORS: usize = 20;

pub const SEED_REPORTING_VERBS: [&str; 10] = [
    "say", "claim", "prove", "analyze", "find", "show", "report", "suggest", "argue", "conclude",
];
pub const SEED_STUDY_NOUNS: [&str; 6] = ["study", "survey", "analysis", "research", "report", "trial"];
pub const SEED_SCIENTIST_NOUNS: [&str; 5] = ["researcher", "scientist", "analyst", "expert", "author"];

fn set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordClassSeeds {
    pub reporting_verbs: BTreeSet<String>,
    pub study_nouns: BTreeSet<String>,
    pub scientist_nouns: BTreeSet<String>,
}

impl Default for WordClassSeeds {
    fn default() -> Self {
        WordClassSeeds {
            reporting_verbs: set(&SEED_REPORTING_VERBS),
            study_nouns: set(&SEED_STUDY_NOUNS),
            scientist_nouns: set(&SEED_SCIENTIST_NOUNS),
        }
    }
}

/// Expanded word classes plus the seeds they grew from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordClassLexicon {
    pub reporting_verbs: BTreeSet<String>,
    pub study_nouns: BTreeSet<String>,
    pub scientist_nouns: BTreeSet<String>,
    pub seeds: WordClassSeeds,
}

impl Default for WordClassLexicon {
    fn default() -> Self {
        WordClassLexicon::from_seeds(WordClassSeeds::default())
    }
}

/// One expansion step, for the review file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub word: String,
    pub seed: String,
    pub cosine: f64,
}

impl WordClassLexicon {
    /// Seeds only, no expansion.
    pub fn from_seeds(seeds: WordClassSeeds) -> WordClassLexicon {
        WordClassLexicon {
            reporting_verbs: seeds.reporting_verbs.clone(),
            study_nouns: seeds.study_nouns.clone(),
            scientist_nouns: seeds.scientist_nouns.clone(),
            seeds,
        }
    }

    /// Grows each seed class by `k` nearest neighbours per seed. Returns the
    /// lexicon and the added neighbours for review.
    pub fn expand(seeds: WordClassSeeds, table: &EmbeddingTable, k: usize) -> (WordClassLexicon, Vec<Neighbor>) {
        let mut review = Vec::new();
        let mut grow = |s: &BTreeSet<String>| {
            let found = nearest_neighbors(s, table, k);
            let mut out = s.clone();
            out.extend(found.iter().map(|n| n.word.clone()));
            review.extend(found);
            out
        };
        let lex = WordClassLexicon {
            reporting_verbs: grow(&seeds.reporting_verbs),
            study_nouns: grow(&seeds.study_nouns),
            scientist_nouns: grow(&seeds.scientist_nouns),
            seeds,
        };
        (lex, review)
    }
}

/// Review file: `word, seed, cosine` per added neighbour.
pub fn review_tsv(neighbors: &[Neighbor]) -> String {
    let mut out = String::from("word\tseed\tcosine\n");
    for n in neighbors {
        out.push_str(&format!("{}\t{}\t{:.6}\n", n.word, n.seed, n.cosine));
    }
    out
}

/// `k` nearest vocabulary words of one word by cosine, ties broken by the word.
pub fn neighbors_of(seed: &str, table: &EmbeddingTable, k: usize) -> Vec<(String, f64)> {
    let Some(v) = table.get(seed) else {
        return Vec::new();
    };
    let seed_lower = seed.to_lowercase();
    let mut scored: Vec<(String, f64)> = table
        .words()
        .iter()
        .filter(|w| **w != seed_lower)
        .map(|w| (w.clone(), cosine(v, table.get(w).expect("vocabulary word"))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

fn nearest_neighbors(seeds: &BTreeSet<String>, table: &EmbeddingTable, k: usize) -> Vec<Neighbor> {
    if k == 0 {
        return Vec::new();
    }
    let seeds: Vec<&String> = seeds.iter().collect();
    seeds
        .par_iter()
        .map(|s| {
            neighbors_of(s, table, k)
                .into_iter()
                .map(|(word, cosine)| Neighbor {
                    word,
                    seed: s.to_string(),
                    cosine,
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Seeds plus the `k` nearest neighbours of each in-vocabulary seed.
pub fn expand_lexicon(seeds: &BTreeSet<String>, table: &EmbeddingTable, k: usize) -> BTreeSet<String> {
    let mut out = seeds.clone();
    out.extend(nearest_neighbors(seeds, table, k).into_iter().map(|n| n.word));
    out
}
