//! Quality indicators for science news articles.
//!
//! The crate turns a corpus of social-media postings, news articles and the
//! scientific papers they cite into a per-article indicator vector, and
//! provides the learners and statistics used to evaluate those indicators.
//!
//! Module map:
//!
//! - [`corpus`]: JSONL ingestion, keyword/URL filtering, link resolution.
//! - [`textkit`]: tokenization, POS tags, entities, readability, sentiment,
//!   clickbait scoring and word embeddings.
//! - [`topics`]: collapsed-Gibbs LDA and Hellinger similarity.
//! - [`diffusion`]: the postings → articles → papers graph, pruning,
//!   duplicate merging, personalized PageRank, betweenness and degree.
//! - [`quotes`]: word-class quote extraction, attribution, scientific mentions.
//! - [`adherence`]: semantic-similarity features and the source-adherence model.
//! - [`social`]: reach indicators and reply/posting stance.
//! - [`learn`]: decision forest, one-way ANOVA, RMSE, cross-validation helpers.
//! - [`indicators`]: indicator assembly, weak supervision, star ratings and
//!   the agreement-bucketed RMSE report.

pub mod adherence;
pub mod corpus;
pub mod diffusion;
pub mod indicators;
pub mod learn;
pub mod persist;
pub mod quotes;
pub mod social;
pub mod textkit;
pub mod topics;

pub use corpus::{Allowlist, Article, Corpus, LinkTable, Paper, Posting, Reply};
pub use diffusion::{CentralityScores, DiffusionGraph, NodeKind};
pub use indicators::{IndicatorVector, RatingRecord, ReputabilityTier};
pub use learn::{AnovaResult, Forest, ForestParams};
pub use quotes::{Quote, QuoteStats, QuoteeKind, WordClassLexicon};
pub use social::{ReachIndicators, StanceFeatures, StanceLabel};
pub use textkit::{EmbeddingTable, EntitySet, SentimentScore, TokenizedText};
pub use topics::{TopicModel, TopicVector};

/// 64-bit FNV-1a. Used wherever a seed has to be derived from content, so the
/// value is stable across platforms and toolchains.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// SplitMix64 finalizer, for deriving independent sub-seeds.
pub fn mix_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
