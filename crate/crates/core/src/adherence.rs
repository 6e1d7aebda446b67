//! Semantic similarity between an article and a paper at document, paragraph
//! and sentence level; training pairs; the source-adherence indicator.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionGraph, NodeKind};
use crate::learn::{auc, binary_rates, cross_val_proba, Forest, ForestParams, LearnError};
use crate::textkit::{cosine, doc_vector_of, mentions, EmbeddingTable, EntityKind, TokenizedText};
use crate::topics::{hellinger_weights, infer_terms, terms_of, TopicModel};
use crate::{fnv1a, mix_seed};

pub const PASSAGE_CAP: usize = 200;
pub const N_FEATURES: usize = 21;

pub const METRICS: [&str; 7] = [
    "jaccard_persons_orgs",
    "jaccard_dates",
    "jaccard_numbers",
    "jaccard_percentages",
    "embedding_cosine",
    "hellinger_topic",
    "relative_length_difference",
];
pub const GRANULARITIES: [&str; 3] = ["document", "paragraph", "sentence"];

/// `<granularity>_<metric>` for all 21 features, in vector order.
pub fn feature_names() -> Vec<String> {
    GRANULARITIES
        .iter()
        .flat_map(|g| METRICS.iter().map(move |m| format!("{g}_{m}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdherenceError {
    #[error("document `{0}` has no words")]
    EmptyDocument(String),
    #[error("no article links exactly one paper")]
    NoPositives,
    #[error("need at least 2 {} pairs, found {found}", if *positive { "positive" } else { "negative" })]
    TooFewPairs { positive: bool, found: usize },
    #[error(transparent)]
    Learn(#[from] LearnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StsFeatures {
    pub values: [f64; N_FEATURES],
}

impl StsFeatures {
    /// The seven document-level values.
    pub fn document(&self) -> &[f64] {
        &self.values[..7]
    }
}

/// Per-passage ingredients for the similarity metrics.
#[derive(Debug, Clone, PartialEq)]
struct Passage {
    persons_orgs: BTreeSet<String>,
    dates: BTreeSet<String>,
    numbers: BTreeSet<String>,
    percentages: BTreeSet<String>,
    vector: Vec<f64>,
    topics: Vec<f64>,
    words: usize,
}

/// A document prepared once for any number of comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct DocProfile {
    pub id: String,
    document: Passage,
    paragraphs: Vec<Passage>,
    sentences: Vec<Passage>,
}

fn passage(
    t: &TokenizedText,
    sentences: Range<usize>,
    ments: &[crate::textkit::Mention],
    topics: &TopicModel,
    table: &EmbeddingTable,
) -> Passage {
    let toks = &t.tokens[t.sentence_span(sentences.clone())];
    let mut p = Passage {
        persons_orgs: BTreeSet::new(),
        dates: BTreeSet::new(),
        numbers: BTreeSet::new(),
        percentages: BTreeSet::new(),
        vector: doc_vector_of(toks, table),
        topics: infer_terms(topics, &terms_of(toks)).weights,
        words: toks.iter().filter(|w| w.is_word()).count(),
    };
    for m in ments.iter().filter(|m| sentences.contains(&m.sentence)) {
        let set = match m.kind {
            EntityKind::Person | EntityKind::Organization => &mut p.persons_orgs,
            EntityKind::Date => &mut p.dates,
            EntityKind::Number => &mut p.numbers,
            EntityKind::Percentage => &mut p.percentages,
        };
        set.insert(m.text.clone());
    }
    p
}

/// Up to `PASSAGE_CAP` ranges, subsampled with a seed taken from the text.
fn capped(ranges: Vec<Range<usize>>, seed: u64) -> Vec<Range<usize>> {
    if ranges.len() <= PASSAGE_CAP {
        return ranges;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed));
    let mut idx: Vec<usize> = (0..ranges.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(PASSAGE_CAP);
    idx.sort_unstable();
    idx.into_iter().map(|i| ranges[i].clone()).collect()
}

impl DocProfile {
    pub fn new(
        id: &str,
        t: &TokenizedText,
        topics: &TopicModel,
        table: &EmbeddingTable,
    ) -> Result<DocProfile, AdherenceError> {
        if t.word_count() == 0 {
            return Err(AdherenceError::EmptyDocument(id.to_string()));
        }
        let ments = mentions(t);
        let seed = fnv1a(t.text.as_bytes());
        let all = 0..t.sentences.len();
        let paragraphs = capped(t.paragraphs.clone(), seed);
        let sentences = capped((0..t.sentences.len()).map(|s| s..s + 1).collect(), seed ^ 1);
        let build = |rs: Vec<Range<usize>>| {
            rs.into_iter()
                .map(|r| passage(t, r, &ments, topics, table))
                .filter(|p| p.words > 0)
                .collect::<Vec<_>>()
        };
        Ok(DocProfile {
            id: id.to_string(),
            document: passage(t, all, &ments, topics, table),
            paragraphs: build(paragraphs),
            sentences: build(sentences),
        })
    }

    pub fn word_count(&self) -> usize {
        self.document.words
    }
}

/// |A ∩ B| / |A ∪ B|, with two empty sets counting as identical.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

pub fn relative_length_difference(a: usize, b: usize) -> f64 {
    let m = a.max(b);
    if m == 0 {
        return 0.0;
    }
    a.abs_diff(b) as f64 / m as f64
}

fn metrics(a: &Passage, b: &Passage) -> [f64; 7] {
    [
        jaccard(&a.persons_orgs, &b.persons_orgs),
        jaccard(&a.dates, &b.dates),
        jaccard(&a.numbers, &b.numbers),
        jaccard(&a.percentages, &b.percentages),
        cosine(&a.vector, &b.vector),
        hellinger_weights(&a.topics, &b.topics).unwrap_or(0.0),
        relative_length_difference(a.words, b.words),
    ]
}

/// Mean metrics over the Cartesian product of passages.
fn mean_metrics(a: &[Passage], b: &[Passage]) -> [f64; 7] {
    if a.is_empty() || b.is_empty() {
        return [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    }
    let mut sum = [0.0; 7];
    for x in a {
        for y in b {
            for (s, v) in sum.iter_mut().zip(metrics(x, y)) {
                *s += v;
            }
        }
    }
    let n = (a.len() * b.len()) as f64;
    sum.map(|s| s / n)
}

pub fn sts_features(a: &DocProfile, b: &DocProfile) -> StsFeatures {
    let mut values = [0.0; N_FEATURES];
    values[..7].copy_from_slice(&metrics(&a.document, &b.document));
    values[7..14].copy_from_slice(&mean_metrics(&a.paragraphs, &b.paragraphs));
    values[14..].copy_from_slice(&mean_metrics(&a.sentences, &b.sentences));
    StsFeatures { values }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairSpec {
    pub article_id: String,
    pub paper_id: String,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub article_id: String,
    pub paper_id: String,
    pub positive: bool,
    pub features: StsFeatures,
}

/// Positives: articles with exactly one paper link. Negatives: as many
/// seeded random article/paper pairs that are not real links.
pub fn build_pairs(g: &DiffusionGraph, seed: u64) -> Result<Vec<PairSpec>, AdherenceError> {
    let articles: Vec<&str> = g.node_ids(NodeKind::Article).collect();
    let papers: Vec<&str> = g.node_ids(NodeKind::Paper).collect();
    let linked: BTreeSet<(&str, &str)> = g.edges().filter(|(_, d)| g.kind(d) == Some(NodeKind::Paper)).collect();
    let mut out = Vec::new();
    for a in &articles {
        let ps: Vec<&str> = g.successors(a).filter(|s| g.kind(s) == Some(NodeKind::Paper)).collect();
        if ps.len() == 1 {
            out.push(PairSpec {
                article_id: a.to_string(),
                paper_id: ps[0].to_string(),
                positive: true,
            });
        }
    }
    if out.is_empty() {
        return Err(AdherenceError::NoPositives);
    }
    let wanted = out.len();
    let possible = articles.len() * papers.len() - linked.len();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed));
    let mut negatives = BTreeSet::new();
    while negatives.len() < wanted.min(possible) {
        let a = *articles.choose(&mut rng).expect("articles exist");
        let p = *papers.choose(&mut rng).expect("papers exist");
        if !linked.contains(&(a, p)) {
            negatives.insert((a, p));
        }
    }
    out.extend(negatives.into_iter().map(|(a, p)| PairSpec {
        article_id: a.to_string(),
        paper_id: p.to_string(),
        positive: false,
    }));
    Ok(out)
}

/// Features for each pair whose documents both have profiles.
pub fn featurize(pairs: &[PairSpec], profiles: &BTreeMap<String, DocProfile>) -> Vec<TrainingPair> {
    pairs
        .par_iter()
        .filter_map(|p| {
            let a = profiles.get(&p.article_id)?;
            let b = profiles.get(&p.paper_id)?;
            Some(TrainingPair {
                article_id: p.article_id.clone(),
                paper_id: p.paper_id.clone(),
                positive: p.positive,
                features: sts_features(a, b),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StsModel {
    pub forest: Forest,
}

pub fn train_sts(pairs: &[TrainingPair], params: ForestParams) -> Result<StsModel, AdherenceError> {
    let x: Vec<Vec<f64>> = pairs.iter().map(|p| p.features.values.to_vec()).collect();
    let y: Vec<u32> = pairs.iter().map(|p| p.positive as u32).collect();
    for class in [0, 1] {
        let n = y.iter().filter(|&&l| l == class).count();
        if n < 2 {
            return Err(AdherenceError::TooFewPairs {
                positive: class == 1,
                found: n,
            });
        }
    }
    Ok(StsModel {
        forest: Forest::fit(&x, &y, params)?,
    })
}

pub fn sts_score(model: &StsModel, features: &StsFeatures) -> f64 {
    model.forest.proba_of(&features.values, 1)
}

/// Best score over the papers the article links to; `None` without links.
pub fn source_adherence(
    article_id: &str,
    g: &DiffusionGraph,
    model: &StsModel,
    profiles: &BTreeMap<String, DocProfile>,
) -> Option<f64> {
    let article = profiles.get(article_id)?;
    g.successors(article_id)
        .filter(|p| g.kind(p) == Some(NodeKind::Paper))
        .filter_map(|p| profiles.get(p))
        .map(|p| sts_score(model, &sts_features(article, p)))
        .reduce(f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StsEvaluation {
    pub n_pairs: usize,
    pub n_positive: usize,
    pub auc: f64,
    pub accuracy: f64,
}

/// Out-of-fold AUC and accuracy (threshold 0.5) of the pair classifier.
pub fn evaluate_sts(
    pairs: &[TrainingPair],
    folds: usize,
    params: ForestParams,
) -> Result<StsEvaluation, AdherenceError> {
    let x: Vec<Vec<f64>> = pairs.iter().map(|p| p.features.values.to_vec()).collect();
    let y: Vec<u32> = pairs.iter().map(|p| p.positive as u32).collect();
    let positive: Vec<bool> = pairs.iter().map(|p| p.positive).collect();
    let (labels, proba) = cross_val_proba(&x, &y, folds, params)?;
    let col = labels.iter().position(|&l| l == 1).ok_or(AdherenceError::NoPositives)?;
    let scores: Vec<f64> = proba.iter().map(|p| p[col]).collect();
    let predicted: Vec<bool> = scores.iter().map(|&s| s > 0.5).collect();
    Ok(StsEvaluation {
        n_pairs: pairs.len(),
        n_positive: positive.iter().filter(|&&p| p).count(),
        auc: auc(&scores, &positive).unwrap_or(0.5),
        accuracy: binary_rates(&predicted, &positive).accuracy,
    })
}

/// CSV with the 21 feature names and a `label` column (1 = linked pair).
pub fn pairs_csv(pairs: &[TrainingPair]) -> String {
    let mut out = feature_names().join(",");
    out.push_str(",label\n");
    for p in pairs {
        let row: Vec<String> = p.features.values.iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push_str(if p.positive { ",1\n" } else { ",0\n" });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textkit::analyze;
    use crate::topics::{train_lda, LdaParams};

    fn fixtures() -> (TopicModel, EmbeddingTable) {
        let docs = [
            analyze("coffee liver enzyme caffeine study"),
            analyze("galaxy telescope orbit planet star"),
        ];
        let topics = train_lda(
            &docs,
            LdaParams {
                iterations: 50,
                ..LdaParams::with_topics(2)
            },
        )
        .unwrap();
        let table =
            EmbeddingTable::parse("coffee 1 0\nliver 0.8 0.2\ngalaxy 0 1\nplanet 0.1 0.9\n".as_bytes()).unwrap();
        (topics, table)
    }

    #[test]
    fn identity_profile() {
        let (m, e) = fixtures();
        let t =
            analyze("Dr. Jane Roe found coffee protects the liver in 2017.\n\nThe liver effect was 12% in the study.");
        let p = DocProfile::new("a", &t, &m, &e).unwrap();
        let f = sts_features(&p, &p);
        assert_eq!(f.document(), &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn jaccard_examples() {
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<BTreeSet<_>>();
        assert!((jaccard(&s(&["A", "B"]), &s(&["B", "C"])) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(jaccard(&s(&[]), &s(&[])), 1.0);
        assert_eq!(jaccard(&s(&["A"]), &s(&[])), 0.0);
    }

    #[test]
    fn length_difference() {
        assert_eq!(relative_length_difference(300, 600), 0.5);
        assert_eq!(relative_length_difference(600, 300), 0.5);
    }

    #[test]
    fn features_are_symmetric() {
        let (m, e) = fixtures();
        let a = DocProfile::new("a", &analyze("Coffee helps the liver. WHO agrees."), &m, &e).unwrap();
        let b = DocProfile::new("b", &analyze("Planet orbit observed in 2019.\n\nGalaxy found."), &m, &e).unwrap();
        let ab = sts_features(&a, &b);
        let ba = sts_features(&b, &a);
        for (x, y) in ab.values.iter().zip(ba.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_document_is_an_error() {
        let (m, e) = fixtures();
        assert_eq!(
            DocProfile::new("x", &analyze(""), &m, &e),
            Err(AdherenceError::EmptyDocument("x".into()))
        );
    }

    fn graph(links: &[(&str, &str)]) -> DiffusionGraph {
        let mut g = DiffusionGraph::new();
        for (a, p) in links {
            g.add_node(a, NodeKind::Article, true).unwrap();
            g.add_node(p, NodeKind::Paper, true).unwrap();
            g.add_edge(a, p).unwrap();
        }
        g
    }

    #[test]
    fn pair_construction() {
        let links: Vec<(String, String)> = (0..10).map(|i| (format!("a{i}"), format!("p{i}"))).collect();
        let refs: Vec<(&str, &str)> = links.iter().map(|(a, p)| (a.as_str(), p.as_str())).collect();
        let g = graph(&refs);
        let pairs = build_pairs(&g, 5).unwrap();
        assert_eq!(pairs.iter().filter(|p| p.positive).count(), 10);
        let neg: Vec<&PairSpec> = pairs.iter().filter(|p| !p.positive).collect();
        assert_eq!(neg.len(), 10);
        for n in neg {
            assert!(!g.has_edge(&n.article_id, &n.paper_id));
        }
        assert_eq!(pairs, build_pairs(&g, 5).unwrap());
    }

    #[test]
    fn no_single_link_articles() {
        let g = graph(&[("a", "p1"), ("a", "p2")]);
        assert_eq!(build_pairs(&g, 1), Err(AdherenceError::NoPositives));
    }

    #[test]
    fn csv_header() {
        let csv = pairs_csv(&[]);
        assert_eq!(csv.trim_end().split(',').count(), 22);
        assert!(csv.starts_with("document_jaccard_persons_orgs,"));
    }
}
