//! Per-article indicator vectors, weak supervision from outlet reputability,
//! star ratings for the review panel and the agreement-bucketed RMSE report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adherence::{source_adherence, DocProfile, StsModel};
use crate::corpus::{registrable_domain, Allowlist, Article, Corpus, Posting, Reply};
use crate::diffusion::{CentralityScores, DiffusionGraph, NodeKind};
use crate::learn::{anova_f, rmse, significance_stars, Forest, ForestParams, LearnError};
use crate::quotes::QuoteExtractor;
use crate::social::{reach, social_signals, ReachIndicators, SocialSignals, StanceModel};
use crate::textkit::{
    analyze, clickbait_score, flesch_reading_ease, sentiment, ClickbaitError, EmbeddingTable, HeadlineModel,
};
use crate::{fnv1a, social};

/// Numeric indicator names, in encoding order.
pub const INDICATOR_NAMES: [&str; 30] = [
    "title_clickbait",
    "title_subjectivity",
    "title_polarity",
    "readability",
    "word_count",
    "bylined",
    "n_total_quotes",
    "n_person_quotes",
    "n_scientific_mentions",
    "n_weasel_quotes",
    "source_adherence",
    "pagerank",
    "betweenness",
    "in_degree",
    "out_degree",
    "alexa_rank",
    "n_postings",
    "n_likes",
    "n_retweets",
    "n_replies",
    "sum_followers",
    "sum_followees",
    "n_countries",
    "shelf_life_hours",
    "tweet_stance",
    "tweet_subjectivity",
    "tweet_polarity",
    "reply_stance",
    "reply_subjectivity",
    "reply_polarity",
];

/// Indicators that may be absent; they get a missing-value flag in the
/// learner encoding.
pub const OPTIONAL_INDICATORS: [&str; 2] = ["source_adherence", "alexa_rank"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndicatorError {
    #[error("article {0} is not in the diffusion graph")]
    NotInGraph(String),
    #[error("unknown article {0}")]
    UnknownArticle(String),
    #[error(transparent)]
    Clickbait(#[from] ClickbaitError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("no article has an outlet with a known tier")]
    NoLabeledArticles,
    #[error("training labels cover a single tier ({0})")]
    SingleTier(u8),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid score {0}, expected 1..5")]
    InvalidScore(u8),
    #[error("article {0} has ratings but no expert labels")]
    MissingExpertLabels(String),
    #[error("no expert labels")]
    NoExpertLabels,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndicatorVector {
    pub article_id: String,
    pub title_clickbait: f64,
    pub title_subjectivity: f64,
    pub title_polarity: f64,
    pub readability: f64,
    pub word_count: u64,
    pub bylined: bool,
    pub n_total_quotes: u64,
    pub n_person_quotes: u64,
    pub n_scientific_mentions: u64,
    pub n_weasel_quotes: u64,
    pub source_adherence: Option<f64>,
    pub pagerank: f64,
    pub betweenness: f64,
    pub in_degree: u64,
    pub out_degree: u64,
    pub alexa_rank: Option<u64>,
    pub reach: ReachIndicators,
    pub tweet_stance: f64,
    pub reply_stance: f64,
    pub tweet_subjectivity: f64,
    pub tweet_polarity: f64,
    pub reply_subjectivity: f64,
    pub reply_polarity: f64,
}

impl IndicatorVector {
    /// Values in [`INDICATOR_NAMES`] order; `None` marks an absent value.
    pub fn values(&self) -> [Option<f64>; 30] {
        let r = &self.reach;
        let n = |v: u64| Some(v as f64);
        [
            Some(self.title_clickbait),
            Some(self.title_subjectivity),
            Some(self.title_polarity),
            Some(self.readability),
            n(self.word_count),
            Some(if self.bylined { 1.0 } else { 0.0 }),
            n(self.n_total_quotes),
            n(self.n_person_quotes),
            n(self.n_scientific_mentions),
            n(self.n_weasel_quotes),
            self.source_adherence,
            Some(self.pagerank),
            Some(self.betweenness),
            n(self.in_degree),
            n(self.out_degree),
            self.alexa_rank.map(|a| a as f64),
            n(r.n_postings),
            n(r.n_likes),
            n(r.n_retweets),
            n(r.n_replies),
            n(r.sum_followers),
            n(r.sum_followees),
            n(r.n_countries),
            Some(r.shelf_life_hours),
            Some(self.tweet_stance),
            Some(self.tweet_subjectivity),
            Some(self.tweet_polarity),
            Some(self.reply_stance),
            Some(self.reply_subjectivity),
            Some(self.reply_polarity),
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let i = INDICATOR_NAMES.iter().position(|n| *n == name)?;
        self.values()[i]
    }

    fn set_social(&mut self, s: SocialSignals) {
        self.tweet_stance = s.tweet_stance;
        self.reply_stance = s.reply_stance;
        self.tweet_subjectivity = s.tweet_subjectivity;
        self.tweet_polarity = s.tweet_polarity;
        self.reply_subjectivity = s.reply_subjectivity;
        self.reply_polarity = s.reply_polarity;
    }
}

/// One row per vector, `article_id` first; absent values are empty cells.
pub fn indicators_csv(vectors: &[IndicatorVector]) -> String {
    let mut out = String::from("article_id");
    for n in INDICATOR_NAMES {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for v in vectors {
        out.push_str(&v.article_id);
        for x in v.values() {
            out.push(',');
            if let Some(x) = x {
                let _ = write!(out, "{x}");
            }
        }
        out.push('\n');
    }
    out
}

/// Reputability tier, 1 (very low) to 5 (very high).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ReputabilityTier(u8);

impl ReputabilityTier {
    pub fn new(tier: u8) -> Option<ReputabilityTier> {
        (1..=5).contains(&tier).then_some(ReputabilityTier(tier))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn label(self) -> &'static str {
        ["very low", "low", "medium", "high", "very high"][usize::from(self.0) - 1]
    }
}

impl TryFrom<u8> for ReputabilityTier {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        ReputabilityTier::new(v).ok_or_else(|| format!("tier {v} is outside 1..5"))
    }
}

impl From<ReputabilityTier> for u8 {
    fn from(t: ReputabilityTier) -> u8 {
        t.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutletInfo {
    pub tier: Option<ReputabilityTier>,
    pub alexa_rank: Option<u64>,
}

/// Outlet metadata keyed by registrable domain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutletTable {
    pub outlets: BTreeMap<String, OutletInfo>,
}

fn optional_cell(cell: Option<&str>) -> Option<&str> {
    cell.map(str::trim).filter(|c| !c.is_empty() && *c != "-")
}

impl OutletTable {
    /// Parses `domain<TAB>tier<TAB>alexa_rank`. Tier and rank may be empty or
    /// `-`. A header row starting with `domain` and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<OutletTable, IndicatorError> {
        let mut outlets = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("domain")) {
                continue;
            }
            let err = |reason: String| IndicatorError::Parse { line: i + 1, reason };
            let mut cells = line.split('\t');
            let domain = cells.next().unwrap_or("").trim();
            let domain = registrable_domain(domain).ok_or_else(|| err(format!("bad domain {domain:?}")))?;
            let tier = match optional_cell(cells.next()) {
                None => None,
                Some(t) => {
                    let v: u8 = t.parse().map_err(|_| err(format!("bad tier {t:?}")))?;
                    Some(ReputabilityTier::new(v).ok_or_else(|| err(format!("tier {v} is outside 1..5")))?)
                }
            };
            let alexa_rank = match optional_cell(cells.next()) {
                None => None,
                Some(r) => match r.parse::<u64>() {
                    Ok(v) if v > 0 => Some(v),
                    _ => return Err(err(format!("bad alexa rank {r:?}"))),
                },
            };
            outlets.insert(domain, OutletInfo { tier, alexa_rank });
        }
        Ok(OutletTable { outlets })
    }

    pub fn get(&self, outlet: &str) -> Option<&OutletInfo> {
        self.outlets
            .get(outlet)
            .or_else(|| registrable_domain(outlet).and_then(|d| self.outlets.get(&d)))
    }

    pub fn tier(&self, outlet: &str) -> Option<ReputabilityTier> {
        self.get(outlet).and_then(|o| o.tier)
    }

    pub fn alexa_rank(&self, outlet: &str) -> Option<u64> {
        self.get(outlet).and_then(|o| o.alexa_rank)
    }
}

/// Everything [`compute_indicators`] reads besides the article itself.
pub struct IndicatorContext<'a> {
    pub corpus: &'a Corpus,
    pub graph: &'a DiffusionGraph,
    pub centralities: &'a CentralityScores,
    pub outlets: &'a OutletTable,
    pub allowlist: &'a Allowlist,
    pub quotes: &'a QuoteExtractor,
    pub headlines: &'a HeadlineModel,
    pub embeddings: &'a EmbeddingTable,
    /// Source-adherence model and the document profiles it scores.
    pub sts: Option<(&'a StsModel, &'a BTreeMap<String, DocProfile>)>,
    pub stance: Option<&'a StanceModel>,
}

impl IndicatorContext<'_> {
    /// Postings linked to the article in the graph, and their replies.
    pub fn social_items(&self, article_id: &str) -> (Vec<&Posting>, Vec<&Reply>) {
        let postings: Vec<&Posting> = self
            .graph
            .predecessors(article_id)
            .filter(|p| self.graph.kind(p) == Some(NodeKind::Posting))
            .filter_map(|p| self.corpus.posting(p))
            .collect();
        let replies = postings.iter().flat_map(|p| self.corpus.replies_to(&p.id)).collect();
        (postings, replies)
    }
}

pub fn compute_indicators(article: &Article, ctx: &IndicatorContext<'_>) -> Result<IndicatorVector, IndicatorError> {
    if ctx.graph.kind(&article.id) != Some(NodeKind::Article) {
        return Err(IndicatorError::NotInGraph(article.id.clone()));
    }
    let id = article.id.as_str();
    let title = analyze(&article.title);
    let title_sentiment = sentiment(&title);
    let body = analyze(&article.body());
    let (_, stats) = ctx.quotes.stats(id, &body, ctx.allowlist);
    let (postings, replies) = ctx.social_items(id);
    let c = ctx.centralities;
    let mut v = IndicatorVector {
        article_id: article.id.clone(),
        title_clickbait: clickbait_score(&article.title, ctx.headlines)?,
        title_subjectivity: title_sentiment.subjectivity,
        title_polarity: title_sentiment.polarity,
        readability: flesch_reading_ease(&body).unwrap_or(0.0),
        word_count: body.word_count() as u64,
        bylined: article.byline.as_deref().is_some_and(|b| !b.trim().is_empty()),
        n_total_quotes: stats.total_quotes as u64,
        n_person_quotes: stats.person_quotes as u64,
        n_scientific_mentions: stats.scientific_mentions as u64,
        n_weasel_quotes: stats.weasel_quotes as u64,
        source_adherence: ctx.sts.and_then(|(m, p)| source_adherence(id, ctx.graph, m, p)),
        pagerank: c.pagerank.get(id).copied().unwrap_or(0.0),
        betweenness: c.betweenness.get(id).copied().unwrap_or(0.0),
        in_degree: c.in_degree.get(id).copied().unwrap_or(0) as u64,
        out_degree: c.out_degree.get(id).copied().unwrap_or(0) as u64,
        alexa_rank: ctx.outlets.alexa_rank(&article.outlet),
        reach: reach(&postings, &replies),
        ..IndicatorVector::default()
    };
    let signals = match ctx.stance {
        Some(model) => social_signals(&article.title, &postings, &replies, model, ctx.embeddings),
        None => sentiment_only(&postings, &replies),
    };
    v.set_social(signals);
    Ok(v)
}

fn sentiment_only(postings: &[&Posting], replies: &[&Reply]) -> SocialSignals {
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let ps: Vec<_> = postings.iter().map(|p| sentiment(&analyze(&p.text))).collect();
    let rs: Vec<_> = replies.iter().map(|r| sentiment(&analyze(&r.text))).collect();
    SocialSignals {
        tweet_subjectivity: mean(ps.iter().map(|s| s.subjectivity).collect()),
        tweet_polarity: mean(ps.iter().map(|s| s.polarity).collect()),
        reply_subjectivity: mean(rs.iter().map(|s| s.subjectivity).collect()),
        reply_polarity: mean(rs.iter().map(|s| s.polarity).collect()),
        ..SocialSignals::default()
    }
}

/// Indicators for every article still in the graph, sorted by article id.
pub fn compute_all(ctx: &IndicatorContext<'_>) -> Result<Vec<IndicatorVector>, IndicatorError> {
    let articles: Vec<&Article> = ctx
        .corpus
        .articles
        .iter()
        .filter(|a| ctx.graph.kind(&a.id) == Some(NodeKind::Article))
        .collect();
    let mut out: Vec<IndicatorVector> = articles
        .par_iter()
        .map(|a| compute_indicators(a, ctx))
        .collect::<Result<_, _>>()?;
    out.sort_by(|a, b| a.article_id.cmp(&b.article_id));
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeakLabels {
    pub labels: BTreeMap<String, u8>,
    /// Articles whose outlet has no tier.
    pub excluded: Vec<String>,
}

/// Every article inherits its outlet's tier.
pub fn weak_labels<'a>(
    articles: impl IntoIterator<Item = &'a Article>,
    outlets: &OutletTable,
) -> Result<WeakLabels, IndicatorError> {
    let mut out = WeakLabels::default();
    for a in articles {
        match outlets.tier(&a.outlet) {
            Some(t) => {
                out.labels.insert(a.id.clone(), t.value());
            }
            None => out.excluded.push(a.id.clone()),
        }
    }
    if out.labels.is_empty() {
        return Err(IndicatorError::NoLabeledArticles);
    }
    out.excluded.sort();
    Ok(out)
}

/// Forest over the indicator encoding: absent values take the training
/// median and raise a companion flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityModel {
    pub medians: Vec<f64>,
    pub forest: Forest,
}

/// Feature names of the learner encoding: the indicators, then the flags.
pub fn encoding_names() -> Vec<String> {
    INDICATOR_NAMES
        .iter()
        .map(|n| n.to_string())
        .chain(OPTIONAL_INDICATORS.iter().map(|n| format!("{n}_missing")))
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

impl QualityModel {
    pub fn encode(&self, v: &IndicatorVector) -> Vec<f64> {
        encode_with(v, &self.medians)
    }

    /// Expected tier under the forest's class distribution, rounded to 0.1.
    pub fn score(&self, v: &IndicatorVector) -> f64 {
        let proba = self.forest.predict_proba(&self.encode(v));
        let expected: f64 = self
            .forest
            .class_labels()
            .iter()
            .zip(&proba)
            .map(|(&l, p)| f64::from(l) * p)
            .sum();
        ((expected * 10.0).round() / 10.0).clamp(1.0, 5.0)
    }
}

fn encode_with(v: &IndicatorVector, medians: &[f64]) -> Vec<f64> {
    let values = v.values();
    let mut x: Vec<f64> = values.iter().zip(medians).map(|(v, m)| v.unwrap_or(*m)).collect();
    for name in OPTIONAL_INDICATORS {
        let i = INDICATOR_NAMES.iter().position(|n| *n == name).unwrap_or(0);
        x.push(if values[i].is_none() { 1.0 } else { 0.0 });
    }
    x
}

/// Trains on the vectors that have a weak label; the rest are ignored.
pub fn train_quality(
    vectors: &[IndicatorVector],
    labels: &BTreeMap<String, u8>,
    params: ForestParams,
) -> Result<QualityModel, IndicatorError> {
    let mut rows: Vec<(&IndicatorVector, u8)> = vectors
        .iter()
        .filter_map(|v| labels.get(&v.article_id).map(|&l| (v, l)))
        .collect();
    rows.sort_by(|a, b| a.0.article_id.cmp(&b.0.article_id));
    let tiers: BTreeSet<u8> = rows.iter().map(|r| r.1).collect();
    match tiers.len() {
        0 => return Err(IndicatorError::NoLabeledArticles),
        1 => return Err(IndicatorError::SingleTier(*tiers.first().unwrap_or(&0))),
        _ => {}
    }
    let medians: Vec<f64> = (0..INDICATOR_NAMES.len())
        .map(|i| median(&mut rows.iter().filter_map(|(v, _)| v.values()[i]).collect::<Vec<_>>()))
        .collect();
    let x: Vec<Vec<f64>> = rows.iter().map(|(v, _)| encode_with(v, &medians)).collect();
    let y: Vec<u32> = rows.iter().map(|(_, l)| u32::from(*l)).collect();
    Ok(QualityModel {
        medians,
        forest: Forest::fit(&x, &y, params)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrimination {
    pub indicator: String,
    pub f_statistic: f64,
    pub p_value: f64,
    pub stars: String,
}

/// One-way ANOVA of every numeric indicator across groups, most
/// discriminating first. Absent values are left out; an indicator with a
/// group of fewer than two values gets F = 0, p = 1.
pub fn discriminate(vectors: &[IndicatorVector], groups: &BTreeMap<String, u32>) -> Vec<Discrimination> {
    let mut out: Vec<Discrimination> = INDICATOR_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut by_group: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
            for v in vectors {
                if let (Some(g), Some(x)) = (groups.get(&v.article_id), v.values()[i]) {
                    by_group.entry(*g).or_default().push(x);
                }
            }
            let samples: Vec<Vec<f64>> = by_group.into_values().collect();
            let (f, p) = match anova_f(&samples) {
                Ok(r) => (r.f_statistic, r.p_value),
                Err(_) => (0.0, 1.0),
            };
            Discrimination {
                indicator: name.to_string(),
                f_statistic: f,
                p_value: p,
                stars: significance_stars(p).to_string(),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.p_value
            .total_cmp(&b.p_value)
            .then(b.f_statistic.total_cmp(&a.f_statistic))
            .then(a.indicator.cmp(&b.indicator))
    });
    out
}

/// Quintile of `value` against the reference: 1 plus the number of
/// nearest-rank 20/40/60/80th percentiles it exceeds.
pub fn quintile_stars(value: f64, reference: &[f64]) -> u8 {
    let mut sorted: Vec<f64> = reference.iter().copied().filter(|x| !x.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let cuts = [20.0, 40.0, 60.0, 80.0].map(|p| social::nearest_rank(&sorted, p));
    1 + cuts.iter().flatten().filter(|&&c| value > c).count() as u8
}

/// Title-sentiment face for the review panel.
pub fn sentiment_face(polarity: f64) -> &'static str {
    if polarity >= 0.5 {
        "++"
    } else if polarity >= 0.1 {
        "+"
    } else if polarity > -0.1 {
        "0"
    } else if polarity > -0.5 {
        "-"
    } else {
        "--"
    }
}

/// The seven indicators shown to raters, with their legend text.
pub const LEGEND: [(&str, &str); 7] = [
    (
        "site_visitors",
        "Visitors per day of this news website (more visitors = more stars)",
    ),
    (
        "scientific_mentions",
        "Mentions of universities and scientific portals (more mentions = more stars)",
    ),
    ("article_length", "Length of the article (longer article = more stars)"),
    (
        "quote_count",
        "Number of quotes in the article (more quotes = more stars)",
    ),
    (
        "reply_count",
        "Number of replies to tweets about this article (more replies = more stars)",
    ),
    (
        "bylined",
        "Article signed by its author (yes = signed, no = not signed)",
    ),
    (
        "title_sentiment",
        "Sentiment of the article's title (++ = most positive, -- = most negative)",
    ),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PanelValue {
    Stars(u8),
    Signed(bool),
    Face(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelRow {
    pub name: String,
    pub legend: String,
    #[serde(flatten)]
    pub value: PanelValue,
}

/// Reference distributions for the five starred panel rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StarReference {
    /// Negated ranks: fewer visitors means a larger rank.
    pub visitors: Vec<f64>,
    pub mentions: Vec<f64>,
    pub length: Vec<f64>,
    pub quotes: Vec<f64>,
    pub replies: Vec<f64>,
}

impl StarReference {
    pub fn new(vectors: &[IndicatorVector]) -> StarReference {
        StarReference {
            visitors: vectors
                .iter()
                .filter_map(|v| v.alexa_rank)
                .map(|r| -(r as f64))
                .collect(),
            mentions: vectors.iter().map(|v| v.n_scientific_mentions as f64).collect(),
            length: vectors.iter().map(|v| v.word_count as f64).collect(),
            quotes: vectors.iter().map(|v| v.n_total_quotes as f64).collect(),
            replies: vectors.iter().map(|v| v.reach.n_replies as f64).collect(),
        }
    }

    /// Panel rows in legend order. An outlet without a traffic rank gets one star.
    pub fn panel(&self, v: &IndicatorVector) -> Vec<PanelRow> {
        let values = [
            PanelValue::Stars(v.alexa_rank.map_or(1, |r| quintile_stars(-(r as f64), &self.visitors))),
            PanelValue::Stars(quintile_stars(v.n_scientific_mentions as f64, &self.mentions)),
            PanelValue::Stars(quintile_stars(v.word_count as f64, &self.length)),
            PanelValue::Stars(quintile_stars(v.n_total_quotes as f64, &self.quotes)),
            PanelValue::Stars(quintile_stars(v.reach.n_replies as f64, &self.replies)),
            PanelValue::Signed(v.bylined),
            PanelValue::Face(sentiment_face(v.title_polarity).to_string()),
        ];
        LEGEND
            .iter()
            .zip(values)
            .map(|((name, legend), value)| PanelRow {
                name: name.to_string(),
                legend: legend.to_string(),
                value,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    WithIndicators,
    WithoutIndicators,
}

impl Condition {
    /// Raters are split between conditions by the parity of a hash of their id.
    pub fn for_rater(rater_id: &str) -> Condition {
        if fnv1a(rater_id.as_bytes()) % 2 == 0 {
            Condition::WithIndicators
        } else {
            Condition::WithoutIndicators
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::WithIndicators => "with_indicators",
            Condition::WithoutIndicators => "without_indicators",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub article_id: String,
    pub rater_id: String,
    pub condition: Condition,
    pub score: u8,
    /// Unix seconds.
    #[serde(default)]
    pub timestamp: i64,
}

impl RatingRecord {
    pub fn validate(&self) -> Result<(), IndicatorError> {
        if (1..=5).contains(&self.score) {
            Ok(())
        } else {
            Err(IndicatorError::InvalidScore(self.score))
        }
    }

    /// At most one rating per rater and article is kept.
    pub fn key(&self) -> (&str, &str) {
        (&self.rater_id, &self.article_id)
    }
}

/// Reads a JSONL ratings store, skipping blank lines.
pub fn parse_ratings(text: &str) -> Result<Vec<RatingRecord>, IndicatorError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let r: RatingRecord = serde_json::from_str(l).map_err(|e| IndicatorError::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            r.validate().map_err(|e| IndicatorError::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            Ok(r)
        })
        .collect()
}

/// Two expert scores per article.
pub type ExpertLabels = BTreeMap<String, (u8, u8)>;

/// Reads `article_id<TAB>expert_a<TAB>expert_b`; header and `#` lines skipped.
pub fn parse_expert_labels(text: &str) -> Result<ExpertLabels, IndicatorError> {
    let mut out = ExpertLabels::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("article_id")) {
            continue;
        }
        let err = |reason: &str| IndicatorError::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [id, a, b] = cells[..] else {
            return Err(err("expected three tab-separated columns"));
        };
        let score = |s: &str| -> Result<u8, IndicatorError> {
            match s.parse::<u8>() {
                Ok(v) if (1..=5).contains(&v) => Ok(v),
                _ => Err(err("expert score must be 1..5")),
            }
        };
        out.insert(id.to_string(), (score(a)?, score(b)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Strong,
    Weak,
    Disagreement,
}

impl Agreement {
    pub fn of(a: u8, b: u8) -> Agreement {
        match a.abs_diff(b) {
            0 => Agreement::Strong,
            1 => Agreement::Weak,
            _ => Agreement::Disagreement,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Agreement::Strong => "strong_agreement",
            Agreement::Weak => "weak_agreement",
            Agreement::Disagreement => "disagreement",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    /// Agreement bucket, or `all_articles`.
    pub bucket: String,
    pub n_articles: usize,
    /// RMSE per column; `None` when no article in the bucket has a value.
    pub without_indicators: Option<f64>,
    pub with_indicators: Option<f64>,
    pub automated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub rows: Vec<RmseRow>,
    pub n_ratings: usize,
    pub dropped_raters: Vec<String>,
}

impl RmseReport {
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        let mut out = String::from("bucket,n_articles,without_indicators,with_indicators,automated\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.bucket,
                r.n_articles,
                cell(r.without_indicators),
                cell(r.with_indicators),
                cell(r.automated)
            );
        }
        out
    }
}

/// Raters whose mean absolute deviation from the per-article crowd mean is
/// more than twice the median rater's.
pub fn outlier_raters(ratings: &[&RatingRecord]) -> BTreeSet<String> {
    let mut sums: BTreeMap<(&str, Condition), (f64, usize)> = BTreeMap::new();
    for r in ratings {
        let e = sums.entry((r.article_id.as_str(), r.condition)).or_default();
        e.0 += f64::from(r.score);
        e.1 += 1;
    }
    let mut dev: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in ratings {
        let (s, n) = sums[&(r.article_id.as_str(), r.condition)];
        let e = dev.entry(r.rater_id.as_str()).or_default();
        e.0 += (f64::from(r.score) - s / n as f64).abs();
        e.1 += 1;
    }
    let mad: BTreeMap<&str, f64> = dev.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();
    let med = median(&mut mad.values().copied().collect::<Vec<_>>());
    mad.into_iter()
        .filter(|(_, m)| *m > 2.0 * med)
        .map(|(k, _)| k.to_string())
        .collect()
}

/// Table-3-shaped comparison of crowd and automated scores against the
/// expert mean, by expert agreement.
pub fn rmse_report(
    ratings: &[RatingRecord],
    experts: &ExpertLabels,
    automated: Option<&BTreeMap<String, f64>>,
) -> Result<RmseReport, IndicatorError> {
    if experts.is_empty() {
        return Err(IndicatorError::NoExpertLabels);
    }
    let mut seen = BTreeSet::new();
    let unique: Vec<&RatingRecord> = ratings.iter().filter(|r| seen.insert(r.key())).collect();
    if let Some(r) = unique.iter().find(|r| !experts.contains_key(&r.article_id)) {
        return Err(IndicatorError::MissingExpertLabels(r.article_id.clone()));
    }
    let dropped = outlier_raters(&unique);
    let mut crowd: BTreeMap<(Condition, &str), (f64, usize)> = BTreeMap::new();
    for r in unique.iter().filter(|r| !dropped.contains(&r.rater_id)) {
        let e = crowd.entry((r.condition, r.article_id.as_str())).or_default();
        e.0 += f64::from(r.score);
        e.1 += 1;
    }
    let column = |ids: &[&str], value: &dyn Fn(&str) -> Option<f64>| -> Option<f64> {
        let (pred, truth): (Vec<f64>, Vec<f64>) = ids
            .iter()
            .filter_map(|id| {
                let (a, b) = experts[*id];
                value(id).map(|v| (v, (f64::from(a) + f64::from(b)) / 2.0))
            })
            .unzip();
        rmse(&pred, &truth).ok()
    };
    let crowd = &crowd;
    let crowd_mean = |c: Condition| move |id: &str| crowd.get(&(c, id)).map(|(s, n)| s / *n as f64);
    let auto = |id: &str| automated.and_then(|m| m.get(id).copied());
    let mut buckets: BTreeMap<Agreement, Vec<&str>> = BTreeMap::new();
    for (id, (a, b)) in experts {
        buckets.entry(Agreement::of(*a, *b)).or_default().push(id);
    }
    let all: Vec<&str> = experts.keys().map(String::as_str).collect();
    let mut rows = Vec::new();
    let groups = [Agreement::Strong, Agreement::Weak, Agreement::Disagreement]
        .into_iter()
        .map(|b| (b.as_str(), buckets.remove(&b).unwrap_or_default()))
        .chain(std::iter::once(("all_articles", all)));
    for (name, ids) in groups {
        rows.push(RmseRow {
            bucket: name.to_string(),
            n_articles: ids.len(),
            without_indicators: column(&ids, &crowd_mean(Condition::WithoutIndicators)),
            with_indicators: column(&ids, &crowd_mean(Condition::WithIndicators)),
            automated: column(&ids, &auto),
        });
    }
    Ok(RmseReport {
        rows,
        n_ratings: unique.len(),
        dropped_raters: dropped.into_iter().collect(),
    })
}
