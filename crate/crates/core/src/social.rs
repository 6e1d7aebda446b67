//! Reach indicators and stance of the postings and replies around an article.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Posting, Reply};
use crate::learn::{binary_rates, cross_val_proba, Forest, ForestParams, LearnError};
use crate::textkit::{analyze, cosine, doc_vector, sentiment, EmbeddingTable, Lexicons, TokenKind, TokenizedText};

/// Minimum training examples per four-class label.
pub const MIN_PER_CLASS: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReachIndicators {
    pub n_postings: u64,
    pub n_likes: u64,
    pub n_retweets: u64,
    pub n_replies: u64,
    pub sum_followers: u64,
    pub sum_followees: u64,
    pub n_countries: u64,
    pub shelf_life_hours: f64,
}

/// Nearest-rank percentile of sorted values: the value at rank ceil(p/100 * n).
pub fn nearest_rank<T: Copy>(sorted: &[T], p: f64) -> Option<T> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Hours between the 5th and 95th percentile posting timestamps.
pub fn shelf_life_hours(timestamps: &[i64]) -> f64 {
    if timestamps.len() < 2 {
        return 0.0;
    }
    let mut ts = timestamps.to_vec();
    ts.sort_unstable();
    let lo = nearest_rank(&ts, 5.0).unwrap_or(0);
    let hi = nearest_rank(&ts, 95.0).unwrap_or(0);
    (hi - lo) as f64 / 3600.0
}

/// `postings` are those linked to the article; `replies` are replies to them.
pub fn reach(postings: &[&Posting], replies: &[&Reply]) -> ReachIndicators {
    let countries: BTreeSet<&str> = postings
        .iter()
        .filter_map(|p| p.country.as_deref())
        .filter(|c| !c.trim().is_empty())
        .collect();
    let stamps: Vec<i64> = postings.iter().map(|p| p.timestamp).collect();
    ReachIndicators {
        n_postings: postings.len() as u64,
        n_likes: postings.iter().map(|p| p.likes).sum(),
        n_retweets: postings.iter().map(|p| p.retweets).sum(),
        n_replies: replies.len() as u64,
        sum_followers: postings.iter().map(|p| p.followers).sum(),
        sum_followees: postings.iter().map(|p| p.followees).sum(),
        n_countries: countries.len() as u64,
        shelf_life_hours: shelf_life_hours(&stamps),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StanceLabel {
    Supporting,
    Commenting,
    Contradicting,
    Questioning,
}

impl StanceLabel {
    pub const ALL: [StanceLabel; 4] = [
        StanceLabel::Supporting,
        StanceLabel::Commenting,
        StanceLabel::Contradicting,
        StanceLabel::Questioning,
    ];

    /// +1 for supporting or commenting, -1 for contradicting or questioning.
    pub fn binary(self) -> i8 {
        match self {
            StanceLabel::Supporting | StanceLabel::Commenting => 1,
            StanceLabel::Contradicting | StanceLabel::Questioning => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Supporting => "supporting",
            StanceLabel::Commenting => "commenting",
            StanceLabel::Contradicting => "contradicting",
            StanceLabel::Questioning => "questioning",
        }
    }

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<StanceLabel> {
        StanceLabel::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StanceLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| format!("unknown stance label {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StanceFeatures {
    pub n_words: u32,
    pub n_positive: u32,
    pub n_negative: u32,
    pub n_negations: u32,
    pub n_urls: u32,
    pub n_question_marks: u32,
    pub n_exclamation_marks: u32,
    pub sim_to_parent: f64,
    pub reply_polarity: f64,
    pub parent_polarity: f64,
}

impl StanceFeatures {
    pub const NAMES: [&'static str; 10] = [
        "n_words",
        "n_positive",
        "n_negative",
        "n_negations",
        "n_urls",
        "n_question_marks",
        "n_exclamation_marks",
        "sim_to_parent",
        "reply_polarity",
        "parent_polarity",
    ];

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            f64::from(self.n_words),
            f64::from(self.n_positive),
            f64::from(self.n_negative),
            f64::from(self.n_negations),
            f64::from(self.n_urls),
            f64::from(self.n_question_marks),
            f64::from(self.n_exclamation_marks),
            self.sim_to_parent,
            self.reply_polarity,
            self.parent_polarity,
        ]
    }
}

fn count_char(t: &TokenizedText, c: char) -> u32 {
    t.tokens
        .iter()
        .filter(|tok| tok.kind == TokenKind::Punct)
        .map(|tok| tok.surface.chars().filter(|&x| x == c).count() as u32)
        .sum()
}

/// Features of `reply` as a reaction to `parent`. For postings the parent
/// is the article title.
pub fn stance_features(reply: &TokenizedText, parent: &TokenizedText, table: &EmbeddingTable) -> StanceFeatures {
    let lex = Lexicons::bundled();
    let mut f = StanceFeatures::default();
    for w in reply.words() {
        f.n_words += 1;
        if lex.positive.contains(&w.lower) {
            f.n_positive += 1;
        } else if lex.negative.contains(&w.lower) {
            f.n_negative += 1;
        }
        if lex.is_negation(&w.lower) {
            f.n_negations += 1;
        }
    }
    f.n_urls = reply.tokens.iter().filter(|t| t.kind == TokenKind::Url).count() as u32;
    f.n_question_marks = count_char(reply, '?');
    f.n_exclamation_marks = count_char(reply, '!');
    f.sim_to_parent = cosine(&doc_vector(reply, table), &doc_vector(parent, table));
    f.reply_polarity = sentiment(reply).polarity;
    f.parent_polarity = sentiment(parent).polarity;
    f
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StanceError {
    #[error("label {label} has {found} training examples, need at least {MIN_PER_CLASS}")]
    MissingClass { label: StanceLabel, found: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Reads `reply_id<TAB>label` rows. Rows labelled `not-related` are dropped;
/// a header row starting with `reply_id` and `#` comments are skipped.
pub fn parse_stance_labels(text: &str) -> Result<Vec<(String, StanceLabel)>, StanceError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("reply_id")) {
            continue;
        }
        let (id, label) = line.split_once('\t').ok_or_else(|| StanceError::Parse {
            line: i + 1,
            reason: "expected two tab-separated columns".into(),
        })?;
        if label.trim().eq_ignore_ascii_case("not-related") {
            continue;
        }
        let label = label
            .parse()
            .map_err(|reason| StanceError::Parse { line: i + 1, reason })?;
        out.push((id.trim().to_string(), label));
    }
    Ok(out)
}

/// Features for each labelled reply whose reply and parent posting are known.
/// Unknown ids are skipped. The output is sorted by reply id.
pub fn labeled_examples(
    labels: &[(String, StanceLabel)],
    replies: &[Reply],
    postings: &[Posting],
    table: &EmbeddingTable,
) -> Vec<(String, StanceFeatures, StanceLabel)> {
    let replies: BTreeMap<&str, &Reply> = replies.iter().map(|r| (r.id.as_str(), r)).collect();
    let postings: BTreeMap<&str, &Posting> = postings.iter().map(|p| (p.id.as_str(), p)).collect();
    let labels: BTreeMap<&str, StanceLabel> = labels.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    let rows: Vec<(&str, &Reply, &Posting, StanceLabel)> = labels
        .iter()
        .filter_map(|(id, l)| {
            let r = replies.get(id)?;
            let p = postings.get(r.parent_id.as_str())?;
            Some((*id, *r, *p, *l))
        })
        .collect();
    rows.par_iter()
        .map(|(id, r, p, l)| {
            let f = stance_features(&analyze(&r.text), &analyze(&p.text), table);
            (id.to_string(), f, *l)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceModel {
    pub forest: Forest,
}

impl StanceModel {
    pub fn classify(&self, features: &StanceFeatures) -> StanceLabel {
        StanceLabel::from_code(self.forest.predict(&features.to_vec())).unwrap_or(StanceLabel::Commenting)
    }
}

pub fn train_stance(
    examples: &[(StanceFeatures, StanceLabel)],
    params: ForestParams,
) -> Result<StanceModel, StanceError> {
    for label in StanceLabel::ALL {
        let found = examples.iter().filter(|(_, l)| *l == label).count();
        if found < MIN_PER_CLASS {
            return Err(StanceError::MissingClass { label, found });
        }
    }
    let x: Vec<Vec<f64>> = examples.iter().map(|(f, _)| f.to_vec()).collect();
    let y: Vec<u32> = examples.iter().map(|(_, l)| l.code()).collect();
    Ok(StanceModel {
        forest: Forest::fit(&x, &y, params)?,
    })
}

pub fn classify(
    model: &StanceModel,
    reply: &TokenizedText,
    parent: &TokenizedText,
    table: &EmbeddingTable,
) -> StanceLabel {
    model.classify(&stance_features(reply, parent, table))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StanceEvaluation {
    pub n_examples: usize,
    pub four_class_accuracy: f64,
    /// Supporting or commenting is the positive class.
    pub binary_accuracy: f64,
    pub tpr: f64,
    pub tnr: f64,
}

/// Stratified k-fold cross-validation of the four-class model, also scored
/// after collapsing predictions and labels to the binary stance.
pub fn evaluate_stance(
    examples: &[(StanceFeatures, StanceLabel)],
    folds: usize,
    params: ForestParams,
) -> Result<StanceEvaluation, StanceError> {
    let x: Vec<Vec<f64>> = examples.iter().map(|(f, _)| f.to_vec()).collect();
    let y: Vec<u32> = examples.iter().map(|(_, l)| l.code()).collect();
    let (labels, proba) = cross_val_proba(&x, &y, folds, params)?;
    let predicted: Vec<StanceLabel> = proba
        .iter()
        .map(|p| {
            let best = (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b });
            StanceLabel::from_code(labels[best]).unwrap_or(StanceLabel::Commenting)
        })
        .collect();
    let correct = predicted.iter().zip(examples).filter(|(p, (_, l))| *p == l).count();
    let pb: Vec<bool> = predicted.iter().map(|p| p.binary() > 0).collect();
    let ab: Vec<bool> = examples.iter().map(|(_, l)| l.binary() > 0).collect();
    let rates = binary_rates(&pb, &ab);
    Ok(StanceEvaluation {
        n_examples: examples.len(),
        four_class_accuracy: if examples.is_empty() {
            0.0
        } else {
            correct as f64 / examples.len() as f64
        },
        binary_accuracy: rates.accuracy,
        tpr: rates.tpr,
        tnr: rates.tnr,
    })
}

/// A classified item and its popularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedStance {
    pub stance: StanceLabel,
    pub likes: u64,
    pub retweets: u64,
}

impl WeightedStance {
    pub fn weight(&self) -> f64 {
        1.0 + self.likes as f64 + self.retweets as f64
    }
}

/// Weighted mean of binary stances with weight 1 + likes + retweets; 0 when empty.
pub fn aggregate_stance(items: &[WeightedStance]) -> f64 {
    let total: f64 = items.iter().map(WeightedStance::weight).sum();
    if total == 0.0 {
        return 0.0;
    }
    let s: f64 = items.iter().map(|i| f64::from(i.stance.binary()) * i.weight()).sum();
    (s / total).clamp(-1.0, 1.0)
}

/// Stance and mean sentiment of the postings and of the replies around one article.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SocialSignals {
    pub tweet_stance: f64,
    pub reply_stance: f64,
    pub tweet_subjectivity: f64,
    pub tweet_polarity: f64,
    pub reply_subjectivity: f64,
    pub reply_polarity: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Postings are classified against the article title, replies against their
/// parent posting. One stance model serves both.
pub fn social_signals(
    title: &str,
    postings: &[&Posting],
    replies: &[&Reply],
    model: &StanceModel,
    table: &EmbeddingTable,
) -> SocialSignals {
    let title = analyze(title);
    let posting_text: BTreeMap<&str, TokenizedText> =
        postings.iter().map(|p| (p.id.as_str(), analyze(&p.text))).collect();
    let mut tweets = Vec::new();
    let mut tweet_sent = Vec::new();
    for p in postings {
        let t = &posting_text[p.id.as_str()];
        tweets.push(WeightedStance {
            stance: classify(model, t, &title, table),
            likes: p.likes,
            retweets: p.retweets,
        });
        tweet_sent.push(sentiment(t));
    }
    let mut reps = Vec::new();
    let mut reply_sent = Vec::new();
    for r in replies {
        let t = analyze(&r.text);
        let parent = posting_text.get(r.parent_id.as_str()).unwrap_or(&title);
        reps.push(WeightedStance {
            stance: classify(model, &t, parent, table),
            likes: r.likes,
            retweets: r.retweets,
        });
        reply_sent.push(sentiment(&t));
    }
    SocialSignals {
        tweet_stance: aggregate_stance(&tweets),
        reply_stance: aggregate_stance(&reps),
        tweet_subjectivity: mean(tweet_sent.iter().map(|s| s.subjectivity)),
        tweet_polarity: mean(tweet_sent.iter().map(|s| s.polarity)),
        reply_subjectivity: mean(reply_sent.iter().map(|s| s.subjectivity)),
        reply_polarity: mean(reply_sent.iter().map(|s| s.polarity)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn posting(id: &str, ts: i64, country: Option<&str>) -> Posting {
        Posting {
            id: id.into(),
            author_id: "u".into(),
            text: "x".into(),
            urls: vec![],
            likes: 2,
            retweets: 1,
            followers: 10,
            followees: 5,
            country: country.map(str::to_string),
            timestamp: ts,
            reply_ids: vec![],
        }
    }

    #[test]
    fn reach_counts() {
        let ps = [
            posting("a", 1000, Some("US")),
            posting("b", 2000, Some("US")),
            posting("c", 3000, Some("FR")),
            posting("d", 4000, None),
        ];
        let refs: Vec<&Posting> = ps.iter().collect();
        let r = reach(&refs, &[]);
        assert_eq!(r.n_postings, 4);
        assert_eq!(r.n_countries, 2);
        assert_eq!(r.n_likes, 8);
        assert_eq!(r.sum_followers, 40);
        let single = reach(&refs[..1], &[]);
        assert_eq!(single.shelf_life_hours, 0.0);
        assert_eq!(single.n_countries, 1);
    }

    #[test]
    fn shelf_life_nearest_rank() {
        // 20 postings, one every 5 hours from hour 0 to hour 95.
        let ts: Vec<i64> = (0..20).map(|i| i * 5 * 3600).collect();
        // rank ceil(0.05 * 20) = 1 -> hour 0; rank ceil(0.95 * 20) = 19 -> hour 90.
        assert_eq!(shelf_life_hours(&ts), 90.0);
        assert_eq!(nearest_rank(&[1, 2, 3], 50.0), Some(2));
    }

    #[test]
    fn feature_counts() {
        let table = EmbeddingTable::new(2, [("wrong".to_string(), vec![1.0, 0.0])]);
        let f = stance_features(
            &analyze("No, this is wrong. Source??"),
            &analyze("Coffee cures"),
            &table,
        );
        assert!(f.n_negations >= 1);
        assert_eq!(f.n_question_marks, 2);
        assert_eq!(f.n_exclamation_marks, 0);
        assert_eq!(f.sim_to_parent, 0.0);
        let same = stance_features(&analyze("this is wrong"), &analyze("this is wrong"), &table);
        assert_eq!(same.sim_to_parent, 1.0);
        let empty = stance_features(&analyze(""), &analyze("this is wrong"), &table);
        assert_eq!(empty.to_vec()[..8], [0.0; 8]);
    }

    #[test]
    fn binary_follows_four_class() {
        for l in StanceLabel::ALL {
            let expected = if matches!(l, StanceLabel::Supporting | StanceLabel::Commenting) {
                1
            } else {
                -1
            };
            assert_eq!(l.binary(), expected);
            assert_eq!(StanceLabel::from_code(l.code()), Some(l));
            assert_eq!(l.as_str().parse::<StanceLabel>(), Ok(l));
        }
    }

    #[test]
    fn aggregation() {
        let w = |stance, likes| WeightedStance {
            stance,
            likes,
            retweets: 0,
        };
        let items = [
            w(StanceLabel::Supporting, 2),
            w(StanceLabel::Commenting, 0),
            w(StanceLabel::Questioning, 3),
        ];
        assert_eq!(aggregate_stance(&items), 0.0);
        assert_eq!(aggregate_stance(&[]), 0.0);
        assert_eq!(
            aggregate_stance(&[w(StanceLabel::Supporting, 9), w(StanceLabel::Commenting, 0)]),
            1.0
        );
    }

    #[test]
    fn label_file() {
        let text = "reply_id\tlabel\nr1\tsupporting\nr2\tnot-related\nr3\tQuestioning\n";
        let got = parse_stance_labels(text).unwrap();
        assert_eq!(
            got,
            vec![
                ("r1".into(), StanceLabel::Supporting),
                ("r3".into(), StanceLabel::Questioning)
            ]
        );
        assert!(parse_stance_labels("r1\tangry\n").is_err());
        assert!(parse_stance_labels("r1 supporting\n").is_err());
    }

    #[test]
    fn training_needs_every_class() {
        let f = StanceFeatures::default();
        let only: Vec<_> = (0..10).map(|_| (f, StanceLabel::Supporting)).collect();
        assert!(matches!(
            train_stance(&only, ForestParams::default()),
            Err(StanceError::MissingClass { .. })
        ));
        let mut all = Vec::new();
        for (i, l) in StanceLabel::ALL.into_iter().enumerate() {
            for j in 0..4 {
                let f = StanceFeatures {
                    n_words: (i * 10 + j) as u32,
                    ..Default::default()
                };
                all.push((f, l));
            }
        }
        let params = ForestParams {
            n_trees: 10,
            ..ForestParams::default()
        };
        let m = train_stance(&all, params).unwrap();
        let m2 = train_stance(&all, params).unwrap();
        for (f, _) in &all {
            assert_eq!(m.classify(f), m2.classify(f));
        }
    }
}
