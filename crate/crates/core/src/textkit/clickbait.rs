use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::analyze;
use crate::learn::{Forest, ForestParams, LearnError};

static BUNDLED: &str = include_str!("../../data/headlines.tsv");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClickbaitError {
    #[error("headline model has not been trained")]
    Untrained,
    #[error("headline line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Parses `label<TAB>title` lines; labels are `clickbait`/`news` or `1`/`0`.
pub fn parse_headlines(text: &str) -> Result<Vec<(bool, String)>, ClickbaitError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: &str| ClickbaitError::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let (label, title) = line.split_once('\t').ok_or_else(|| err("missing tab"))?;
        let label = match label.trim().to_lowercase().as_str() {
            "clickbait" | "1" => true,
            "news" | "0" => false,
            other => return Err(err(&format!("unknown label `{other}`"))),
        };
        out.push((label, title.trim().to_string()));
    }
    Ok(out)
}

/// Bag-of-words headline classifier.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HeadlineModel {
    vocab: Vec<String>,
    forest: Option<Forest>,
    prior: f64,
}

fn unigrams(title: &str) -> BTreeSet<String> {
    analyze(title).words().map(|w| w.lower.clone()).collect()
}

impl HeadlineModel {
    pub fn train(examples: &[(bool, String)], params: ForestParams) -> Result<HeadlineModel, ClickbaitError> {
        if examples.is_empty() {
            return Err(LearnError::Empty.into());
        }
        let bags: Vec<BTreeSet<String>> = examples.iter().map(|(_, t)| unigrams(t)).collect();
        let vocab: Vec<String> = bags
            .iter()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let x: Vec<Vec<f64>> = bags.iter().map(|b| encode(&vocab, b)).collect();
        let y: Vec<u32> = examples.iter().map(|(l, _)| *l as u32).collect();
        let forest = Forest::fit(&x, &y, params)?;
        let prior = y.iter().filter(|&&l| l == 1).count() as f64 / y.len() as f64;
        Ok(HeadlineModel {
            vocab,
            forest: Some(forest),
            prior,
        })
    }

    /// Model trained on the bundled headline set, cached per process.
    pub fn bundled() -> &'static HeadlineModel {
        static MODEL: OnceLock<HeadlineModel> = OnceLock::new();
        MODEL.get_or_init(|| {
            let rows = parse_headlines(BUNDLED).expect("bundled headlines parse");
            HeadlineModel::train(&rows, ForestParams::with_seed(0x636c_6963_6b62)).expect("bundled headlines train")
        })
    }

    pub fn is_trained(&self) -> bool {
        self.forest.is_some()
    }

    /// Share of clickbait rows in the training set.
    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }
}

fn encode(vocab: &[String], bag: &BTreeSet<String>) -> Vec<f64> {
    vocab.iter().map(|w| bag.contains(w) as u8 as f64).collect()
}

/// Probability that `title` is clickbait. Titles with no known words get the prior.
pub fn clickbait_score(title: &str, model: &HeadlineModel) -> Result<f64, ClickbaitError> {
    let forest = model.forest.as_ref().ok_or(ClickbaitError::Untrained)?;
    let bag = unigrams(title);
    let x = encode(&model.vocab, &bag);
    if x.iter().all(|&v| v == 0.0) {
        return Ok(model.prior);
    }
    Ok(forest.proba_of(&x, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_parses() {
        let rows = parse_headlines(BUNDLED).unwrap();
        assert_eq!(rows.len(), 80);
        assert_eq!(rows.iter().filter(|r| r.0).count(), 40);
    }

    #[test]
    fn training_clickbait_headline_scores_high() {
        let rows = parse_headlines(BUNDLED).unwrap();
        let model = HeadlineModel::bundled();
        for (label, title) in rows.iter().filter(|r| r.0) {
            assert!(*label);
            assert!(clickbait_score(title, model).unwrap() > 0.5, "{title}");
        }
    }

    #[test]
    fn empty_title_gets_prior() {
        let model = HeadlineModel::bundled();
        assert_eq!(clickbait_score("", model).unwrap(), 0.5);
        let rows = vec![
            (true, "wow amazing".to_string()),
            (false, "study finds".into()),
            (false, "trial finds".into()),
        ];
        let m = HeadlineModel::train(&rows, ForestParams::with_seed(3)).unwrap();
        assert!((clickbait_score("", &m).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((clickbait_score("zzz qqq", &m).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn untrained_is_an_error() {
        assert_eq!(
            clickbait_score("x", &HeadlineModel::default()),
            Err(ClickbaitError::Untrained)
        );
    }

    #[test]
    fn scores_are_probabilities() {
        let model = HeadlineModel::bundled();
        for t in [
            "Study finds coffee safe",
            "You won't believe this",
            "liver",
            "The Truth",
        ] {
            let s = clickbait_score(t, model).unwrap();
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn bad_label_is_reported() {
        assert!(matches!(
            parse_headlines("maybe\tx"),
            Err(ClickbaitError::Parse { line: 1, .. })
        ));
    }
}
