use serde::{Deserialize, Serialize};

use super::{Lexicons, Token, TokenizedText};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SentimentScore {
    /// (P - N) / (P + N), 0 without lexicon hits.
    pub polarity: f64,
    /// (P + N) / words.
    pub subjectivity: f64,
}

pub fn sentiment(t: &TokenizedText) -> SentimentScore {
    sentiment_of(t.words(), Lexicons::bundled())
}

pub(crate) fn sentiment_of<'a>(words: impl Iterator<Item = &'a Token>, lex: &Lexicons) -> SentimentScore {
    let (mut pos, mut neg, mut n) = (0usize, 0usize, 0usize);
    for w in words {
        n += 1;
        if lex.positive.contains(&w.lower) {
            pos += 1;
        } else if lex.negative.contains(&w.lower) {
            neg += 1;
        }
    }
    let hits = pos + neg;
    if hits == 0 || n == 0 {
        return SentimentScore::default();
    }
    SentimentScore {
        polarity: (pos as f64 - neg as f64) / hits as f64,
        subjectivity: hits as f64 / n as f64,
    }
}
