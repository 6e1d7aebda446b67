//! Self-contained English text analytics.
//!
//! Everything here is rule- or lexicon-based and deterministic: tokenization,
//! sentence and paragraph segmentation, a coarse part-of-speech tagger,
//! entity spotting, Flesch reading ease, lexicon sentiment, a bag-of-words
//! clickbait classifier, and word-embedding averages.

mod clickbait;
mod embeddings;
mod entities;
mod lexicon;
mod readability;
mod sentiment;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use clickbait::{clickbait_score, parse_headlines, ClickbaitError, HeadlineModel};
pub use embeddings::{cosine, doc_vector, doc_vector_of, load_embeddings, EmbeddingError, EmbeddingTable};
pub use entities::{extract_entities, mentions, EntityKind, EntitySet, Mention};
pub use lexicon::{Lexicons, WordList};
pub use readability::{count_syllables, flesch_reading_ease, ReadabilityError};
pub use sentiment::{sentiment, SentimentScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Propn,
    Punct,
    Other,
}

impl Pos {
    pub fn from_tag(tag: &str) -> Option<Pos> {
        Some(match tag {
            "NOUN" => Pos::Noun,
            "VERB" => Pos::Verb,
            "ADJ" => Pos::Adj,
            "ADV" => Pos::Adv,
            "PRON" => Pos::Pron,
            "DET" => Pos::Det,
            "ADP" => Pos::Adp,
            "NUM" => Pos::Num,
            "PROPN" => Pos::Propn,
            "PUNCT" => Pos::Punct,
            "OTHER" => Pos::Other,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Number,
    Url,
    QuoteMark,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub pos: Pos,
    pub kind: TokenKind,
    /// Byte offsets into [`TokenizedText::text`].
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is_word(&self) -> bool {
        matches!(self.kind, TokenKind::Word | TokenKind::Number)
    }

    pub fn is_capitalized(&self) -> bool {
        self.kind == TokenKind::Word && self.surface.chars().next().is_some_and(char::is_uppercase)
    }
}

/// Tokens plus sentence ranges (over tokens) and paragraph ranges (over
/// sentences). The ranges are contiguous and cover everything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedText {
    pub text: String,
    pub tokens: Vec<Token>,
    pub sentences: Vec<Range<usize>>,
    pub paragraphs: Vec<Range<usize>>,
}

impl TokenizedText {
    pub fn sentence_tokens(&self, s: usize) -> &[Token] {
        &self.tokens[self.sentences[s].clone()]
    }

    /// The verbatim source text of sentence `s`.
    pub fn sentence_text(&self, s: usize) -> &str {
        self.span_text(self.sentences[s].clone())
    }

    /// The verbatim source text covering a token range.
    pub fn span_text(&self, tokens: Range<usize>) -> &str {
        if tokens.is_empty() {
            return "";
        }
        &self.text[self.tokens[tokens.start].start..self.tokens[tokens.end - 1].end]
    }

    /// Token range covered by a range of sentences.
    pub fn sentence_span(&self, sentences: Range<usize>) -> Range<usize> {
        if sentences.is_empty() {
            return 0..0;
        }
        self.sentences[sentences.start].start..self.sentences[sentences.end - 1].end
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word())
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

const ABBREVIATIONS: &[&str] = &[
    "dr", "prof", "mr", "mrs", "ms", "st", "jr", "sr", "vs", "etc", "approx", "dept", "univ", "inc", "ltd", "co",
    "fig", "vol", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "al",
];

fn is_quote_char(c: char) -> bool {
    matches!(c, '"' | '\u{201c}' | '\u{201d}' | '\u{00ab}' | '\u{00bb}')
}

fn is_terminal(s: &str) -> bool {
    matches!(s, "." | "!" | "?")
}

fn is_closer(s: &str) -> bool {
    matches!(s, "\u{201d}" | "\u{00bb}" | ")" | "]" | "'" | "\u{2019}")
}

/// Tokenizes, segments and tags `text`.
pub fn analyze(text: &str) -> TokenizedText {
    analyze_with(text, Lexicons::bundled())
}

pub fn analyze_with(text: &str, lex: &Lexicons) -> TokenizedText {
    let mut tokens = Vec::new();
    let mut sentences = Vec::new();
    let mut paragraphs = Vec::new();

    for para in paragraph_spans(text) {
        let first_sentence = sentences.len();
        let first_token = tokens.len();
        tokenize_into(text, para, &mut tokens);
        split_sentences(&tokens, first_token, &mut sentences);
        if sentences.len() > first_sentence {
            paragraphs.push(first_sentence..sentences.len());
        }
    }

    for s in &sentences {
        for i in s.clone() {
            let initial = i == s.start || (i == s.start + 1 && tokens[s.start].kind == TokenKind::QuoteMark);
            tokens[i].pos = tag(&tokens[i], initial, lex);
        }
    }

    TokenizedText {
        text: text.to_string(),
        tokens,
        sentences,
        paragraphs,
    }
}

/// Byte ranges of blank-line separated blocks.
fn paragraph_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut line_start = 0;
    let mut blank_run = false;
    for (i, c) in text.char_indices() {
        if c == '\n' {
            let line = &text[line_start..i];
            if line.trim().is_empty() && !blank_run && line_start > start {
                spans.push(start..line_start);
                blank_run = true;
            }
            line_start = i + 1;
            if blank_run {
                start = line_start;
            }
        } else if !c.is_whitespace() && blank_run {
            blank_run = false;
            start = line_start;
        }
    }
    if start < text.len() {
        spans.push(start..text.len());
    }
    spans.retain(|r| !text[r.clone()].trim().is_empty());
    spans
}

fn tokenize_into(text: &str, span: Range<usize>, out: &mut Vec<Token>) {
    let chars: Vec<(usize, char)> = text[span.clone()]
        .char_indices()
        .map(|(i, c)| (i + span.start, c))
        .collect();
    let end_of = |k: usize| chars.get(k).map_or(span.end, |(i, _)| *i);
    let at = |k: usize| chars.get(k).map(|(_, c)| *c);
    let mut k = 0;
    while k < chars.len() {
        let (start, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        let rest = &text[start..span.end];
        let lower_rest = rest.get(..8).unwrap_or(rest).to_ascii_lowercase();
        if lower_rest.starts_with("http://") || lower_rest.starts_with("https://") || lower_rest.starts_with("www.") {
            let mut j = k;
            while j < chars.len() && !chars[j].1.is_whitespace() {
                j += 1;
            }
            while j > k + 4 && matches!(chars[j - 1].1, '.' | ',' | ';' | ':' | '!' | '?' | ')' | '"' | '\'') {
                j -= 1;
            }
            push(out, text, start, end_of(j), TokenKind::Url);
            k = j;
            continue;
        }
        if c.is_alphanumeric() {
            let mut j = k + 1;
            loop {
                match at(j) {
                    Some(d) if d.is_alphanumeric() => j += 1,
                    Some('\'' | '\u{2019}' | '-') if at(j + 1).is_some_and(char::is_alphanumeric) => j += 2,
                    Some('.' | ',' | '/' | ':')
                        if chars[j - 1].1.is_ascii_digit() && at(j + 1).is_some_and(|d| d.is_ascii_digit()) =>
                    {
                        j += 2
                    }
                    _ => break,
                }
            }
            let word = &text[start..end_of(j)];
            let kind = if word.chars().next().is_some_and(|d| d.is_ascii_digit()) {
                TokenKind::Number
            } else {
                TokenKind::Word
            };
            // Abbreviations and initials keep their period.
            if at(j) == Some('.') && kind == TokenKind::Word {
                let lw = word.to_lowercase();
                if ABBREVIATIONS.contains(&lw.as_str()) || word.chars().count() == 1 {
                    j += 1;
                }
            }
            push(out, text, start, end_of(j), kind);
            k = j;
            continue;
        }
        let kind = if is_quote_char(c) {
            TokenKind::QuoteMark
        } else {
            TokenKind::Punct
        };
        push(out, text, start, end_of(k + 1), kind);
        k += 1;
    }
}

fn push(out: &mut Vec<Token>, text: &str, start: usize, end: usize, kind: TokenKind) {
    let surface = text[start..end].to_string();
    out.push(Token {
        lower: surface.to_lowercase(),
        surface,
        pos: Pos::Other,
        kind,
        start,
        end,
    });
}

fn split_sentences(tokens: &[Token], from: usize, out: &mut Vec<Range<usize>>) {
    let mut start = from;
    let mut quotes_open = false;
    let mut i = from;
    while i < tokens.len() {
        let t = &tokens[i];
        if t.surface == "\"" {
            quotes_open = !quotes_open;
        } else if t.surface == "\u{201c}" {
            quotes_open = true;
        } else if t.surface == "\u{201d}" {
            quotes_open = false;
        }
        if t.kind == TokenKind::Punct && is_terminal(&t.surface) {
            let mut j = i + 1;
            while j < tokens.len() {
                let s = tokens[j].surface.as_str();
                if is_terminal(s) || is_closer(s) {
                    j += 1;
                } else if s == "\"" && quotes_open {
                    quotes_open = false;
                    j += 1;
                } else {
                    break;
                }
            }
            out.push(start..j);
            start = j;
            i = j;
            continue;
        }
        i += 1;
    }
    if start < tokens.len() {
        out.push(start..tokens.len());
    }
}

fn tag(t: &Token, sentence_initial: bool, lex: &Lexicons) -> Pos {
    match t.kind {
        TokenKind::Punct | TokenKind::QuoteMark => return Pos::Punct,
        TokenKind::Number => return Pos::Num,
        TokenKind::Url => return Pos::Other,
        TokenKind::Word => {}
    }
    let capitalized = t.is_capitalized();
    let all_caps = t.surface.chars().filter(|c| c.is_alphabetic()).count() > 1
        && t.surface.chars().filter(|c| c.is_alphabetic()).all(char::is_uppercase);
    if let Some(p) = lex.pos.get(&t.lower) {
        if !(capitalized && !sentence_initial && matches!(p, Pos::Noun | Pos::Adj)) && !all_caps {
            return *p;
        }
    }
    if capitalized && (!sentence_initial || all_caps) {
        return Pos::Propn;
    }
    let w = t.lower.as_str();
    let n = w.chars().count();
    let suffix = |s: &str, min: usize| n >= min && w.ends_with(s);
    if suffix("ing", 5) || suffix("ed", 4) {
        Pos::Verb
    } else if suffix("ly", 4) {
        Pos::Adv
    } else if ["ous", "ful", "ive", "able", "ible", "ical", "less", "ic", "al"]
        .iter()
        .any(|s| suffix(s, s.len() + 3))
    {
        Pos::Adj
    } else if [
        "tion", "sion", "ment", "ness", "ity", "ism", "ist", "ists", "ers", "er", "or", "ance", "ence", "ship", "ogy",
    ]
    .iter()
    .any(|s| suffix(s, s.len() + 2))
    {
        Pos::Noun
    } else if capitalized {
        Pos::Propn
    } else {
        Pos::Other
    }
}
