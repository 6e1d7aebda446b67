//! Sentence tagging over word classes and the quote pattern table.

use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::attribution::NameIndex;
use super::WordClassLexicon;
use crate::textkit::{mentions, EntityKind, Pos, Token, TokenKind, TokenizedText};

static BUNDLED_PATTERNS: &str = include_str!("../../data/quote_patterns.tsv");

const PRONOUNS: [&str; 3] = ["he", "she", "they"];
const POSSESSIVES: [&str; 8] = ["their", "its", "his", "her", "our", "new", "this", "that"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WordClass {
    ReportingVerb,
    StudyNoun,
    ScientistNoun,
    Person,
    Org,
    Pronoun,
    QuoteSpan,
    That,
    Other,
}

impl WordClass {
    pub const ALL: [WordClass; 9] = [
        WordClass::ReportingVerb,
        WordClass::StudyNoun,
        WordClass::ScientistNoun,
        WordClass::Person,
        WordClass::Org,
        WordClass::Pronoun,
        WordClass::QuoteSpan,
        WordClass::That,
        WordClass::Other,
    ];

    /// Name used in pattern files.
    pub fn name(self) -> &'static str {
        match self {
            WordClass::ReportingVerb => "REPORTING_VERB",
            WordClass::StudyNoun => "STUDY_NOUN",
            WordClass::ScientistNoun => "SCIENTIST_NOUN",
            WordClass::Person => "PERSON",
            WordClass::Org => "ORG",
            WordClass::Pronoun => "PRONOUN",
            WordClass::QuoteSpan => "QUOTE_MARK_SPAN",
            WordClass::That => "THAT",
            WordClass::Other => "OTHER",
        }
    }

    /// One-character code in the tagged sentence string.
    pub fn symbol(self) -> char {
        match self {
            WordClass::ReportingVerb => 'R',
            WordClass::StudyNoun => 'S',
            WordClass::ScientistNoun => 'C',
            WordClass::Person => 'P',
            WordClass::Org => 'O',
            WordClass::Pronoun => 'N',
            WordClass::QuoteSpan => 'Q',
            WordClass::That => 'T',
            WordClass::Other => 'X',
        }
    }

    pub fn from_name(name: &str) -> Option<WordClass> {
        WordClass::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Classes that can be the source of a quote.
    pub fn is_subject(self) -> bool {
        matches!(
            self,
            WordClass::Person | WordClass::Org | WordClass::ScientistNoun | WordClass::StudyNoun | WordClass::Pronoun
        )
    }
}

/// A run of tokens carrying one class (entities and quote spans cover several).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpan {
    pub class: WordClass,
    /// Absolute token indices.
    pub tokens: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PatternError {
    #[error("pattern line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct Pattern {
    pub name: String,
    pub source: String,
    regex: Regex,
}

/// Ordered pattern table; earlier patterns win when several match.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
}

impl PatternSet {
    /// Parses `name<TAB>pattern` lines. Patterns are regular expressions whose
    /// atoms are class names; `.` matches any class.
    pub fn parse(text: &str) -> Result<PatternSet, PatternError> {
        let class_name = Regex::new(r"[A-Z][A-Z_]*").expect("static regex");
        let mut patterns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |reason: String| PatternError::Syntax { line: i + 1, reason };
            let (name, source) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `name<TAB>pattern`".into()))?;
            let mut unknown = None;
            let translated = class_name.replace_all(source, |c: &regex::Captures| match WordClass::from_name(&c[0]) {
                Some(class) => class.symbol().to_string(),
                None => {
                    unknown.get_or_insert_with(|| c[0].to_string());
                    String::new()
                }
            });
            if let Some(u) = unknown {
                return Err(err(format!("unknown class `{u}`")));
            }
            let compact: String = translated.chars().filter(|c| !c.is_whitespace()).collect();
            if let Some(bad) = compact.chars().find(|c| c.is_ascii_lowercase()) {
                return Err(err(format!("unexpected character `{bad}`")));
            }
            let regex = Regex::new(&compact).map_err(|e| err(e.to_string()))?;
            patterns.push(Pattern {
                name: name.trim().to_string(),
                source: source.trim().to_string(),
                regex,
            });
        }
        if patterns.is_empty() {
            return Err(PatternError::Syntax {
                line: 0,
                reason: "no patterns".into(),
            });
        }
        Ok(PatternSet { patterns })
    }

    pub fn bundled() -> &'static PatternSet {
        static SET: OnceLock<PatternSet> = OnceLock::new();
        SET.get_or_init(|| PatternSet::parse(BUNDLED_PATTERNS).expect("bundled quote patterns parse"))
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    /// First pattern matching a tagged sentence, with the matched span
    /// (indices into the span list).
    pub fn first_match(&self, symbols: &str) -> Option<(&Pattern, Range<usize>)> {
        self.patterns
            .iter()
            .find_map(|p| p.regex.find(symbols).map(|m| (p, m.range())))
    }
}

fn irregular(word: &str) -> &'static [&'static str] {
    match word {
        "said" => &["say"],
        "found" => &["find"],
        "shown" => &["show"],
        "proven" => &["prove"],
        "thought" => &["think"],
        "wrote" | "written" => &["write"],
        "told" => &["tell"],
        "knew" | "known" => &["know"],
        "analyses" => &["analysis", "analyze"],
        "analyse" | "analysed" => &["analyze"],
        _ => &[],
    }
}

/// Possible base forms of a lowercase word, the word itself first.
pub fn lemma_candidates(w: &str) -> Vec<String> {
    let mut out = vec![w.to_string()];
    out.extend(irregular(w).iter().map(|s| s.to_string()));
    if !w.is_ascii() {
        return out;
    }
    let n = w.len();
    let strip = |k: usize| w[..n - k].to_string();
    if n > 3 && w.ends_with("ies") {
        out.push(format!("{}y", strip(3)));
    }
    if n > 3 && w.ends_with("ied") {
        out.push(format!("{}y", strip(3)));
    }
    if n > 2 && w.ends_with("es") {
        out.push(strip(2));
    }
    if n > 2 && w.ends_with('s') && !w.ends_with("ss") {
        out.push(strip(1));
    }
    if n > 3 && w.ends_with("ed") {
        out.push(strip(2));
        out.push(strip(1));
        let b = w.as_bytes();
        if n > 4 && b[n - 3] == b[n - 4] {
            out.push(strip(3));
        }
    }
    out
}

/// Per-article tagging state: entity spans, known name tokens and which
/// sentences open inside a quotation.
pub struct ArticleContext<'a> {
    pub text: &'a TokenizedText,
    entity_at: Vec<Option<(EntityKind, Range<usize>)>>,
    name_tokens: BTreeSet<String>,
    quote_ranges: Vec<Vec<Range<usize>>>,
}

impl<'a> ArticleContext<'a> {
    pub fn new(text: &'a TokenizedText, names: Option<&NameIndex>) -> ArticleContext<'a> {
        let mut entity_at = vec![None; text.tokens.len()];
        let mut name_tokens = BTreeSet::new();
        for m in mentions(text) {
            if !matches!(m.kind, EntityKind::Person | EntityKind::Organization) {
                continue;
            }
            if entity_at[m.tokens.clone()].iter().any(Option::is_some) {
                continue;
            }
            for i in m.tokens.clone() {
                entity_at[i] = Some((m.kind, m.tokens.clone()));
            }
            if m.kind == EntityKind::Person {
                name_tokens.extend(text.tokens[m.tokens.clone()].iter().map(|t| t.surface.clone()));
            }
        }
        if let Some(idx) = names {
            name_tokens.extend(idx.name_tokens().map(str::to_string));
        }
        ArticleContext {
            text,
            entity_at,
            name_tokens,
            quote_ranges: quote_ranges(text),
        }
    }

    /// Class spans of sentence `s`, in token order.
    pub fn tag_sentence(&self, s: usize, lex: &WordClassLexicon) -> Vec<ClassSpan> {
        let t = self.text;
        let range = t.sentences[s].clone();
        let quotes = &self.quote_ranges[s];
        let mut spans = Vec::new();
        let mut i = range.start;
        while i < range.end {
            if let Some(q) = quotes.iter().find(|q| q.start == i) {
                spans.push(ClassSpan {
                    class: WordClass::QuoteSpan,
                    tokens: q.clone(),
                });
                i = q.end;
                continue;
            }
            if let Some((kind, r)) = &self.entity_at[i] {
                let end = r.end.min(range.end);
                let class = if *kind == EntityKind::Person {
                    WordClass::Person
                } else {
                    WordClass::Org
                };
                spans.push(ClassSpan { class, tokens: i..end });
                i = end;
                continue;
            }
            let tok = &t.tokens[i];
            if tok.is_capitalized() && self.name_tokens.contains(&tok.surface) {
                let mut end = i + 1;
                while end < range.end
                    && self.entity_at[end].is_none()
                    && t.tokens[end].is_capitalized()
                    && self.name_tokens.contains(&t.tokens[end].surface)
                {
                    end += 1;
                }
                spans.push(ClassSpan {
                    class: WordClass::Person,
                    tokens: i..end,
                });
                i = end;
                continue;
            }
            let prev = (i > range.start).then(|| &t.tokens[i - 1]);
            spans.push(ClassSpan {
                class: word_class(tok, prev, lex),
                tokens: i..i + 1,
            });
            i += 1;
        }
        spans
    }
}

pub fn symbols(spans: &[ClassSpan]) -> String {
    spans.iter().map(|s| s.class.symbol()).collect()
}

fn word_class(tok: &Token, prev: Option<&Token>, lex: &WordClassLexicon) -> WordClass {
    if tok.kind != TokenKind::Word {
        return WordClass::Other;
    }
    let w = tok.lower.as_str();
    if w == "that" {
        return WordClass::That;
    }
    if PRONOUNS.contains(&w) {
        return WordClass::Pronoun;
    }
    let cands = lemma_candidates(w);
    let any = |set: &BTreeSet<String>| cands.iter().any(|c| set.contains(c));
    if any(&lex.scientist_nouns) {
        return WordClass::ScientistNoun;
    }
    let after_determiner = prev
        .is_some_and(|p| matches!(p.pos, Pos::Det | Pos::Adj | Pos::Num) || POSSESSIVES.contains(&p.lower.as_str()));
    let verb = any(&lex.reporting_verbs);
    let study = any(&lex.study_nouns);
    match (verb, study) {
        (true, true) if after_determiner => WordClass::StudyNoun,
        (true, true) => WordClass::ReportingVerb,
        (true, false) if after_determiner => WordClass::Other,
        (true, false) => WordClass::ReportingVerb,
        (false, true) => WordClass::StudyNoun,
        (false, false) => WordClass::Other,
    }
}

/// Quoted token ranges per sentence. Straight quotes toggle; state carries
/// across sentences within a paragraph so a quotation spanning a sentence
/// break is covered in both.
fn quote_ranges(t: &TokenizedText) -> Vec<Vec<Range<usize>>> {
    let mut out = vec![Vec::new(); t.sentences.len()];
    for para in &t.paragraphs {
        let mut open = false;
        for s in para.clone() {
            let range = t.sentences[s].clone();
            let mut start = open.then_some(range.start);
            for i in range.clone() {
                if t.tokens[i].kind != TokenKind::QuoteMark {
                    continue;
                }
                match start {
                    Some(st) => {
                        out[s].push(st..i + 1);
                        start = None;
                    }
                    None => start = Some(i),
                }
            }
            if let Some(st) = start {
                out[s].push(st..range.end);
            }
            open = start.is_some();
            // A quotation needs at least one word inside it.
            out[s].retain(|r| t.tokens[r.clone()].iter().any(Token::is_word));
        }
    }
    out
}

/// Sentences containing a quotation-mark span.
pub fn baseline_sentences(t: &TokenizedText) -> Vec<usize> {
    quote_ranges(t)
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_empty())
        .map(|(s, _)| s)
        .collect()
}

/// A sentence matched by a pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub sentence: usize,
    pub pattern: String,
    pub spans: Vec<ClassSpan>,
    /// Matched range over `spans`.
    pub matched: Range<usize>,
}

/// Candidate quote sentences of an article.
pub fn extract_quotes(t: &TokenizedText, lex: &WordClassLexicon) -> Vec<Candidate> {
    let ctx = ArticleContext::new(t, None);
    extract_with(&ctx, lex, PatternSet::bundled())
}

pub fn extract_with(ctx: &ArticleContext<'_>, lex: &WordClassLexicon, patterns: &PatternSet) -> Vec<Candidate> {
    let mut out = Vec::new();
    for s in 0..ctx.text.sentences.len() {
        let spans = ctx.tag_sentence(s, lex);
        let sym = symbols(&spans);
        // Symbols are ASCII, so byte offsets are span indices.
        if let Some((p, m)) = patterns.first_match(&sym) {
            out.push(Candidate {
                sentence: s,
                pattern: p.name.clone(),
                spans,
                matched: m,
            });
        }
    }
    out
}
