//! Who is being quoted: subject detection, name and acronym resolution, affiliation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::patterns::{ArticleContext, Candidate, WordClass};
use crate::textkit::{mentions, EntityKind, Mention, TokenizedText};

const INITIALS_SKIP: [&str; 7] = ["of", "for", "on", "the", "and", "in", "&"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuoteeKind {
    NamedPerson,
    Organization,
    UnnamedScientist,
    UnnamedStudy,
}

impl QuoteeKind {
    /// Unattributed ("weasel") quotes.
    pub fn is_weasel(self) -> bool {
        matches!(self, QuoteeKind::UnnamedScientist | QuoteeKind::UnnamedStudy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quote {
    pub article_id: String,
    pub sentence_index: usize,
    pub text: String,
    pub quotee_kind: QuoteeKind,
    pub quotee: Option<String>,
    pub affiliation: Option<String>,
    /// False when a partial name or acronym could not be expanded.
    pub resolved: bool,
    /// Pattern that selected the sentence.
    pub pattern: String,
}

/// Upper-case initials of the significant words of a name.
pub fn initials(name: &str) -> String {
    name.split_whitespace()
        .filter(|w| !INITIALS_SKIP.contains(&w.to_lowercase().as_str()))
        .filter_map(|w| w.chars().next())
        .filter(|c| c.is_uppercase())
        .collect()
}

fn is_acronym_text(s: &str) -> bool {
    let n = s.chars().count();
    (2..=6).contains(&n) && s.chars().all(|c| c.is_ascii_uppercase())
}

/// Whether `partial` occurs in `full` as a run of whole words.
fn contains_words(full: &str, partial: &str) -> bool {
    let f: Vec<&str> = full.split_whitespace().collect();
    let p: Vec<&str> = partial.split_whitespace().collect();
    !p.is_empty() && p.len() <= f.len() && f.windows(p.len()).any(|w| w == p.as_slice())
}

/// Corpus-wide names: full person names with frequencies and acronym
/// co-mentions, built once and shared read-only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NameIndex {
    /// Full name to (count, order of first occurrence).
    persons: BTreeMap<String, (usize, usize)>,
    /// Acronym to full organization names co-mentioned in the same article.
    acronyms: BTreeMap<String, BTreeMap<String, usize>>,
}

impl NameIndex {
    /// Documents should come in a stable order (e.g. by id): first
    /// occurrence breaks frequency ties.
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a TokenizedText>) -> NameIndex {
        let mut idx = NameIndex::default();
        let mut order = 0;
        for t in docs {
            let ms = mentions(t);
            for m in ms
                .iter()
                .filter(|m| m.kind == EntityKind::Person && m.text.split_whitespace().count() > 1)
            {
                let e = idx.persons.entry(m.text.clone()).or_insert((0, order));
                e.0 += 1;
                order += 1;
            }
            let orgs: BTreeSet<&str> = ms
                .iter()
                .filter(|m| m.kind == EntityKind::Organization && !is_acronym_text(&m.text))
                .map(|m| m.text.as_str())
                .collect();
            let acrs: BTreeSet<&str> = ms
                .iter()
                .filter(|m| m.kind == EntityKind::Organization && is_acronym_text(&m.text))
                .map(|m| m.text.as_str())
                .collect();
            for a in acrs {
                for o in orgs.iter().filter(|o| initials(o) == a) {
                    *idx.acronyms
                        .entry(a.to_string())
                        .or_default()
                        .entry(o.to_string())
                        .or_insert(0) += 1;
                }
            }
        }
        idx
    }

    /// Most frequent full name containing `partial`; ties go to the name seen first.
    pub fn resolve_person(&self, partial: &str) -> Option<&str> {
        self.persons
            .iter()
            .filter(|(full, _)| full.as_str() != partial && contains_words(full, partial))
            .min_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)))
            .map(|(full, _)| full.as_str())
    }

    /// Full name most often co-mentioned with the acronym.
    pub fn expand_acronym(&self, acronym: &str) -> Option<&str> {
        self.acronyms
            .get(acronym)?
            .iter()
            .min_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)))
            .map(|(name, _)| name.as_str())
    }

    /// Words of known full names, used to recognise bare surnames.
    pub fn name_tokens(&self) -> impl Iterator<Item = &str> {
        self.persons.keys().flat_map(|n| n.split_whitespace())
    }

    pub fn person_count(&self) -> usize {
        self.persons.len()
    }
}

/// Index of the span that is the quote's source, if any.
fn subject_of(c: &Candidate) -> Option<usize> {
    let spans = &c.spans;
    let m = c.matched.clone();
    let anchor = m
        .clone()
        .find(|&i| spans[i].class == WordClass::ReportingVerb)
        .or_else(|| m.clone().find(|&i| spans[i].class == WordClass::QuoteSpan))?;
    let before: Vec<usize> = (m.start..anchor).filter(|&i| spans[i].class.is_subject()).collect();
    let pick = |class: WordClass| before.iter().rev().copied().find(|&i| spans[i].class == class);
    if let Some(i) = pick(WordClass::Person).or_else(|| pick(WordClass::Org)) {
        return Some(i);
    }
    let after =
        |classes: &[WordClass]| (anchor + 1..spans.len().min(anchor + 4)).find(|&i| classes.contains(&spans[i].class));
    after(&[WordClass::Person, WordClass::Org])
        .or_else(|| before.last().copied())
        .or_else(|| after(&[WordClass::ScientistNoun, WordClass::StudyNoun]))
}

struct Resolver<'a> {
    text: &'a TokenizedText,
    persons: Vec<Mention>,
    orgs: Vec<Mention>,
    names: Option<&'a NameIndex>,
}

impl<'a> Resolver<'a> {
    fn new(text: &'a TokenizedText, names: Option<&'a NameIndex>) -> Resolver<'a> {
        let (persons, orgs): (Vec<Mention>, Vec<Mention>) = mentions(text)
            .into_iter()
            .filter(|m| matches!(m.kind, EntityKind::Person | EntityKind::Organization))
            .partition(|m| m.kind == EntityKind::Person);
        Resolver {
            text,
            persons,
            orgs,
            names,
        }
    }

    /// Full name for a person reference: article first, then corpus.
    fn person(&self, partial: &str) -> (String, bool) {
        if partial.split_whitespace().count() > 1 {
            return (partial.to_string(), true);
        }
        if let Some(m) = self
            .persons
            .iter()
            .find(|m| m.text != partial && contains_words(&m.text, partial))
        {
            return (m.text.clone(), true);
        }
        if let Some(full) = self.names.and_then(|n| n.resolve_person(partial)) {
            return (full.to_string(), true);
        }
        (partial.to_string(), false)
    }

    /// Organization most often named in the same sentence as the person,
    /// scanning from the top; ties go to the earliest co-mention.
    fn affiliation(&self, full: &str) -> Option<String> {
        let parts: Vec<&str> = full.split_whitespace().collect();
        let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for s in 0..self.text.sentences.len() {
            let words: Vec<&str> = self
                .text
                .sentence_tokens(s)
                .iter()
                .map(|t| t.surface.as_str())
                .collect();
            let named = self
                .persons
                .iter()
                .any(|m| m.sentence == s && contains_words(full, &m.text))
                || parts.iter().any(|p| words.contains(p));
            if !named {
                continue;
            }
            for o in self.orgs.iter().filter(|o| o.sentence == s) {
                let e = counts.entry(o.text.as_str()).or_insert((0, s));
                e.0 += 1;
            }
        }
        counts
            .into_iter()
            .min_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)))
            .map(|(o, _)| o.to_string())
    }

    /// Expands an acronym: unique match in the article, else corpus co-mentions.
    fn organization(&self, name: &str) -> (String, bool) {
        if !is_acronym_text(name) {
            return (name.to_string(), true);
        }
        let local: BTreeSet<&str> = self
            .orgs
            .iter()
            .filter(|o| !is_acronym_text(&o.text) && initials(&o.text) == name)
            .map(|o| o.text.as_str())
            .collect();
        if local.len() == 1 {
            return (local.into_iter().next().unwrap().to_string(), true);
        }
        match self.names.and_then(|n| n.expand_acronym(name)) {
            Some(full) => (full.to_string(), true),
            None => (name.to_string(), false),
        }
    }

    /// Most recent person mentioned before `token`.
    fn antecedent(&self, token: usize) -> Option<&Mention> {
        self.persons.iter().rev().find(|m| m.tokens.end <= token)
    }
}

/// Turns candidate sentences into attributed quotes.
pub fn attribute(
    article_id: &str,
    ctx: &ArticleContext<'_>,
    candidates: &[Candidate],
    names: Option<&NameIndex>,
) -> Vec<Quote> {
    let text = ctx.text;
    let r = Resolver::new(text, names);
    candidates
        .iter()
        .map(|c| {
            let mut q = Quote {
                article_id: article_id.to_string(),
                sentence_index: c.sentence,
                text: text.sentence_text(c.sentence).to_string(),
                quotee_kind: QuoteeKind::UnnamedScientist,
                quotee: None,
                affiliation: None,
                resolved: true,
                pattern: c.pattern.clone(),
            };
            let Some(i) = subject_of(c) else { return q };
            let span = &c.spans[i];
            let surface = text.span_text(span.tokens.clone()).to_string();
            let person = match span.class {
                WordClass::Person => Some(surface.clone()),
                WordClass::Pronoun => r.antecedent(span.tokens.start).map(|m| m.text.clone()),
                _ => None,
            };
            match (span.class, person) {
                (_, Some(partial)) => {
                    let (full, ok) = r.person(&partial);
                    q.quotee_kind = QuoteeKind::NamedPerson;
                    q.affiliation = r.affiliation(&full);
                    q.quotee = Some(full);
                    q.resolved = ok;
                }
                (WordClass::Org, None) => {
                    let (full, ok) = r.organization(&surface);
                    q.quotee_kind = QuoteeKind::Organization;
                    q.quotee = Some(full);
                    q.resolved = ok;
                }
                (WordClass::StudyNoun, None) => q.quotee_kind = QuoteeKind::UnnamedStudy,
                _ => {}
            }
            q
        })
        .collect()
}
