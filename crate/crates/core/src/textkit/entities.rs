//! Rule-based entity spotting: persons, organizations, dates, numbers and
//! percentages. Every reported string is a verbatim slice of the input.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{Lexicons, Token, TokenKind, TokenizedText};

pub(crate) const ORG_KEYWORDS: &[&str] = &[
    "university",
    "institute",
    "college",
    "organization",
    "organisation",
    "agency",
    "hospital",
    "foundation",
    "center",
    "centre",
    "laboratory",
    "journal",
];

/// All-caps tokens that are not organizations.
const NON_ORG_ACRONYMS: &[&str] = &[
    "DNA", "RNA", "CRISPR", "HIV", "AIDS", "BMI", "USA", "US", "UK", "EU", "OK", "TV", "PM", "AM", "CEO", "LDL", "HDL",
    "COVID", "PDF", "URL",
];

const MONTHS: &[&str] = &[
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
    "jan.",
    "feb.",
    "mar.",
    "apr.",
    "jun.",
    "jul.",
    "aug.",
    "sep.",
    "sept.",
    "oct.",
    "nov.",
    "dec.",
];

const CONNECTORS: &[&str] = &["of", "for", "on"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    Person,
    Organization,
    Date,
    Number,
    Percentage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub kind: EntityKind,
    pub text: String,
    pub sentence: usize,
    pub tokens: Range<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySet {
    pub persons: BTreeSet<String>,
    pub organizations: BTreeSet<String>,
    pub dates: BTreeSet<String>,
    pub numbers: BTreeSet<String>,
    pub percentages: BTreeSet<String>,
}

impl EntitySet {
    pub fn from_mentions<'a>(mentions: impl IntoIterator<Item = &'a Mention>) -> EntitySet {
        let mut set = EntitySet::default();
        for m in mentions {
            let target = match m.kind {
                EntityKind::Person => &mut set.persons,
                EntityKind::Organization => &mut set.organizations,
                EntityKind::Date => &mut set.dates,
                EntityKind::Number => &mut set.numbers,
                EntityKind::Percentage => &mut set.percentages,
            };
            target.insert(m.text.clone());
        }
        set
    }

    pub fn persons_and_orgs(&self) -> BTreeSet<String> {
        self.persons.union(&self.organizations).cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
            && self.organizations.is_empty()
            && self.dates.is_empty()
            && self.numbers.is_empty()
            && self.percentages.is_empty()
    }
}

pub fn extract_entities(t: &TokenizedText) -> EntitySet {
    EntitySet::from_mentions(&mentions(t))
}

pub(crate) fn is_org_keyword(lower: &str) -> bool {
    ORG_KEYWORDS.contains(&lower)
}

pub(crate) fn is_acronym(tok: &Token) -> bool {
    let n = tok.surface.chars().count();
    tok.kind == TokenKind::Word
        && (2..=6).contains(&n)
        && tok.surface.chars().all(|c| c.is_ascii_uppercase())
        && !NON_ORG_ACRONYMS.contains(&tok.surface.as_str())
}

/// All entity mentions, in token order within each sentence.
pub fn mentions(t: &TokenizedText) -> Vec<Mention> {
    let lex = Lexicons::bundled();
    let mut out = Vec::new();
    for (s, range) in t.sentences.iter().enumerate() {
        let toks = &t.tokens[range.clone()];
        let base = range.start;
        let mut found: Vec<(EntityKind, Range<usize>)> = Vec::new();
        names_in(toks, lex, &mut found);
        numeric_in(toks, &mut found);
        found.sort_by_key(|(k, r)| (r.start, r.end, *k));
        for (kind, r) in found {
            let abs = base + r.start..base + r.end;
            out.push(Mention {
                kind,
                text: t.span_text(abs.clone()).to_string(),
                sentence: s,
                tokens: abs,
            });
        }
    }
    out
}

fn names_in(toks: &[Token], lex: &Lexicons, found: &mut Vec<(EntityKind, Range<usize>)>) {
    let is_honorific = |t: &Token| lex.honorifics.contains(&t.lower);
    let candidate =
        |t: &Token| t.is_capitalized() && !is_honorific(t) && !is_acronym(t) && !lex.stopwords.contains(&t.lower);

    for (i, t) in toks.iter().enumerate() {
        if is_acronym(t) {
            found.push((EntityKind::Organization, i..i + 1));
        }
    }

    let mut segments: Vec<Range<usize>> = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if candidate(&toks[i]) {
            let start = i;
            while i < toks.len() && candidate(&toks[i]) {
                i += 1;
            }
            segments.push(start..i);
        } else {
            i += 1;
        }
    }

    // Join "<... Keyword> of <Capitalized ...>" into one organization.
    let mut merged: Vec<Range<usize>> = Vec::new();
    let mut k = 0;
    while k < segments.len() {
        let mut seg = segments[k].clone();
        while k + 1 < segments.len() {
            let next = &segments[k + 1];
            let last_is_keyword = is_org_keyword(&toks[seg.end - 1].lower);
            let joined_by_connector = next.start == seg.end + 1 && CONNECTORS.contains(&toks[seg.end].lower.as_str());
            if last_is_keyword && joined_by_connector {
                seg = seg.start..next.end;
                k += 1;
            } else {
                break;
            }
        }
        merged.push(seg);
        k += 1;
    }

    for seg in merged {
        let keyword_at = seg.clone().find(|&j| is_org_keyword(&toks[j].lower));
        if keyword_at.is_some() {
            found.push((EntityKind::Organization, seg));
            continue;
        }
        if seg.start > 0 && is_honorific(&toks[seg.start - 1]) {
            found.push((EntityKind::Person, seg.start..seg.end.min(seg.start + 3)));
            continue;
        }
        if let Some(g) = seg.clone().find(|&j| lex.given_names.contains(&toks[j].lower)) {
            if g + 1 < seg.end {
                found.push((EntityKind::Person, g..seg.end.min(g + 3)));
            }
        }
    }
}

fn year_like(t: &Token) -> bool {
    t.kind == TokenKind::Number
        && t.surface.len() == 4
        && t.surface.parse::<u32>().is_ok_and(|y| (1900..=2099).contains(&y))
}

fn day_like(t: &Token) -> bool {
    t.kind == TokenKind::Number && t.surface.parse::<u32>().is_ok_and(|d| (1..=31).contains(&d))
}

fn numeric_date(s: &str) -> bool {
    let parts: Vec<&str> = s.split(['-', '/']).collect();
    parts.len() == 3
        && parts
            .iter()
            .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()))
        && (s.contains('-') ^ s.contains('/'))
}

/// Dates, then numbers and percentages from the numeric tokens dates left over.
fn numeric_in(toks: &[Token], found: &mut Vec<(EntityKind, Range<usize>)>) {
    let mut in_date = vec![false; toks.len()];
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        if t.kind == TokenKind::Word && MONTHS.contains(&t.lower.as_str()) {
            let mut start = i;
            let mut end = i + 1;
            if i > 0 && day_like(&toks[i - 1]) && !in_date[i - 1] {
                start = i - 1;
            }
            if end < toks.len() && day_like(&toks[end]) && !year_like(&toks[end]) {
                end += 1;
            }
            if end < toks.len() && toks[end].surface == "," && end + 1 < toks.len() && year_like(&toks[end + 1]) {
                end += 2;
            } else if end < toks.len() && year_like(&toks[end]) {
                end += 1;
            }
            let ambiguous = t.lower == "may" && start == i && end == i + 1;
            if !ambiguous && !(t.lower == "may" && t.surface == "may") {
                for flag in &mut in_date[start..end] {
                    *flag = true;
                }
                found.push((EntityKind::Date, start..end));
                i = end;
                continue;
            }
        }
        if t.kind == TokenKind::Number && (numeric_date(&t.surface) || year_like(t)) && !in_date[i] {
            in_date[i] = true;
            found.push((EntityKind::Date, i..i + 1));
        }
        i += 1;
    }

    for (i, t) in toks.iter().enumerate() {
        if t.kind != TokenKind::Number || in_date[i] {
            continue;
        }
        found.push((EntityKind::Number, i..i + 1));
        if let Some(next) = toks.get(i + 1) {
            if (next.surface == "%" && next.start == t.end) || next.lower == "percent" {
                found.push((EntityKind::Percentage, i..i + 2));
            } else if next.lower == "per" && toks.get(i + 2).is_some_and(|c| c.lower == "cent") {
                found.push((EntityKind::Percentage, i..i + 3));
            }
        }
    }
}
