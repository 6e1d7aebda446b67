//! Quote extraction over word-class patterns, quote attribution and
//! scientific-mention counting.

mod attribution;
mod lexicon;
mod patterns;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use attribution::{attribute, initials, NameIndex, Quote, QuoteeKind};
pub use lexicon::{
    expand_lexicon, neighbors_of, review_tsv, Neighbor, WordClassLexicon, WordClassSeeds, DEFAULT_NEIGHBORS,
    SEED_REPORTING_VERBS, SEED_SCIENTIST_NOUNS, SEED_STUDY_NOUNS,
};
pub use patterns::{
    baseline_sentences, extract_quotes, extract_with, lemma_candidates, symbols, ArticleContext, Candidate, ClassSpan,
    Pattern, PatternError, PatternSet, WordClass,
};

use crate::corpus::Allowlist;
use crate::textkit::{mentions, EntityKind, TokenizedText};

/// Organization words that mark an academic source.
const SCIENCE_ORG_KEYWORDS: [&str; 4] = ["university", "institute", "laboratory", "journal"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuoteStats {
    pub total_quotes: usize,
    pub person_quotes: usize,
    pub scientific_mentions: usize,
    pub weasel_quotes: usize,
}

impl QuoteStats {
    pub fn from_quotes(quotes: &[Quote], scientific_mentions: usize) -> QuoteStats {
        QuoteStats {
            total_quotes: quotes.len(),
            person_quotes: quotes
                .iter()
                .filter(|q| q.quotee_kind == QuoteeKind::NamedPerson)
                .count(),
            scientific_mentions,
            weasel_quotes: quotes.iter().filter(|q| q.quotee_kind.is_weasel()).count(),
        }
    }
}

/// Sentences naming an academic source: a science organization, an
/// allowlisted domain (or the journal/portal name it stands for), or a
/// study-attributed quote. Each sentence counts once.
pub fn scientific_mentions(t: &TokenizedText, quotes: &[Quote], allowlist: &Allowlist) -> usize {
    let mut hit: BTreeSet<usize> = quotes
        .iter()
        .filter(|q| matches!(q.quotee_kind, QuoteeKind::UnnamedStudy | QuoteeKind::Organization))
        .map(|q| q.sentence_index)
        .collect();
    for m in mentions(t).iter().filter(|m| m.kind == EntityKind::Organization) {
        let science = t.tokens[m.tokens.clone()]
            .iter()
            .any(|tok| SCIENCE_ORG_KEYWORDS.contains(&tok.lower.as_str()));
        if science {
            hit.insert(m.sentence);
        }
    }
    let portal_names: BTreeSet<String> = allowlist
        .science_domains
        .iter()
        .filter_map(|d| d.split('.').next())
        .filter(|l| l.len() >= 4 && l.chars().all(|c| c.is_ascii_alphabetic()))
        .map(str::to_string)
        .collect();
    for s in 0..t.sentences.len() {
        let lower = t.sentence_text(s).to_lowercase();
        if allowlist
            .science_domains
            .iter()
            .any(|d| crate::corpus::contains_on_boundary(&lower, d))
        {
            hit.insert(s);
            continue;
        }
        let named_portal = t
            .sentence_tokens(s)
            .iter()
            .skip(1)
            .any(|tok| tok.is_capitalized() && portal_names.contains(&tok.lower));
        if named_portal {
            hit.insert(s);
        }
    }
    hit.len()
}

/// Lexicon, pattern table and corpus name index bundled for per-article use.
#[derive(Debug, Clone)]
pub struct QuoteExtractor {
    pub lexicon: WordClassLexicon,
    pub patterns: PatternSet,
    pub names: NameIndex,
}

impl QuoteExtractor {
    pub fn new(lexicon: WordClassLexicon, names: NameIndex) -> QuoteExtractor {
        QuoteExtractor {
            lexicon,
            patterns: PatternSet::bundled().clone(),
            names,
        }
    }

    pub fn candidates(&self, t: &TokenizedText) -> Vec<Candidate> {
        let ctx = ArticleContext::new(t, Some(&self.names));
        extract_with(&ctx, &self.lexicon, &self.patterns)
    }

    pub fn quotes(&self, article_id: &str, t: &TokenizedText) -> Vec<Quote> {
        let ctx = ArticleContext::new(t, Some(&self.names));
        let cands = extract_with(&ctx, &self.lexicon, &self.patterns);
        attribute(article_id, &ctx, &cands, Some(&self.names))
    }

    pub fn stats(&self, article_id: &str, t: &TokenizedText, allowlist: &Allowlist) -> (Vec<Quote>, QuoteStats) {
        let quotes = self.quotes(article_id, t);
        let mentions = scientific_mentions(t, &quotes, allowlist);
        let stats = QuoteStats::from_quotes(&quotes, mentions);
        (quotes, stats)
    }
}

/// Paragraphs containing any of `sentences`.
pub fn paragraphs_of(t: &TokenizedText, sentences: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
    sentences
        .into_iter()
        .filter_map(|s| t.paragraphs.iter().position(|p| p.contains(&s)))
        .collect()
}

/// Paragraph-level hit counts against hand annotations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuoteScores {
    pub true_positives: usize,
    pub predicted: usize,
    pub annotated: usize,
}

impl QuoteScores {
    pub fn of(predicted: &BTreeSet<usize>, annotated: &BTreeSet<usize>) -> QuoteScores {
        QuoteScores {
            true_positives: predicted.intersection(annotated).count(),
            predicted: predicted.len(),
            annotated: annotated.len(),
        }
    }

    pub fn add(&mut self, other: QuoteScores) {
        self.true_positives += other.true_positives;
        self.predicted += other.predicted;
        self.annotated += other.annotated;
    }

    /// 1 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            1.0
        } else {
            self.true_positives as f64 / self.predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.annotated == 0 {
            1.0
        } else {
            self.true_positives as f64 / self.annotated as f64
        }
    }
}

/// `article_id<TAB>i,j,k` lines of annotated quote paragraphs.
pub fn parse_quote_annotations(text: &str) -> Result<BTreeMap<String, BTreeSet<usize>>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("article_id")) {
            continue;
        }
        let (id, list) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected two columns", i + 1))?;
        let idx = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|e| format!("line {}: {e}", i + 1)))
            .collect::<Result<BTreeSet<_>, _>>()?;
        out.insert(id.trim().to_string(), idx);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textkit::analyze;

    fn lex() -> WordClassLexicon {
        let mut l = WordClassLexicon::default();
        for w in ["believe", "think", "note"] {
            l.reporting_verbs.insert(w.to_string());
        }
        l
    }

    fn pattern_of(text: &str) -> Option<String> {
        let t = analyze(text);
        extract_quotes(&t, &lex()).first().map(|c| c.pattern.clone())
    }

    #[test]
    fn pattern_examples() {
        assert_eq!(pattern_of("\"It works,\" said Dr. Roe.").as_deref(), Some("P1"));
        assert_eq!(
            pattern_of("Researchers believe coffee is protective.").as_deref(),
            Some("P2")
        );
        assert_eq!(pattern_of("The study found that rates fell.").as_deref(), Some("P3"));
        assert_eq!(pattern_of("The cat sat on the mat."), None);
    }

    #[test]
    fn lemma_forms() {
        assert!(lemma_candidates("studies").contains(&"study".to_string()));
        assert!(lemma_candidates("argued").contains(&"argue".to_string()));
        assert!(lemma_candidates("said").contains(&"say".to_string()));
        assert!(lemma_candidates("admitted").contains(&"admit".to_string()));
    }

    #[test]
    fn baseline_is_covered() {
        let t = analyze("The so-called \"superfood\" is popular. \"It is fine.\" Nothing else.");
        let base = baseline_sentences(&t);
        assert_eq!(base, vec![0, 1]);
        let got: Vec<usize> = extract_quotes(&t, &lex()).iter().map(|c| c.sentence).collect();
        for s in base {
            assert!(got.contains(&s));
        }
    }

    #[test]
    fn quote_spanning_sentences() {
        let t = analyze("\"It works. It is safe,\" said Roe.");
        assert_eq!(baseline_sentences(&t), vec![0, 1]);
    }

    #[test]
    fn pattern_file_errors() {
        assert!(PatternSet::parse("P\tFOO .{0,3}").is_err());
        assert!(PatternSet::parse("no tab here").is_err());
        assert!(PatternSet::parse("P\tPERSON (").is_err());
        assert_eq!(
            PatternSet::parse("A\tPERSON REPORTING_VERB\n")
                .unwrap()
                .patterns()
                .len(),
            1
        );
    }

    fn quotes_of(text: &str, names: &NameIndex) -> Vec<Quote> {
        QuoteExtractor::new(lex(), names.clone()).quotes("a1", &analyze(text))
    }

    #[test]
    fn partial_name_resolved_in_article() {
        let q = quotes_of(
            "Dr. Jane Roe of Example University led the work. Coffee is protective, said Roe.",
            &NameIndex::default(),
        );
        let last = q.last().unwrap();
        assert_eq!(last.quotee_kind, QuoteeKind::NamedPerson);
        assert_eq!(last.quotee.as_deref(), Some("Jane Roe"));
        assert_eq!(last.affiliation.as_deref(), Some("Example University"));
        assert!(last.resolved);
    }

    #[test]
    fn partial_name_resolved_in_corpus() {
        let corpus = [
            analyze("Dr. Jane Roe spoke."),
            analyze("Dr. Jane Roe again."),
            analyze("Dr. Tom Roe too."),
        ];
        let idx = NameIndex::build(corpus.iter());
        let q = quotes_of("Roe said that the effect is small.", &idx);
        assert_eq!(q[0].quotee.as_deref(), Some("Jane Roe"));
    }

    #[test]
    fn weasel_quotes() {
        let q = quotes_of("Most scientists think coffee is fine.", &NameIndex::default());
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].quotee_kind, QuoteeKind::UnnamedScientist);
        assert_eq!(q[0].quotee, None);
        let q = quotes_of("A new survey suggests sleep matters.", &NameIndex::default());
        assert_eq!(q[0].quotee_kind, QuoteeKind::UnnamedStudy);
    }

    #[test]
    fn acronym_expanded_from_corpus() {
        let corpus = [analyze("The World Health Organization (WHO) met today.")];
        let idx = NameIndex::build(corpus.iter());
        let q = quotes_of("WHO said that the risk is low.", &idx);
        assert_eq!(q[0].quotee_kind, QuoteeKind::Organization);
        assert_eq!(q[0].quotee.as_deref(), Some("World Health Organization"));
        let q = quotes_of("WHO said that the risk is low.", &NameIndex::default());
        assert_eq!(q[0].quotee.as_deref(), Some("WHO"));
        assert!(!q[0].resolved);
    }

    #[test]
    fn pronoun_takes_last_person() {
        let q = quotes_of(
            "Dr. Jane Roe ran the trial. She said that it worked.",
            &NameIndex::default(),
        );
        let last = q.last().unwrap();
        assert_eq!(last.quotee.as_deref(), Some("Jane Roe"));
    }

    #[test]
    fn stats_invariant() {
        let t = analyze("\"Good,\" said Roe. Scientists believe it helps. The weather was warm.");
        let q = QuoteExtractor::new(lex(), NameIndex::default()).quotes("a", &t);
        let s = QuoteStats::from_quotes(&q, 0);
        assert!(s.person_quotes + s.weasel_quotes <= s.total_quotes);
        assert_eq!(s.total_quotes, 2);
    }

    #[test]
    fn mention_counting() {
        let allow = Allowlist::new(["nature.com".to_string()], ["x".to_string()]).unwrap();
        let t = analyze("Example University and Example University again. It rained. The paper appeared in Nature.");
        assert_eq!(scientific_mentions(&t, &[], &allow), 2);
        assert_eq!(scientific_mentions(&analyze("It rained all day."), &[], &allow), 0);
    }
}
