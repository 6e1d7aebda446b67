use std::collections::BTreeSet;
use std::path::PathBuf;

use sciq_core::corpus::{ingest_str, Article};
use sciq_core::quotes::{
    baseline_sentences, paragraphs_of, parse_quote_annotations, NameIndex, QuoteExtractor, QuoteScores,
    WordClassLexicon,
};
use sciq_core::textkit::analyze;

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/quotes")
        .join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn scores() -> (QuoteScores, QuoteScores) {
    let articles: Vec<Article> = ingest_str(&fixture("articles.jsonl")).unwrap().records;
    let gold = parse_quote_annotations(&fixture("annotations.tsv")).unwrap();
    let texts: Vec<_> = articles.iter().map(|a| analyze(&a.body())).collect();
    let extractor = QuoteExtractor::new(WordClassLexicon::default(), NameIndex::build(texts.iter()));
    let (mut base, mut full) = (QuoteScores::default(), QuoteScores::default());
    for (a, t) in articles.iter().zip(&texts) {
        assert_eq!(t.paragraphs.len(), a.paragraphs.len(), "{}", a.id);
        let annotated = &gold[&a.id];
        base.add(QuoteScores::of(&paragraphs_of(t, baseline_sentences(t)), annotated));
        let found: BTreeSet<usize> = paragraphs_of(t, extractor.candidates(t).iter().map(|c| c.sentence));
        full.add(QuoteScores::of(&found, annotated));
    }
    (base, full)
}

#[test]
fn every_article_is_annotated() {
    let gold = parse_quote_annotations(&fixture("annotations.tsv")).unwrap();
    assert_eq!(gold.len(), 20);
    assert!(gold.values().all(|q| !q.is_empty()));
}

#[test]
fn quote_mark_baseline_is_exact_but_narrow() {
    let (base, full) = scores();
    eprintln!("baseline {base:?} full {full:?}");
    assert_eq!(base.precision(), 1.0);
    assert!(base.recall() < 0.5, "{}", base.recall());
}

#[test]
fn patterns_at_least_double_baseline_recall() {
    let (base, full) = scores();
    assert!(
        full.recall() >= 2.0 * base.recall(),
        "{} vs {}",
        full.recall(),
        base.recall()
    );
    assert!(full.precision() >= 0.8, "{}", full.precision());
}
