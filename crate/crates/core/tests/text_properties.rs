use std::collections::BTreeSet;

use proptest::prelude::*;
use sciq_core::adherence::{sts_features, DocProfile};
use sciq_core::indicators::{weak_labels, OutletTable};
use sciq_core::quotes::expand_lexicon;
use sciq_core::textkit::{analyze, cosine, doc_vector, extract_entities, flesch_reading_ease, EmbeddingTable};
use sciq_core::topics::{hellinger_weights, train_lda, LdaParams};
use sciq_core::Article;

const WORDS: [&str; 10] = [
    "coffee", "sleep", "mice", "brain", "study", "ocean", "diet", "heart", "trial", "gene",
];
const NAMES: [&str; 4] = [
    "Alice Moreau",
    "Ravi Patel",
    "Stanford University",
    "World Health Organization",
];

fn sentence() -> impl Strategy<Value = String> {
    (
        prop::sample::select(NAMES.to_vec()),
        prop::collection::vec(prop::sample::select(WORDS.to_vec()), 2..8),
        1u32..500,
        1u32..100,
    )
        .prop_map(|(name, words, n, pct)| format!("{name} said {n} {} rose by {pct}% in 2019.", words.join(" ")))
}

fn text() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(sentence(), 1..6)
}

fn table() -> EmbeddingTable {
    let entries = WORDS.iter().enumerate().map(|(i, w)| {
        let v: Vec<f64> = (0..4).map(|d| ((i * 7 + d * 3) % 5) as f64 - 1.5).collect();
        (w.to_string(), v)
    });
    EmbeddingTable::new(4, entries)
}

fn distribution() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 4).prop_filter_map("all zero", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hellinger_is_a_bounded_symmetric_similarity(p in distribution(), q in distribution()) {
        let pq = hellinger_weights(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
        prop_assert!((pq - hellinger_weights(&q, &p).unwrap()).abs() < 1e-12);
        prop_assert!((hellinger_weights(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        let l1: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
        if l1 > 1e-3 {
            prop_assert!(pq < 1.0);
        }
    }

    #[test]
    fn flesch_ignores_repeated_sentences(s in text()) {
        let once = flesch_reading_ease(&analyze(&s.join(" "))).unwrap();
        let doubled: Vec<String> = s.iter().flat_map(|x| [x.clone(), x.clone()]).collect();
        let twice = flesch_reading_ease(&analyze(&doubled.join(" "))).unwrap();
        prop_assert!((once - twice).abs() < 1e-9, "{} vs {}", once, twice);
    }

    #[test]
    fn entities_are_verbatim_substrings(s in text()) {
        let joined = s.join(" ");
        let e = extract_entities(&analyze(&joined));
        for m in e.persons.iter().chain(&e.organizations).chain(&e.dates).chain(&e.numbers).chain(&e.percentages) {
            prop_assert!(joined.contains(m.as_str()), "{:?}", m);
        }
        prop_assert!(!e.percentages.is_empty());
    }

    #[test]
    fn doc_vector_has_unit_self_cosine(s in text()) {
        let v = doc_vector(&analyze(&s.join(" ")), &table());
        prop_assert!((cosine(&v, &v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sts_profile_of_a_document_against_itself(s in text()) {
        let t = analyze(&s.join("\n\n"));
        let model = train_lda(std::slice::from_ref(&t), LdaParams { iterations: 20, ..LdaParams::with_topics(3) }).unwrap();
        let p = DocProfile::new("d", &t, &model, &table()).unwrap();
        let f = sts_features(&p, &p);
        let want = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0];
        for (i, (got, w)) in f.document().iter().zip(want).enumerate() {
            prop_assert!((got - w).abs() < 1e-9, "metric {}: {}", i, got);
        }
    }

    #[test]
    fn expansion_keeps_every_seed(seeds in prop::collection::btree_set(prop::sample::select(WORDS.to_vec()), 0..5), k in 0usize..4) {
        let seeds: BTreeSet<String> = seeds.into_iter().map(String::from).collect();
        let out = expand_lexicon(&seeds, &table(), k);
        prop_assert!(seeds.is_subset(&out));
        prop_assert!(out.len() <= seeds.len() * (k + 1));
    }

    #[test]
    fn weak_labels_depend_only_on_outlet(outlets in prop::collection::vec(0usize..4, 1..20)) {
        let table = OutletTable::parse("a.com\t5\t100\nb.com\t1\t9000\nc.com\t-\t50\n").unwrap();
        let names = ["a.com", "b.com", "c.com", "d.com"];
        let articles: Vec<Article> = outlets
            .iter()
            .enumerate()
            .map(|(i, &o)| Article {
                id: format!("x{i}"),
                url: format!("http://{}/{i}", names[o]),
                outlet: names[o].into(),
                title: String::new(),
                byline: None,
                paragraphs: vec![format!("text {i}")],
                out_links: vec![],
                parse_ok: true,
            })
            .collect();
        if outlets.iter().all(|&o| o >= 2) {
            prop_assert!(weak_labels(&articles, &table).is_err());
            return Ok(());
        }
        let w = weak_labels(&articles, &table).unwrap();
        for (a, &o) in articles.iter().zip(&outlets) {
            match o {
                0 => prop_assert_eq!(w.labels.get(&a.id), Some(&5)),
                1 => prop_assert_eq!(w.labels.get(&a.id), Some(&1)),
                _ => prop_assert!(!w.labels.contains_key(&a.id) && w.excluded.contains(&a.id)),
            }
        }
    }
}
