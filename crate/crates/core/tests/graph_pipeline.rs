use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Instant;

use proptest::prelude::*;
use sciq_core::corpus::{filter_postings, ingest_str, to_jsonl, CorpusPaths};
use sciq_core::diffusion::{build, merge_duplicates, prune, sparse_cosine, term_frequencies};
use sciq_core::{Allowlist, Article, Corpus, DiffusionGraph, NodeKind, Posting};
use serde_json::Value;

fn mini() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini")
}

fn expected() -> Value {
    serde_json::from_str(&std::fs::read_to_string(mini().join("expected.json")).unwrap()).unwrap()
}

fn strings(v: &Value) -> BTreeSet<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect()
}

fn count(v: &Value, key: &str) -> usize {
    v[key].as_u64().unwrap() as usize
}

#[test]
fn mini_corpus_matches_hand_counts() {
    let start = Instant::now();
    let corpus = Corpus::load(&CorpusPaths::in_dir(&mini().join("corpus"))).unwrap();
    let exp = expected();
    let filtered = corpus.filtered_postings();
    assert_eq!(filtered.len(), count(&exp, "filtered_postings"));

    let built = build(&corpus.resolve(), &filtered, &corpus.articles, &corpus.papers);
    assert_eq!(built.node_count(), count(&exp, "built_nodes"));
    assert_eq!(built.edge_count(), count(&exp, "built_edges"));

    let (pruned, report) = prune(&built);
    assert_eq!(report.malformed, strings(&exp["malformed"]));
    assert_eq!(report.unreferenced_articles, strings(&exp["unreferenced_articles"]));
    assert_eq!(report.orphaned_postings, strings(&exp["orphaned_postings"]));
    assert_eq!(pruned.node_count(), count(&exp, "pruned_nodes"));
    assert_eq!(pruned.edge_count(), count(&exp, "pruned_edges"));

    let (merged, merges) = merge_duplicates(&pruned, &corpus.articles, 0.9);
    let want: BTreeMap<String, String> = exp["merges"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.as_str().unwrap().to_string()))
        .collect();
    assert_eq!(merges, want);
    assert_eq!(merged.node_count(), count(&exp, "merged_nodes"));
    assert_eq!(merged.edge_count(), count(&exp, "merged_edges"));
    for (removed, survivor) in &merges {
        assert!(!merged.contains(removed));
        for p in strings(&exp["rewired_postings"]) {
            assert!(merged.has_edge(&p, survivor), "{p} -> {survivor}");
        }
    }
    merged.validate().unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn corpus_records_round_trip() {
    let corpus = Corpus::load(&CorpusPaths::in_dir(&mini().join("corpus"))).unwrap();
    let again: Vec<Posting> = ingest_str(&to_jsonl(&corpus.postings)).unwrap().records;
    assert_eq!(again, corpus.postings);
    let again: Vec<Article> = ingest_str(&to_jsonl(&corpus.articles)).unwrap().records;
    assert_eq!(again, corpus.articles);
}

#[test]
fn resolved_links_point_at_loaded_records() {
    let corpus = Corpus::load(&CorpusPaths::in_dir(&mini().join("corpus"))).unwrap();
    let links = corpus.resolve();
    let postings: BTreeSet<&str> = corpus.postings.iter().map(|p| p.id.as_str()).collect();
    let articles: BTreeSet<&str> = corpus.articles.iter().map(|a| a.id.as_str()).collect();
    let papers: BTreeSet<&str> = corpus.papers.iter().map(|p| p.id.as_str()).collect();
    for (p, a) in &links.posting_article {
        assert!(postings.contains(p.as_str()) && articles.contains(a.as_str()));
    }
    for (a, p) in &links.article_paper {
        assert!(articles.contains(a.as_str()) && papers.contains(p.as_str()));
    }
    for (a, d) in &links.article_domain {
        assert!(articles.contains(a.as_str()) && corpus.allowlist.science_domains.contains(d));
    }
}

const WORDS: [&str; 8] = ["sleep", "coffee", "study", "brain", "ocean", "diet", "trial", "mice"];

fn article(id: usize, words: &[usize], links: usize) -> Article {
    Article {
        id: format!("a{id:02}"),
        url: format!("http://news.com/{id}"),
        outlet: "news.com".into(),
        title: String::new(),
        byline: None,
        paragraphs: vec![words.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ")],
        out_links: (0..links).map(|l| format!("http://nature.com/x{l}")).collect(),
        parse_ok: true,
    }
}

fn random_case() -> impl Strategy<Value = (Vec<Article>, Vec<(usize, usize)>, Vec<bool>)> {
    prop::collection::vec(
        (prop::collection::vec(0usize..8, 1..8), 1usize..4, prop::bool::ANY),
        1..7,
    )
    .prop_flat_map(|specs| {
        let n = specs.len();
        let arts: Vec<Article> = specs
            .iter()
            .enumerate()
            .map(|(i, (w, l, _))| article(i, w, *l))
            .collect();
        let cites: Vec<bool> = specs.iter().map(|s| s.2).collect();
        (Just(arts), prop::collection::vec((0usize..6, 0..n), 0..10), Just(cites))
    })
}

fn graph_of(articles: &[Article], shares: &[(usize, usize)], cites: &[bool]) -> DiffusionGraph {
    let mut g = DiffusionGraph::new();
    g.add_node("p", NodeKind::Paper, true).unwrap();
    for (a, &c) in articles.iter().zip(cites) {
        g.add_node(&a.id, NodeKind::Article, true).unwrap();
        if c {
            g.add_edge(&a.id, "p").unwrap();
        }
    }
    for &(t, a) in shares {
        let id = format!("t{t}");
        if !g.contains(&id) {
            g.add_node(&id, NodeKind::Posting, true).unwrap();
        }
        g.add_edge(&id, &articles[a].id).unwrap();
    }
    g
}

proptest! {
    #[test]
    fn prune_is_idempotent_and_shrinks((articles, shares, cites) in random_case()) {
        let g = graph_of(&articles, &shares, &cites);
        let (once, _) = prune(&g);
        let (twice, report) = prune(&once);
        prop_assert_eq!(report.removed_count(), 0);
        prop_assert_eq!(&once, &twice);
        for (id, _) in once.nodes() {
            prop_assert!(g.contains(id));
        }
    }

    #[test]
    fn merged_articles_are_pairwise_distinct((articles, shares, _c) in random_case(), threshold in 0.5f64..0.99) {
        let g = graph_of(&articles, &shares, &vec![true; articles.len()]);
        let (merged, map) = merge_duplicates(&g, &articles, threshold);
        let left: Vec<&Article> = articles.iter().filter(|a| merged.contains(&a.id)).collect();
        for (i, a) in left.iter().enumerate() {
            for b in &left[i + 1..] {
                let c = sparse_cosine(&term_frequencies(&a.body()), &term_frequencies(&b.body()));
                prop_assert!(c <= threshold, "{} {} {}", a.id, b.id, c);
            }
        }
        for (removed, survivor) in &map {
            prop_assert!(!merged.contains(removed));
            prop_assert!(merged.contains(survivor));
        }
        // Every posting keeps an edge to an article that is still present.
        for (t, _) in g.nodes().filter(|(_, n)| n.kind == NodeKind::Posting) {
            prop_assert_eq!(g.successors(t).count() > 0, merged.successors(t).count() > 0);
        }
        merged.validate().unwrap();
    }

    #[test]
    fn posting_filter_is_an_idempotent_subset(texts in prop::collection::vec("(study|tea|team|x| )*", 0..8)) {
        let allow = Allowlist::new(["nature.com".to_string()], ["study".to_string(), "tea".to_string()]).unwrap();
        let postings: Vec<Posting> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Posting {
                id: format!("p{i}"),
                author_id: "u".into(),
                text: t.clone(),
                urls: if i % 3 == 0 { vec![] } else { vec!["http://n.com/a".into()] },
                likes: 0,
                retweets: 0,
                followers: 0,
                followees: 0,
                country: None,
                timestamp: 1,
                reply_ids: vec![],
            })
            .collect();
        let once = filter_postings(&postings, &allow);
        prop_assert!(once.iter().all(|p| postings.contains(p)));
        prop_assert_eq!(filter_postings(&once, &allow), once.clone());
        // Single-word keywords match on token boundaries, i.e. whole tokens.
        let hit = |t: &str| t.split(|c: char| !c.is_alphanumeric()).any(|w| w == "study" || w == "tea");
        let want: Vec<&Posting> = postings.iter().filter(|p| !p.urls.is_empty() && hit(&p.text)).collect();
        prop_assert_eq!(once.iter().collect::<Vec<_>>(), want);
    }
}
