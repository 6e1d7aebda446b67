//! Synthetic inputs for the benchmarks under `benches/`.

use sciq_core::textkit::{analyze, TokenizedText};
use sciq_core::{DiffusionGraph, NodeKind};

/// Postings share articles, articles cite papers; edges are spread by a
/// multiplicative hash so the shape is fixed for a given size.
pub fn diffusion_graph(postings: usize, articles: usize, papers: usize) -> DiffusionGraph {
    let mut g = DiffusionGraph::new();
    for p in 0..papers {
        g.add_node(&format!("paper{p}"), NodeKind::Paper, true).unwrap();
    }
    for a in 0..articles {
        let id = format!("art{a}");
        g.add_node(&id, NodeKind::Article, true).unwrap();
        for k in 0..1 + a % 3 {
            g.add_edge(&id, &format!("paper{}", (a * 7 + k * 13) % papers)).unwrap();
        }
    }
    for t in 0..postings {
        let id = format!("post{t}");
        g.add_node(&id, NodeKind::Posting, true).unwrap();
        for k in 0..1 + t % 2 {
            g.add_edge(&id, &format!("art{}", (t * 2_654_435_761 + k * 97) % articles))
                .unwrap();
        }
    }
    g
}

/// Two separable classes in `features` dimensions.
pub fn labeled_rows(n: usize, features: usize) -> (Vec<Vec<f64>>, Vec<u32>) {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class = (i % 2) as u32;
        let row = (0..features)
            .map(|f| ((i * 31 + f * 17) % 101) as f64 / 101.0 + f64::from(class) * (f % 2) as f64)
            .collect();
        x.push(row);
        y.push(class);
    }
    (x, y)
}

const VOCAB: [&str; 16] = [
    "sleep", "coffee", "brain", "memory", "ocean", "coral", "warming", "diet", "sugar", "heart", "gene", "mice",
    "vaccine", "trial", "climate", "study",
];

/// Documents drawn from four overlapping word groups.
pub fn documents(n: usize, words: usize) -> Vec<TokenizedText> {
    (0..n)
        .map(|d| {
            let group = d % 4;
            let text: Vec<&str> = (0..words).map(|w| VOCAB[(group * 4 + (d + w * 5) % 6) % 16]).collect();
            analyze(&format!("{}.", text.join(" ")))
        })
        .collect()
}
