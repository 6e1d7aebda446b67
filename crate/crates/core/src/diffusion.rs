//! The typed diffusion graph: construction, pruning, duplicate merging and
//! centrality indicators.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{domain_node_id, Article, LinkTable, Paper, Posting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Posting,
    Article,
    Paper,
    ScienceDomain,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Posting => "posting",
            NodeKind::Article => "article",
            NodeKind::Paper => "paper",
            NodeKind::ScienceDomain => "science_domain",
        }
    }

    pub fn is_science(self) -> bool {
        matches!(self, NodeKind::Paper | NodeKind::ScienceDomain)
    }

    /// Whether an edge `self -> dst` is allowed.
    pub fn may_link_to(self, dst: NodeKind) -> bool {
        matches!(
            (self, dst),
            (NodeKind::Posting, NodeKind::Article)
                | (NodeKind::Article, NodeKind::Paper)
                | (NodeKind::Article, NodeKind::ScienceDomain)
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "posting" => NodeKind::Posting,
            "article" => NodeKind::Article,
            "paper" => NodeKind::Paper,
            "science_domain" => NodeKind::ScienceDomain,
            _ => return Err(GraphError::Parse(format!("unknown node kind `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("edge {src} ({src_kind}) -> {dst} ({dst_kind}) violates kind constraints")]
    BadEdge {
        src: String,
        dst: String,
        src_kind: NodeKind,
        dst_kind: NodeKind,
    },
    #[error("node `{id}` already exists as {existing}")]
    KindConflict { id: String, existing: NodeKind },
    #[error("graph has no paper or science-domain nodes to restart from")]
    NoRoots,
    #[error("graph is empty")]
    Empty,
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeInfo {
    pub kind: NodeKind,
    pub parse_ok: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffusionGraph {
    nodes: BTreeMap<String, NodeInfo>,
    edges: BTreeSet<(String, String)>,
}

impl DiffusionGraph {
    pub fn new() -> DiffusionGraph {
        DiffusionGraph::default()
    }

    pub fn add_node(&mut self, id: &str, kind: NodeKind, parse_ok: bool) -> Result<(), GraphError> {
        match self.nodes.get(id) {
            Some(info) if info.kind != kind => Err(GraphError::KindConflict {
                id: id.to_string(),
                existing: info.kind,
            }),
            Some(_) => Ok(()),
            None => {
                self.nodes.insert(id.to_string(), NodeInfo { kind, parse_ok });
                Ok(())
            }
        }
    }

    /// Adds `src -> dst`; repeated edges collapse.
    pub fn add_edge(&mut self, src: &str, dst: &str) -> Result<(), GraphError> {
        let s = self.kind(src).ok_or_else(|| GraphError::UnknownNode(src.to_string()))?;
        let d = self.kind(dst).ok_or_else(|| GraphError::UnknownNode(dst.to_string()))?;
        if !s.may_link_to(d) {
            return Err(GraphError::BadEdge {
                src: src.to_string(),
                dst: dst.to_string(),
                src_kind: s,
                dst_kind: d,
            });
        }
        self.edges.insert((src.to_string(), dst.to_string()));
        Ok(())
    }

    pub fn kind(&self, id: &str) -> Option<NodeKind> {
        self.nodes.get(id).map(|n| n.kind)
    }

    pub fn node(&self, id: &str) -> Option<&NodeInfo> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, &NodeInfo)> {
        self.nodes.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn node_ids(&self, kind: NodeKind) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .filter(move |(_, n)| n.kind == kind)
            .map(|(k, _)| k.as_str())
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn has_edge(&self, src: &str, dst: &str) -> bool {
        self.edges.contains(&(src.to_string(), dst.to_string()))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.node_ids(kind).count()
    }

    pub fn successors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range((id.to_string(), String::new())..)
            .take_while(move |(a, _)| a == id)
            .map(|(_, b)| b.as_str())
    }

    pub fn predecessors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.iter().filter(move |(_, b)| b == id).map(|(a, _)| a.as_str())
    }

    /// Drops nodes and every edge touching them.
    fn remove_nodes(&mut self, ids: &BTreeSet<String>) {
        self.nodes.retain(|k, _| !ids.contains(k));
        self.edges.retain(|(a, b)| !ids.contains(a) && !ids.contains(b));
    }

    /// Checks the structural invariants; used by tests and after import.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (a, b) in &self.edges {
            let s = self.kind(a).ok_or_else(|| GraphError::UnknownNode(a.clone()))?;
            let d = self.kind(b).ok_or_else(|| GraphError::UnknownNode(b.clone()))?;
            if !s.may_link_to(d) {
                return Err(GraphError::BadEdge {
                    src: a.clone(),
                    dst: b.clone(),
                    src_kind: s,
                    dst_kind: d,
                });
            }
        }
        Ok(())
    }

    /// Edge list as TSV: `src_id, dst_id, src_kind, dst_kind`.
    pub fn edges_tsv(&self) -> String {
        let mut out = String::from("src_id\tdst_id\tsrc_kind\tdst_kind\n");
        for (a, b) in &self.edges {
            out.push_str(&format!("{a}\t{b}\t{}\t{}\n", self.nodes[a].kind, self.nodes[b].kind));
        }
        out
    }

    /// Node attributes as JSONL.
    pub fn nodes_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            id: &'a str,
            kind: NodeKind,
            parse_ok: bool,
        }
        let mut out = String::new();
        for (id, n) in &self.nodes {
            let row = Row {
                id,
                kind: n.kind,
                parse_ok: n.parse_ok,
            };
            out.push_str(&serde_json::to_string(&row).expect("node rows serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_exports(nodes_jsonl: &str, edges_tsv: &str) -> Result<DiffusionGraph, GraphError> {
        #[derive(Deserialize)]
        struct Row {
            id: String,
            kind: NodeKind,
            parse_ok: bool,
        }
        let mut g = DiffusionGraph::new();
        for (i, line) in nodes_jsonl.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row: Row =
                serde_json::from_str(line).map_err(|e| GraphError::Parse(format!("node line {}: {e}", i + 1)))?;
            g.add_node(&row.id, row.kind, row.parse_ok)?;
        }
        for (i, line) in edges_tsv
            .lines()
            .enumerate()
            .skip(1)
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(GraphError::Parse(format!("edge line {}: expected 4 columns", i + 1)));
            }
            for (id, kind) in [(cols[0], cols[2]), (cols[1], cols[3])] {
                let kind: NodeKind = kind.parse()?;
                if g.kind(id) != Some(kind) {
                    return Err(GraphError::Parse(format!(
                        "edge line {}: node `{id}` is not a {kind}",
                        i + 1
                    )));
                }
            }
            g.add_edge(cols[0], cols[1])?;
        }
        Ok(g)
    }
}

/// One node per record, one per referenced science domain, and the linked edges.
pub fn build(links: &LinkTable, postings: &[Posting], articles: &[Article], papers: &[Paper]) -> DiffusionGraph {
    let mut g = DiffusionGraph::new();
    let add = |g: &mut DiffusionGraph, id: &str, kind, ok| {
        // Ids are unique per record family; a clash across families keeps the first.
        let _ = g.add_node(id, kind, ok);
    };
    for p in postings {
        add(&mut g, &p.id, NodeKind::Posting, true);
    }
    for a in articles {
        add(&mut g, &a.id, NodeKind::Article, a.parse_ok);
    }
    for p in papers {
        add(&mut g, &p.id, NodeKind::Paper, p.parse_ok);
    }
    for (_, d) in &links.article_domain {
        add(&mut g, &domain_node_id(d), NodeKind::ScienceDomain, true);
    }
    let edges = links
        .posting_article
        .iter()
        .chain(&links.article_paper)
        .cloned()
        .chain(links.article_domain.iter().map(|(a, d)| (a.clone(), domain_node_id(d))));
    for (src, dst) in edges {
        let _ = g.add_edge(&src, &dst);
    }
    g
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReport {
    pub malformed: BTreeSet<String>,
    pub unreferenced_articles: BTreeSet<String>,
    pub orphaned_postings: BTreeSet<String>,
}

impl PruneReport {
    pub fn removed_count(&self) -> usize {
        self.malformed.len() + self.unreferenced_articles.len() + self.orphaned_postings.len()
    }
}

/// Removes malformed pages, articles that cite no science, and postings left
/// pointing nowhere, until nothing changes.
pub fn prune(g: &DiffusionGraph) -> (DiffusionGraph, PruneReport) {
    let mut out = g.clone();
    let mut report = PruneReport::default();
    let malformed: BTreeSet<String> = out
        .nodes
        .iter()
        .filter(|(_, n)| !n.parse_ok)
        .map(|(k, _)| k.clone())
        .collect();
    out.remove_nodes(&malformed);
    report.malformed = malformed;
    loop {
        let articles: BTreeSet<String> = out
            .node_ids(NodeKind::Article)
            .filter(|a| !out.successors(a).any(|s| out.kind(s).is_some_and(NodeKind::is_science)))
            .map(str::to_string)
            .collect();
        out.remove_nodes(&articles);
        let postings: BTreeSet<String> = out
            .node_ids(NodeKind::Posting)
            .filter(|p| out.successors(p).next().is_none())
            .map(str::to_string)
            .collect();
        out.remove_nodes(&postings);
        if articles.is_empty() && postings.is_empty() {
            break;
        }
        report.unreferenced_articles.extend(articles);
        report.orphaned_postings.extend(postings);
    }
    (out, report)
}

/// Raw term frequencies over lowercase alphabetic tokens.
pub fn term_frequencies(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for w in text.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()) {
        *tf.entry(w.to_lowercase()).or_insert(0.0) += 1.0;
    }
    tf
}

pub fn sparse_cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small.iter().filter_map(|(w, x)| large.get(w).map(|y| x * y)).sum();
    let aa: f64 = a.values().map(|x| x * x).sum();
    let bb: f64 = b.values().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    (dot / (aa * bb).sqrt()).clamp(-1.0, 1.0)
}

fn uf_find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Merges near-duplicate articles present in `g`. Returns the new graph and
/// a map from each removed article to its survivor.
pub fn merge_duplicates(
    g: &DiffusionGraph,
    articles: &[Article],
    threshold: f64,
) -> (DiffusionGraph, BTreeMap<String, String>) {
    let mut present: Vec<&Article> = articles
        .iter()
        .filter(|a| g.kind(&a.id) == Some(NodeKind::Article))
        .collect();
    present.sort_by(|a, b| a.id.cmp(&b.id));
    present.dedup_by(|a, b| a.id == b.id);
    let tfs: Vec<BTreeMap<String, f64>> = present.iter().map(|a| term_frequencies(&a.body())).collect();
    let n = present.len();
    let similar: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let tfs = &tfs;
            (i + 1..n)
                .filter(move |&j| sparse_cosine(&tfs[i], &tfs[j]) > threshold)
                .map(move |j| (i, j))
        })
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for (i, j) in similar {
        let (ri, rj) = (uf_find(&mut parent, i), uf_find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = uf_find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    let out_links = |a: &Article| a.out_links.iter().collect::<BTreeSet<_>>().len();
    let mut merged = BTreeMap::new();
    for members in clusters.values().filter(|m| m.len() > 1) {
        // Members are in id order; strict `>` keeps the smallest id on ties.
        let mut survivor = members[0];
        for &m in &members[1..] {
            if out_links(present[m]) > out_links(present[survivor]) {
                survivor = m;
            }
        }
        for &m in members.iter().filter(|&&m| m != survivor) {
            merged.insert(present[m].id.clone(), present[survivor].id.clone());
        }
    }
    let mut out = DiffusionGraph::new();
    for (id, info) in &g.nodes {
        if !merged.contains_key(id) {
            out.nodes.insert(id.clone(), *info);
        }
    }
    for (a, b) in &g.edges {
        if merged.contains_key(a) {
            continue;
        }
        let dst = merged.get(b).unwrap_or(b);
        out.edges.insert((a.clone(), dst.clone()));
    }
    (out, merged)
}

/// Dense index over a graph's nodes, in id order.
struct Indexed<'a> {
    ids: Vec<&'a str>,
    kinds: Vec<NodeKind>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl<'a> Indexed<'a> {
    fn new(g: &'a DiffusionGraph) -> Indexed<'a> {
        let ids: Vec<&str> = g.nodes.keys().map(String::as_str).collect();
        let kinds = g.nodes.values().map(|n| n.kind).collect();
        let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut out = vec![Vec::new(); ids.len()];
        let mut inn = vec![Vec::new(); ids.len()];
        for (a, b) in &g.edges {
            let (i, j) = (pos[a.as_str()], pos[b.as_str()]);
            out[i].push(j);
            inn[j].push(i);
        }
        Indexed { ids, kinds, out, inn }
    }
}

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const MAX_PAGERANK_ITERATIONS: usize = 100_000;

/// PageRank on the reversed graph, restarting uniformly at papers and science
/// domains. Dangling mass returns to the restart set.
pub fn personalized_pagerank(g: &DiffusionGraph, damping: f64, tol: f64) -> Result<BTreeMap<String, f64>, GraphError> {
    if g.nodes.is_empty() {
        return Err(GraphError::Empty);
    }
    let ix = Indexed::new(g);
    let n = ix.ids.len();
    let roots: Vec<usize> = (0..n).filter(|&i| ix.kinds[i].is_science()).collect();
    if roots.is_empty() {
        return Err(GraphError::NoRoots);
    }
    let mut restart = vec![0.0; n];
    for &r in &roots {
        restart[r] = 1.0 / roots.len() as f64;
    }
    // In the reversed graph a node's successors are its original predecessors.
    let rev_out = &ix.inn;
    let mut x = restart.clone();
    let mut next = vec![0.0; n];
    for _ in 0..MAX_PAGERANK_ITERATIONS {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut dangling = 0.0;
        for u in 0..n {
            if rev_out[u].is_empty() {
                dangling += x[u];
            } else {
                let share = x[u] / rev_out[u].len() as f64;
                for &v in &rev_out[u] {
                    next[v] += damping * share;
                }
            }
        }
        let back = damping * dangling + (1.0 - damping);
        for v in 0..n {
            next[v] += back * restart[v];
        }
        let delta: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if delta < tol {
            break;
        }
    }
    Ok(ix.ids.iter().zip(x).map(|(id, v)| (id.to_string(), v)).collect())
}

/// Directed betweenness (Brandes), normalized by (n-1)(n-2) when n > 2.
pub fn betweenness(g: &DiffusionGraph) -> BTreeMap<String, f64> {
    let ix = Indexed::new(g);
    let n = ix.ids.len();
    let partial: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| brandes_from(&ix.out, s)).collect();
    let mut cb = vec![0.0; n];
    for p in &partial {
        for (c, v) in cb.iter_mut().zip(p) {
            *c += v;
        }
    }
    if n > 2 {
        let norm = ((n - 1) * (n - 2)) as f64;
        cb.iter_mut().for_each(|c| *c /= norm);
    }
    ix.ids.iter().zip(cb).map(|(id, v)| (id.to_string(), v)).collect()
}

/// Dependency of every node on shortest paths from `s`.
fn brandes_from(adj: &[Vec<usize>], s: usize) -> Vec<f64> {
    let n = adj.len();
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    sigma[s] = 1.0;
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        stack.push(v);
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    let mut delta = vec![0.0; n];
    let mut out = vec![0.0; n];
    while let Some(w) = stack.pop() {
        for &v in &preds[w] {
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
        if w != s {
            out[w] = delta[w];
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub pagerank: BTreeMap<String, f64>,
    pub betweenness: BTreeMap<String, f64>,
    pub in_degree: BTreeMap<String, usize>,
    pub out_degree: BTreeMap<String, usize>,
}

/// All graph indicators with default PageRank settings. PageRank is left
/// empty when the graph has nothing to restart from.
pub fn centralities(g: &DiffusionGraph) -> CentralityScores {
    let ix = Indexed::new(g);
    let mut scores = CentralityScores {
        pagerank: personalized_pagerank(g, DEFAULT_DAMPING, DEFAULT_TOLERANCE).unwrap_or_default(),
        betweenness: betweenness(g),
        ..Default::default()
    };
    for (i, id) in ix.ids.iter().enumerate() {
        scores.in_degree.insert(id.to_string(), ix.inn[i].len());
        scores.out_degree.insert(id.to_string(), ix.out[i].len());
    }
    scores
}
