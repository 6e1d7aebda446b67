//! Pipeline stages and their on-disk artifacts.
//!
//! Every stage reads only the config inputs and earlier artifacts, writes
//! its outputs under `output_dir/<stage>/`, and records input/output hashes
//! in `output_dir/manifest.json`. Reruns with identical inputs are
//! byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sciq_core::adherence::{build_pairs, evaluate_sts, featurize, pairs_csv, train_sts, DocProfile, StsModel};
use sciq_core::corpus::{ingest_str, to_jsonl, Allowlist, Article, Corpus, IngestReport, Paper, Posting, Reply};
use sciq_core::diffusion::{self, CentralityScores, DiffusionGraph, NodeKind};
use sciq_core::indicators::{
    compute_all, discriminate, indicators_csv, parse_expert_labels, parse_ratings, rmse_report, train_quality,
    weak_labels, IndicatorContext, IndicatorVector, OutletTable, QualityModel,
};
use sciq_core::learn::ForestParams;
use sciq_core::persist;
use sciq_core::quotes::{review_tsv, NameIndex, QuoteExtractor, WordClassLexicon, WordClassSeeds};
use sciq_core::social::{evaluate_stance, labeled_examples, parse_stance_labels, train_stance, StanceModel};
use sciq_core::textkit::{analyze, load_embeddings, EmbeddingTable, HeadlineModel};
use sciq_core::topics::{train_lda, LdaParams, TopicModel};

use crate::config::PipelineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Graph,
    Train,
    Indicators,
    Score,
    Report,
}

impl Stage {
    /// Execution order for `all`. Training comes before indicators because
    /// source adherence and stance need the trained models.
    pub const ORDER: [Stage; 6] = [
        Stage::Ingest,
        Stage::Graph,
        Stage::Train,
        Stage::Indicators,
        Stage::Score,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Graph => "graph",
            Stage::Train => "train",
            Stage::Indicators => "indicators",
            Stage::Score => "score",
            Stage::Report => "report",
        }
    }
}

/// A `--stage` argument: one stage or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageSelection {
    One(Stage),
    All,
}

impl FromStr for StageSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(StageSelection::All);
        }
        Stage::ORDER
            .into_iter()
            .find(|st| st.name() == s)
            .map(StageSelection::One)
            .ok_or_else(|| format!("unknown stage `{s}` (ingest, graph, indicators, train, score, report, all)"))
    }
}

/// A stage could not start because an earlier artifact or input is absent.
#[derive(Debug, thiserror::Error)]
#[error("stage `{stage}`: missing prerequisite {what} at {path}")]
pub struct MissingArtifact {
    pub stage: &'static str,
    pub what: String,
    pub path: String,
}

/// Artifact locations under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

macro_rules! artifact {
    ($($name:ident => $dir:literal / $file:literal),* $(,)?) => {
        impl Layout {
            $(pub fn $name(&self) -> PathBuf { self.root.join($dir).join($file) })*
        }
    };
}

artifact! {
    postings => "ingest" / "postings.jsonl",
    replies => "ingest" / "replies.jsonl",
    articles => "ingest" / "articles.jsonl",
    papers => "ingest" / "papers.jsonl",
    allowlist => "ingest" / "allowlist.json",
    ingest_report => "ingest" / "report.json",
    links => "graph" / "links.json",
    nodes => "graph" / "nodes.jsonl",
    edges => "graph" / "edges.tsv",
    prune_report => "graph" / "prune_report.json",
    merges => "graph" / "merges.tsv",
    graph_summary => "graph" / "summary.json",
    centralities => "graph" / "centralities.json",
    lexicon => "train" / "lexicon.json",
    lexicon_review => "train" / "lexicon_review.tsv",
    topics => "train" / "topics.json",
    sts_model => "train" / "sts_model.json",
    sts_pairs => "train" / "sts_pairs.csv",
    sts_eval => "train" / "sts_eval.json",
    stance_model => "train" / "stance_model.json",
    stance_eval => "train" / "stance_eval.json",
    indicators_csv => "indicators" / "indicators.csv",
    indicators_jsonl => "indicators" / "indicators.jsonl",
    quality_model => "score" / "quality_model.json",
    weak_labels => "score" / "weak_labels.tsv",
    scores => "score" / "scores.csv",
    discrimination => "score" / "discrimination.csv",
    rmse_csv => "report" / "rmse.csv",
    rmse_json => "report" / "rmse.json",
}

impl Layout {
    pub fn new(root: &Path) -> Layout {
        Layout {
            root: root.to_path_buf(),
        }
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    /// Default ratings store when the config names none.
    pub fn default_ratings(&self) -> PathBuf {
        self.root.join("ratings.jsonl")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub stages: BTreeMap<String, StageRecord>,
}

/// Tracks what one stage read and wrote.
struct StageRun<'a> {
    stage: Stage,
    cfg: &'a PipelineConfig,
    layout: &'a Layout,
    record: StageRecord,
}

impl<'a> StageRun<'a> {
    fn new(stage: Stage, cfg: &'a PipelineConfig, layout: &'a Layout) -> StageRun<'a> {
        StageRun {
            stage,
            cfg,
            layout,
            record: StageRecord {
                seed: cfg.seed_for(stage.name()),
                ..Default::default()
            },
        }
    }

    fn seed(&self) -> u64 {
        self.record.seed
    }

    /// Reads a prerequisite, failing with the stage name when it is absent.
    fn read(&mut self, path: &Path, what: &str) -> Result<String> {
        if !path.exists() {
            return Err(MissingArtifact {
                stage: self.stage.name(),
                what: what.to_string(),
                path: path.display().to_string(),
            }
            .into());
        }
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.note_input(path, &bytes);
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn note_input(&mut self, path: &Path, bytes: &[u8]) {
        let key = match path.strip_prefix(&self.layout.root) {
            Ok(rel) => format!("@output/{}", rel.to_string_lossy().replace('\\', "/")),
            Err(_) => self.cfg.display_path(path),
        };
        self.record.inputs.insert(key, sha256_hex(bytes));
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        let rel = path.strip_prefix(&self.layout.root).unwrap_or(path);
        self.record.outputs.insert(
            rel.to_string_lossy().replace('\\', "/"),
            sha256_hex(contents.as_bytes()),
        );
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(path, &s)
    }

    fn finish(self) -> Result<()> {
        let path = self.layout.manifest();
        let mut manifest: Manifest = match fs::read_to_string(&path) {
            Ok(s) => serde_json::from_str(&s).unwrap_or_default(),
            Err(_) => Manifest::default(),
        };
        manifest.seed = self.cfg.seed;
        manifest.stages.insert(self.stage.name().to_string(), self.record);
        let mut s = serde_json::to_string_pretty(&manifest)?;
        s.push('\n');
        fs::create_dir_all(&self.layout.root)?;
        fs::write(&path, s).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Runs one stage or the whole pipeline.
pub fn run(selection: StageSelection, cfg: &PipelineConfig) -> Result<()> {
    cfg.validate()?;
    let layout = Layout::new(&cfg.output_dir);
    let stages: Vec<Stage> = match selection {
        StageSelection::All => Stage::ORDER.to_vec(),
        StageSelection::One(s) => vec![s],
    };
    for stage in stages {
        run_stage(stage, cfg, &layout).with_context(|| format!("stage `{}` failed", stage.name()))?;
    }
    Ok(())
}

fn run_stage(stage: Stage, cfg: &PipelineConfig, layout: &Layout) -> Result<()> {
    let mut run = StageRun::new(stage, cfg, layout);
    match stage {
        Stage::Ingest => ingest(&mut run)?,
        Stage::Graph => graph(&mut run)?,
        Stage::Train => train(&mut run)?,
        Stage::Indicators => indicators(&mut run)?,
        Stage::Score => score(&mut run)?,
        Stage::Report => report(&mut run)?,
    }
    run.finish()
}

fn ingest(run: &mut StageRun<'_>) -> Result<()> {
    let paths = run.cfg.corpus_paths()?;
    for p in [
        &paths.postings,
        &paths.replies,
        &paths.articles,
        &paths.papers,
        &paths.domains,
        &paths.keywords,
    ] {
        run.read(p, "corpus file")?;
    }
    let corpus = Corpus::load(&paths)?;
    let l = run.layout;
    run.write(&l.postings(), &to_jsonl(&corpus.postings))?;
    run.write(&l.replies(), &to_jsonl(&corpus.replies))?;
    run.write(&l.articles(), &to_jsonl(&corpus.articles))?;
    run.write(&l.papers(), &to_jsonl(&corpus.papers))?;
    run.write_json(&l.allowlist(), &corpus.allowlist)?;
    run.write_json(&l.ingest_report(), &corpus.report)?;
    Ok(())
}

fn parse_records<T: sciq_core::corpus::Record>(text: &str, path: &Path) -> Result<Vec<T>> {
    let ing = ingest_str::<T>(text).map_err(|id| anyhow::anyhow!("{}: duplicate id {id}", path.display()))?;
    Ok(ing.records)
}

/// The corpus as written by the ingest stage.
fn load_corpus(run: &mut StageRun<'_>) -> Result<Corpus> {
    let l = run.layout.clone();
    let postings: Vec<Posting> = parse_records(&run.read(&l.postings(), "ingest artifact")?, &l.postings())?;
    let replies: Vec<Reply> = parse_records(&run.read(&l.replies(), "ingest artifact")?, &l.replies())?;
    let articles: Vec<Article> = parse_records(&run.read(&l.articles(), "ingest artifact")?, &l.articles())?;
    let papers: Vec<Paper> = parse_records(&run.read(&l.papers(), "ingest artifact")?, &l.papers())?;
    let allowlist: Allowlist = serde_json::from_str(&run.read(&l.allowlist(), "ingest artifact")?)?;
    Ok(Corpus::from_records(
        postings,
        replies,
        articles,
        papers,
        allowlist,
        IngestReport::default(),
    ))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub built_nodes: usize,
    pub built_edges: usize,
    pub pruned_nodes: usize,
    pub pruned_edges: usize,
    pub merged_nodes: usize,
    pub merged_edges: usize,
    pub articles: usize,
    pub postings: usize,
    pub papers: usize,
    pub science_domains: usize,
}

fn graph(run: &mut StageRun<'_>) -> Result<()> {
    let corpus = load_corpus(run)?;
    let th = run.cfg.thresholds;
    let filtered = corpus.filtered_postings();
    let links = corpus.resolve();
    let built = diffusion::build(&links, &filtered, &corpus.articles, &corpus.papers);
    let (pruned, prune_report) = diffusion::prune(&built);
    let (merged, merges) = diffusion::merge_duplicates(&pruned, &corpus.articles, th.merge);
    let mut scores = diffusion::centralities(&merged);
    scores.pagerank = diffusion::personalized_pagerank(&merged, th.damping, th.pagerank_tolerance).unwrap_or_default();
    let summary = GraphSummary {
        built_nodes: built.node_count(),
        built_edges: built.edge_count(),
        pruned_nodes: pruned.node_count(),
        pruned_edges: pruned.edge_count(),
        merged_nodes: merged.node_count(),
        merged_edges: merged.edge_count(),
        articles: merged.count(NodeKind::Article),
        postings: merged.count(NodeKind::Posting),
        papers: merged.count(NodeKind::Paper),
        science_domains: merged.count(NodeKind::ScienceDomain),
    };
    let l = run.layout.clone();
    run.write_json(&l.links(), &links)?;
    run.write(&l.nodes(), &merged.nodes_jsonl())?;
    run.write(&l.edges(), &merged.edges_tsv())?;
    run.write_json(&l.prune_report(), &prune_report)?;
    let mut m = String::from("removed\tsurvivor\n");
    for (removed, survivor) in &merges {
        let _ = writeln!(m, "{removed}\t{survivor}");
    }
    run.write(&l.merges(), &m)?;
    run.write_json(&l.graph_summary(), &summary)?;
    run.write_json(&l.centralities(), &scores)?;
    Ok(())
}

fn load_graph(run: &mut StageRun<'_>) -> Result<DiffusionGraph> {
    let l = run.layout.clone();
    let nodes = run.read(&l.nodes(), "graph artifact")?;
    let edges = run.read(&l.edges(), "graph artifact")?;
    Ok(DiffusionGraph::from_exports(&nodes, &edges)?)
}

fn load_table(run: &mut StageRun<'_>) -> Result<EmbeddingTable> {
    let path = run.cfg.inputs.embeddings.clone();
    let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    run.note_input(&path, &bytes);
    Ok(load_embeddings(&path)?)
}

fn paper_text(p: &Paper) -> String {
    format!("{}\n\n{}", p.title, p.body)
}

/// Profiles of every article and paper in the graph.
fn doc_profiles(
    corpus: &Corpus,
    g: &DiffusionGraph,
    topics: &TopicModel,
    table: &EmbeddingTable,
) -> BTreeMap<String, DocProfile> {
    use rayon::prelude::*;
    let mut docs: Vec<(String, String)> = corpus
        .articles
        .iter()
        .filter(|a| g.contains(&a.id))
        .map(|a| (a.id.clone(), a.body()))
        .collect();
    docs.extend(
        corpus
            .papers
            .iter()
            .filter(|p| g.contains(&p.id))
            .map(|p| (p.id.clone(), paper_text(p))),
    );
    docs.par_iter()
        .filter_map(|(id, text)| {
            DocProfile::new(id, &analyze(text), topics, table)
                .ok()
                .map(|p| (id.clone(), p))
        })
        .collect()
}

fn forest_params(run: &StageRun<'_>, name: &str) -> ForestParams {
    ForestParams {
        n_trees: run.cfg.models.n_trees,
        seed: sciq_core::mix_seed(run.seed() ^ sciq_core::fnv1a(name.as_bytes())),
        max_features: None,
    }
}

fn train(run: &mut StageRun<'_>) -> Result<()> {
    let corpus = load_corpus(run)?;
    let g = load_graph(run)?;
    let table = load_table(run)?;
    let m = run.cfg.models;
    let l = run.layout.clone();

    let (lexicon, neighbors) = WordClassLexicon::expand(WordClassSeeds::default(), &table, m.lexicon_neighbors);
    run.write_json(&l.lexicon(), &lexicon)?;
    run.write(&l.lexicon_review(), &review_tsv(&neighbors))?;

    let mut docs: Vec<String> = corpus
        .articles
        .iter()
        .filter(|a| g.contains(&a.id))
        .map(Article::body)
        .collect();
    docs.extend(corpus.papers.iter().filter(|p| g.contains(&p.id)).map(paper_text));
    let analyzed: Vec<_> = docs.iter().map(|d| analyze(d)).collect();
    let lda = LdaParams {
        iterations: m.lda_iterations,
        seed: sciq_core::mix_seed(run.seed() ^ 0x1da),
        ..LdaParams::with_topics(m.topics)
    };
    let topics = train_lda(&analyzed, lda)?;
    write_model(run, &l.topics(), "topic_model", &topics)?;

    let profiles = doc_profiles(&corpus, &g, &topics, &table);
    let pairs = featurize(&build_pairs(&g, run.seed())?, &profiles);
    let sts = train_sts(&pairs, forest_params(run, "sts"))?;
    let sts_eval = evaluate_sts(&pairs, m.cv_folds, forest_params(run, "sts"))?;
    run.write(&l.sts_pairs(), &pairs_csv(&pairs))?;
    write_model(run, &l.sts_model(), "sts_model", &sts)?;
    run.write_json(&l.sts_eval(), &sts_eval)?;

    let mut labels = parse_stance_labels(&run.read(&run.cfg.inputs.stance_labels.clone(), "stance labels")?)?;
    if let Some(extra) = run.cfg.inputs.stance_extra.clone() {
        labels.extend(parse_stance_labels(&run.read(&extra, "extra stance labels")?)?);
    }
    let examples: Vec<_> = labeled_examples(&labels, &corpus.replies, &corpus.postings, &table)
        .into_iter()
        .map(|(_, f, l)| (f, l))
        .collect();
    let stance = train_stance(&examples, forest_params(run, "stance"))?;
    let stance_eval = evaluate_stance(&examples, m.cv_folds, forest_params(run, "stance"))?;
    write_model(run, &l.stance_model(), "stance_model", &stance)?;
    run.write_json(&l.stance_eval(), &stance_eval)?;
    Ok(())
}

fn write_model<T: Serialize>(run: &mut StageRun<'_>, path: &Path, kind: &str, model: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    persist::save(path, kind, model)?;
    let body = fs::read_to_string(path)?;
    run.write(path, &body)
}

fn read_model<T: serde::de::DeserializeOwned>(run: &mut StageRun<'_>, path: &Path, kind: &str) -> Result<T> {
    run.read(path, "trained model")?;
    Ok(persist::load(path, kind)?)
}

fn load_outlets(run: &mut StageRun<'_>) -> Result<OutletTable> {
    let path = run.cfg.inputs.outlets.clone();
    Ok(OutletTable::parse(&run.read(&path, "outlet metadata")?)?)
}

fn indicators(run: &mut StageRun<'_>) -> Result<()> {
    let l = run.layout.clone();
    let corpus = load_corpus(run)?;
    let g = load_graph(run)?;
    let centralities: CentralityScores = serde_json::from_str(&run.read(&l.centralities(), "graph artifact")?)?;
    let table = load_table(run)?;
    let outlets = load_outlets(run)?;
    let lexicon: WordClassLexicon = serde_json::from_str(&run.read(&l.lexicon(), "trained lexicon")?)?;
    let topics: TopicModel = read_model(run, &l.topics(), "topic_model")?;
    let sts: StsModel = read_model(run, &l.sts_model(), "sts_model")?;
    let stance: StanceModel = read_model(run, &l.stance_model(), "stance_model")?;

    let bodies: Vec<_> = corpus.articles.iter().map(|a| analyze(&a.body())).collect();
    let names = NameIndex::build(bodies.iter());
    let extractor = QuoteExtractor::new(lexicon, names);
    let profiles = doc_profiles(&corpus, &g, &topics, &table);
    let ctx = IndicatorContext {
        corpus: &corpus,
        graph: &g,
        centralities: &centralities,
        outlets: &outlets,
        allowlist: &corpus.allowlist,
        quotes: &extractor,
        headlines: HeadlineModel::bundled(),
        embeddings: &table,
        sts: Some((&sts, &profiles)),
        stance: Some(&stance),
    };
    let vectors = compute_all(&ctx)?;
    run.write(&l.indicators_csv(), &indicators_csv(&vectors))?;
    run.write(&l.indicators_jsonl(), &to_jsonl(&vectors))?;
    Ok(())
}

pub fn parse_indicators(text: &str) -> Result<Vec<IndicatorVector>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}

fn score(run: &mut StageRun<'_>) -> Result<()> {
    let l = run.layout.clone();
    let corpus = load_corpus(run)?;
    let outlets = load_outlets(run)?;
    let vectors = parse_indicators(&run.read(&l.indicators_jsonl(), "indicators artifact")?)?;
    let scored: Vec<&Article> = vectors.iter().filter_map(|v| corpus.article(&v.article_id)).collect();
    let weak = weak_labels(scored.iter().copied(), &outlets)?;
    let model = train_quality(&vectors, &weak.labels, forest_params(run, "quality"))?;
    write_model(run, &l.quality_model(), "quality_model", &model)?;

    let mut w = String::from("article_id\ttier\n");
    for (id, t) in &weak.labels {
        let _ = writeln!(w, "{id}\t{t}");
    }
    for id in &weak.excluded {
        let _ = writeln!(w, "{id}\t");
    }
    run.write(&l.weak_labels(), &w)?;
    run.write(&l.scores(), &scores_csv(&vectors, &corpus, &outlets, &model))?;

    let groups: BTreeMap<String, u32> = weak.labels.iter().map(|(k, v)| (k.clone(), u32::from(*v))).collect();
    let mut d = String::from("indicator,f_statistic,p_value,stars\n");
    for row in discriminate(&vectors, &groups) {
        let _ = writeln!(d, "{},{},{},{}", row.indicator, row.f_statistic, row.p_value, row.stars);
    }
    run.write(&l.discrimination(), &d)?;
    Ok(())
}

fn scores_csv(vectors: &[IndicatorVector], corpus: &Corpus, outlets: &OutletTable, model: &QualityModel) -> String {
    let mut out = String::from("article_id,outlet,tier,score\n");
    for v in vectors {
        let outlet = corpus.article(&v.article_id).map(|a| a.outlet.as_str()).unwrap_or("");
        let tier = outlets.tier(outlet).map(|t| t.value().to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{:.1}", v.article_id, outlet, tier, model.score(v));
    }
    out
}

/// `article_id -> automated score` from `scores.csv`.
pub fn parse_scores(text: &str) -> BTreeMap<String, f64> {
    text.lines()
        .skip(1)
        .filter_map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            Some((cells.first()?.to_string(), cells.get(3)?.parse().ok()?))
        })
        .collect()
}

/// Ratings store location: the configured path or the default under the output directory.
pub fn ratings_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.inputs
        .ratings
        .clone()
        .unwrap_or_else(|| Layout::new(&cfg.output_dir).default_ratings())
}

fn report(run: &mut StageRun<'_>) -> Result<()> {
    let l = run.layout.clone();
    let ratings_file = ratings_path(run.cfg);
    let ratings = parse_ratings(&run.read(&ratings_file, "ratings file")?)?;
    let experts_file = run.cfg.inputs.expert_labels.clone().ok_or_else(|| MissingArtifact {
        stage: "report",
        what: "expert labels (inputs.expert_labels)".into(),
        path: "<not configured>".into(),
    })?;
    let experts = parse_expert_labels(&run.read(&experts_file, "expert labels")?)?;
    let automated = parse_scores(&run.read(&l.scores(), "score artifact")?);
    let rep = rmse_report(&ratings, &experts, Some(&automated))?;
    run.write(&l.rmse_csv(), &rep.to_csv())?;
    run.write_json(&l.rmse_json(), &rep)?;
    Ok(())
}
