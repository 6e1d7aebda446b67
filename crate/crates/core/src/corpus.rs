//! Corpus records, JSONL ingestion, URL canonicalization and link resolution.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use url::Url;

use crate::textkit::WordList;

static SUFFIX_EXCEPTIONS: &str = include_str!("../data/suffix_exceptions.txt");

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: duplicate {kind} id `{id}`")]
    DuplicateId { path: String, kind: RecordKind, id: String },
    #[error("{0} is empty")]
    EmptyAllowlist(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Posting,
    Reply,
    Article,
    Paper,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordKind::Posting => "posting",
            RecordKind::Reply => "reply",
            RecordKind::Article => "article",
            RecordKind::Paper => "paper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posting {
    pub id: String,
    pub author_id: String,
    pub text: String,
    pub urls: Vec<String>,
    pub likes: u64,
    pub retweets: u64,
    pub followers: u64,
    pub followees: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    pub timestamp: i64,
    #[serde(default)]
    pub reply_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub id: String,
    pub parent_id: String,
    pub text: String,
    pub likes: u64,
    pub retweets: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub url: String,
    /// Filled from `url` when absent.
    #[serde(default)]
    pub outlet: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub byline: Option<String>,
    pub paragraphs: Vec<String>,
    pub out_links: Vec<String>,
    pub parse_ok: bool,
}

impl Article {
    pub fn body(&self) -> String {
        self.paragraphs.join("\n\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paper {
    pub id: String,
    pub url: String,
    /// Filled from `url` when absent.
    #[serde(default)]
    pub domain: String,
    pub title: String,
    pub body: String,
    pub parse_ok: bool,
}

/// A record type that can be read from a JSONL file.
pub trait Record: DeserializeOwned + Serialize {
    const KIND: RecordKind;
    fn id(&self) -> &str;
    /// Checks invariants, filling derived fields; `Err` gives the skip reason.
    fn validate(&mut self) -> Result<(), String>;
}

fn check_id(id: &str) -> Result<(), String> {
    if id.trim().is_empty() {
        Err("empty id".into())
    } else {
        Ok(())
    }
}

impl Record for Posting {
    const KIND: RecordKind = RecordKind::Posting;
    fn id(&self) -> &str {
        &self.id
    }
    fn validate(&mut self) -> Result<(), String> {
        check_id(&self.id)?;
        if self.timestamp <= 0 {
            return Err(format!("timestamp {} is not positive", self.timestamp));
        }
        if let Some(bad) = self.urls.iter().find(|u| normalize_url(u).is_none()) {
            return Err(format!("invalid url `{bad}`"));
        }
        if let Some(c) = &self.country {
            if c.len() != 2 || !c.chars().all(|ch| ch.is_ascii_alphabetic()) {
                return Err(format!("country `{c}` is not an alpha-2 code"));
            }
        }
        Ok(())
    }
}

impl Record for Reply {
    const KIND: RecordKind = RecordKind::Reply;
    fn id(&self) -> &str {
        &self.id
    }
    fn validate(&mut self) -> Result<(), String> {
        check_id(&self.id)?;
        check_id(&self.parent_id).map_err(|_| "empty parent_id".to_string())
    }
}

impl Record for Article {
    const KIND: RecordKind = RecordKind::Article;
    fn id(&self) -> &str {
        &self.id
    }
    fn validate(&mut self) -> Result<(), String> {
        check_id(&self.id)?;
        let norm = normalize_url(&self.url).ok_or_else(|| format!("invalid url `{}`", self.url))?;
        let outlet = registrable_domain(&norm).ok_or("url has no host")?;
        if self.outlet.is_empty() {
            self.outlet = outlet;
        } else if self.outlet != outlet {
            return Err(format!("outlet `{}` does not match url domain `{outlet}`", self.outlet));
        }
        if self.parse_ok && self.paragraphs.iter().all(|p| p.trim().is_empty()) {
            return Err("parse_ok article without paragraphs".into());
        }
        Ok(())
    }
}

impl Record for Paper {
    const KIND: RecordKind = RecordKind::Paper;
    fn id(&self) -> &str {
        &self.id
    }
    fn validate(&mut self) -> Result<(), String> {
        check_id(&self.id)?;
        let norm = normalize_url(&self.url).ok_or_else(|| format!("invalid url `{}`", self.url))?;
        let domain = registrable_domain(&norm).ok_or("url has no host")?;
        if self.domain.is_empty() {
            self.domain = domain;
        } else if self.domain != domain {
            return Err(format!("domain `{}` does not match url domain `{domain}`", self.domain));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested<T> {
    pub records: Vec<T>,
    pub skipped: Vec<Skipped>,
}

pub fn ingest<T: Record>(path: &Path) -> Result<Ingested<T>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_str(&text).map_err(|id| CorpusError::DuplicateId {
        path: path.display().to_string(),
        kind: T::KIND,
        id,
    })
}

/// Parses JSONL text. `Err` carries the first duplicated id.
pub fn ingest_str<T: Record>(text: &str) -> Result<Ingested<T>, String> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: T = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                skipped.push(Skipped {
                    line: i + 1,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if let Err(reason) = rec.validate() {
            skipped.push(Skipped { line: i + 1, reason });
            continue;
        }
        if !seen.insert(rec.id().to_string()) {
            return Err(rec.id().to_string());
        }
        records.push(rec);
    }
    Ok(Ingested { records, skipped })
}

/// Writes records as JSONL, one object per line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Canonical form of a URL: scheme added if missing, lowercase host, no
/// fragment, no default port, no trailing slash. `None` if unparseable.
pub fn normalize_url(raw: &str) -> Option<String> {
    let raw = raw.trim();
    if raw.is_empty() || raw.chars().any(char::is_whitespace) {
        return None;
    }
    let with_scheme = if raw.contains("://") {
        raw.to_string()
    } else {
        format!("http://{raw}")
    };
    let url = Url::parse(&with_scheme).ok()?;
    let host = url.host_str()?.to_lowercase();
    if host.is_empty() {
        return None;
    }
    let mut out = format!("{}://{}", url.scheme(), host.trim_end_matches('.'));
    if let Some(port) = url.port() {
        out.push_str(&format!(":{port}"));
    }
    let path = url.path().trim_end_matches('/');
    out.push_str(path);
    if let Some(q) = url.query() {
        if !q.is_empty() {
            out.push('?');
            out.push_str(q);
        }
    }
    Some(out)
}

fn suffix_exceptions() -> &'static WordList {
    static LIST: OnceLock<WordList> = OnceLock::new();
    LIST.get_or_init(|| WordList::parse(SUFFIX_EXCEPTIONS))
}

fn host_of(url_or_host: &str) -> Option<String> {
    if url_or_host.contains("://") || url_or_host.contains('/') {
        let norm = normalize_url(url_or_host)?;
        Url::parse(&norm).ok()?.host_str().map(str::to_string)
    } else {
        Some(url_or_host.trim().trim_end_matches('.').to_lowercase())
    }
}

/// Last two host labels, or three when the last two form a listed public
/// suffix such as `co.uk`. Accepts a URL or a bare host.
pub fn registrable_domain(url_or_host: &str) -> Option<String> {
    let host = host_of(url_or_host)?;
    if host.is_empty() {
        return None;
    }
    if host.parse::<std::net::IpAddr>().is_ok() || host.starts_with('[') {
        return Some(host);
    }
    let labels: Vec<&str> = host.split('.').filter(|l| !l.is_empty()).collect();
    if labels.len() <= 2 {
        return Some(labels.join("."));
    }
    let last_two = labels[labels.len() - 2..].join(".");
    let keep = if suffix_exceptions().contains(&last_two) { 3 } else { 2 };
    Some(labels[labels.len() - keep..].join("."))
}

/// Science domains and query keywords.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allowlist {
    pub science_domains: BTreeSet<String>,
    pub keywords: BTreeSet<String>,
}

impl Allowlist {
    pub fn new(
        domains: impl IntoIterator<Item = String>,
        keywords: impl IntoIterator<Item = String>,
    ) -> Result<Allowlist, CorpusError> {
        let science_domains: BTreeSet<String> = domains.into_iter().filter_map(|d| registrable_domain(&d)).collect();
        let keywords: BTreeSet<String> = keywords
            .into_iter()
            .map(|k| k.trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        if science_domains.is_empty() {
            return Err(CorpusError::EmptyAllowlist("science domain list"));
        }
        if keywords.is_empty() {
            return Err(CorpusError::EmptyAllowlist("keyword list"));
        }
        Ok(Allowlist {
            science_domains,
            keywords,
        })
    }

    pub fn load(domains: &Path, keywords: &Path) -> Result<Allowlist, CorpusError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| CorpusError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        let d = WordList::parse(&read(domains)?);
        let k = WordList::parse(&read(keywords)?);
        Allowlist::new(d.iter().map(str::to_string), k.iter().map(str::to_string))
    }

    pub fn is_science_domain(&self, url_or_host: &str) -> bool {
        registrable_domain(url_or_host).is_some_and(|d| self.science_domains.contains(&d))
    }

    pub fn matches_keyword(&self, text: &str) -> bool {
        let lower = text.to_lowercase();
        self.keywords.iter().any(|k| contains_on_boundary(&lower, k))
    }
}

/// Substring match where neither neighbour of the match is alphanumeric.
pub fn contains_on_boundary(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let mut from = 0;
    while let Some(pos) = haystack[from..].find(needle) {
        let start = from + pos;
        let end = start + needle.len();
        let before_ok = haystack[..start]
            .chars()
            .next_back()
            .is_none_or(|c| !c.is_alphanumeric());
        let after_ok = haystack[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return true;
        }
        from = start + needle[..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

/// Postings that mention a keyword and carry at least one URL.
pub fn filter_postings(postings: &[Posting], allowlist: &Allowlist) -> Vec<Posting> {
    postings
        .iter()
        .filter(|p| !p.urls.is_empty() && allowlist.matches_keyword(&p.text))
        .cloned()
        .collect()
}

/// Node id used for a science domain without a loaded paper.
pub fn domain_node_id(domain: &str) -> String {
    format!("domain:{domain}")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkTable {
    pub posting_article: BTreeSet<(String, String)>,
    pub article_paper: BTreeSet<(String, String)>,
    /// Article id to registrable science domain.
    pub article_domain: BTreeSet<(String, String)>,
    /// (record id, url) pairs that matched nothing.
    pub unresolved: BTreeSet<(String, String)>,
}

impl LinkTable {
    pub fn unresolved_count(&self) -> usize {
        self.unresolved.len()
    }
}

pub fn resolve_links(postings: &[Posting], articles: &[Article], papers: &[Paper], allowlist: &Allowlist) -> LinkTable {
    let article_by_url: HashMap<String, &str> = articles
        .iter()
        .filter_map(|a| Some((normalize_url(&a.url)?, a.id.as_str())))
        .collect();
    let paper_by_url: HashMap<String, &str> = papers
        .iter()
        .filter_map(|p| Some((normalize_url(&p.url)?, p.id.as_str())))
        .collect();
    let mut table = LinkTable::default();
    for p in postings {
        for u in &p.urls {
            match normalize_url(u).and_then(|n| article_by_url.get(&n).copied()) {
                Some(a) => {
                    table.posting_article.insert((p.id.clone(), a.to_string()));
                }
                None => {
                    table.unresolved.insert((p.id.clone(), u.clone()));
                }
            }
        }
    }
    for a in articles {
        for u in &a.out_links {
            let Some(norm) = normalize_url(u) else {
                table.unresolved.insert((a.id.clone(), u.clone()));
                continue;
            };
            if let Some(p) = paper_by_url.get(&norm) {
                table.article_paper.insert((a.id.clone(), p.to_string()));
            } else if let Some(d) = registrable_domain(&norm).filter(|d| allowlist.science_domains.contains(d)) {
                table.article_domain.insert((a.id.clone(), d));
            } else {
                table.unresolved.insert((a.id.clone(), u.clone()));
            }
        }
    }
    table
}

/// File locations of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusPaths {
    pub postings: PathBuf,
    pub replies: PathBuf,
    pub articles: PathBuf,
    pub papers: PathBuf,
    pub domains: PathBuf,
    pub keywords: PathBuf,
}

impl CorpusPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> CorpusPaths {
        CorpusPaths {
            postings: dir.join("postings.jsonl"),
            replies: dir.join("replies.jsonl"),
            articles: dir.join("articles.jsonl"),
            papers: dir.join("papers.jsonl"),
            domains: dir.join("domains.txt"),
            keywords: dir.join("keywords.txt"),
        }
    }
}

/// Per-file skip tallies from loading a corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub skipped: BTreeMap<RecordKind, Vec<Skipped>>,
}

impl IngestReport {
    pub fn skipped_count(&self, kind: RecordKind) -> usize {
        self.skipped.get(&kind).map_or(0, Vec::len)
    }
}

/// All records of a corpus, each collection sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub postings: Vec<Posting>,
    pub replies: Vec<Reply>,
    pub articles: Vec<Article>,
    pub papers: Vec<Paper>,
    pub allowlist: Allowlist,
    pub report: IngestReport,
    replies_by_parent: BTreeMap<String, Vec<usize>>,
}

impl Corpus {
    pub fn load(paths: &CorpusPaths) -> Result<Corpus, CorpusError> {
        let allowlist = Allowlist::load(&paths.domains, &paths.keywords)?;
        let postings = ingest::<Posting>(&paths.postings)?;
        let replies = ingest::<Reply>(&paths.replies)?;
        let articles = ingest::<Article>(&paths.articles)?;
        let papers = ingest::<Paper>(&paths.papers)?;
        let mut report = IngestReport::default();
        report.skipped.insert(RecordKind::Posting, postings.skipped);
        report.skipped.insert(RecordKind::Reply, replies.skipped);
        report.skipped.insert(RecordKind::Article, articles.skipped);
        report.skipped.insert(RecordKind::Paper, papers.skipped);
        Ok(Corpus::from_records(
            postings.records,
            replies.records,
            articles.records,
            papers.records,
            allowlist,
            report,
        ))
    }

    /// Assembles a corpus, dropping (and tallying) replies to unknown postings
    /// and papers outside the science-domain allowlist.
    pub fn from_records(
        mut postings: Vec<Posting>,
        mut replies: Vec<Reply>,
        mut articles: Vec<Article>,
        mut papers: Vec<Paper>,
        allowlist: Allowlist,
        mut report: IngestReport,
    ) -> Corpus {
        postings.sort_by(|a, b| a.id.cmp(&b.id));
        articles.sort_by(|a, b| a.id.cmp(&b.id));
        papers.sort_by(|a, b| a.id.cmp(&b.id));
        replies.sort_by(|a, b| a.id.cmp(&b.id));
        let known: BTreeSet<&str> = postings.iter().map(|p| p.id.as_str()).collect();
        let (kept, orphans): (Vec<Reply>, Vec<Reply>) =
            replies.into_iter().partition(|r| known.contains(r.parent_id.as_str()));
        let orphan_skips = report.skipped.entry(RecordKind::Reply).or_default();
        for r in orphans {
            orphan_skips.push(Skipped {
                line: 0,
                reason: format!("reply `{}` has unknown parent `{}`", r.id, r.parent_id),
            });
        }
        let (ok_papers, off_list): (Vec<Paper>, Vec<Paper>) = papers
            .into_iter()
            .partition(|p| allowlist.science_domains.contains(&p.domain));
        let paper_skips = report.skipped.entry(RecordKind::Paper).or_default();
        for p in off_list {
            paper_skips.push(Skipped {
                line: 0,
                reason: format!("paper `{}` domain `{}` is not allowlisted", p.id, p.domain),
            });
        }
        let mut replies_by_parent: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in kept.iter().enumerate() {
            replies_by_parent.entry(r.parent_id.clone()).or_default().push(i);
        }
        Corpus {
            postings,
            replies: kept,
            articles,
            papers: ok_papers,
            allowlist,
            report,
            replies_by_parent,
        }
    }

    pub fn posting(&self, id: &str) -> Option<&Posting> {
        find(&self.postings, id, |p| &p.id)
    }

    pub fn article(&self, id: &str) -> Option<&Article> {
        find(&self.articles, id, |a| &a.id)
    }

    pub fn paper(&self, id: &str) -> Option<&Paper> {
        find(&self.papers, id, |p| &p.id)
    }

    pub fn replies_to(&self, posting_id: &str) -> impl Iterator<Item = &Reply> {
        self.replies_by_parent
            .get(posting_id)
            .into_iter()
            .flatten()
            .map(|&i| &self.replies[i])
    }

    /// Postings surviving the keyword/URL filter.
    pub fn filtered_postings(&self) -> Vec<Posting> {
        filter_postings(&self.postings, &self.allowlist)
    }

    pub fn resolve(&self) -> LinkTable {
        resolve_links(&self.filtered_postings(), &self.articles, &self.papers, &self.allowlist)
    }
}

fn find<'a, T>(items: &'a [T], id: &str, key: impl Fn(&T) -> &String) -> Option<&'a T> {
    items
        .binary_search_by(|x| key(x).as_str().cmp(id))
        .ok()
        .map(|i| &items[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn posting(id: &str, text: &str, urls: &[&str]) -> Posting {
        Posting {
            id: id.into(),
            author_id: "u1".into(),
            text: text.into(),
            urls: urls.iter().map(|s| s.to_string()).collect(),
            likes: 0,
            retweets: 0,
            followers: 10,
            followees: 5,
            country: None,
            timestamp: 1_500_000_000,
            reply_ids: vec![],
        }
    }

    fn allow() -> Allowlist {
        Allowlist::new(
            ["example-university.edu".to_string(), "journal.org".into()],
            ["zucchini".to_string(), "tea".into(), "red wine".into()],
        )
        .unwrap()
    }

    #[test]
    fn empty_file_is_empty() {
        let got = ingest_str::<Posting>("").unwrap();
        assert!(got.records.is_empty());
        assert!(got.skipped.is_empty());
    }

    #[test]
    fn missing_text_is_skipped_and_counted() {
        let good = serde_json::to_string(&posting("a", "x", &[])).unwrap();
        let bad = good.replace("\"text\":\"x\",", "");
        let got = ingest_str::<Posting>(&format!("{good}\n{bad}\n")).unwrap();
        assert_eq!(got.records.len(), 1);
        assert_eq!(got.skipped.len(), 1);
        assert_eq!(got.skipped[0].line, 2);
    }

    #[test]
    fn three_postings() {
        let text = to_jsonl(&[
            posting("a", "x", &[]),
            posting("b", "y", &["a.com"]),
            posting("c", "z", &[]),
        ]);
        assert_eq!(ingest_str::<Posting>(&text).unwrap().records.len(), 3);
    }

    #[test]
    fn duplicate_id_is_fatal() {
        let text = to_jsonl(&[posting("a", "x", &[]), posting("a", "y", &[])]);
        assert_eq!(ingest_str::<Posting>(&text).unwrap_err(), "a");
    }

    #[test]
    fn bad_records_skipped() {
        let mut p = posting("a", "x", &[]);
        p.timestamp = 0;
        let mut q = posting("b", "x", &["http://"]);
        q.timestamp = 5;
        let got = ingest_str::<Posting>(&to_jsonl(&[p, q])).unwrap();
        assert_eq!(got.skipped.len(), 2);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_url("HTTP://A.com/x/#frag").unwrap(), "http://a.com/x");
        assert_eq!(normalize_url("http://a.com/x").unwrap(), "http://a.com/x");
        assert_eq!(normalize_url("https://a.com:443/").unwrap(), "https://a.com");
        assert_eq!(
            normalize_url("http://a.com:8080/p?q=1").unwrap(),
            "http://a.com:8080/p?q=1"
        );
        assert_eq!(
            normalize_url("example-university.edu/lab").unwrap(),
            "http://example-university.edu/lab"
        );
        assert_eq!(normalize_url("not a url"), None);
    }

    #[test]
    fn registrable_domains() {
        assert_eq!(registrable_domain("http://news.bbc.co.uk/x").unwrap(), "bbc.co.uk");
        assert_eq!(registrable_domain("https://www.nature.com/a").unwrap(), "nature.com");
        assert_eq!(registrable_domain("Example.COM").unwrap(), "example.com");
        assert_eq!(
            registrable_domain("lab.example-university.edu").unwrap(),
            "example-university.edu"
        );
    }

    #[test]
    fn keyword_boundaries() {
        let a = allow();
        assert!(a.matches_keyword("Zucchini is great"));
        assert!(a.matches_keyword("a glass of red wine."));
        assert!(!a.matches_keyword("the team won"));
        assert!(a.matches_keyword("green-tea!"));
        assert!(!a.matches_keyword("redwine"));
    }

    #[test]
    fn filtering() {
        let a = allow();
        let ps = vec![
            posting("1", "zucchini is great", &["http://x.com"]),
            posting("2", "zucchini is great", &[]),
            posting("3", "nothing here", &["http://x.com"]),
        ];
        let kept = filter_postings(&ps, &a);
        assert_eq!(kept.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(), ["1"]);
        assert_eq!(filter_postings(&kept, &a), kept);
    }

    fn article(id: &str, url: &str, links: &[&str]) -> Article {
        let mut a = Article {
            id: id.into(),
            url: url.into(),
            outlet: String::new(),
            title: "t".into(),
            byline: None,
            paragraphs: vec!["p".into()],
            out_links: links.iter().map(|s| s.to_string()).collect(),
            parse_ok: true,
        };
        a.validate().unwrap();
        a
    }

    #[test]
    fn link_resolution() {
        let a = allow();
        let ps = vec![posting("t1", "tea", &["HTTP://A.com/x/#frag", "http://nowhere.net/"])];
        let arts = vec![article(
            "a1",
            "http://a.com/x",
            &[
                "example-university.edu/lab",
                "http://journal.org/p1/",
                "http://blog.example.net/post",
            ],
        )];
        let mut paper = Paper {
            id: "p1".into(),
            url: "http://journal.org/p1".into(),
            domain: String::new(),
            title: "t".into(),
            body: "b".into(),
            parse_ok: true,
        };
        paper.validate().unwrap();
        let t = resolve_links(&ps, &arts, &[paper], &a);
        assert!(t.posting_article.contains(&("t1".into(), "a1".into())));
        assert!(t.article_paper.contains(&("a1".into(), "p1".into())));
        assert!(t
            .article_domain
            .contains(&("a1".into(), "example-university.edu".into())));
        assert_eq!(t.article_domain.len(), 1);
        assert_eq!(t.unresolved_count(), 2);
    }

    #[test]
    fn outlet_filled_and_checked() {
        let a = article("a", "https://www.Daily-News.co.uk/story", &[]);
        assert_eq!(a.outlet, "daily-news.co.uk");
        let mut b = a.clone();
        b.outlet = "other.com".into();
        assert!(b.validate().is_err());
    }
}
