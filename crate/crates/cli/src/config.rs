//! TOML pipeline configuration. Relative paths are resolved against the
//! directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use sciq_core::corpus::CorpusPaths;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Toml {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("{field}: file {path} does not exist")]
    Missing { field: String, path: String },
    #[error("{0}")]
    Invalid(String),
}

/// Corpus file locations: a directory with the conventional names, any of
/// which can be overridden.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub dir: Option<PathBuf>,
    pub postings: Option<PathBuf>,
    pub replies: Option<PathBuf>,
    pub articles: Option<PathBuf>,
    pub papers: Option<PathBuf>,
    pub domains: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub embeddings: PathBuf,
    pub outlets: PathBuf,
    pub stance_labels: PathBuf,
    /// Extra labelled replies (same schema), e.g. an external stance dataset.
    #[serde(default)]
    pub stance_extra: Option<PathBuf>,
    /// Append-only ratings store; read by `report`, written by the service.
    #[serde(default)]
    pub ratings: Option<PathBuf>,
    #[serde(default)]
    pub expert_labels: Option<PathBuf>,
    /// Built review UI bundle to serve statically.
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub merge: f64,
    pub damping: f64,
    pub pagerank_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            merge: 0.9,
            damping: 0.85,
            pagerank_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSettings {
    pub topics: usize,
    pub lda_iterations: usize,
    pub n_trees: usize,
    pub lexicon_neighbors: usize,
    pub cv_folds: usize,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            topics: 20,
            lda_iterations: 500,
            n_trees: 100,
            lexicon_neighbors: 20,
            cv_folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub corpus: CorpusSection,
    pub inputs: Inputs,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub models: ModelSettings,
    /// Directory relative paths were resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        PipelineConfig::parse(&text, &base).map_err(|e| match e {
            ConfigError::Toml { source, .. } => ConfigError::Toml {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    /// Parses and resolves paths against `base`, without touching the filesystem.
    pub fn parse(text: &str, base: &Path) -> Result<PipelineConfig, ConfigError> {
        let mut c: PipelineConfig = toml::from_str(text).map_err(|source| ConfigError::Toml {
            path: "<string>".into(),
            source,
        })?;
        c.base_dir = base.to_path_buf();
        c.output_dir = resolve(base, &c.output_dir);
        let r = |p: &mut PathBuf| *p = resolve(base, p);
        let ro = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                *p = resolve(base, p);
            }
        };
        let cs = &mut c.corpus;
        for p in [
            &mut cs.dir,
            &mut cs.postings,
            &mut cs.replies,
            &mut cs.articles,
            &mut cs.papers,
            &mut cs.domains,
            &mut cs.keywords,
        ] {
            ro(p);
        }
        let i = &mut c.inputs;
        r(&mut i.embeddings);
        r(&mut i.outlets);
        r(&mut i.stance_labels);
        for p in [
            &mut i.stance_extra,
            &mut i.ratings,
            &mut i.expert_labels,
            &mut i.static_dir,
        ] {
            ro(p);
        }
        if !(0.0..1.0).contains(&c.thresholds.damping) {
            return Err(ConfigError::Invalid(format!(
                "damping {} is outside [0, 1)",
                c.thresholds.damping
            )));
        }
        if c.models.topics < 2 || c.models.cv_folds < 2 || c.models.n_trees == 0 {
            return Err(ConfigError::Invalid(
                "models: topics and cv_folds must be >= 2, n_trees >= 1".into(),
            ));
        }
        Ok(c)
    }

    pub fn corpus_paths(&self) -> Result<CorpusPaths, ConfigError> {
        let cs = &self.corpus;
        let defaults = cs.dir.as_deref().map(CorpusPaths::in_dir);
        let pick = |field: &str, own: &Option<PathBuf>, default: Option<&PathBuf>| {
            own.clone()
                .or_else(|| default.cloned())
                .ok_or_else(|| ConfigError::Invalid(format!("corpus.{field} is not set and corpus.dir is absent")))
        };
        let d = defaults.as_ref();
        Ok(CorpusPaths {
            postings: pick("postings", &cs.postings, d.map(|d| &d.postings))?,
            replies: pick("replies", &cs.replies, d.map(|d| &d.replies))?,
            articles: pick("articles", &cs.articles, d.map(|d| &d.articles))?,
            papers: pick("papers", &cs.papers, d.map(|d| &d.papers))?,
            domains: pick("domains", &cs.domains, d.map(|d| &d.domains))?,
            keywords: pick("keywords", &cs.keywords, d.map(|d| &d.keywords))?,
        })
    }

    /// Checks that every referenced input exists. The ratings store may be
    /// absent (the service creates it); the report stage checks it itself.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let cp = self.corpus_paths()?;
        let i = &self.inputs;
        let mut required: Vec<(&str, &Path)> = vec![
            ("corpus.postings", &cp.postings),
            ("corpus.replies", &cp.replies),
            ("corpus.articles", &cp.articles),
            ("corpus.papers", &cp.papers),
            ("corpus.domains", &cp.domains),
            ("corpus.keywords", &cp.keywords),
            ("inputs.embeddings", &i.embeddings),
            ("inputs.outlets", &i.outlets),
            ("inputs.stance_labels", &i.stance_labels),
        ];
        for (name, p) in [
            ("inputs.stance_extra", &i.stance_extra),
            ("inputs.expert_labels", &i.expert_labels),
        ] {
            if let Some(p) = p {
                required.push((name, p));
            }
        }
        for (field, p) in required {
            if !p.exists() {
                return Err(ConfigError::Missing {
                    field: field.to_string(),
                    path: p.display().to_string(),
                });
            }
        }
        Ok(())
    }

    /// Sub-seed for one stage or model, derived from the master seed.
    pub fn seed_for(&self, name: &str) -> u64 {
        sciq_core::mix_seed(self.seed ^ sciq_core::fnv1a(name.as_bytes()))
    }

    /// `path` relative to the config directory when possible, for manifests.
    pub fn display_path(&self, path: &Path) -> String {
        path.strip_prefix(&self.base_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
output_dir = "out"
seed = 7

[corpus]
dir = "corpus"

[inputs]
embeddings = "emb.txt"
outlets = "outlets.tsv"
stance_labels = "stance.tsv"
"#;

    #[test]
    fn resolves_relative_paths() {
        let c = PipelineConfig::parse(MINIMAL, Path::new("/data/run")).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("/data/run/out"));
        assert_eq!(
            c.corpus_paths().unwrap().postings,
            PathBuf::from("/data/run/corpus/postings.jsonl")
        );
        assert_eq!(c.thresholds.merge, 0.9);
        assert_eq!(c.thresholds.damping, 0.85);
        assert_eq!(c.display_path(Path::new("/data/run/corpus/x.tsv")), "corpus/x.tsv");
    }

    #[test]
    fn rejects_unknown_fields_and_bad_damping() {
        assert!(PipelineConfig::parse(&format!("{MINIMAL}\nbogus = 1\n"), Path::new(".")).is_err());
        let bad = MINIMAL.to_string() + "\n[thresholds]\ndamping = 1.5\n";
        assert!(PipelineConfig::parse(&bad, Path::new(".")).is_err());
    }

    #[test]
    fn missing_files_are_named() {
        let c = PipelineConfig::parse(MINIMAL, Path::new("/nonexistent")).unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("corpus.postings"), "{err}");
    }
}
