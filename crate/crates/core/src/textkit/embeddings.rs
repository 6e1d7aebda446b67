use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use super::{Token, TokenizedText};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("cannot read embeddings: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected} components, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: bad number `{value}`")]
    Number { line: usize, value: String },
    #[error("embedding file is empty")]
    Empty,
}

/// Word vectors; lookups are case-folded.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
    /// Sorted vocabulary, for deterministic scans.
    words: Vec<String>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize, entries: impl IntoIterator<Item = (String, Vec<f64>)>) -> EmbeddingTable {
        let vectors: HashMap<String, Vec<f64>> = entries
            .into_iter()
            .map(|(w, v)| {
                assert_eq!(v.len(), dimension, "vector for `{w}` has the wrong dimension");
                (w.to_lowercase(), v)
            })
            .collect();
        let mut words: Vec<String> = vectors.keys().cloned().collect();
        words.sort();
        EmbeddingTable {
            dimension,
            vectors,
            words,
        }
    }

    pub fn parse(reader: impl BufRead) -> Result<EmbeddingTable, EmbeddingError> {
        let mut dimension = None;
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values = parts
                .map(|p| {
                    p.parse::<f64>().map_err(|_| EmbeddingError::Number {
                        line: i + 1,
                        value: p.to_string(),
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let d = *dimension.get_or_insert(values.len());
            if values.len() != d || d == 0 {
                return Err(EmbeddingError::Dimension {
                    line: i + 1,
                    expected: d,
                    found: values.len(),
                });
            }
            entries.push((word.to_string(), values));
        }
        let dimension = dimension.ok_or(EmbeddingError::Empty)?;
        Ok(EmbeddingTable::new(dimension, entries))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors
            .get(word)
            .or_else(|| self.vectors.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Vocabulary in sorted order.
    pub fn words(&self) -> &[String] {
        &self.words
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, EmbeddingError> {
    let f = std::fs::File::open(path)?;
    EmbeddingTable::parse(std::io::BufReader::new(f))
}

/// Mean vector of in-vocabulary tokens; zero vector when none are known.
pub fn doc_vector(t: &TokenizedText, table: &EmbeddingTable) -> Vec<f64> {
    doc_vector_of(&t.tokens, table)
}

pub fn doc_vector_of(tokens: &[Token], table: &EmbeddingTable) -> Vec<f64> {
    let mut sum = vec![0.0; table.dimension()];
    let mut n = 0usize;
    for tok in tokens {
        if let Some(v) = table.get(&tok.lower) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            n += 1;
        }
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    sum
}

/// Cosine similarity, defined as 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    // sqrt(aa * bb) rather than sqrt(aa) * sqrt(bb): for a == b it equals
    // `dot` exactly, so self-similarity is exactly 1.
    (dot / (aa * bb).sqrt()).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::super::analyze;
    use super::*;

    fn table() -> EmbeddingTable {
        EmbeddingTable::parse("coffee 1 0 2\nliver 3 4 0\nTea 0 1 1\n".as_bytes()).unwrap()
    }

    #[test]
    fn lookup_is_case_folded() {
        let t = table();
        assert_eq!(t.get("TEA"), Some(&[0.0, 1.0, 1.0][..]));
        assert_eq!(t.dimension(), 3);
    }

    #[test]
    fn single_word_doc() {
        assert_eq!(doc_vector(&analyze("Coffee!"), &table()), vec![1.0, 0.0, 2.0]);
    }

    #[test]
    fn out_of_vocabulary_doc_is_zero() {
        assert_eq!(doc_vector(&analyze("nothing known here"), &table()), vec![0.0; 3]);
    }

    #[test]
    fn two_word_mean() {
        assert_eq!(doc_vector(&analyze("coffee and liver"), &table()), vec![2.0, 2.0, 1.0]);
    }

    #[test]
    fn inconsistent_dimension_is_fatal() {
        let err = EmbeddingTable::parse("a 1 2\nb 1 2 3\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            EmbeddingError::Dimension {
                line: 2,
                expected: 2,
                found: 3
            }
        ));
    }

    #[test]
    fn cosine_conventions() {
        assert_eq!(cosine(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(cosine(&[0.3, 0.7, 0.1], &[0.3, 0.7, 0.1]), 1.0);
        assert!((cosine(&[1.0, 0.0], &[0.0, 1.0])).abs() < 1e-15);
    }
}
