//! LDA topic model (collapsed Gibbs sampling) and Hellinger similarity.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::persist::{self, PersistError};
use crate::textkit::{Lexicons, Token, TokenizedText};
use crate::{fnv1a, mix_seed};

const MODEL_KIND: &str = "topic_model";
pub const INFERENCE_SWEEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopicError {
    #[error("need at least 2 topics, got {0}")]
    TooFewTopics(usize),
    #[error("no documents to train on")]
    NoDocuments,
    #[error("vocabulary is empty after stopword removal")]
    EmptyVocabulary,
    #[error("alpha and beta must be positive and finite")]
    BadSmoothing,
    #[error("topic vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams::with_topics(20)
    }
}

impl LdaParams {
    /// `k` topics with alpha = 50/k and the remaining defaults.
    pub fn with_topics(k: usize) -> Self {
        LdaParams {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: 0.01,
            iterations: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    /// Sorted, so lookups are binary searches.
    pub vocabulary: Vec<String>,
    /// `phi[k][w]`: probability of word `w` under topic `k`.
    pub phi: Vec<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicVector {
    pub weights: Vec<f64>,
}

impl TopicVector {
    pub fn uniform(k: usize) -> TopicVector {
        TopicVector {
            weights: vec![1.0 / k as f64; k],
        }
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }
}

/// Terms the topic model sees: lowercase alphabetic words that are not stopwords.
pub fn topic_terms(t: &TokenizedText) -> Vec<String> {
    terms_of(&t.tokens)
}

pub fn terms_of(tokens: &[Token]) -> Vec<String> {
    let lex = Lexicons::bundled();
    tokens
        .iter()
        .filter(|w| w.is_word())
        .filter(|w| w.lower.chars().any(char::is_alphabetic) && w.lower.chars().count() > 1)
        .filter(|w| !lex.stopwords.contains(&w.lower))
        .map(|w| w.lower.clone())
        .collect()
}

/// Samples a topic with probability proportional to `weights`.
fn draw(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    weights.len() - 1
}

pub fn train_lda(docs: &[TokenizedText], params: LdaParams) -> Result<TopicModel, TopicError> {
    let k = params.k;
    if k < 2 {
        return Err(TopicError::TooFewTopics(k));
    }
    if !(params.alpha > 0.0 && params.alpha.is_finite() && params.beta > 0.0 && params.beta.is_finite()) {
        return Err(TopicError::BadSmoothing);
    }
    if docs.is_empty() {
        return Err(TopicError::NoDocuments);
    }
    let mut terms: Vec<Vec<String>> = docs.iter().map(topic_terms).collect();
    // Canonical order makes the fit independent of how the caller ordered the docs.
    terms.sort();
    let vocabulary: Vec<String> = terms
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if vocabulary.is_empty() {
        return Err(TopicError::EmptyVocabulary);
    }
    let v = vocabulary.len();
    let words: Vec<Vec<usize>> = terms
        .iter()
        .map(|d| d.iter().map(|w| vocabulary.binary_search(w).unwrap()).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed));
    let mut n_dk = vec![vec![0u32; k]; words.len()];
    let mut n_kw = vec![vec![0u32; v]; k];
    let mut n_k = vec![0u32; k];
    let mut z: Vec<Vec<usize>> = Vec::with_capacity(words.len());
    for (d, doc) in words.iter().enumerate() {
        let zd: Vec<usize> = doc
            .iter()
            .map(|&w| {
                let t = rng.random_range(0..k);
                n_dk[d][t] += 1;
                n_kw[t][w] += 1;
                n_k[t] += 1;
                t
            })
            .collect();
        z.push(zd);
    }

    let vbeta = v as f64 * params.beta;
    let mut p = vec![0.0; k];
    for _ in 0..params.iterations {
        for (d, doc) in words.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = z[d][i];
                n_dk[d][old] -= 1;
                n_kw[old][w] -= 1;
                n_k[old] -= 1;
                for t in 0..k {
                    p[t] = (n_dk[d][t] as f64 + params.alpha) * (n_kw[t][w] as f64 + params.beta)
                        / (n_k[t] as f64 + vbeta);
                }
                let new = draw(&mut rng, &p);
                z[d][i] = new;
                n_dk[d][new] += 1;
                n_kw[new][w] += 1;
                n_k[new] += 1;
            }
        }
    }

    let phi = (0..k)
        .map(|t| {
            let denom = n_k[t] as f64 + vbeta;
            n_kw[t].iter().map(|&c| (c as f64 + params.beta) / denom).collect()
        })
        .collect();
    Ok(TopicModel {
        k,
        vocabulary,
        phi,
        alpha: params.alpha,
        beta: params.beta,
        seed: params.seed,
    })
}

impl TopicModel {
    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.vocabulary.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    /// The `n` most probable words of topic `k`.
    pub fn top_words(&self, k: usize, n: usize) -> Vec<&str> {
        let mut ids: Vec<usize> = (0..self.vocabulary.len()).collect();
        ids.sort_by(|&a, &b| self.phi[k][b].total_cmp(&self.phi[k][a]).then(a.cmp(&b)));
        ids.into_iter().take(n).map(|i| self.vocabulary[i].as_str()).collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), PersistError> {
        persist::save(path, MODEL_KIND, self)
    }

    pub fn load(path: &Path) -> Result<TopicModel, PersistError> {
        persist::load(path, MODEL_KIND)
    }
}

/// Topic mixture of `doc` under the frozen model. Deterministic in the
/// document's terms and the model seed.
pub fn infer_topics(model: &TopicModel, doc: &TokenizedText) -> TopicVector {
    infer_terms(model, &topic_terms(doc))
}

pub fn infer_terms(model: &TopicModel, terms: &[String]) -> TopicVector {
    let k = model.k;
    let ids: Vec<usize> = terms.iter().filter_map(|w| model.word_id(w)).collect();
    if ids.is_empty() {
        return TopicVector::uniform(k);
    }
    let mut key = Vec::new();
    for &w in &ids {
        key.extend_from_slice(model.vocabulary[w].as_bytes());
        key.push(b' ');
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(fnv1a(&key) ^ model.seed));
    let mut n_k = vec![0u32; k];
    let mut z: Vec<usize> = ids
        .iter()
        .map(|_| {
            let t = rng.random_range(0..k);
            n_k[t] += 1;
            t
        })
        .collect();
    let mut p = vec![0.0; k];
    for _ in 0..INFERENCE_SWEEPS {
        for (i, &w) in ids.iter().enumerate() {
            n_k[z[i]] -= 1;
            for t in 0..k {
                p[t] = (n_k[t] as f64 + model.alpha) * model.phi[t][w];
            }
            z[i] = draw(&mut rng, &p);
            n_k[z[i]] += 1;
        }
    }
    let denom = ids.len() as f64 + k as f64 * model.alpha;
    TopicVector {
        weights: n_k.iter().map(|&c| (c as f64 + model.alpha) / denom).collect(),
    }
}

/// Infers many documents in parallel; output order follows input order.
pub fn infer_many(model: &TopicModel, docs: &[TokenizedText]) -> Vec<TopicVector> {
    docs.par_iter().map(|d| infer_topics(model, d)).collect()
}

/// 1 − Hellinger distance.
pub fn hellinger_similarity(p: &TopicVector, q: &TopicVector) -> Result<f64, TopicError> {
    hellinger_weights(&p.weights, &q.weights)
}

pub fn hellinger_weights(p: &[f64], q: &[f64]) -> Result<f64, TopicError> {
    if p.len() != q.len() {
        return Err(TopicError::LengthMismatch(p.len(), q.len()));
    }
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if sp <= 0.0 || sq <= 0.0 {
        return Ok(0.0);
    }
    // Dividing out the masses keeps rounding from pushing p = q below 1.
    let bc = (bc / (sp * sq).sqrt()).clamp(0.0, 1.0);
    Ok((1.0 - (1.0 - bc).sqrt()).clamp(0.0, 1.0))
}
