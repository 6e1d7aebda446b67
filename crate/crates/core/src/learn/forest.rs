//! Seeded random forest of unpruned CART trees (gini impurity, min leaf 1).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::mix_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub seed: u64,
    /// Features tried per split. `None` means `ceil(sqrt(F))`.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            seed: 0,
            max_features: None,
        }
    }
}

impl ForestParams {
    pub fn with_seed(seed: u64) -> Self {
        ForestParams {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    n_features: usize,
    class_labels: Vec<u32>,
    params: ForestParams,
}

impl Forest {
    /// Fits a forest on `x` (rows of equal length) and labels `y`.
    ///
    /// Rows are put in a canonical order before bootstrapping, so the result
    /// depends only on the multiset of rows and the seed.
    pub fn fit(x: &[Vec<f64>], y: &[u32], params: ForestParams) -> Result<Forest, LearnError> {
        if x.is_empty() {
            return Err(LearnError::Empty);
        }
        if x.len() != y.len() {
            return Err(LearnError::LabelCount {
                labels: y.len(),
                rows: x.len(),
            });
        }
        let n_features = x[0].len();
        for (row, r) in x.iter().enumerate() {
            if r.len() != n_features {
                return Err(LearnError::Ragged {
                    row,
                    found: r.len(),
                    expected: n_features,
                });
            }
            if let Some(col) = r.iter().position(|v| !v.is_finite()) {
                return Err(LearnError::NonFinite { row, col });
            }
        }
        let mut class_labels: Vec<u32> = y.to_vec();
        class_labels.sort_unstable();
        class_labels.dedup();
        if class_labels.len() < 2 {
            return Err(LearnError::SingleClass(class_labels.len()));
        }

        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| {
            x[a].iter()
                .zip(&x[b])
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(y[a].cmp(&y[b]))
        });
        let rows: Vec<&[f64]> = order.iter().map(|&i| x[i].as_slice()).collect();
        let classes: Vec<usize> = order
            .iter()
            .map(|&i| class_labels.binary_search(&y[i]).unwrap())
            .collect();

        let mtry = params
            .max_features
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features.max(1));
        let n_classes = class_labels.len();

        let trees = (0..params.n_trees.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed ^ mix_seed(t as u64)));
                let n = rows.len();
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                grow(&rows, &classes, n_classes, sample, mtry, &mut rng)
            })
            .collect();

        Ok(Forest {
            trees,
            n_features,
            class_labels,
            params,
        })
    }

    pub fn class_labels(&self) -> &[u32] {
        &self.class_labels
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn params(&self) -> ForestParams {
        self.params
    }

    /// Vote share per class, aligned with [`Forest::class_labels`].
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_features, "feature count mismatch");
        let mut votes = vec![0usize; self.class_labels.len()];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        let n = self.trees.len() as f64;
        votes.into_iter().map(|v| v as f64 / n).collect()
    }

    /// Probability of one class label; 0 if the label was never seen.
    pub fn proba_of(&self, x: &[f64], label: u32) -> f64 {
        match self.class_labels.binary_search(&label) {
            Ok(i) => self.predict_proba(x)[i],
            Err(_) => 0.0,
        }
    }

    pub fn predict(&self, x: &[f64]) -> u32 {
        let p = self.predict_proba(x);
        let mut best = 0;
        for (i, v) in p.iter().enumerate() {
            if *v > p[best] {
                best = i;
            }
        }
        self.class_labels[best]
    }
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn best_split_on(
    rows: &[&[f64]],
    classes: &[usize],
    n_classes: usize,
    idx: &mut [usize],
    feature: usize,
) -> Option<BestSplit> {
    idx.sort_by(|&a, &b| rows[a][feature].total_cmp(&rows[b][feature]));
    let n = idx.len();
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];
    for &i in idx.iter() {
        right[classes[i]] += 1;
    }
    let mut best: Option<BestSplit> = None;
    for k in 0..n - 1 {
        let c = classes[idx[k]];
        left[c] += 1;
        right[c] -= 1;
        let lo = rows[idx[k]][feature];
        let hi = rows[idx[k + 1]][feature];
        if lo >= hi {
            continue;
        }
        let nl = k + 1;
        let nr = n - nl;
        let imp = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
        if best.as_ref().is_none_or(|b| imp < b.impurity) {
            let mid = lo + (hi - lo) / 2.0;
            let threshold = if mid < hi { mid } else { lo };
            best = Some(BestSplit {
                feature,
                threshold,
                impurity: imp,
            });
        }
    }
    best
}

fn grow(
    rows: &[&[f64]],
    classes: &[usize],
    n_classes: usize,
    sample: Vec<usize>,
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let n_features = rows[0].len();
    let mut nodes: Vec<Node> = vec![Node::Leaf { class: 0 }];
    let mut stack = vec![(0usize, sample)];
    let mut features: Vec<usize> = (0..n_features).collect();

    while let Some((slot, mut idx)) = stack.pop() {
        let mut counts = vec![0usize; n_classes];
        for &i in &idx {
            counts[classes[i]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || idx.len() < 2 {
            nodes[slot] = Node::Leaf {
                class: majority(&counts),
            };
            continue;
        }

        // Draw features in random order; keep drawing past `mtry` only while
        // no usable split has turned up.
        features.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= mtry && best.is_some() {
                break;
            }
            if let Some(s) = best_split_on(rows, classes, n_classes, &mut idx, f) {
                if best.as_ref().is_none_or(|b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }

        match best {
            None => {
                nodes[slot] = Node::Leaf {
                    class: majority(&counts),
                }
            }
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][s.feature] <= s.threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { class: 0 });
                let right = nodes.len();
                nodes.push(Node::Leaf { class: 0 });
                nodes[slot] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                };
                stack.push((right, r));
                stack.push((left, l));
            }
        }
    }
    Tree { nodes }
}
