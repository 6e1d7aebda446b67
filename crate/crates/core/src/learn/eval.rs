//! Cross-validation folds and binary-classifier summaries.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Forest, ForestParams, LearnError};
use crate::mix_seed;

/// Assigns each row a fold in `0..k`, stratified by label.
pub fn stratified_folds(labels: &[u32], k: usize, seed: u64) -> Vec<usize> {
    let k = k.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(*l).or_default().push(i);
    }
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for rows in by_class.values_mut() {
        rows.shuffle(&mut rng);
        for &r in rows.iter() {
            fold[r] = next % k;
            next += 1;
        }
    }
    fold
}

/// Out-of-fold class distributions from `k`-fold stratified cross-validation.
/// Row `i` is scored by a forest trained without its fold; columns follow
/// the sorted label set of the whole data.
pub fn cross_val_proba(
    x: &[Vec<f64>],
    y: &[u32],
    k: usize,
    params: ForestParams,
) -> Result<(Vec<u32>, Vec<Vec<f64>>), LearnError> {
    let labels: Vec<u32> = y
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let folds = stratified_folds(y, k, mix_seed(params.seed ^ 0x000f_01d5));
    let mut out = vec![Vec::new(); y.len()];
    for f in 0..k.max(1) {
        let train: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..y.len()).filter(|&i| folds[i] == f).collect();
        if test.is_empty() {
            continue;
        }
        let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<u32> = train.iter().map(|&i| y[i]).collect();
        let forest = Forest::fit(&tx, &ty, params)?;
        for &i in &test {
            out[i] = labels.iter().map(|&l| forest.proba_of(&x[i], l)).collect();
        }
    }
    Ok((labels, out))
}

/// Area under the ROC curve (Mann-Whitney, ties count one half).
/// Returns `None` unless both classes are present.
pub fn auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let pos: Vec<f64> = scores
        .iter()
        .zip(positive)
        .filter(|(_, p)| **p)
        .map(|(s, _)| *s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(positive)
        .filter(|(_, p)| !**p)
        .map(|(s, _)| *s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    Some(wins / (pos.len() * neg.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryRates {
    pub accuracy: f64,
    pub tpr: f64,
    pub tnr: f64,
}

pub fn binary_rates(predicted: &[bool], actual: &[bool]) -> BinaryRates {
    let (mut tp, mut tn, mut p, mut n) = (0usize, 0usize, 0usize, 0usize);
    for (pr, ac) in predicted.iter().zip(actual) {
        if *ac {
            p += 1;
            tp += usize::from(*pr);
        } else {
            n += 1;
            tn += usize::from(!*pr);
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    BinaryRates {
        accuracy: ratio(tp + tn, p + n),
        tpr: ratio(tp, p),
        tnr: ratio(tn, n),
    }
}
