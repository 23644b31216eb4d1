//! Accuracy, confusion matrices, cluster F-scores and accuracy-vs-budget
//! curves, all computed with counts.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::Label;

/// `F(C) = 2 max_k |C ∩ L_k| / (|C| + |L_k|)`.
pub fn cluster_fscore(cluster: &[usize], classes: &[Vec<usize>]) -> Result<f64> {
    if cluster.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let members: BTreeSet<usize> = cluster.iter().copied().collect();
    let best = classes
        .iter()
        .map(|class| {
            let overlap = class.iter().filter(|i| members.contains(i)).count();
            2.0 * overlap as f64 / (members.len() + class.len()) as f64
        })
        .fold(0.0, f64::max);
    Ok(best)
}

/// Size-weighted mean of the per-cluster F-scores. Empty clusters are skipped.
pub fn fscore(clusters: &[Vec<usize>], classes: &[Vec<usize>]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0usize;
    for c in clusters.iter().filter(|c| !c.is_empty()) {
        num += c.len() as f64 * cluster_fscore(c, classes)?;
        den += c.len();
    }
    if den == 0 {
        return Err(Error::EmptyCluster);
    }
    Ok(num / den as f64)
}

/// Group ids by label, ordered by label value.
pub fn partition(labels: &[Label]) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups.into_values().collect()
}

pub fn accuracy(predicted: &[Label], truth: &[Label]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch(predicted.len(), truth.len()));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Counts indexed `[true][predicted]` over the union of observed labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<Label>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for l in &self.labels {
            out.push_str(&format!(",{l}"));
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(&l.to_string());
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn confusion(predicted: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch(predicted.len(), truth.len()));
    }
    let labels: Vec<Label> = predicted
        .iter()
        .chain(truth)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<Label, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut counts = vec![vec![0; labels.len()]; labels.len()];
    for (p, t) in predicted.iter().zip(truth) {
        counts[index[t]][index[p]] += 1;
    }
    Ok(ConfusionMatrix { labels, counts })
}

/// One point of an accuracy-vs-queries curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetPoint {
    pub eta: f64,
    pub queries: usize,
    pub accuracy: f64,
}

/// Key/value report: accuracy, F-score of the predicted partition, counts.
pub fn report(predicted: &[Label], truth: &[Label], queries: usize) -> Result<String> {
    let acc = accuracy(predicted, truth)?;
    let f = fscore(&partition(predicted), &partition(truth))?;
    let cm = confusion(predicted, truth)?;
    Ok(format!(
        "points: {}\nqueries: {}\naccuracy: {:.6}\nfscore: {:.6}\nclasses: {}\n",
        truth.len(),
        queries,
        acc,
        f,
        cm.labels.len()
    ))
}
