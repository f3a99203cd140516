//! Ranking and rating metrics: candidate ranking, DCG/NDCG, relevance
//! transforms, MAE and RMSE.

use std::cmp::Ordering;

use crate::config::{QosAttribute, RelevanceKind};
use crate::data::QosMatrix;
use crate::error::{Error, Result};

/// Top-K services for one user, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    pub user: usize,
    pub entries: Vec<(usize, f64)>,
    pub k: usize,
}

impl RankedList {
    pub fn services(&self) -> Vec<usize> {
        self.entries.iter().map(|&(s, _)| s).collect()
    }
}

/// All of a user's candidates ordered by their ground-truth value.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealList {
    pub user: usize,
    pub entries: Vec<(usize, f64)>,
}

fn preference_order(direction: QosAttribute) -> impl Fn(&(usize, f64), &(usize, f64)) -> Ordering {
    move |a, b| {
        let by_value = match direction {
            QosAttribute::SmallerIsBetter => a.1.partial_cmp(&b.1),
            QosAttribute::LargerIsBetter => b.1.partial_cmp(&a.1),
        };
        by_value.unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
    }
}

/// Sorts `(service, value)` pairs best-first; ties go to the lower index.
pub fn sort_by_preference(entries: &mut [(usize, f64)], direction: QosAttribute) {
    entries.sort_by(preference_order(direction));
}

/// Ranks user `u`'s candidates, the services observed in `test_mask`, by their
/// predicted values.
pub fn rank_candidates(
    predicted: &QosMatrix,
    test_mask: &QosMatrix,
    u: usize,
    k: usize,
    direction: QosAttribute,
) -> RankedList {
    let mut entries: Vec<(usize, f64)> = test_mask
        .row(u)
        .map(|(s, _)| (s, predicted.value(u, s)))
        .collect();
    sort_by_preference(&mut entries, direction);
    entries.truncate(k);
    RankedList {
        user: u,
        entries,
        k,
    }
}

/// Same ranking from a prediction function instead of a completed matrix.
pub fn rank_with<F: Fn(usize, usize) -> f64>(
    predict: F,
    candidates: &[usize],
    u: usize,
    k: usize,
    direction: QosAttribute,
) -> RankedList {
    let mut entries: Vec<(usize, f64)> = candidates.iter().map(|&s| (s, predict(u, s))).collect();
    sort_by_preference(&mut entries, direction);
    entries.truncate(k);
    RankedList {
        user: u,
        entries,
        k,
    }
}

pub fn ideal_list(test: &QosMatrix, u: usize, direction: QosAttribute) -> IdealList {
    let mut entries: Vec<(usize, f64)> = test.row(u).collect();
    sort_by_preference(&mut entries, direction);
    IdealList { user: u, entries }
}

/// `rel_1 + Σ_{i=2}^{k} rel_i / log2(i)`: the first two positions are both
/// undiscounted.
pub fn dcg_k(rels: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    Ok(rels
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &rel)| {
            if i == 0 {
                rel
            } else {
                rel / ((i + 1) as f64).log2()
            }
        })
        .sum())
}

/// Gains for a user's ground-truth values.
///
/// Smaller-is-better values map linearly onto `[0, 1]` with the best candidate
/// at 1 (all 1 when every value is equal); larger-is-better values are used as
/// they are and must be non-negative.
pub fn relevance_transform(values: &[f64], direction: QosAttribute) -> Result<Vec<f64>> {
    relevance_with(values, direction, RelevanceKind::Linear, None)
}

/// Relevance transform with an explicit kind. `global_max` is required for
/// [`RelevanceKind::GlobalMaxMinus`] and ignored otherwise.
pub fn relevance_with(
    values: &[f64],
    direction: QosAttribute,
    kind: RelevanceKind,
    global_max: Option<f64>,
) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyList);
    }
    if direction == QosAttribute::LargerIsBetter {
        if let Some(&bad) = values.iter().find(|&&v| v < 0.0) {
            return Err(Error::NegativeRelevance(bad));
        }
        return Ok(values.to_vec());
    }
    Ok(match kind {
        RelevanceKind::Linear => {
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            if max == min {
                vec![1.0; values.len()]
            } else {
                values.iter().map(|v| (max - v) / (max - min)).collect()
            }
        }
        RelevanceKind::Reciprocal { eps } => values.iter().map(|v| 1.0 / (v + eps)).collect(),
        RelevanceKind::GlobalMaxMinus => {
            let max = global_max.ok_or_else(|| {
                Error::InvalidConfig("global-max-minus relevance needs the global maximum".into())
            })?;
            values.iter().map(|v| (max - v).max(0.0)).collect()
        }
    })
}

/// Ratio of the ranked list's DCG-k to the ideal list's DCG-k.
///
/// `ranked_rels` are the gains of the ranked services in ranked order and
/// `ideal_rels` the gains of all candidates in ideal order.
pub fn ndcg_from_rels(ranked_rels: &[f64], ideal_rels: &[f64], k: usize) -> Result<f64> {
    if ideal_rels.is_empty() {
        return Err(Error::EmptyList);
    }
    let dcg = dcg_k(ranked_rels, k)?;
    let idcg = dcg_k(ideal_rels, k)?;
    if idcg == 0.0 {
        return if dcg == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::InconsistentRelevance)
        };
    }
    Ok(dcg / idcg)
}

/// NDCG-k of a ranked list against the ideal list, with gains from the
/// linear transform over the ideal list's values.
pub fn ndcg_k(
    ranked: &RankedList,
    ideal: &IdealList,
    k: usize,
    direction: QosAttribute,
) -> Result<f64> {
    ndcg_with(ranked, ideal, k, direction, RelevanceKind::Linear, None)
}

pub fn ndcg_with(
    ranked: &RankedList,
    ideal: &IdealList,
    k: usize,
    direction: QosAttribute,
    kind: RelevanceKind,
    global_max: Option<f64>,
) -> Result<f64> {
    let truths: Vec<f64> = ideal.entries.iter().map(|&(_, v)| v).collect();
    let gains = relevance_with(&truths, direction, kind, global_max)?;
    let gain_of = |s: usize| -> Result<f64> {
        ideal
            .entries
            .iter()
            .position(|&(t, _)| t == s)
            .map(|i| gains[i])
            .ok_or_else(|| Error::Format(format!("ranked service {s} is not a candidate")))
    };
    let ranked_rels = ranked
        .entries
        .iter()
        .map(|&(s, _)| gain_of(s))
        .collect::<Result<Vec<_>>>()?;
    ndcg_from_rels(&ranked_rels, &gains, k)
}

fn check_lengths(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyList);
    }
    Ok(())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let mse = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / pred.len() as f64;
    Ok(mse.sqrt())
}
