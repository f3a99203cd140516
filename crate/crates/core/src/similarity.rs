//! Service-service and user-user similarities, and Top-k neighbor selection.
//!
//! Undefined similarities (fewer than two co-observations, or zero variance for
//! PCC) are stored as NaN and behave as "no edge" everywhere downstream.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::config::KrccVariant;
use crate::data::QosMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimilarityKind {
    Krcc,
    Pcc,
}

impl SimilarityKind {
    fn tag(self) -> &'static str {
        match self {
            SimilarityKind::Krcc => "krcc",
            SimilarityKind::Pcc => "pcc",
        }
    }
}

/// Which entities a PCC similarity compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Services, correlated over their common users.
    Item,
    /// Users, correlated over their common services.
    User,
}

/// Symmetric `n x n` similarity table.
#[derive(Clone, Debug)]
pub struct SimilarityMatrix {
    kind: SimilarityKind,
    n: usize,
    values: Vec<f64>,
}

impl PartialEq for SimilarityMatrix {
    /// Bitwise comparison, so NaN entries compare equal to NaN entries.
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.n == other.n
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl SimilarityMatrix {
    /// Builds a matrix from a full row-major table, NaN meaning undefined.
    pub fn from_values(kind: SimilarityKind, n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Format(format!(
                "similarity table holds {} values, expected {}",
                values.len(),
                n * n
            )));
        }
        Ok(SimilarityMatrix { kind, n, values })
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.values[i * self.n + j];
        (!v.is_nan()).then_some(v)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Cache text: header `kind n`, then `n` lines of `n` values, `nan` for undefined.
    pub fn to_cache_string(&self) -> String {
        let mut out = format!("{} {}\n", self.kind.tag(), self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                if v.is_nan() {
                    out.push_str("nan");
                } else {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_cache(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty similarity cache".into()))?;
        let mut parts = header.split_whitespace();
        let kind = match parts.next() {
            Some("krcc") => SimilarityKind::Krcc,
            Some("pcc") => SimilarityKind::Pcc,
            other => {
                return Err(Error::Format(format!(
                    "unknown similarity kind {other:?} in cache header"
                )))
            }
        };
        let n: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Format("cache header lacks a size".into()))?;
        let mut values = Vec::with_capacity(n * n);
        for row in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("cache truncated at row {}", row + 1)))?;
            let before = values.len();
            for (col, token) in line.split_whitespace().enumerate() {
                let v = if token == "nan" {
                    f64::NAN
                } else {
                    token.parse().map_err(|_| Error::BadToken {
                        row: row + 2,
                        column: col + 1,
                        token: token.to_string(),
                    })?
                };
                values.push(v);
            }
            if values.len() - before != n {
                return Err(Error::RaggedRow {
                    row: row + 2,
                    expected: n,
                    found: values.len() - before,
                });
            }
        }
        Self::from_values(kind, n, values)
    }

    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_cache_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_cache(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_cache(&text)
    }
}

/// Column `s` as a dense vector with NaN for unobserved cells.
fn dense_columns(train: &QosMatrix) -> Vec<Vec<f64>> {
    (0..train.services())
        .map(|s| {
            (0..train.users())
                .map(|u| train.get(u, s).unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

fn dense_rows(train: &QosMatrix) -> Vec<Vec<f64>> {
    (0..train.users())
        .map(|u| {
            (0..train.services())
                .map(|s| train.get(u, s).unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

fn co_observed(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_nan() && !y.is_nan())
        .map(|(&x, &y)| (x, y))
        .unzip()
}

/// Rank correlation of two co-observed vectors, `None` below two pairs.
fn krcc_pairs(x: &[f64], y: &[f64], variant: KrccVariant) -> Option<f64> {
    let c = x.len();
    if c < 2 {
        return None;
    }
    let discordant = match variant {
        KrccVariant::WithinUser => {
            // (d_u * d_v < 0) holds exactly when one difference is positive and
            // the other negative, so the count is #positive * #negative.
            let (mut pos, mut neg) = (0u64, 0u64);
            for (a, b) in x.iter().zip(y) {
                let d = a - b;
                if d > 0.0 {
                    pos += 1;
                } else if d < 0.0 {
                    neg += 1;
                }
            }
            pos * neg
        }
        KrccVariant::ColumnKendall => {
            let mut d = 0u64;
            for u in 0..c {
                for v in (u + 1)..c {
                    if (x[u] - x[v]) * (y[u] - y[v]) < 0.0 {
                        d += 1;
                    }
                }
            }
            d
        }
    };
    Some(1.0 - 4.0 * discordant as f64 / (c * (c - 1)) as f64)
}

fn pcc_pairs(x: &[f64], y: &[f64]) -> Option<f64> {
    let c = x.len();
    if c < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / c as f64;
    let my = y.iter().sum::<f64>() / c as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Rank-correlation similarity of services `i` and `j` over their common users,
/// using the within-user difference arrangement.
pub fn krcc_similarity(train: &QosMatrix, i: usize, j: usize) -> Option<f64> {
    krcc_similarity_with(train, i, j, KrccVariant::WithinUser)
}

pub fn krcc_similarity_with(
    train: &QosMatrix,
    i: usize,
    j: usize,
    variant: KrccVariant,
) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = (0..train.users())
        .filter_map(|u| Some((train.get(u, i)?, train.get(u, j)?)))
        .unzip();
    krcc_pairs(&x, &y, variant)
}

pub fn pcc_similarity(train: &QosMatrix, i: usize, j: usize, axis: Axis) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = match axis {
        Axis::Item => (0..train.users())
            .filter_map(|u| Some((train.get(u, i)?, train.get(u, j)?)))
            .unzip(),
        Axis::User => (0..train.services())
            .filter_map(|s| Some((train.get(i, s)?, train.get(j, s)?)))
            .unzip(),
    };
    pcc_pairs(&x, &y)
}

fn build_matrix<F>(kind: SimilarityKind, vectors: &[Vec<f64>], pair: F) -> SimilarityMatrix
where
    F: Fn(&[f64], &[f64]) -> Option<f64> + Sync,
{
    let n = vectors.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| {
                    let (x, y) = co_observed(&vectors[i], &vectors[j]);
                    pair(&x, &y).unwrap_or(f64::NAN)
                })
                .collect()
        })
        .collect();
    let mut values = vec![f64::NAN; n * n];
    for i in 0..n {
        let observations = vectors[i].iter().filter(|v| !v.is_nan()).count();
        if observations >= 2 {
            values[i * n + i] = 1.0;
        }
        for (offset, &v) in upper[i].iter().enumerate() {
            let j = i + 1 + offset;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    SimilarityMatrix { kind, n, values }
}

/// Service-service rank-correlation table over the training matrix.
pub fn krcc_matrix(train: &QosMatrix, variant: KrccVariant) -> SimilarityMatrix {
    let columns = dense_columns(train);
    build_matrix(SimilarityKind::Krcc, &columns, |x, y| {
        krcc_pairs(x, y, variant)
    })
}

pub fn pcc_matrix(train: &QosMatrix, axis: Axis) -> SimilarityMatrix {
    let vectors = match axis {
        Axis::Item => dense_columns(train),
        Axis::User => dense_rows(train),
    };
    build_matrix(SimilarityKind::Pcc, &vectors, pcc_pairs)
}

/// Up to `k` most similar entities to `target`, all with positive weight,
/// ordered by descending weight and then ascending index.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborSet {
    pub target: usize,
    pub neighbors: Vec<(usize, f64)>,
}

impl NeighborSet {
    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn weight_sum(&self) -> f64 {
        self.neighbors.iter().map(|&(_, w)| w).sum()
    }
}

fn by_weight_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

fn positive_ranked(sim: &SimilarityMatrix, i: usize) -> Vec<(usize, f64)> {
    let mut candidates: Vec<(usize, f64)> = sim
        .row(i)
        .iter()
        .enumerate()
        .filter(|&(j, &w)| j != i && w > 0.0)
        .map(|(j, &w)| (j, w))
        .collect();
    candidates.sort_by(by_weight_then_index);
    candidates
}

/// Top-k neighbors of service `i`. With `rated_by`, candidates are limited to
/// services that user observed in `train`.
pub fn top_k_neighbors(
    sim: &SimilarityMatrix,
    i: usize,
    k: usize,
    rated_by: Option<usize>,
    train: &QosMatrix,
) -> NeighborSet {
    let neighbors = positive_ranked(sim, i)
        .into_iter()
        .filter(|&(j, _)| rated_by.is_none_or(|u| train.is_observed(u, j)))
        .take(k)
        .collect();
    NeighborSet {
        target: i,
        neighbors,
    }
}

/// Every entity's positive-similarity candidates, pre-sorted once so repeated
/// Top-k queries only filter and truncate.
#[derive(Clone, Debug)]
pub struct NeighborIndex {
    ranked: Vec<Vec<(usize, f64)>>,
}

impl NeighborIndex {
    pub fn build(sim: &SimilarityMatrix) -> Self {
        let ranked = (0..sim.size())
            .into_par_iter()
            .map(|i| positive_ranked(sim, i))
            .collect();
        NeighborIndex { ranked }
    }

    /// Top-k neighbors of `target` among candidates accepted by `keep`.
    pub fn top_k(&self, target: usize, k: usize, keep: impl Fn(usize) -> bool) -> NeighborSet {
        NeighborSet {
            target,
            neighbors: self.ranked[target]
                .iter()
                .copied()
                .filter(|&(j, _)| keep(j))
                .take(k)
                .collect(),
        }
    }
}
