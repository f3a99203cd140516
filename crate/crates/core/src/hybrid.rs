//! The hybrid rating model: baseline estimate, a similarity-weighted neighbor
//! residual term and a latent-factor term, blended by `beta` and trained by SGD.
//!
//! ```text
//! q̂(u,s) = μ + b_u + b_s
//!        + β     · Σ_{j ∈ N_k(s; u)} sim(s,j) / Σ sim · (q(u,j) − b̃(u,j))
//!        + (1−β) · Σ_f p(u,f) · w(f,s)
//! ```
//!
//! `b̃` is a snapshot of the baselines taken after a bias-only pretraining phase.
//! Freezing it keeps the neighbor term constant per cell during the second
//! phase, so each SGD step costs `O(F)`.
//!
//! The objective minimised is, per training cell,
//! `(q − q̂)² + λ (b_u² + b_s² + ‖p_u‖² + ‖w_s‖²)`, summed over the cells.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Hyperparams;
use crate::data::{global_mean, QosMatrix};
use crate::error::{Error, Result};
use crate::similarity::{NeighborIndex, SimilarityMatrix};

const INIT_STREAM: u64 = 0;
const BASELINE_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;
const INIT_SCALE: f64 = 0.01;

/// Global mean plus per-user and per-service deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct Baselines {
    pub mu: f64,
    pub bu: Vec<f64>,
    pub bs: Vec<f64>,
}

impl Baselines {
    #[inline]
    pub fn estimate(&self, u: usize, s: usize) -> f64 {
        self.mu + (self.bu[u] + self.bs[s])
    }
}

/// Learned parameters. `p` is `F x m` and `w` is `F x n`, both row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub bu: Vec<f64>,
    pub bs: Vec<f64>,
    pub factors: usize,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
    /// Baselines used for neighbor residuals.
    pub frozen: Baselines,
}

impl ModelParams {
    /// All-zero parameters with `frozen` equal to the live baselines.
    pub fn zeros(m: usize, n: usize, factors: usize) -> Self {
        ModelParams {
            mu: 0.0,
            bu: vec![0.0; m],
            bs: vec![0.0; n],
            factors,
            p: vec![0.0; factors * m],
            w: vec![0.0; factors * n],
            frozen: Baselines {
                mu: 0.0,
                bu: vec![0.0; m],
                bs: vec![0.0; n],
            },
        }
    }

    pub fn users(&self) -> usize {
        self.bu.len()
    }

    pub fn services(&self) -> usize {
        self.bs.len()
    }

    #[inline]
    pub fn p_at(&self, f: usize, u: usize) -> f64 {
        self.p[f * self.users() + u]
    }

    #[inline]
    pub fn w_at(&self, f: usize, s: usize) -> f64 {
        self.w[f * self.services() + s]
    }

    pub fn is_finite(&self) -> bool {
        self.mu.is_finite()
            && self
                .bu
                .iter()
                .chain(&self.bs)
                .chain(&self.p)
                .chain(&self.w)
                .all(|v| v.is_finite())
    }

    /// Checkpoint text: header `m n F`, then μ, b_u, b_s, the `F` rows of P and
    /// the `F` rows of W, and finally a `frozen` block with the residual baselines.
    /// Values carry 17 significant digits and reload bit-exactly.
    pub fn to_checkpoint_string(&self) -> String {
        let (m, n, f) = (self.users(), self.services(), self.factors);
        let mut out = format!("{m} {n} {f}\n");
        let line = |out: &mut String, values: &[f64]| {
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        };
        line(&mut out, &[self.mu]);
        line(&mut out, &self.bu);
        line(&mut out, &self.bs);
        for row in 0..f {
            line(&mut out, &self.p[row * m..(row + 1) * m]);
        }
        for row in 0..f {
            line(&mut out, &self.w[row * n..(row + 1) * n]);
        }
        out.push_str("frozen\n");
        line(&mut out, &[self.frozen.mu]);
        line(&mut out, &self.frozen.bu);
        line(&mut out, &self.frozen.bs);
        out
    }

    /// Parses a checkpoint. A missing `frozen` block means the residual
    /// baselines equal the live ones.
    pub fn parse_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next_line = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Format(format!("checkpoint truncated before {what}")))
        };
        let (_, header) = next_line("header")?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Format(format!("bad checkpoint header {header:?}")))?;
        let [m, n, f] = dims[..] else {
            return Err(Error::Format(format!("bad checkpoint header {header:?}")));
        };
        let parse_row = |(idx, line): (usize, &str), expected: usize| -> Result<Vec<f64>> {
            let values: Vec<f64> = line
                .split_whitespace()
                .enumerate()
                .map(|(col, t)| {
                    t.parse().map_err(|_| Error::BadToken {
                        row: idx + 1,
                        column: col + 1,
                        token: t.to_string(),
                    })
                })
                .collect::<Result<_>>()?;
            if values.len() != expected {
                return Err(Error::RaggedRow {
                    row: idx + 1,
                    expected,
                    found: values.len(),
                });
            }
            Ok(values)
        };
        let mu = parse_row(next_line("mu")?, 1)?[0];
        let bu = parse_row(next_line("user biases")?, m)?;
        let bs = parse_row(next_line("service biases")?, n)?;
        let mut p = Vec::with_capacity(f * m);
        for _ in 0..f {
            p.extend(parse_row(next_line("P")?, m)?);
        }
        let mut w = Vec::with_capacity(f * n);
        for _ in 0..f {
            w.extend(parse_row(next_line("W")?, n)?);
        }
        let frozen = match lines.next() {
            Some((_, "frozen")) => {
                let mut next_line = |what: &str| {
                    lines
                        .next()
                        .ok_or_else(|| Error::Format(format!("checkpoint truncated before {what}")))
                };
                Baselines {
                    mu: parse_row(next_line("frozen mu")?, 1)?[0],
                    bu: parse_row(next_line("frozen user biases")?, m)?,
                    bs: parse_row(next_line("frozen service biases")?, n)?,
                }
            }
            None => Baselines {
                mu,
                bu: bu.clone(),
                bs: bs.clone(),
            },
            Some((idx, other)) => {
                return Err(Error::Format(format!(
                    "line {}: unexpected trailing content {other:?}",
                    idx + 1
                )))
            }
        };
        Ok(ModelParams {
            mu,
            bu,
            bs,
            factors: f,
            p,
            w,
            frozen,
        })
    }

    pub fn write_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_checkpoint_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_checkpoint(&text)
    }
}

/// `μ + b_u + b_s` from the live parameters.
#[inline]
pub fn baseline_estimate(params: &ModelParams, u: usize, s: usize) -> f64 {
    params.mu + (params.bu[u] + params.bs[s])
}

/// Inner product of user `u`'s and service `s`'s factor vectors.
#[inline]
pub fn lfm_term(params: &ModelParams, u: usize, s: usize) -> f64 {
    let (m, n) = (params.users(), params.services());
    (0..params.factors)
        .map(|f| params.p[f * m + u] * params.w[f * n + s])
        .sum()
}

fn weighted_residual(
    train: &QosMatrix,
    frozen: &Baselines,
    u: usize,
    neighbors: &[(usize, f64)],
) -> f64 {
    let total: f64 = neighbors.iter().map(|&(_, w)| w).sum();
    if neighbors.is_empty() || total == 0.0 {
        return 0.0;
    }
    neighbors
        .iter()
        .map(|&(j, w)| (w / total) * (train.value(u, j) - frozen.estimate(u, j)))
        .sum()
}

/// Similarity-weighted mean residual of user `u` over the Top-k services most
/// similar to `s` that `u` observed in `train`. Zero when no neighbor qualifies.
pub fn neighbor_term(
    train: &QosMatrix,
    sim: &SimilarityMatrix,
    params: &ModelParams,
    u: usize,
    s: usize,
    k: usize,
) -> f64 {
    let set = crate::similarity::top_k_neighbors(sim, s, k, Some(u), train);
    weighted_residual(train, &params.frozen, u, &set.neighbors)
}

/// Which terms of the blended prediction a model uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind {
    /// Baseline + `beta` · neighbor + `(1 − beta)` · latent factors.
    Hybrid { beta: f64 },
    /// Baseline + latent factors (biased SVD).
    BiasSvd,
    /// Baseline + neighbor term. Factors stay in the objective but carry no
    /// data gradient, matching the hybrid objective at `beta = 1`.
    NeighborOnly,
}

impl ModelKind {
    fn uses_neighbors(self) -> bool {
        !matches!(self, ModelKind::BiasSvd)
    }

    /// Weight of the latent-factor term inside the prediction.
    fn factor_weight(self) -> f64 {
        match self {
            ModelKind::Hybrid { beta } => 1.0 - beta,
            ModelKind::BiasSvd => 1.0,
            ModelKind::NeighborOnly => 0.0,
        }
    }

    #[inline]
    fn combine(self, baseline: f64, neighbor: f64, lfm: f64) -> f64 {
        match self {
            ModelKind::Hybrid { beta } => baseline + beta * neighbor + (1.0 - beta) * lfm,
            ModelKind::BiasSvd => baseline + lfm,
            ModelKind::NeighborOnly => baseline + neighbor,
        }
    }
}

/// Unclamped prediction from an already computed neighbor term.
#[inline]
fn raw_prediction(kind: ModelKind, params: &ModelParams, u: usize, s: usize, neighbor: f64) -> f64 {
    let lfm = match kind {
        ModelKind::NeighborOnly => 0.0,
        _ => lfm_term(params, u, s),
    };
    kind.combine(baseline_estimate(params, u, s), neighbor, lfm)
}

/// Hybrid prediction, clamped from below at `hp.floor`.
pub fn hybrid_predict(
    train: &QosMatrix,
    sim: &SimilarityMatrix,
    params: &ModelParams,
    hp: &Hyperparams,
    u: usize,
    s: usize,
) -> f64 {
    let neighbor = neighbor_term(train, sim, params, u, s, hp.topk_neighbors);
    raw_prediction(ModelKind::Hybrid { beta: hp.beta }, params, u, s, neighbor).max(hp.floor)
}

/// Training objective over the observed cells of `train`, using unclamped
/// predictions.
pub fn loss(
    train: &QosMatrix,
    sim: &SimilarityMatrix,
    params: &ModelParams,
    hp: &Hyperparams,
) -> f64 {
    let index = NeighborIndex::build(sim);
    let cells = training_cells(train, &index, &params.frozen, hp.topk_neighbors, true);
    objective(
        ModelKind::Hybrid { beta: hp.beta },
        params,
        &cells,
        hp.lambda,
    )
}

/// A training cell with its precomputed neighbor term.
#[derive(Clone, Copy, Debug)]
struct Cell {
    u: usize,
    s: usize,
    q: f64,
    neighbor: f64,
}

fn training_cells(
    train: &QosMatrix,
    index: &NeighborIndex,
    frozen: &Baselines,
    k: usize,
    with_neighbors: bool,
) -> Vec<Cell> {
    train
        .cells()
        .map(|(u, s, q)| {
            let neighbor = if with_neighbors {
                let set = index.top_k(s, k, |j| train.is_observed(u, j));
                weighted_residual(train, frozen, u, &set.neighbors)
            } else {
                0.0
            };
            Cell { u, s, q, neighbor }
        })
        .collect()
}

fn objective(kind: ModelKind, params: &ModelParams, cells: &[Cell], lambda: f64) -> f64 {
    let (m, n) = (params.users(), params.services());
    cells
        .iter()
        .map(|c| {
            let e = c.q - raw_prediction(kind, params, c.u, c.s, c.neighbor);
            let mut reg = params.bu[c.u].powi(2) + params.bs[c.s].powi(2);
            for f in 0..params.factors {
                reg += params.p[f * m + c.u].powi(2) + params.w[f * n + c.s].powi(2);
            }
            e * e + lambda * reg
        })
        .sum()
}

/// Descent direction of one cell's objective term (half the negative gradient),
/// evaluated entirely at the current parameters.
///
/// Returns `(d b_u, d b_s)`; factor directions are written to `dp` and `dw`.
fn cell_direction(
    kind: ModelKind,
    params: &ModelParams,
    cell: &Cell,
    lambda: f64,
    dp: &mut [f64],
    dw: &mut [f64],
) -> (f64, f64) {
    let (m, n) = (params.users(), params.services());
    let e = cell.q - raw_prediction(kind, params, cell.u, cell.s, cell.neighbor);
    let weight = kind.factor_weight();
    for f in 0..params.factors {
        let p = params.p[f * m + cell.u];
        let w = params.w[f * n + cell.s];
        dp[f] = e * weight * w - lambda * p;
        dw[f] = e * weight * p - lambda * w;
    }
    (
        e - lambda * params.bu[cell.u],
        e - lambda * params.bs[cell.s],
    )
}

/// Half the negative gradient of the objective, per parameter block.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGradient {
    pub bu: Vec<f64>,
    pub bs: Vec<f64>,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
}

/// Sums the per-cell SGD directions at fixed parameters. Scaled by `-2`, this is
/// the exact gradient of the objective with respect to `(b_u, b_s, P, W)`
/// holding the neighbor residuals fixed.
pub fn descent_direction(
    train: &QosMatrix,
    sim: &SimilarityMatrix,
    params: &ModelParams,
    hp: &Hyperparams,
) -> ModelGradient {
    let index = NeighborIndex::build(sim);
    let cells = training_cells(train, &index, &params.frozen, hp.topk_neighbors, true);
    let kind = ModelKind::Hybrid { beta: hp.beta };
    let (m, n, f) = (params.users(), params.services(), params.factors);
    let mut grad = ModelGradient {
        bu: vec![0.0; m],
        bs: vec![0.0; n],
        p: vec![0.0; f * m],
        w: vec![0.0; f * n],
    };
    let mut dp = vec![0.0; f];
    let mut dw = vec![0.0; f];
    for cell in &cells {
        let (du, ds) = cell_direction(kind, params, cell, hp.lambda, &mut dp, &mut dw);
        grad.bu[cell.u] += du;
        grad.bs[cell.s] += ds;
        for k in 0..f {
            grad.p[k * m + cell.u] += dp[k];
            grad.w[k * n + cell.s] += dw[k];
        }
    }
    grad
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStat {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Objective after the epoch.
    pub loss: f64,
    /// Learning rate used during the epoch.
    pub alpha: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainTrace {
    /// Bias-only pretraining epochs.
    pub baseline: Vec<EpochStat>,
    /// Objective of the full model before its first epoch.
    pub initial_loss: f64,
    pub epochs: Vec<EpochStat>,
    /// Whether the relative loss change dropped below `tol` before `max_epochs`.
    pub converged: bool,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
}

impl TrainTrace {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.loss).collect()
    }
}

fn relative_change(prev: f64, cur: f64) -> f64 {
    (prev - cur).abs() / prev.abs().max(f64::MIN_POSITIVE)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SGD on `(b_u, b_s)` alone around the training mean.
fn pretrain_baselines(train: &QosMatrix, hp: &Hyperparams) -> Result<(Baselines, Vec<EpochStat>)> {
    let mu = global_mean(train)?;
    let mut b = Baselines {
        mu,
        bu: vec![0.0; train.users()],
        bs: vec![0.0; train.services()],
    };
    let cells: Vec<(usize, usize, f64)> = train.cells().collect();
    let loss_of = |b: &Baselines| -> f64 {
        cells
            .iter()
            .map(|&(u, s, q)| {
                let e = q - b.estimate(u, s);
                e * e + hp.lambda * (b.bu[u] * b.bu[u] + b.bs[s] * b.bs[s])
            })
            .sum()
    };
    let mut order: Vec<usize> = (0..cells.len()).collect();
    let mut shuffle = rng(hp.seed, BASELINE_STREAM);
    let mut alpha = hp.alpha0;
    let mut prev = loss_of(&b);
    let mut trace = Vec::new();
    for epoch in 1..=hp.max_epochs {
        order.shuffle(&mut shuffle);
        for &i in &order {
            let (u, s, q) = cells[i];
            let e = q - b.estimate(u, s);
            let (bu, bs) = (b.bu[u], b.bs[s]);
            b.bu[u] += alpha * (e - hp.lambda * bu);
            b.bs[s] += alpha * (e - hp.lambda * bs);
        }
        let cur = loss_of(&b);
        if !cur.is_finite() {
            return Err(Error::Divergence { epoch, alpha });
        }
        trace.push(EpochStat {
            epoch,
            loss: cur,
            alpha,
        });
        alpha *= hp.decay;
        if relative_change(prev, cur) < hp.tol {
            break;
        }
        prev = cur;
    }
    Ok((b, trace))
}

/// A trained model bundled with what it needs to predict: its training matrix
/// and (unless it is a pure latent-factor model) the neighbor index.
#[derive(Clone, Debug)]
pub struct HybridModel {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub k: usize,
    pub floor: f64,
    train: QosMatrix,
    neighbors: Option<NeighborIndex>,
}

impl HybridModel {
    pub fn neighbor_term(&self, u: usize, s: usize) -> f64 {
        match &self.neighbors {
            Some(index) => {
                let set = index.top_k(s, self.k, |j| self.train.is_observed(u, j));
                weighted_residual(&self.train, &self.params.frozen, u, &set.neighbors)
            }
            None => 0.0,
        }
    }

    pub fn predict_raw(&self, u: usize, s: usize) -> f64 {
        let neighbor = if self.kind.uses_neighbors() {
            self.neighbor_term(u, s)
        } else {
            0.0
        };
        raw_prediction(self.kind, &self.params, u, s, neighbor)
    }

    /// Prediction clamped from below at the configured floor.
    pub fn predict(&self, u: usize, s: usize) -> f64 {
        self.predict_raw(u, s).max(self.floor)
    }

    pub fn train_matrix(&self) -> &QosMatrix {
        &self.train
    }

    /// Training matrix with every unobserved cell filled by the model.
    /// Predictions at or below zero are stored as the smallest positive value,
    /// since a QoS matrix only holds positive observations.
    pub fn complete(&self) -> QosMatrix {
        let mut out = self.train.clone();
        for u in 0..out.users() {
            for s in 0..out.services() {
                if !out.is_observed(u, s) {
                    let v = self.predict(u, s).max(f64::MIN_POSITIVE);
                    out.set(u, s, v).expect("positive finite prediction");
                }
            }
        }
        out
    }
}

/// Called after every full-model epoch with the epoch statistics and the
/// current model.
pub type EpochObserver<'a> = dyn FnMut(&EpochStat, &HybridModel) + 'a;

/// Two-phase SGD fit.
///
/// Phase 1 fits `μ` as the training mean and runs SGD on the biases alone; the
/// result is frozen for neighbor residuals. Phase 2 starts factors uniformly in
/// `[-0.01, 0.01]`, keeps the pretrained biases, and runs SGD over the training
/// cells in a freshly shuffled order each epoch. The learning rate is multiplied
/// by `decay` after each epoch, and training stops once the relative change of
/// the objective is below `tol` or after `max_epochs`. The parameters with the
/// lowest objective seen are returned.
pub fn fit(
    train: &QosMatrix,
    sim: Option<&SimilarityMatrix>,
    hp: &Hyperparams,
    kind: ModelKind,
    mut observer: Option<&mut EpochObserver<'_>>,
) -> Result<(HybridModel, TrainTrace)> {
    hp.validate()?;
    if let ModelKind::Hybrid { beta } = kind {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidHyperparams(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
    }
    let neighbors = if kind.uses_neighbors() {
        let sim = sim.ok_or_else(|| {
            Error::InvalidHyperparams("neighbor-based model needs a similarity matrix".into())
        })?;
        if sim.size() != train.services() {
            return Err(Error::InvalidHyperparams(format!(
                "similarity matrix covers {} services, training matrix has {}",
                sim.size(),
                train.services()
            )));
        }
        Some(NeighborIndex::build(sim))
    } else {
        None
    };

    let (baselines, baseline_trace) = pretrain_baselines(train, hp)?;
    let (m, n, f) = (train.users(), train.services(), hp.factors);
    let mut init = rng(hp.seed, INIT_STREAM);
    let mut draw = |len: usize| -> Vec<f64> {
        (0..len)
            .map(|_| init.random_range(-INIT_SCALE..=INIT_SCALE))
            .collect()
    };
    let p = draw(f * m);
    let w = draw(f * n);
    let params = ModelParams {
        mu: baselines.mu,
        bu: baselines.bu.clone(),
        bs: baselines.bs.clone(),
        factors: f,
        p,
        w,
        frozen: baselines,
    };

    let cells = match &neighbors {
        Some(index) => training_cells(train, index, &params.frozen, hp.topk_neighbors, true),
        None => train
            .cells()
            .map(|(u, s, q)| Cell {
                u,
                s,
                q,
                neighbor: 0.0,
            })
            .collect(),
    };

    let mut model = HybridModel {
        kind,
        params,
        k: hp.topk_neighbors,
        floor: hp.floor,
        train: train.clone(),
        neighbors,
    };

    let mut trace = TrainTrace {
        baseline: baseline_trace,
        initial_loss: objective(kind, &model.params, &cells, hp.lambda),
        ..Default::default()
    };
    let mut best = (trace.initial_loss, 0usize, model.params.clone());
    let mut prev = trace.initial_loss;
    let mut order: Vec<usize> = (0..cells.len()).collect();
    let mut shuffle = rng(hp.seed, SHUFFLE_STREAM);
    let mut dp = vec![0.0; f];
    let mut dw = vec![0.0; f];
    let mut alpha = hp.alpha0;

    for epoch in 1..=hp.max_epochs {
        order.shuffle(&mut shuffle);
        for &i in &order {
            let cell = &cells[i];
            let (du, ds) = cell_direction(kind, &model.params, cell, hp.lambda, &mut dp, &mut dw);
            let params = &mut model.params;
            params.bu[cell.u] += alpha * du;
            params.bs[cell.s] += alpha * ds;
            for k in 0..f {
                params.p[k * m + cell.u] += alpha * dp[k];
                params.w[k * n + cell.s] += alpha * dw[k];
            }
        }
        let cur = objective(kind, &model.params, &cells, hp.lambda);
        if !cur.is_finite() {
            return Err(Error::Divergence { epoch, alpha });
        }
        let stat = EpochStat {
            epoch,
            loss: cur,
            alpha,
        };
        trace.epochs.push(stat);
        if let Some(obs) = observer.as_mut() {
            obs(&stat, &model);
        }
        if cur < best.0 {
            best = (cur, epoch, model.params.clone());
        }
        alpha *= hp.decay;
        if relative_change(prev, cur) < hp.tol {
            trace.converged = true;
            break;
        }
        prev = cur;
    }
    trace.best_epoch = best.1;
    model.params = best.2;
    Ok((model, trace))
}

/// Fits the hybrid model with `hp.beta`.
pub fn train(
    train: &QosMatrix,
    sim: &SimilarityMatrix,
    hp: &Hyperparams,
) -> Result<(ModelParams, TrainTrace)> {
    let (model, trace) = fit(
        train,
        Some(sim),
        hp,
        ModelKind::Hybrid { beta: hp.beta },
        None,
    )?;
    Ok((model.params, trace))
}

/// Fills every unobserved cell of `train` with the hybrid prediction.
pub fn complete_matrix(
    train: &QosMatrix,
    sim: &SimilarityMatrix,
    params: &ModelParams,
    hp: &Hyperparams,
) -> QosMatrix {
    let model = HybridModel {
        kind: ModelKind::Hybrid { beta: hp.beta },
        params: params.clone(),
        k: hp.topk_neighbors,
        floor: hp.floor,
        train: train.clone(),
        neighbors: Some(NeighborIndex::build(sim)),
    };
    model.complete()
}
