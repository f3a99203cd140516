//! Rating-oriented comparison predictors: row/column means, user- and
//! item-based PCC collaborative filtering, their confidence-weighted blend
//! (WSRec), and biased SVD.
//!
//! Every predictor is total: when a method has nothing to work with it falls
//! back to the per-axis mean and then to the global mean.

use crate::config::Hyperparams;
use crate::data::{global_mean, QosMatrix};
use crate::error::Result;
use crate::hybrid::{self, ModelKind, ModelParams, TrainTrace};
use crate::similarity::{pcc_matrix, Axis, NeighborIndex, NeighborSet};

/// Observed-value means per user and per service, with global-mean fallback.
#[derive(Clone, Debug)]
pub struct Means {
    pub global: f64,
    pub user: Vec<f64>,
    pub service: Vec<f64>,
}

impl Means {
    pub fn fit(train: &QosMatrix) -> Result<Self> {
        let global = global_mean(train)?;
        let mean_or = |it: &mut dyn Iterator<Item = (usize, f64)>| {
            let (sum, count) = it.fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
            if count == 0 {
                global
            } else {
                sum / count as f64
            }
        };
        let user = (0..train.users())
            .map(|u| mean_or(&mut train.row(u)))
            .collect();
        let service = (0..train.services())
            .map(|s| mean_or(&mut train.column(s)))
            .collect();
        Ok(Means {
            global,
            user,
            service,
        })
    }
}

/// Mean of user `u`'s observed values, or the global mean for a cold user.
pub fn umean_predict(train: &QosMatrix, u: usize, _s: usize) -> Result<f64> {
    Ok(Means::fit(train)?.user[u])
}

/// Mean of service `s`'s observed values, or the global mean for a cold service.
pub fn imean_predict(train: &QosMatrix, _u: usize, s: usize) -> Result<f64> {
    Ok(Means::fit(train)?.service[s])
}

/// A neighborhood prediction together with its WSRec confidence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Similarity-weighted mean of the similarities used.
    pub confidence: f64,
}

fn confidence(set: &NeighborSet) -> f64 {
    let total = set.weight_sum();
    set.neighbors.iter().map(|&(_, w)| (w / total) * w).sum()
}

/// Cached state for PCC-based collaborative filtering on one training split.
#[derive(Clone, Debug)]
pub struct PccModel {
    train: QosMatrix,
    means: Means,
    users: NeighborIndex,
    services: NeighborIndex,
    k: usize,
}

impl PccModel {
    pub fn fit(train: &QosMatrix, k: usize) -> Result<Self> {
        Ok(PccModel {
            means: Means::fit(train)?,
            users: NeighborIndex::build(&pcc_matrix(train, Axis::User)),
            services: NeighborIndex::build(&pcc_matrix(train, Axis::Item)),
            train: train.clone(),
            k,
        })
    }

    pub fn means(&self) -> &Means {
        &self.means
    }

    /// User-based estimate, `None` when no similar user observed `s`.
    pub fn user_based(&self, u: usize, s: usize) -> Option<Estimate> {
        let set = self
            .users
            .top_k(u, self.k, |v| self.train.is_observed(v, s));
        if set.is_empty() {
            return None;
        }
        let norm: f64 = set.neighbors.iter().map(|&(_, w)| w.abs()).sum();
        let deviation: f64 = set
            .neighbors
            .iter()
            .map(|&(v, w)| w * (self.train.value(v, s) - self.means.user[v]))
            .sum();
        Some(Estimate {
            value: self.means.user[u] + deviation / norm,
            confidence: confidence(&set),
        })
    }

    /// Item-based estimate, `None` when `u` observed no service similar to `s`.
    pub fn item_based(&self, u: usize, s: usize) -> Option<Estimate> {
        let set = self
            .services
            .top_k(s, self.k, |j| self.train.is_observed(u, j));
        if set.is_empty() {
            return None;
        }
        let norm: f64 = set.neighbors.iter().map(|&(_, w)| w.abs()).sum();
        let deviation: f64 = set
            .neighbors
            .iter()
            .map(|&(j, w)| w * (self.train.value(u, j) - self.means.service[j]))
            .sum();
        Some(Estimate {
            value: self.means.service[s] + deviation / norm,
            confidence: confidence(&set),
        })
    }

    pub fn upcc(&self, u: usize, s: usize) -> f64 {
        self.user_based(u, s)
            .map_or(self.means.user[u], |e| e.value)
    }

    pub fn ipcc(&self, u: usize, s: usize) -> f64 {
        self.item_based(u, s)
            .map_or(self.means.service[s], |e| e.value)
    }

    /// Confidence-weighted blend of the user- and item-based estimates.
    pub fn wsrec(&self, u: usize, s: usize, mix: f64) -> f64 {
        match (self.user_based(u, s), self.item_based(u, s)) {
            (Some(user), Some(item)) => {
                let (wu, wi) = wsrec_weights(user.confidence, item.confidence, mix);
                wu * user.value + wi * item.value
            }
            (Some(user), None) => user.value,
            (None, Some(item)) => item.value,
            (None, None) => self.means.global,
        }
    }
}

/// `(w_u, w_i)` with `w_u = mix·con_u / (mix·con_u + (1 − mix)·con_i)`.
pub fn wsrec_weights(con_user: f64, con_item: f64, mix: f64) -> (f64, f64) {
    let a = mix * con_user;
    let b = (1.0 - mix) * con_item;
    let wu = if a + b > 0.0 { a / (a + b) } else { mix };
    (wu, 1.0 - wu)
}

pub fn upcc_predict(train: &QosMatrix, u: usize, s: usize, k: usize) -> Result<f64> {
    Ok(PccModel::fit(train, k)?.upcc(u, s))
}

pub fn ipcc_predict(train: &QosMatrix, u: usize, s: usize, k: usize) -> Result<f64> {
    Ok(PccModel::fit(train, k)?.ipcc(u, s))
}

pub fn wsrec_predict(train: &QosMatrix, u: usize, s: usize, k: usize, mix: f64) -> Result<f64> {
    Ok(PccModel::fit(train, k)?.wsrec(u, s, mix))
}

/// Biased SVD: the hybrid trainer with the neighbor term removed.
/// Predictions are `μ + b_u + b_s + p_u · w_s`.
pub fn biassvd_train(train: &QosMatrix, hp: &Hyperparams) -> Result<(ModelParams, TrainTrace)> {
    let (model, trace) = hybrid::fit(train, None, hp, ModelKind::BiasSvd, None)?;
    Ok((model.params, trace))
}
