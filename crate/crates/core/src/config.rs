//! Hyperparameters and experiment configuration shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which direction of a QoS attribute counts as better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QosAttribute {
    /// Response time and similar cost-like attributes.
    #[default]
    SmallerIsBetter,
    /// Throughput, availability and similar benefit-like attributes.
    LargerIsBetter,
}

/// How the experiment submatrix is drawn from the source matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Leading `user_num` rows and `service_num` columns.
    #[default]
    FirstN,
    /// Rows and columns drawn uniformly without replacement.
    Random,
}

/// Pair-counting arrangement used by the rank-correlation similarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KrccVariant {
    /// Discordance of within-user differences `(q[u,i] - q[u,j]) * (q[v,i] - q[v,j])`.
    #[default]
    #[serde(alias = "as-written")]
    WithinUser,
    /// Textbook Kendall tau between the two service columns,
    /// `(q[u,i] - q[v,i]) * (q[u,j] - q[v,j])`.
    ColumnKendall,
}

/// Maps ground-truth QoS values onto NDCG gains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RelevanceKind {
    /// `(max - v) / (max - min)` over the user's candidates for smaller-is-better,
    /// raw value for larger-is-better.
    #[default]
    Linear,
    /// `1 / (v + eps)` for smaller-is-better.
    Reciprocal { eps: f64 },
    /// `max - v` with the maximum taken over the whole evaluated matrix.
    GlobalMaxMinus,
}

/// Model hyperparameters. Defaults suit response-time data: lambda 0.01,
/// alpha 0.02, beta 0.6, F 50, 20 neighbors, 20 recommendations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    /// Regularization weight shared by biases and factors.
    pub lambda: f64,
    /// Initial SGD learning rate.
    pub alpha0: f64,
    /// Blend between the neighbor term (`beta`) and the latent-factor term (`1 - beta`).
    pub beta: f64,
    /// Latent dimensionality.
    pub factors: usize,
    /// Number of similar services kept per target service.
    pub topk_neighbors: usize,
    /// Length of the recommendation list.
    pub top_k_list: usize,
    pub max_epochs: usize,
    /// Multiplicative learning-rate factor applied after each epoch.
    pub decay: f64,
    /// Relative loss change below which training stops.
    pub tol: f64,
    pub seed: u64,
    pub krcc_variant: KrccVariant,
    /// Lower bound applied to hybrid predictions.
    pub floor: f64,
    /// Neighbor count for UPCC, IPCC and WSRec.
    pub cf_neighbors: usize,
    /// WSRec blend between its user-based and item-based components.
    pub wsrec_mix: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 0.01,
            alpha0: 0.02,
            beta: 0.6,
            factors: 50,
            topk_neighbors: 20,
            top_k_list: 20,
            max_epochs: 100,
            decay: 0.9,
            tol: 1e-4,
            seed: 0,
            krcc_variant: KrccVariant::WithinUser,
            floor: 0.0,
            cf_neighbors: 20,
            wsrec_mix: 0.5,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyperparams(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return bad(format!("alpha0 must be > 0, got {}", self.alpha0));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if self.topk_neighbors == 0 {
            return bad("topk_neighbors must be >= 1".into());
        }
        if self.top_k_list == 0 {
            return bad("top_k_list must be >= 1".into());
        }
        if self.cf_neighbors == 0 {
            return bad("cf_neighbors must be >= 1".into());
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad(format!("decay must lie in (0, 1], got {}", self.decay));
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be >= 0, got {}", self.tol));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.wsrec_mix) {
            return bad(format!(
                "wsrec_mix must lie in [0, 1], got {}",
                self.wsrec_mix
            ));
        }
        if !self.floor.is_finite() {
            return bad("floor must be finite".into());
        }
        Ok(())
    }
}

/// One experiment: which block of the source matrix, how much of it trains,
/// how often to repeat, and how to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub user_num: usize,
    pub service_num: usize,
    pub density: f64,
    pub repetitions: usize,
    pub hyperparams: Hyperparams,
    pub qos_attribute: QosAttribute,
    pub selection: Selection,
    pub relevance: RelevanceKind,
    /// List lengths at which NDCG is reported. Empty means `hyperparams.top_k_list`.
    pub ndcg_ks: Vec<usize>,
    /// Repetition `r` (1-based) splits with seed `base_seed + r`.
    pub base_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            user_num: 100,
            service_num: 100,
            density: 0.1,
            repetitions: 10,
            hyperparams: Hyperparams::default(),
            qos_attribute: QosAttribute::SmallerIsBetter,
            selection: Selection::FirstN,
            relevance: RelevanceKind::Linear,
            ndcg_ks: vec![10, 20],
            base_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn eval_ks(&self) -> Vec<usize> {
        if self.ndcg_ks.is_empty() {
            vec![self.hyperparams.top_k_list]
        } else {
            self.ndcg_ks.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyperparams.validate()?;
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::DensityOutOfRange(self.density));
        }
        if self.user_num == 0 || self.service_num == 0 {
            return Err(Error::InvalidConfig(
                "user_num and service_num must be >= 1".into(),
            ));
        }
        if self.eval_ks().contains(&0) {
            return Err(Error::ZeroK);
        }
        if let RelevanceKind::Reciprocal { eps } = self.relevance {
            if !(eps > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "reciprocal relevance needs eps > 0, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Hyperparams::default().validate().unwrap();
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_values() {
        let mut hp = Hyperparams::default();
        hp.beta = 1.5;
        assert!(hp.validate().is_err());
        let mut hp = Hyperparams::default();
        hp.decay = 0.0;
        assert!(hp.validate().is_err());
        let mut hp = Hyperparams::default();
        hp.topk_neighbors = 0;
        assert!(hp.validate().is_err());

        let cfg = ExperimentConfig {
            repetitions: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            density: 0.0,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::DensityOutOfRange(_))));
    }

    #[test]
    fn empty_ks_fall_back_to_list_length() {
        let mut cfg = ExperimentConfig::default();
        cfg.ndcg_ks.clear();
        cfg.hyperparams.top_k_list = 15;
        assert_eq!(cfg.eval_ks(), vec![15]);
    }
}
