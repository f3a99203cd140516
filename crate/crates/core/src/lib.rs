//! Ranking-oriented QoS prediction for web-service recommendation.
//!
//! The central model is a hybrid of a baseline estimate, an item-based
//! neighbor term weighted by Kendall rank correlation, and a latent factor
//! model, trained jointly by SGD. Rating-oriented baselines, NDCG evaluation
//! and a repeated-split experiment runner are included.

pub mod baselines;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod hybrid;
pub mod predictor;
pub mod similarity;
pub mod synth;

pub use config::{
    ExperimentConfig, Hyperparams, KrccVariant, QosAttribute, RelevanceKind, Selection,
};
pub use data::{
    extract_submatrix, parse_wsdream_matrix, parse_wsdream_str, split_by_density, QosMatrix,
    TrainTestSplit,
};
pub use error::{Error, Result};
pub use eval::{dcg_k, ndcg_k, IdealList, RankedList};
pub use experiment::{
    convergence_trace, parameter_sweep, run_experiment, EvalReport, RunResult, SweepParam, TraceRow,
};
pub use hybrid::{fit, HybridModel, ModelKind, ModelParams, TrainTrace};
pub use predictor::{Fitted, Method, Predictor};
pub use similarity::{krcc_matrix, pcc_matrix, SimilarityKind, SimilarityMatrix};
