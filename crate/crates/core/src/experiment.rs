//! Repeated train/test experiments, parameter sweeps and convergence traces.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::{ExperimentConfig, QosAttribute, RelevanceKind};
use crate::data::{extract_submatrix, split_by_density, QosMatrix};
use crate::error::{Error, Result};
use crate::eval::{ideal_list, mae, ndcg_with, rank_with, rmse};
use crate::hybrid::{self, EpochStat, HybridModel, ModelKind, TrainTrace};
use crate::predictor::{Fitted, Method, Predictor};
use crate::similarity::krcc_matrix;

/// Metrics of one repetition.
#[derive(Clone, Debug)]
pub struct RunResult {
    /// 1-based repetition number.
    pub repetition: usize,
    /// Seed of the train/test split.
    pub seed: u64,
    /// Mean NDCG over qualifying users, per list length.
    pub ndcg: BTreeMap<usize, f64>,
    pub mae: f64,
    pub rmse: f64,
    pub test_cells: usize,
    pub trace: Option<TrainTrace>,
}

/// Aggregated outcome of [`run_experiment`].
#[derive(Clone, Debug)]
pub struct EvalReport {
    pub method: String,
    pub config: ExperimentConfig,
    pub ndcg_mean: BTreeMap<usize, f64>,
    /// Sample standard deviation across repetitions (0 for a single run).
    pub ndcg_std: BTreeMap<usize, f64>,
    /// Pooled over the test cells of every repetition.
    pub mae: f64,
    pub rmse: f64,
    pub runs: Vec<RunResult>,
}

impl EvalReport {
    pub fn ndcg(&self, k: usize) -> Option<f64> {
        self.ndcg_mean.get(&k).copied()
    }

    /// Trace of the first repetition, for methods trained by SGD.
    pub fn trace(&self) -> Option<&TrainTrace> {
        self.runs.first().and_then(|r| r.trace.as_ref())
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Ranking context shared by every user of a test matrix.
#[derive(Clone, Copy, Debug)]
pub struct RankingSetup {
    pub direction: QosAttribute,
    pub relevance: RelevanceKind,
    pub global_max: Option<f64>,
}

impl RankingSetup {
    pub fn from_config(cfg: &ExperimentConfig, source: &QosMatrix) -> Self {
        RankingSetup {
            direction: cfg.qos_attribute,
            relevance: cfg.relevance,
            global_max: source.value_stats().map(|(_, _, max)| max),
        }
    }
}

/// Mean NDCG-k over users with at least `k` test entries.
pub fn mean_ndcg<F: Fn(usize, usize) -> f64>(
    predict: F,
    test: &QosMatrix,
    k: usize,
    setup: RankingSetup,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let mut total = 0.0;
    let mut users = 0usize;
    for u in 0..test.users() {
        let ideal = ideal_list(test, u, setup.direction);
        if ideal.entries.len() < k {
            continue;
        }
        let candidates: Vec<usize> = ideal.entries.iter().map(|&(s, _)| s).collect();
        let ranked = rank_with(&predict, &candidates, u, k, setup.direction);
        total += ndcg_with(
            &ranked,
            &ideal,
            k,
            setup.direction,
            setup.relevance,
            setup.global_max,
        )?;
        users += 1;
    }
    if users == 0 {
        return Err(Error::NoQualifyingUsers { k });
    }
    Ok(total / users as f64)
}

fn evaluate_run(
    fitted: &dyn Fitted,
    test: &QosMatrix,
    ks: &[usize],
    setup: RankingSetup,
) -> Result<(BTreeMap<usize, f64>, f64, f64)> {
    let (pred, truth): (Vec<f64>, Vec<f64>) = test
        .cells()
        .map(|(u, s, v)| (fitted.predict(u, s), v))
        .unzip();
    let mut ndcg = BTreeMap::new();
    for &k in ks {
        ndcg.insert(k, mean_ndcg(|u, s| fitted.predict(u, s), test, k, setup)?);
    }
    Ok((ndcg, mae(&pred, &truth)?, rmse(&pred, &truth)?))
}

/// Seed of the split used by repetition `r` (1-based).
pub fn split_seed(cfg: &ExperimentConfig, r: usize) -> u64 {
    cfg.base_seed.wrapping_add(r as u64)
}

/// Runs `cfg.repetitions` independent splits of the configured submatrix and
/// evaluates `method` on each. Repetitions run in parallel; results are in
/// repetition order and independent of the thread count.
pub fn run_experiment(
    source: &QosMatrix,
    cfg: &ExperimentConfig,
    method: &dyn Predictor,
) -> Result<EvalReport> {
    cfg.validate()?;
    let sub = extract_submatrix(source, cfg, cfg.base_seed)?;
    let ks = cfg.eval_ks();
    let setup = RankingSetup::from_config(cfg, &sub);

    let runs = (1..=cfg.repetitions)
        .into_par_iter()
        .map(|r| {
            let seed = split_seed(cfg, r);
            let split = split_by_density(&sub, cfg.density, seed)?;
            if split.train.observed_count() == 0 {
                return Err(Error::EmptyTraining);
            }
            if split.test.observed_count() == 0 {
                return Err(Error::EmptyTest {
                    density: cfg.density,
                });
            }
            let model_seed = cfg.hyperparams.seed.wrapping_add(seed);
            let fitted = method.fit(&split.train, model_seed)?;
            let (ndcg, mae, rmse) = evaluate_run(fitted.as_ref(), &split.test, &ks, setup)?;
            Ok(RunResult {
                repetition: r,
                seed,
                ndcg,
                mae,
                rmse,
                test_cells: split.test.observed_count(),
                trace: fitted.trace().cloned(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ndcg_mean = BTreeMap::new();
    let mut ndcg_std = BTreeMap::new();
    for &k in &ks {
        let values: Vec<f64> = runs.iter().map(|r| r.ndcg[&k]).collect();
        let (mean, std) = mean_std(&values);
        ndcg_mean.insert(k, mean);
        ndcg_std.insert(k, std);
    }
    let cells: usize = runs.iter().map(|r| r.test_cells).sum();
    let abs_err: f64 = runs.iter().map(|r| r.mae * r.test_cells as f64).sum();
    let sq_err: f64 = runs
        .iter()
        .map(|r| r.rmse.powi(2) * r.test_cells as f64)
        .sum();
    Ok(EvalReport {
        method: method.name().to_string(),
        config: cfg.clone(),
        ndcg_mean,
        ndcg_std,
        mae: abs_err / cells as f64,
        rmse: (sq_err / cells as f64).sqrt(),
        runs,
    })
}

/// Evaluates a neighbor-based method once per neighbor count in `grid` and
/// returns the count with the highest NDCG averaged over the evaluated list
/// lengths (first wins on ties), together with its report.
pub fn tune_neighbors(
    source: &QosMatrix,
    cfg: &ExperimentConfig,
    method: Method,
    grid: &[usize],
) -> Result<(usize, EvalReport)> {
    let mut best: Option<(usize, f64, EvalReport)> = None;
    for &k in grid {
        let mut c = cfg.clone();
        c.hyperparams.cf_neighbors = k;
        let report = run_experiment(source, &c, method.predictor(&c.hyperparams).as_ref())?;
        let score = report.ndcg_mean.values().sum::<f64>() / report.ndcg_mean.len() as f64;
        if best.as_ref().is_none_or(|(_, b, _)| score > *b) {
            best = Some((k, score, report));
        }
    }
    best.map(|(k, _, r)| (k, r))
        .ok_or_else(|| Error::InvalidConfig("empty neighbor grid".into()))
}

/// Hyperparameters that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    /// Recommendation list length.
    ListLength,
    Beta,
    Factors,
    /// Neighbor count of the hybrid's KRCC term.
    Neighbors,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "topK" | "top_k_list" => Ok(SweepParam::ListLength),
            "beta" => Ok(SweepParam::Beta),
            "F" | "factors" => Ok(SweepParam::Factors),
            "topk_neighbors" | "Top-k" => Ok(SweepParam::Neighbors),
            other => Err(Error::UnknownParameter(other.to_string())),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::ListLength => "topK",
            SweepParam::Beta => "beta",
            SweepParam::Factors => "F",
            SweepParam::Neighbors => "topk_neighbors",
        })
    }
}

fn as_count(param: SweepParam, v: f64, min: usize) -> Result<usize> {
    if v.fract() != 0.0 || v < min as f64 {
        return Err(Error::InvalidConfig(format!(
            "{param} must be an integer >= {min}, got {v}"
        )));
    }
    Ok(v as usize)
}

impl SweepParam {
    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut c = cfg.clone();
        match self {
            SweepParam::ListLength => {
                let k = as_count(self, value, 1)?;
                c.hyperparams.top_k_list = k;
                c.ndcg_ks = vec![k];
            }
            SweepParam::Beta => c.hyperparams.beta = value,
            SweepParam::Factors => c.hyperparams.factors = as_count(self, value, 0)?,
            SweepParam::Neighbors => c.hyperparams.topk_neighbors = as_count(self, value, 1)?,
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs `method` once per value of `param`.
pub fn parameter_sweep(
    source: &QosMatrix,
    cfg: &ExperimentConfig,
    method: Method,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<(f64, EvalReport)>> {
    values
        .iter()
        .map(|&v| {
            let c = param.apply(cfg, v)?;
            let report = run_experiment(source, &c, method.predictor(&c.hyperparams).as_ref())?;
            Ok((v, report))
        })
        .collect()
}

/// One row of a convergence trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub loss: f64,
    pub alpha: f64,
    /// Test NDCG at the configured list length after this epoch.
    pub ndcg: f64,
}

/// Trains the hybrid on the first repetition's split and records the loss,
/// learning rate and test NDCG after every epoch.
pub fn convergence_trace(
    source: &QosMatrix,
    cfg: &ExperimentConfig,
) -> Result<(Vec<TraceRow>, TrainTrace)> {
    cfg.validate()?;
    let sub = extract_submatrix(source, cfg, cfg.base_seed)?;
    let seed = split_seed(cfg, 1);
    let split = split_by_density(&sub, cfg.density, seed)?;
    if split.test.observed_count() == 0 {
        return Err(Error::EmptyTest {
            density: cfg.density,
        });
    }
    let hp = crate::config::Hyperparams {
        seed: cfg.hyperparams.seed.wrapping_add(seed),
        ..cfg.hyperparams.clone()
    };
    let setup = RankingSetup::from_config(cfg, &sub);
    let k = hp.top_k_list;
    let sim = krcc_matrix(&split.train, hp.krcc_variant);

    let mut rows = Vec::new();
    let mut failure = None;
    let mut observe = |stat: &EpochStat, model: &HybridModel| match mean_ndcg(
        |u, s| model.predict(u, s),
        &split.test,
        k,
        setup,
    ) {
        Ok(ndcg) => rows.push(TraceRow {
            epoch: stat.epoch,
            loss: stat.loss,
            alpha: stat.alpha,
            ndcg,
        }),
        Err(e) => {
            failure.get_or_insert(e);
        }
    };
    let (_, trace) = hybrid::fit(
        &split.train,
        Some(&sim),
        &hp,
        ModelKind::Hybrid { beta: hp.beta },
        Some(&mut observe),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((rows, trace))
}
