//! TOML run files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qosrec::{ExperimentConfig, Hyperparams, QosAttribute, RelevanceKind, Selection};
use serde::Deserialize;

/// A checked-in description of an experiment. Every field is optional and
/// falls back to the library defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    /// Source matrix in WS-Dream layout, relative to the config file.
    pub dataset: Option<PathBuf>,
    pub user_num: Option<usize>,
    pub service_num: Option<usize>,
    /// A single training density.
    pub density: Option<f64>,
    /// Several training densities; mutually exclusive with `density`.
    pub densities: Option<Vec<f64>>,
    pub repetitions: Option<usize>,
    pub base_seed: Option<u64>,
    pub qos_attribute: Option<QosAttribute>,
    pub selection: Option<Selection>,
    pub relevance: Option<RelevanceKind>,
    pub ndcg_ks: Option<Vec<usize>>,
    /// Neighbor counts tried for UPCC, IPCC and WSRec in `compare`.
    pub cf_neighbor_grid: Option<Vec<usize>>,
    pub hyperparams: Hyperparams,
}

/// A run file resolved against defaults and command-line overrides.
#[derive(Clone, Debug)]
pub struct RunPlan {
    pub dataset: Option<PathBuf>,
    pub base: ExperimentConfig,
    /// Densities given explicitly, if any.
    pub densities: Option<Vec<f64>>,
    pub cf_neighbor_grid: Vec<usize>,
}

impl RunPlan {
    /// Densities to run, falling back to `default` when none were configured.
    pub fn densities_or(&self, default: &[f64]) -> Vec<f64> {
        self.densities.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn with_density(&self, density: f64) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            density,
            ..self.base.clone()
        };
        cfg.validate()
            .with_context(|| format!("invalid configuration at density {density}"))?;
        Ok(cfg)
    }
}

impl RunConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut file =
            Self::from_toml(&text).with_context(|| format!("invalid config {}", path.display()))?;
        if let Some(data) = &file.dataset {
            if data.is_relative() {
                let dir = path.parent().unwrap_or(Path::new(""));
                file.dataset = Some(dir.join(data));
            }
        }
        Ok(file)
    }

    pub fn resolve(self) -> Result<RunPlan> {
        let densities = match (self.density, self.densities) {
            (Some(_), Some(_)) => bail!("set either `density` or `densities`, not both"),
            (Some(d), None) => Some(vec![d]),
            (None, Some(ds)) if ds.is_empty() => bail!("`densities` must not be empty"),
            (None, ds) => ds,
        };
        let defaults = ExperimentConfig::default();
        let base = ExperimentConfig {
            user_num: self.user_num.unwrap_or(defaults.user_num),
            service_num: self.service_num.unwrap_or(defaults.service_num),
            density: densities.as_ref().map_or(defaults.density, |d| d[0]),
            repetitions: self.repetitions.unwrap_or(defaults.repetitions),
            hyperparams: self.hyperparams,
            qos_attribute: self.qos_attribute.unwrap_or_default(),
            selection: self.selection.unwrap_or_default(),
            relevance: self.relevance.unwrap_or_default(),
            ndcg_ks: self.ndcg_ks.unwrap_or(defaults.ndcg_ks),
            base_seed: self.base_seed.unwrap_or(defaults.base_seed),
        };
        for &d in densities.iter().flatten() {
            ExperimentConfig {
                density: d,
                ..base.clone()
            }
            .validate()
            .with_context(|| format!("invalid configuration at density {d}"))?;
        }
        base.validate().context("invalid configuration")?;
        let cf_neighbor_grid = self
            .cf_neighbor_grid
            .unwrap_or_else(|| vec![base.hyperparams.cf_neighbors]);
        if cf_neighbor_grid.is_empty() || cf_neighbor_grid.contains(&0) {
            bail!("`cf_neighbor_grid` needs positive neighbor counts");
        }
        Ok(RunPlan {
            dataset: self.dataset,
            base,
            densities,
            cf_neighbor_grid,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qosrec::KrccVariant;

    #[test]
    fn empty_file_gives_defaults() {
        let plan = RunConfigFile::from_toml("").unwrap().resolve().unwrap();
        assert_eq!(plan.base, ExperimentConfig::default());
        assert_eq!(plan.densities, None);
        assert_eq!(plan.cf_neighbor_grid, vec![20]);
    }

    #[test]
    fn full_file() {
        let text = r#"
            dataset = "rt.txt"
            user_num = 150
            service_num = 150
            densities = [0.1, 0.2]
            repetitions = 3
            base_seed = 7
            qos_attribute = "smaller-is-better"
            selection = "random"
            relevance = { kind = "reciprocal", eps = 0.01 }
            ndcg_ks = [10]
            cf_neighbor_grid = [5, 10]

            [hyperparams]
            beta = 0.5
            factors = 10
            krcc_variant = "column-kendall"
        "#;
        let plan = RunConfigFile::from_toml(text).unwrap().resolve().unwrap();
        assert_eq!(plan.base.user_num, 150);
        assert_eq!(plan.base.selection, Selection::Random);
        assert_eq!(plan.base.relevance, RelevanceKind::Reciprocal { eps: 0.01 });
        assert_eq!(plan.base.hyperparams.beta, 0.5);
        assert_eq!(plan.base.hyperparams.lambda, 0.01);
        assert_eq!(plan.densities, Some(vec![0.1, 0.2]));
        assert_eq!(plan.cf_neighbor_grid, vec![5, 10]);
    }

    #[test]
    fn krcc_variant_names() {
        for (name, want) in [
            ("within-user", KrccVariant::WithinUser),
            ("as-written", KrccVariant::WithinUser),
            ("column-kendall", KrccVariant::ColumnKendall),
        ] {
            let text = format!("[hyperparams]\nkrcc_variant = \"{name}\"");
            let plan = RunConfigFile::from_toml(&text).unwrap().resolve().unwrap();
            assert_eq!(plan.base.hyperparams.krcc_variant, want);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfigFile::from_toml("gamma = 1").is_err());
        assert!(RunConfigFile::from_toml("[hyperparams]\ngamma = 1").is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = [
            "density = 1.5",
            "density = 0.1\ndensities = [0.2]",
            "[hyperparams]\nbeta = 2.0",
        ];
        for text in bad {
            let parsed = RunConfigFile::from_toml(text).unwrap();
            assert!(parsed.resolve().is_err(), "{text}");
        }
    }
}
