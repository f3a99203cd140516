//! Fixtures shared by the benchmarks.

use qosrec::data::{split_by_density, TrainTestSplit};
use qosrec::synth::{generate, SurrogateSpec};
use qosrec::{ExperimentConfig, QosMatrix};

/// A synthetic response-time matrix of the given shape.
pub fn matrix(users: usize, services: usize, seed: u64) -> QosMatrix {
    let spec = SurrogateSpec {
        users,
        services,
        ..SurrogateSpec::ws_dream_like(seed)
    };
    generate(&spec).expect("surrogate parameters are valid")
}

/// A train/test split of a square synthetic matrix.
pub fn split(size: usize, density: f64, seed: u64) -> TrainTestSplit {
    split_by_density(&matrix(size, size, seed), density, seed).expect("density is in range")
}

/// A short experiment on a `size x size` submatrix with few epochs.
pub fn quick_config(size: usize, density: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        user_num: size,
        service_num: size,
        density,
        repetitions: 2,
        ..ExperimentConfig::default()
    };
    cfg.hyperparams.max_epochs = 20;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_the_requested_shape() {
        let s = split(30, 0.2, 3);
        assert_eq!((s.train.users(), s.train.services()), (30, 30));
        assert!(s.train.observed_count() > 0 && s.test.observed_count() > 0);
        quick_config(30, 0.2).validate().unwrap();
    }
}
