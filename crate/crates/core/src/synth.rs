//! Seeded synthetic response-time matrices with WS-Dream-like structure.
//!
//! Values are log-normal: `ln q = ln(median) + a_u + c_s + x_u·y_s + e`, with
//! independent normal user offsets `a`, service offsets `c`, a low-rank
//! interaction `x·y` and cell noise `e`. Values are clamped to
//! `[min_value, max_value]` and a random fraction of cells is left unobserved.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::QosMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateSpec {
    pub users: usize,
    pub services: usize,
    /// Median response time in seconds.
    pub median: f64,
    pub user_sd: f64,
    pub service_sd: f64,
    pub rank: usize,
    /// Standard deviation of each interaction factor entry.
    pub factor_sd: f64,
    pub noise_sd: f64,
    pub missing_rate: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub seed: u64,
}

impl SurrogateSpec {
    /// Full-size matrix (339 users × 5825 services) shaped like the WS-Dream
    /// response-time data: median around 0.3 s, heavy right tail, values
    /// capped at 20 s, about 5% of cells missing.
    pub fn ws_dream_like(seed: u64) -> Self {
        SurrogateSpec {
            users: 339,
            services: 5825,
            median: 0.32,
            user_sd: 0.5,
            service_sd: 0.9,
            rank: 3,
            factor_sd: (0.49f64 / 3.0).powf(0.25),
            noise_sd: 0.5,
            missing_rate: 0.051,
            min_value: 0.001,
            max_value: 20.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let sds = [self.user_sd, self.service_sd, self.factor_sd, self.noise_sd];
        if sds.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidConfig(
                "standard deviations must be finite and >= 0".into(),
            ));
        }
        if !(self.median > 0.0 && self.min_value > 0.0 && self.min_value <= self.max_value) {
            return Err(Error::InvalidConfig(
                "need 0 < min_value <= max_value and median > 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::InvalidConfig(format!(
                "missing_rate must lie in [0, 1), got {}",
                self.missing_rate
            )));
        }
        if self.users == 0 || self.services == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(())
    }
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("validated standard deviation")
}

fn draw(rng: &mut ChaCha8Rng, sd: f64, len: usize) -> Vec<f64> {
    let d = normal(sd);
    (0..len).map(|_| d.sample(rng)).collect()
}

/// Generates the matrix described by `spec`. Identical specs give identical
/// matrices.
pub fn generate(spec: &SurrogateSpec) -> Result<QosMatrix> {
    spec.validate()?;
    let (m, n, r) = (spec.users, spec.services, spec.rank);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a = draw(&mut rng, spec.user_sd, m);
    let c = draw(&mut rng, spec.service_sd, n);
    let x = draw(&mut rng, spec.factor_sd, m * r);
    let y = draw(&mut rng, spec.factor_sd, n * r);
    let noise = normal(spec.noise_sd);
    let base = spec.median.ln();

    let mut values = vec![0.0; m * n];
    let mut observed = vec![false; m * n];
    for u in 0..m {
        for s in 0..n {
            let interaction: f64 = (0..r).map(|f| x[u * r + f] * y[s * r + f]).sum();
            let log_q = base + a[u] + c[s] + interaction + noise.sample(&mut rng);
            let missing = rng.random::<f64>() < spec.missing_rate;
            if !missing {
                values[u * n + s] = log_q.exp().clamp(spec.min_value, spec.max_value);
                observed[u * n + s] = true;
            }
        }
    }
    QosMatrix::new(m, n, values, observed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SurrogateSpec {
        SurrogateSpec {
            users: 40,
            services: 60,
            ..SurrogateSpec::ws_dream_like(seed)
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate(&small(3)).unwrap(), generate(&small(3)).unwrap());
        assert_ne!(generate(&small(3)).unwrap(), generate(&small(4)).unwrap());
    }

    #[test]
    fn values_in_range_with_some_missing() {
        let q = generate(&small(1)).unwrap();
        let (min, _, max) = q.value_stats().unwrap();
        assert!(min >= 0.001 && max <= 20.0);
        let missing = 1.0 - q.density();
        assert!(
            missing > 0.01 && missing < 0.12,
            "missing fraction {missing}"
        );
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = SurrogateSpec {
            missing_rate: 1.0,
            ..small(0)
        };
        assert!(generate(&bad).is_err());
    }
}
