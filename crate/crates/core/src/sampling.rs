//! Seeded, reproducible sample generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeometryError, Result};
use crate::riemann::GeometryModel;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLE_COUNT: usize = 50;

/// Deterministic source of sample points and tangent vectors.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.rng.random_range(lo..hi)
        }
    }

    /// A point drawn uniformly from the model's sample box, redrawn until it
    /// satisfies the domain constraints.
    pub fn point(&mut self, model: &GeometryModel) -> Result<Vec<f64>> {
        for _ in 0..10_000 {
            let p: Vec<f64> = model
                .sample_box()
                .iter()
                .map(|&(lo, hi)| self.uniform(lo, hi))
                .collect();
            if model.in_domain(&p) {
                return Ok(p);
            }
        }
        Err(GeometryError::Sampling {
            wanted: 1,
            found: 0,
        })
    }

    pub fn points(&mut self, model: &GeometryModel, count: usize) -> Result<Vec<Vec<f64>>> {
        (0..count)
            .map(|i| {
                self.point(model).map_err(|_| GeometryError::Sampling {
                    wanted: count,
                    found: i,
                })
            })
            .collect()
    }

    /// A vector with entries in `[-1, 1]` and Euclidean norm at least 0.25.
    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.uniform(-1.0, 1.0)).collect();
            if v.iter().map(|a| a * a).sum::<f64>() >= 0.0625 {
                return v;
            }
        }
    }
}

/// `count` admissible points of `model` from a fresh sampler seeded with `seed`.
pub fn sample_points(model: &GeometryModel, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Sampler::new(seed).points(model, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_filtered() {
        let model =
            GeometryModel::from_components("half", &["x", "y"], &[vec!["1", "0"], vec!["0", "1"]])
                .unwrap()
                .with_domain(&["y > 0"])
                .unwrap();
        let a = sample_points(&model, 20, 7).unwrap();
        let b = sample_points(&model, 20, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p[1] > 0.0));
        assert_ne!(a, sample_points(&model, 20, 8).unwrap());
    }

    #[test]
    fn impossible_domain_reports_failure() {
        let model = GeometryModel::euclidean(2)
            .unwrap()
            .with_domain(&["x > 5"])
            .unwrap();
        assert!(matches!(
            sample_points(&model, 3, 1),
            Err(GeometryError::Sampling {
                wanted: 3,
                found: 0
            })
        ));
    }
}
