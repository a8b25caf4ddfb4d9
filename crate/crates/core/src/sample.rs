//! Deterministic sample points and the global comparison policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::deriv::{TangentPoint, MIN_FIBER_NORM};

/// Relative tolerance of the global comparison policy.
pub const REL_TOL: f64 = 1e-7;
/// Absolute floor of the global comparison policy.
pub const ABS_FLOOR: f64 = 1e-9;
/// Default cap on `|x|`, inside the unit ball and away from its boundary.
pub const DEFAULT_RADIUS: f64 = 0.7;

/// `|a - b|` measured against `max(1, |a|, |b|)`.
pub fn scaled_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Residual `r` of an identity whose terms have magnitude up to `scale`.
pub fn scaled_residual(r: f64, scale: f64) -> f64 {
    r.abs() / 1f64.max(scale.abs())
}

/// The global equality test: relative `REL_TOL`, absolute floor `ABS_FLOOR`.
pub fn approx_eq(a: f64, b: f64) -> bool {
    let diff = (a - b).abs();
    diff <= ABS_FLOOR || scaled_diff(a, b) <= REL_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
    pub radius: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 25,
            seed: 20240611,
            radius: DEFAULT_RADIUS,
        }
    }
}

impl SampleConfig {
    pub fn new(count: usize, seed: u64) -> SampleConfig {
        SampleConfig {
            count,
            seed,
            ..SampleConfig::default()
        }
    }

    pub fn points(&self, n: usize) -> Vec<TangentPoint> {
        sample_points(n, self.count, self.seed, self.radius)
    }
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// `count` points with `|x| <= radius` (uniform in the ball) and `y`
/// uniform on the unit sphere. The sequence depends only on the arguments.
pub fn sample_points(n: usize, count: usize, seed: u64, radius: f64) -> Vec<TangentPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 56));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dir = gaussian_vector(&mut rng, n);
        let dir_norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let fiber = gaussian_vector(&mut rng, n);
        let fiber_norm = fiber.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: f64 = rng.random();
        if dir_norm < 1e-12 || fiber_norm < MIN_FIBER_NORM {
            continue;
        }
        let r = radius * u.powf(1.0 / n as f64);
        let x = dir.iter().map(|v| v / dir_norm * r).collect();
        let y = fiber.iter().map(|v| v / fiber_norm).collect();
        out.push(TangentPoint::new(x, y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_deterministic_and_bounded() {
        let a = sample_points(3, 40, 7, 0.7);
        let b = sample_points(3, 40, 7, 0.7);
        assert_eq!(a, b);
        for p in &a {
            let r = p.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r <= 0.7 + 1e-15);
            assert!((p.fiber_norm() - 1.0).abs() < 1e-12);
        }
        assert_ne!(a, sample_points(3, 40, 8, 0.7));
    }

    #[test]
    fn comparison_policy() {
        assert!(approx_eq(1.0, 1.0 + 5e-8));
        assert!(!approx_eq(1.0, 1.0 + 5e-7));
        assert!(approx_eq(1e5, 1e5 * (1.0 + 5e-8)));
        assert!(approx_eq(0.0, 5e-10));
        assert!(!approx_eq(0.0, 5e-7));
    }
}
