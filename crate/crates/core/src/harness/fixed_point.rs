//! Monte Carlo check that a Gaussian start stays Gaussian under the walks.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::Result;
use crate::lattice::{decompose, step, Walk};
use crate::rng::{seeded, STEP_STREAM};

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
/// Sorts `samples` in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let m = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / m).max((i + 1) as f64 / m - c)
        })
        .fold(0.0, f64::max)
}

pub fn normal_cdf(x: f64, sigma: f64) -> f64 {
    0.5 * erfc(-x / (sigma * std::f64::consts::SQRT_2))
}

/// Draws `samples` starts from `N(0, sigma^2)`, applies `steps` walk steps to
/// each, and returns the KS statistic of the endpoints against `N(0, sigma^2)`.
pub fn monte_carlo_fixed_point(
    walk: Walk,
    sigma: f64,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = seeded(seed, STEP_STREAM);
    let mut ends = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z: f64 = rng.sample(StandardNormal);
        let mut pos = decompose(sigma * z)?;
        for _ in 0..steps {
            pos = step(walk, pos, sigma, &mut rng)?;
        }
        ends.push(pos.x);
    }
    Ok(ks_statistic(&mut ends, |x| normal_cdf(x, sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_perfect_grid_is_small() {
        let m = 1000;
        let mut xs: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let d = ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / m as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_detects_shift() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0 + 0.1).collect();
        assert!(ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0)) > 0.09);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0, 2.0) - 0.5).abs() < 1e-15);
        let c = normal_cdf(1.959_963_984_540_054, 1.0);
        assert!((c - 0.975).abs() < 1e-10, "{c}");
    }

    #[test]
    fn short_runs_stay_gaussian() {
        let m = 20_000;
        let bound = 4.0 * 1.95 / (m as f64).sqrt();
        assert!(monte_carlo_fixed_point(Walk::Jacobi, 1.0, 0, m, 1).unwrap() < bound);
        assert!(monte_carlo_fixed_point(Walk::Jacobi, 1.0, 20, m, 2).unwrap() < bound);
        assert!(monte_carlo_fixed_point(Walk::Ramanujan, 1.5, 20, m, 3).unwrap() < bound);
    }

    #[test]
    fn wrong_scale_is_detected() {
        // A walk tuned for sigma = 1 started from N(0, 4) drifts away from N(0, 4).
        let mut rng = seeded(8, STEP_STREAM);
        let mut ends: Vec<f64> = (0..20_000)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                let mut pos = decompose(2.0 * z).unwrap();
                for _ in 0..50 {
                    pos = step(Walk::Jacobi, pos, 1.0, &mut rng).unwrap();
                }
                pos.x
            })
            .collect();
        assert!(ks_statistic(&mut ends, |x| normal_cdf(x, 2.0)) > 0.05);
    }
}
