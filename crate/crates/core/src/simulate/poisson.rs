use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::SeedSpec;
use crate::error::{Error, Result};
use crate::patterns::{SpatialPattern, Window};

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

pub(crate) fn uniform_point<R: Rng + ?Sized>(window: &Window, rng: &mut R, out: &mut Vec<f64>) {
    for k in 0..window.dim() {
        let lo = window.lower()[k];
        let hi = window.upper()[k];
        out.push(lo + (hi - lo) * rng.gen::<f64>());
    }
}

/// Inhomogeneous Poisson process on `window` by thinning a homogeneous
/// process of rate `lambda_max`.
pub fn sample_poisson_inhom(
    lambda: &dyn Fn(&[f64]) -> f64,
    lambda_max: f64,
    window: &Window,
    seed: SeedSpec,
) -> Result<SpatialPattern> {
    sample_poisson_inhom_with(lambda, lambda_max, window, &mut seed.rng())
}

pub fn sample_poisson_inhom_with<R: Rng + ?Sized>(
    lambda: &dyn Fn(&[f64]) -> f64,
    lambda_max: f64,
    window: &Window,
    rng: &mut R,
) -> Result<SpatialPattern> {
    if !(lambda_max.is_finite() && lambda_max >= 0.0) {
        return Err(Error::InvalidModel(format!("intensity bound must be finite and non-negative, got {lambda_max}")));
    }
    let d = window.dim();
    let n = poisson_count(lambda_max * window.volume(), rng);
    let mut coords = Vec::with_capacity(n * d);
    let mut candidate = Vec::with_capacity(d);
    for _ in 0..n {
        candidate.clear();
        uniform_point(window, rng, &mut candidate);
        let value = lambda(&candidate);
        if value > lambda_max {
            return Err(Error::IntensityBoundExceeded {
                location: candidate.clone(),
                value,
                bound: lambda_max,
            });
        }
        if rng.gen::<f64>() * lambda_max < value {
            coords.extend_from_slice(&candidate);
        }
    }
    SpatialPattern::new(coords, window.clone())
}
