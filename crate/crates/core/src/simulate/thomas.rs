use rand::Rng;
use rand_distr::StandardNormal;

use super::poisson::{poisson_count, sample_poisson_inhom_with};
use super::SeedSpec;
use crate::error::{Error, Result};
use crate::patterns::{SpatialPattern, Window};
use crate::SpatialFn;

/// Thomas cluster process: Poisson parents, Poisson-many offspring with
/// isotropic Gaussian displacement. Only offspring inside the window are kept.
#[derive(Clone)]
pub struct ThomasConfig {
    pub parent_intensity: SpatialFn,
    /// Upper bound of `parent_intensity` on the buffered window.
    pub parent_bound: f64,
    pub mean_offspring: f64,
    pub sigma: f64,
    pub buffer: f64,
}

impl ThomasConfig {
    /// Buffer defaults to `4σ`.
    pub fn new(parent_intensity: SpatialFn, parent_bound: f64, mean_offspring: f64, sigma: f64) -> Self {
        Self {
            parent_intensity,
            parent_bound,
            mean_offspring,
            sigma,
            buffer: 4.0 * sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidModel(format!("offspring sigma must be positive, got {}", self.sigma)));
        }
        if !(self.buffer >= 4.0 * self.sigma) || !self.buffer.is_finite() {
            return Err(Error::InvalidModel(format!(
                "buffer {} must be at least 4 sigma = {}",
                self.buffer,
                4.0 * self.sigma
            )));
        }
        if !(self.mean_offspring >= 0.0 && self.mean_offspring.is_finite()) {
            return Err(Error::InvalidModel(format!("mean offspring must be non-negative, got {}", self.mean_offspring)));
        }
        Ok(())
    }
}

pub fn sample_thomas(config: &ThomasConfig, window: &Window, seed: SeedSpec) -> Result<SpatialPattern> {
    sample_thomas_with(config, window, &mut seed.rng())
}

pub fn sample_thomas_with<R: Rng + ?Sized>(config: &ThomasConfig, window: &Window, rng: &mut R) -> Result<SpatialPattern> {
    config.validate()?;
    let outer = window.expanded(config.buffer)?;
    let parents = sample_poisson_inhom_with(&*config.parent_intensity, config.parent_bound, &outer, rng)?;
    let d = window.dim();
    let mut coords = Vec::new();
    let mut child = vec![0.0; d];
    for parent in parents.points() {
        let k = poisson_count(config.mean_offspring, rng);
        for _ in 0..k {
            for (c, p) in child.iter_mut().zip(parent) {
                let z: f64 = rng.sample(StandardNormal);
                *c = p + config.sigma * z;
            }
            if window.contains(&child) {
                coords.extend_from_slice(&child);
            }
        }
    }
    SpatialPattern::new(coords, window.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn no_parents_no_offspring() {
        let cfg = ThomasConfig::new(Arc::new(|_| 0.0), 0.0, 2.0, 0.05);
        let p = sample_thomas(&cfg, &Window::unit_square(), SeedSpec::new(5, 0)).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn rejects_small_buffer() {
        let mut cfg = ThomasConfig::new(Arc::new(|_| 10.0), 10.0, 2.0, 0.05);
        cfg.buffer = 0.1;
        assert!(cfg.validate().is_err());
        cfg.sigma = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn degenerate_displacement_stacks_offspring() {
        // tiny sigma: siblings coincide up to 1e-10, distinct families stay apart
        let cfg = ThomasConfig::new(Arc::new(|_| 5.0), 5.0, 4.0, 1e-12);
        let p = sample_thomas(&cfg, &Window::unit_square(), SeedSpec::new(9, 2)).unwrap();
        assert!(p.len() > 4);
        let pts: Vec<&[f64]> = p.points().collect();
        let mut clusters: Vec<Vec<f64>> = Vec::new();
        for q in &pts {
            let near = clusters.iter().any(|c| (c[0] - q[0]).abs() < 1e-10 && (c[1] - q[1]).abs() < 1e-10);
            if !near {
                clusters.push(q.to_vec());
            }
        }
        assert!(clusters.len() < pts.len());
        // within a run, points are generated family by family
        let mut i = 0;
        while i + 1 < pts.len() {
            let same = (pts[i][0] - pts[i + 1][0]).abs() < 1e-10;
            let far = (pts[i][0] - pts[i + 1][0]).abs() > 1e-6 || (pts[i][1] - pts[i + 1][1]).abs() > 1e-6;
            assert!(same || far);
            i += 1;
        }
    }
}
