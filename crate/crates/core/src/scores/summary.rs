//! K- and L-function scores with edge-corrected pair-count estimators.

use std::sync::Arc;

use crate::elementary::BregmanGenerator;
use crate::error::{Error, Result};
use crate::patterns::SpatialPattern;

/// Edge correction for the pair-count estimator of `λ² K(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaEstimator {
    /// Translation correction, weights `1 / |W_{x₁} ∩ W_{x₂}|`.
    Translation,
    /// Minus sampling on the eroded window `W ⊖ r`.
    Minus,
}

fn check_translation_radius(pattern: &SpatialPattern, r: f64) -> Result<()> {
    let max = pattern.window().min_side();
    if !(r >= 0.0 && r < max) {
        return Err(Error::RadiusOutOfRange { radius: r, max });
    }
    Ok(())
}

fn displacement(a: &[f64], b: &[f64]) -> Vec<f64> {
    b.iter().zip(a).map(|(x, y)| x - y).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `Σ^≠ 1{‖x₂ − x₁‖ ≤ r} / |W_{x₁} ∩ W_{x₂}|` over ordered pairs.
pub fn kappa_st(pattern: &SpatialPattern, r: f64) -> Result<f64> {
    check_translation_radius(pattern, r)?;
    let w = pattern.window();
    let m = pattern.len();
    let mut total = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let z = displacement(pattern.point(i), pattern.point(j));
            if norm(&z) <= r {
                // the overlap is symmetric in z, so each unordered pair counts twice
                total += 2.0 / w.overlap_with_shift(&z);
            }
        }
    }
    Ok(total)
}

/// `|W ⊖ r|⁻¹ Σ^≠_{x₂ ∈ W ⊖ r} 1{‖x₂ − x₁‖ ≤ r}`.
pub fn kappa_minus(pattern: &SpatialPattern, r: f64) -> Result<f64> {
    let w = pattern.window();
    let eroded = match w.eroded(r) {
        Some(e) if r >= 0.0 => e,
        _ => {
            return Err(Error::RadiusOutOfRange { radius: r, max: 0.5 * w.min_side() });
        }
    };
    let m = pattern.len();
    let mut count = 0usize;
    for j in 0..m {
        let x2 = pattern.point(j);
        if !eroded.contains(x2) {
            continue;
        }
        for i in 0..m {
            if i != j && norm(&displacement(pattern.point(i), x2)) <= r {
                count += 1;
            }
        }
    }
    Ok(count as f64 / eroded.volume())
}

pub fn kappa(estimator: KappaEstimator, pattern: &SpatialPattern, r: f64) -> Result<f64> {
    match estimator {
        KappaEstimator::Translation => kappa_st(pattern, r),
        KappaEstimator::Minus => kappa_minus(pattern, r),
    }
}

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Stationary intensity and K-function report.
#[derive(Clone)]
pub struct KForecast {
    pub intensity: f64,
    pub k: RadialFn,
}

impl KForecast {
    pub fn new(intensity: f64, k: RadialFn) -> Result<Self> {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::InvalidModel(format!("intensity must be positive, got {intensity}")));
        }
        Ok(Self { intensity, k })
    }

    /// `K(r) = πr²`.
    pub fn poisson(intensity: f64) -> Result<Self> {
        Self::new(intensity, Arc::new(|r| std::f64::consts::PI * r * r))
    }

    /// Report given through the L-function, `K(r) = b_d L(r)^d`.
    pub fn from_l_function(intensity: f64, l: RadialFn, dim: usize) -> Result<Self> {
        let bd = unit_ball_volume(dim);
        Self::new(intensity, Arc::new(move |r| bd * l(r).powi(dim as i32)))
    }
}

/// Volume of the unit ball in dimension `d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => PI.powf(dim as f64 / 2.0) / statrs::function::gamma::gamma(dim as f64 / 2.0 + 1.0),
    }
}

/// Bregman functions, estimator and radial quadrature of the K-score.
#[derive(Clone)]
pub struct KScoreOptions {
    pub count_bregman: BregmanGenerator,
    pub pair_bregman: BregmanGenerator,
    pub estimator: KappaEstimator,
    /// Trapezoid nodes for the `r`-integral, increasing.
    pub radii: Vec<f64>,
    pub weight: RadialFn,
}

impl Default for KScoreOptions {
    /// Squared error for both components, translation correction, 51 nodes
    /// on `[0, 0.25]`, unit weight.
    fn default() -> Self {
        Self {
            count_bregman: BregmanGenerator::squared_error(),
            pair_bregman: BregmanGenerator::squared_error(),
            estimator: KappaEstimator::Translation,
            radii: (0..=50).map(|k| 0.005 * k as f64).collect(),
            weight: Arc::new(|_| 1.0),
        }
    }
}

/// Trapezoid weights for the given nodes.
pub fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = 0.5 * (nodes[i] - nodes[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    w
}

/// `b₁(λ, φ(W)/|W|) + ∫ b₂(λ² K(r), κ(B_r, φ)) w(r) dr`.
pub fn score_k_function(f: &KForecast, pattern: &SpatialPattern, options: &KScoreOptions) -> Result<f64> {
    if options.radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("K-score radii must be strictly increasing".into()));
    }
    let lambda = f.intensity;
    let observed_intensity = pattern.len() as f64 / pattern.window().volume();
    let mut total = options.count_bregman.score(lambda, observed_intensity)?;
    for (&r, &tw) in options.radii.iter().zip(&trapezoid_weights(&options.radii)) {
        let estimate = kappa(options.estimator, pattern, r)?;
        let report = lambda * lambda * (f.k)(r);
        total += tw * (options.weight)(r) * options.pair_bregman.score(report, estimate)?;
    }
    Ok(total)
}

/// K-score with the report expressed through `L`.
pub fn score_l_function(
    intensity: f64,
    l: RadialFn,
    pattern: &SpatialPattern,
    options: &KScoreOptions,
) -> Result<f64> {
    let f = KForecast::from_l_function(intensity, l, pattern.dim())?;
    score_k_function(&f, pattern, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::Window;

    fn two_points() -> SpatialPattern {
        SpatialPattern::from_points(&[[0.25, 0.25], [0.25, 0.75]], Window::unit_square()).unwrap()
    }

    #[test]
    fn translation_hand_cases() {
        assert_eq!(kappa_st(&two_points(), 0.4).unwrap(), 0.0);
        assert!((kappa_st(&two_points(), 0.6).unwrap() - 4.0).abs() < 1e-14);
        let one = SpatialPattern::from_points(&[[0.5, 0.5]], Window::unit_square()).unwrap();
        assert_eq!(kappa_st(&one, 0.2).unwrap(), 0.0);
        assert!(kappa_st(&two_points(), 1.0).is_err());
    }

    #[test]
    fn minus_sampling_hand_case() {
        // eroded window for r = 0.3 is [0.3, 0.7]²
        let p = SpatialPattern::from_points(&[[0.5, 0.5], [0.5, 0.65]], Window::unit_square()).unwrap();
        let p2 = SpatialPattern::from_points(&[[0.5, 0.5], [0.5, 0.2]], Window::unit_square()).unwrap();
        let eroded_area = 0.4 * 0.4;
        assert!((kappa_minus(&p2, 0.3).unwrap() - 1.0 / eroded_area).abs() < 1e-12);
        // both points admissible as centres
        assert!((kappa_minus(&p, 0.3).unwrap() - 2.0 / eroded_area).abs() < 1e-12);
        assert!(kappa_minus(&p, 0.6).is_err());
    }

    #[test]
    fn trapezoid_integrates_linear() {
        let nodes: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let w = trapezoid_weights(&nodes);
        let v: f64 = nodes.iter().zip(&w).map(|(x, w)| x * w).sum();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn l_and_k_reports_agree() {
        let opts = KScoreOptions::default();
        let p = SpatialPattern::from_points(&[[0.1, 0.1], [0.15, 0.2], [0.6, 0.6]], Window::unit_square()).unwrap();
        let k = score_k_function(&KForecast::poisson(3.0).unwrap(), &p, &opts).unwrap();
        let l = score_l_function(3.0, Arc::new(|r| r), &p, &opts).unwrap();
        assert!((k - l).abs() < 1e-10 * k.abs().max(1.0));
    }
}
