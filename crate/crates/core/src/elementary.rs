//! Scalar scoring building blocks.
//!
//! Scores are negatively oriented (smaller is better). An infinite score is
//! returned as `f64::INFINITY`; callers decide how to treat it.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Admissible set for a report or observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Real,
    NonNegative,
    Positive,
}

impl Domain {
    pub fn contains(self, x: f64) -> bool {
        match self {
            Domain::Real => x.is_finite(),
            Domain::NonNegative => x.is_finite() && x >= 0.0,
            Domain::Positive => x.is_finite() && x > 0.0,
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Convex generator `f` with subderivative `f′`, inducing the Bregman score
/// `b(x, y) = −f(x) − f′(x)(y − x)`.
///
/// With `divergence_form` the observation-only term `f(y)` is added, which
/// turns the quadratic generator into plain squared error `(x − y)²`. The
/// extra term never changes score differences between reports.
#[derive(Clone)]
pub struct BregmanGenerator {
    name: String,
    f: ScalarFn,
    df: ScalarFn,
    report_domain: Domain,
    observation_domain: Domain,
    divergence_form: bool,
}

impl fmt::Debug for BregmanGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BregmanGenerator")
            .field("name", &self.name)
            .field("divergence_form", &self.divergence_form)
            .finish()
    }
}

impl BregmanGenerator {
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        report_domain: Domain,
        observation_domain: Domain,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
            report_domain,
            observation_domain,
            divergence_form: false,
        }
    }

    /// `f(x) = x²`, giving `b(x, y) = (x − y)² − y²`.
    pub fn quadratic() -> Self {
        Self::custom("quadratic", |x| x * x, |x| 2.0 * x, Domain::Real, Domain::Real)
    }

    /// Squared error `(x − y)²`: the quadratic generator in divergence form.
    pub fn squared_error() -> Self {
        Self::quadratic().with_divergence_form("squared_error")
    }

    /// `f(λ) = λ(log λ − 1)`, giving `b(λ, y) = λ − y log λ`.
    pub fn poisson() -> Self {
        Self::custom(
            "poisson",
            |x| x * (x.ln() - 1.0),
            f64::ln,
            Domain::Positive,
            Domain::NonNegative,
        )
    }

    fn with_divergence_form(mut self, name: &str) -> Self {
        self.divergence_form = true;
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn subderivative(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn score(&self, x: f64, y: f64) -> Result<f64> {
        if !self.report_domain.contains(x) {
            return Err(Error::Domain(format!("{}: report {x} outside {:?}", self.name, self.report_domain)));
        }
        if !self.observation_domain.contains(y) {
            return Err(Error::Domain(format!(
                "{}: observation {y} outside {:?}",
                self.name, self.observation_domain
            )));
        }
        Ok(self.score_unchecked(x, y))
    }

    pub(crate) fn score_unchecked(&self, x: f64, y: f64) -> f64 {
        let raw = -(self.f)(x) - (self.df)(x) * (y - x);
        if self.divergence_form {
            raw + (self.f)(y)
        } else {
            raw
        }
    }
}

pub fn bregman_score(generator: &BregmanGenerator, x: f64, y: f64) -> Result<f64> {
    generator.score(x, y)
}

/// `−log p`; `+∞` when `p ≤ 0`.
pub fn log_score(p: f64) -> f64 {
    if p > 0.0 {
        -p.ln()
    } else {
        f64::INFINITY
    }
}

/// `−y log p − (1 − y) log(1 − p)`.
pub fn binary_log_score(p: f64, occurred: bool) -> f64 {
    if occurred {
        log_score(p)
    } else if p < 1.0 {
        -(-p).ln_1p()
    } else {
        f64::INFINITY
    }
}

/// Scoring slot for probability densities evaluated at one observation.
pub trait DensityScore: Send + Sync {
    fn score(&self, density_at_observation: f64) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LogScore;

impl DensityScore for LogScore {
    fn score(&self, density_at_observation: f64) -> f64 {
        log_score(density_at_observation)
    }
}

/// Scoring slot for Bernoulli probabilities.
pub trait BinaryScore: Send + Sync {
    fn score(&self, p: f64, occurred: bool) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BinaryLogScore;

impl BinaryScore for BinaryLogScore {
    fn score(&self, p: f64, occurred: bool) -> f64 {
        binary_log_score(p, occurred)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crps {
    pub value: f64,
    /// Set when the CDF has noticeable mass outside the integration range.
    pub range_warning: bool,
}

/// `∫ (F(x) − 1{y ≤ x})² dx` over `[lower, upper]`.
pub fn crps(cdf: &dyn Fn(f64) -> f64, y: f64, lower: f64, upper: f64) -> Crps {
    const MASS_TOL: f64 = 1e-6;
    const QUAD_TOL: f64 = 1e-11;
    let range_warning = cdf(lower) > MASS_TOL || 1.0 - cdf(upper) > MASS_TOL || y < lower || y > upper;
    let split = y.clamp(lower, upper);
    let below = adaptive_simpson(&|x| cdf(x).powi(2), lower, split, QUAD_TOL);
    let above = adaptive_simpson(&|x| (1.0 - cdf(x)).powi(2), split, upper, QUAD_TOL);
    Crps {
        value: below + above,
        range_warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};

    #[test]
    fn quadratic_identities() {
        let q = BregmanGenerator::quadratic();
        assert_eq!(q.score(3.0, 3.0).unwrap(), -9.0);
        assert_eq!(q.score(0.0, 3.0).unwrap(), 0.0);
        for &(x, y) in &[(0.0, 3.0), (1.5, -2.0), (4.0, 4.5)] {
            let d = q.score(x, y).unwrap() - q.score(y, y).unwrap();
            assert!((d - (x - y) * (x - y)).abs() < 1e-12);
        }
        let se = BregmanGenerator::squared_error();
        assert_eq!(se.score(1.0, 4.0).unwrap(), 9.0);
    }

    #[test]
    fn poisson_generator_matches_closed_form() {
        let p = BregmanGenerator::poisson();
        assert!((p.score(1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        for &(l, y) in &[(2.0, 3.0), (0.5, 0.0), (7.0, 11.0)] {
            let v = p.score(l, y).unwrap();
            assert!((v - (l - y * f64::ln(l))).abs() < 1e-12);
        }
        assert!(p.score(0.0, 1.0).is_err());
        assert!(p.score(1.0, -1.0).is_err());
    }

    #[test]
    fn grid_minimiser_is_observation() {
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        for g in [BregmanGenerator::quadratic(), BregmanGenerator::poisson()] {
            for &y in &[0.5, 2.0, 7.3] {
                let best = grid
                    .iter()
                    .copied()
                    .min_by(|a, b| g.score(*a, y).unwrap().total_cmp(&g.score(*b, y).unwrap()))
                    .unwrap();
                let nearest = grid.iter().copied().min_by(|a, b| (a - y).abs().total_cmp(&(b - y).abs())).unwrap();
                assert!((best - nearest).abs() < 1e-12, "{} y={y}", g.name());
            }
        }
    }

    #[test]
    fn bregman_minimality_on_grid() {
        let gens = [BregmanGenerator::quadratic(), BregmanGenerator::poisson(), BregmanGenerator::squared_error()];
        for g in &gens {
            for i in 1..40 {
                let y = i as f64 * 0.25;
                let own = g.score(y, y).unwrap();
                for j in 1..40 {
                    let x = j as f64 * 0.25;
                    let v = g.score(x, y).unwrap();
                    if i == j {
                        assert!((v - own).abs() < 1e-12);
                    } else {
                        assert!(v > own, "{}: b({x},{y}) = {v} <= {own}", g.name());
                    }
                }
            }
        }
    }

    #[test]
    fn generators_are_convex_on_grid() {
        for g in [BregmanGenerator::quadratic(), BregmanGenerator::poisson()] {
            for i in 1..30 {
                for j in (i + 1)..30 {
                    let (a, b) = (i as f64 * 0.3, j as f64 * 0.3);
                    let mid = g.generator(0.5 * (a + b));
                    assert!(mid <= 0.5 * (g.generator(a) + g.generator(b)) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn poisson_expected_score_minimised_at_mean() {
        let lambda = 4.0;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws: Vec<f64> = Poisson::new(lambda).unwrap().sample_iter(&mut rng).take(100_000).collect();
        let g = BregmanGenerator::poisson();
        let mean_score = |x: f64| draws.iter().map(|&y| g.score(x, y).unwrap()).sum::<f64>() / draws.len() as f64;
        let centre = mean_score(lambda);
        for x in [3.6, 3.8, 4.2, 4.4] {
            assert!(mean_score(x) > centre);
        }
    }

    #[test]
    fn log_score_values() {
        assert_eq!(log_score(1.0), 0.0);
        assert!((log_score(std::f64::consts::E) + 1.0).abs() < 1e-15);
        assert_eq!(log_score(0.0), f64::INFINITY);
        assert_eq!(log_score(-1.0), f64::INFINITY);
    }

    #[test]
    fn binary_log_score_values() {
        assert!((binary_log_score(0.5, true) - std::f64::consts::LN_2).abs() < 1e-15);
        for p in [0.1, 0.37, 0.9] {
            assert!((binary_log_score(p, true) - binary_log_score(1.0 - p, false)).abs() < 1e-12);
        }
        assert_eq!(binary_log_score(0.0, true), f64::INFINITY);
        assert_eq!(binary_log_score(1.0, false), f64::INFINITY);
        assert_eq!(binary_log_score(1.0, true), 0.0);
        assert_eq!(binary_log_score(0.0, false), 0.0);
    }

    #[test]
    fn binary_expected_score_minimised_at_truth() {
        let q = 0.3;
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let expected = |p: f64| q * binary_log_score(p, true) + (1.0 - q) * binary_log_score(p, false);
        let best = grid.iter().copied().min_by(|a, b| expected(*a).total_cmp(&expected(*b))).unwrap();
        assert!((best - q).abs() < 1e-12);
    }

    #[test]
    fn crps_degenerate_cases() {
        let y = 0.7;
        let point_mass = |at: f64| move |x: f64| if x >= at { 1.0 } else { 0.0 };
        let at_y = point_mass(y);
        assert!(crps(&at_y, y, -5.0, 5.0).value.abs() < 1e-9);
        let shifted = point_mass(y + 1.0);
        assert!((crps(&shifted, y, -5.0, 5.0).value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn crps_standard_normal_closed_form() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = Normal::new(0.0, 1.0).unwrap();
        let cdf = |x: f64| n.cdf(x);
        // closed form: y(2Φ(y) − 1) + 2φ(y) − 1/√π
        let closed = |y: f64| {
            let pdf = (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
            y * (2.0 * n.cdf(y) - 1.0) + 2.0 * pdf - 1.0 / std::f64::consts::PI.sqrt()
        };
        let c0 = crps(&cdf, 0.0, -12.0, 12.0);
        assert!(!c0.range_warning);
        assert!((c0.value - 0.233_695_0).abs() < 1e-6);
        assert!((c0.value - closed(0.0)).abs() < 1e-9);
        let c1 = crps(&cdf, 1.3, -12.0, 12.0);
        assert!((c1.value - closed(1.3)).abs() < 1e-9);
        assert!(crps(&cdf, 0.0, -1.0, 1.0).range_warning);
    }
}
