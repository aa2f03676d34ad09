//! Scores for second-order product densities and factorial moment measures.

use std::fmt;
use std::sync::Arc;

use crate::elementary::{BregmanGenerator, DensityScore};
use crate::error::{Error, Result};
use crate::patterns::{SpatialPattern, Window};
use crate::quadrature::gauss_legendre;

const TUPLE_LIMIT: u128 = 10_000_000;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type TupleFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Radial product density `ρ(x₁, x₂) = ρ₀(‖x₁ − x₂‖)` with its mass over `W²`.
#[derive(Clone)]
pub struct ProductDensityForecast {
    name: String,
    radial: RadialFn,
    window: Window,
    total_mass: f64,
}

impl fmt::Debug for ProductDensityForecast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductDensityForecast")
            .field("name", &self.name)
            .field("total_mass", &self.total_mass)
            .finish()
    }
}

impl ProductDensityForecast {
    pub fn new(name: impl Into<String>, radial: RadialFn, window: Window) -> Result<Self> {
        let name = name.into();
        let total_mass = pair_mass(&*radial, &window);
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(Error::InvalidModel(format!("product density '{name}' has total mass {total_mass}")));
        }
        Ok(Self { name, radial, window, total_mass })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn radial(&self, r: f64) -> f64 {
        (self.radial)(r)
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

/// `∫_{W²} ρ₀(‖x₁ − x₂‖)` through the set covariance of the box,
/// `∫ ρ₀(‖Δ‖) Π_k (s_k − |Δ_k|) dΔ`, folded onto the positive orthant.
pub fn pair_mass(radial: &dyn Fn(f64) -> f64, window: &Window) -> f64 {
    let d = window.dim();
    let degree = if d <= 2 { 256 } else { 64 };
    let rule = gauss_legendre(degree);
    let n = rule.len();
    let sides: Vec<f64> = (0..d).map(|k| window.side(k)).collect();
    let mut delta = vec![0.0; d];
    let mut sum = 0.0;
    for flat in 0..n.pow(d as u32) {
        let mut rem = flat;
        let mut w = 1.0;
        for k in (0..d).rev() {
            let (x, wk) = rule[rem % n];
            rem /= n;
            let h = 0.5 * sides[k];
            delta[k] = h * (1.0 + x);
            w *= wk * h * (sides[k] - delta[k]);
        }
        let r = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
        sum += w * radial(r);
    }
    sum * 2f64.powi(d as i32)
}

fn check_window(expected: &Window, pattern: &SpatialPattern) -> Result<()> {
    if expected != pattern.window() {
        return Err(Error::WindowMismatch);
    }
    Ok(())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `−Σ^≠ log ρ₀(‖x₁ − x₂‖) + m^[2] log|ρ| + c (|ρ| − m^[2])²` over ordered pairs.
pub fn score_product_density(f: &ProductDensityForecast, pattern: &SpatialPattern, c: f64) -> Result<f64> {
    check_window(f.window(), pattern)?;
    if !(c > 0.0) {
        return Err(Error::Domain(format!("weight c must be positive, got {c}")));
    }
    let m = pattern.len();
    let mut log_sum = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let v = f.radial(distance(pattern.point(i), pattern.point(j)));
            if !(v > 0.0) {
                return Ok(f64::INFINITY);
            }
            log_sum += 2.0 * v.ln();
        }
    }
    let pairs = (m * m.saturating_sub(1)) as f64;
    let mass = f.total_mass();
    Ok(-log_sum + pairs * mass.ln() + c * (mass - pairs).powi(2))
}

/// `n`-point factorial moment density normalised to a probability density
/// on `Wⁿ`, with the total mass of the factorial moment measure.
#[derive(Clone)]
pub struct FactorialMomentForecast {
    pub order: usize,
    /// Evaluated on the stacked coordinates of an ordered `n`-tuple.
    pub normalized_density: TupleFn,
    pub total_mass: f64,
}

/// Falling factorial `m (m−1) ⋯ (m−n+1)`.
pub fn falling_factorial(m: usize, n: usize) -> u128 {
    (0..n).map(|k| m.saturating_sub(k) as u128).product()
}

/// `Σ^≠ S(α*, tuple) + c · b(α(Wⁿ), m^[n])` over ordered tuples of distinct points.
pub fn score_factorial_moment(
    f: &FactorialMomentForecast,
    pattern: &SpatialPattern,
    density_score: &dyn DensityScore,
    bregman: &BregmanGenerator,
    c: f64,
) -> Result<f64> {
    if f.order == 0 {
        return Err(Error::Domain("factorial moment order must be at least 1".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("weight c must be positive, got {c}")));
    }
    let m = pattern.len();
    let n = f.order;
    let tuples = falling_factorial(m, n);
    if tuples > TUPLE_LIMIT {
        return Err(Error::TooManyTuples { tuples, limit: TUPLE_LIMIT });
    }
    let d = pattern.dim();
    let mut location = 0.0;
    if m >= n {
        let mut idx = vec![0usize; n];
        let mut used = vec![false; m];
        let mut stacked = vec![0.0; n * d];
        visit_tuples(0, &mut idx, &mut used, &mut |idx: &[usize]| {
            for (slot, &i) in idx.iter().enumerate() {
                stacked[slot * d..(slot + 1) * d].copy_from_slice(pattern.point(i));
            }
            location += density_score.score((f.normalized_density)(&stacked));
        });
    }
    let count = bregman.score(f.total_mass, tuples as f64)?;
    Ok(location + c * count)
}

fn visit_tuples(depth: usize, idx: &mut [usize], used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
    if depth == idx.len() {
        visit(idx);
        return;
    }
    for i in 0..used.len() {
        if !used[i] {
            used[i] = true;
            idx[depth] = i;
            visit_tuples(depth + 1, idx, used, visit);
            used[i] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elementary::LogScore;

    #[test]
    fn constant_density_mass_is_area_squared() {
        let w = Window::rectangle(0.0, 2.0, 0.0, 1.0).unwrap();
        assert!((pair_mass(&|_| 3.0, &w) - 12.0).abs() < 1e-10);
    }

    #[test]
    fn few_points_leave_count_term() {
        let w = Window::unit_square();
        let f = ProductDensityForecast::new("c", Arc::new(|_| 1600.0), w.clone()).unwrap();
        let c = 1e-5;
        let one = SpatialPattern::from_points(&[[0.3, 0.3]], w.clone()).unwrap();
        let expected = c * f.total_mass().powi(2);
        assert!((score_product_density(&f, &one, c).unwrap() - expected).abs() < 1e-9);
        assert!((score_product_density(&f, &SpatialPattern::empty(w), c).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling_factorial(4, 3), 24);
        assert_eq!(falling_factorial(2, 3), 0);
        assert_eq!(falling_factorial(5, 1), 5);
    }

    #[test]
    fn tuple_guard() {
        let w = Window::unit_square();
        let pts: Vec<[f64; 2]> = (0..200).map(|i| [i as f64 / 200.0, 0.5]).collect();
        let p = SpatialPattern::from_points(&pts, w).unwrap();
        let f = FactorialMomentForecast { order: 4, normalized_density: Arc::new(|_| 1.0), total_mass: 1.0 };
        let err = score_factorial_moment(&f, &p, &LogScore, &BregmanGenerator::squared_error(), 1.0).unwrap_err();
        assert!(matches!(err, Error::TooManyTuples { .. }));
    }
}
