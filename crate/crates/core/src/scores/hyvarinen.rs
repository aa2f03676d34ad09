//! Hyvärinen score for point-process densities known up to normalisation.

use crate::error::{Error, Result};
use crate::patterns::SpatialPattern;

/// Gradient of `log j_n` at the stacked coordinates; `None` when undefined for `n`.
pub type GradientFn<'a> = &'a dyn Fn(&[f64]) -> Option<Vec<f64>>;
/// Laplacian of `log j_n` at the stacked coordinates.
pub type LaplacianFn<'a> = &'a dyn Fn(&[f64]) -> Option<f64>;

/// `Δ log j_n + ½ ‖∇ log j_n‖²` at the stacked point coordinates, zero
/// for the empty pattern.
pub fn hyvarinen_pp_score(gradient: GradientFn<'_>, laplacian: LaplacianFn<'_>, pattern: &SpatialPattern) -> Result<f64> {
    let n = pattern.len();
    if n == 0 {
        return Ok(0.0);
    }
    let y = pattern.coords();
    let grad = gradient(y).ok_or(Error::CallbackUndefined(n))?;
    if grad.len() != y.len() {
        return Err(Error::LengthMismatch(grad.len(), y.len()));
    }
    let lap = laplacian(y).ok_or(Error::CallbackUndefined(n))?;
    Ok(lap + 0.5 * grad.iter().map(|g| g * g).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::Window;

    #[test]
    fn gaussian_closed_form() {
        let w = Window::rectangle(-5.0, 5.0, -5.0, 5.0).unwrap();
        let p = SpatialPattern::from_points(&[[0.3, -1.0], [2.0, 0.5]], w).unwrap();
        let grad = |y: &[f64]| Some(y.iter().map(|v| -v).collect());
        let lap = |y: &[f64]| Some(-(y.len() as f64));
        let sq: f64 = p.coords().iter().map(|v| v * v).sum();
        let s = hyvarinen_pp_score(&grad, &lap, &p).unwrap();
        assert!((s - (-4.0 + 0.5 * sq)).abs() < 1e-14);
    }

    #[test]
    fn empty_and_undefined() {
        let w = Window::unit_square();
        let none = |_: &[f64]| None;
        let lap = |_: &[f64]| Some(0.0);
        assert_eq!(hyvarinen_pp_score(&none, &lap, &SpatialPattern::empty(w.clone())).unwrap(), 0.0);
        let p = SpatialPattern::from_points(&[[0.5, 0.5]], w).unwrap();
        assert!(matches!(hyvarinen_pp_score(&none, &lap, &p), Err(Error::CallbackUndefined(1))));
    }
}
