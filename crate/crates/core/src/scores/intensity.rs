//! Scores for the intensity measure and its bin approximation.

use std::fmt;
use std::sync::Arc;

use crate::elementary::{BregmanGenerator, DensityScore};
use crate::error::{Error, Result};
use crate::patterns::{count_in_cells, GridPartition, SpatialPattern, Window};
use crate::quadrature::integrate_box;
use crate::SpatialFn;

const FULL_WINDOW_DEGREE: usize = 64;
const CELL_DEGREE: usize = 8;

type MassFn = Arc<dyn Fn(&Window) -> f64 + Send + Sync>;

/// Intensity function on a window together with its total mass.
#[derive(Clone)]
pub struct IntensityForecast {
    name: String,
    density: SpatialFn,
    window: Window,
    total_mass: f64,
    exact_mass: Option<MassFn>,
}

impl fmt::Debug for IntensityForecast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntensityForecast")
            .field("name", &self.name)
            .field("total_mass", &self.total_mass)
            .finish()
    }
}

impl IntensityForecast {
    /// Total mass by tensor Gauss-Legendre quadrature.
    pub fn new(name: impl Into<String>, density: SpatialFn, window: Window) -> Result<Self> {
        let total_mass = integrate_box(&window, FULL_WINDOW_DEGREE, |p| density(p));
        Self::build(name.into(), density, window, total_mass, None)
    }

    /// Uses `mass(box)` for the integral of the density over any sub-box.
    pub fn with_exact_mass(
        name: impl Into<String>,
        density: SpatialFn,
        window: Window,
        mass: impl Fn(&Window) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let total_mass = mass(&window);
        Self::build(name.into(), density, window, total_mass, Some(Arc::new(mass)))
    }

    fn build(name: String, density: SpatialFn, window: Window, total_mass: f64, exact_mass: Option<MassFn>) -> Result<Self> {
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(Error::InvalidModel(format!("intensity '{name}' has total mass {total_mass}")));
        }
        Ok(Self { name, density, window, total_mass, exact_mass })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn density(&self, s: &[f64]) -> f64 {
        (self.density)(s)
    }

    pub fn density_fn(&self) -> &SpatialFn {
        &self.density
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn normalized(&self, s: &[f64]) -> f64 {
        self.density(s) / self.total_mass
    }

    /// `∫_B λ` over a sub-box `B`.
    pub fn mass_over(&self, cell: &Window) -> f64 {
        match &self.exact_mass {
            Some(m) => m(cell),
            None => integrate_box(cell, CELL_DEGREE, |p| self.density(p)),
        }
    }
}

/// `∫_R ‖s − c‖ ds` over a rectangle `R` in closed form.
pub fn distance_integral(centre: [f64; 2], rect: &Window) -> f64 {
    // F(a, b) = ∫₀ᵃ∫₀ᵇ √(x² + y²) dy dx for a, b ≥ 0
    fn f(a: f64, b: f64) -> f64 {
        if a <= 0.0 || b <= 0.0 {
            return 0.0;
        }
        let d = a.hypot(b);
        (2.0 * a * b * d + a.powi(3) * ((b + d) / a).ln() + b.powi(3) * ((a + d) / b).ln()) / 6.0
    }
    let g = |x: f64, y: f64| x.signum() * y.signum() * f(x.abs(), y.abs());
    let x0 = rect.lower()[0] - centre[0];
    let x1 = rect.upper()[0] - centre[0];
    let y0 = rect.lower()[1] - centre[1];
    let y1 = rect.upper()[1] - centre[1];
    g(x1, y1) - g(x0, y1) - g(x1, y0) + g(x0, y0)
}

fn check_window(expected: &Window, pattern: &SpatialPattern) -> Result<()> {
    if expected != pattern.window() {
        return Err(Error::WindowMismatch);
    }
    Ok(())
}

fn log_density_sum(f: &IntensityForecast, pattern: &SpatialPattern) -> f64 {
    let mut s = 0.0;
    for y in pattern.points() {
        let v = f.density(y);
        if !(v > 0.0) {
            return f64::NEG_INFINITY;
        }
        s += v.ln();
    }
    s
}

/// `−Σ log λ(y_i) + |Λ|`; `+∞` if the density vanishes at an observed point.
pub fn score_intensity_poisson(f: &IntensityForecast, pattern: &SpatialPattern) -> Result<f64> {
    check_window(f.window(), pattern)?;
    Ok(-log_density_sum(f, pattern) + f.total_mass())
}

/// `Σ S′(λ/|Λ|, y_i) + c · b(|Λ|, n)`.
pub fn score_intensity_combined(
    f: &IntensityForecast,
    pattern: &SpatialPattern,
    density_score: &dyn DensityScore,
    count_bregman: &BregmanGenerator,
    c: f64,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("weight c must be positive, got {c}")));
    }
    let location = score_normalized_intensity(f, pattern, density_score)?;
    let count = count_bregman.score(f.total_mass(), pattern.len() as f64)?;
    Ok(location + c * count)
}

/// `Σ S′(λ/|Λ|, y_i)`, zero for the empty pattern.
pub fn score_normalized_intensity(
    f: &IntensityForecast,
    pattern: &SpatialPattern,
    density_score: &dyn DensityScore,
) -> Result<f64> {
    check_window(f.window(), pattern)?;
    Ok(pattern.points().map(|y| density_score.score(f.normalized(y))).sum())
}

/// Expected counts `λ_1..λ_k` for the cells of a grid partition.
#[derive(Debug, Clone)]
pub struct BinForecast {
    partition: GridPartition,
    expectations: Vec<f64>,
}

impl BinForecast {
    pub fn new(partition: GridPartition, expectations: Vec<f64>) -> Result<Self> {
        if expectations.len() != partition.num_cells() {
            return Err(Error::LengthMismatch(expectations.len(), partition.num_cells()));
        }
        if let Some(bad) = expectations.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("bin expectation must be finite and non-negative, got {bad}")));
        }
        Ok(Self { partition, expectations })
    }

    pub fn partition(&self) -> &GridPartition {
        &self.partition
    }

    pub fn expectations(&self) -> &[f64] {
        &self.expectations
    }
}

/// `Σ_i [λ_i − x_i log λ_i]` with `x_i` the cell counts.
pub fn score_bin(f: &BinForecast, pattern: &SpatialPattern) -> Result<f64> {
    let counts = count_in_cells(pattern, &f.partition)?;
    Ok(counts
        .iter()
        .zip(&f.expectations)
        .map(|(&x, &l)| match x {
            0 => l,
            _ if l > 0.0 => l - x as f64 * l.ln(),
            _ => f64::INFINITY,
        })
        .sum())
}

pub fn bin_reports_from_intensity(f: &IntensityForecast, partition: &GridPartition) -> Result<BinForecast> {
    if partition.window() != f.window() {
        return Err(Error::WindowMismatch);
    }
    let expectations = partition.cells().map(|cell| f.mass_over(&cell)).collect();
    BinForecast::new(partition.clone(), expectations)
}

/// `Σ_i 1{φ(B_i) > 0} log |B_i|`.
pub fn spatial_correction_term(pattern: &SpatialPattern, partition: &GridPartition) -> Result<f64> {
    let counts = count_in_cells(pattern, partition)?;
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, _)| partition.cell(i).volume().ln())
        .sum())
}
