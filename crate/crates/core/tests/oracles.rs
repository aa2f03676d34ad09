//! Monte Carlo means of the corrected approximation differences against
//! closed forms for homogeneous Poisson data.

use std::sync::Arc;

use ppscore::evaluation::experiments::SpatialModel;
use ppscore::evaluation::{convergence_experiment_spatial, convergence_experiment_temporal};
use ppscore::patterns::Window;
use ppscore::scores::{CondIntensityForecast, IntensityForecast};
use ppscore::simulate::{sample_hawkes, HawkesConfig, SeedSpec};
use ppscore::triggering::TriggeringKernel;

/// Expected corrected temporal difference with `n` intervals of length
/// `δ = T/n`, rate `ν` for both data and forecast.
fn temporal_expectation(nu: f64, horizon: f64, n: usize) -> f64 {
    let delta = horizon / n as f64;
    let p = -(-nu * delta).exp_m1();
    let interval = n as f64 * (p * -p.ln() + (1.0 - p) * nu * delta);
    let correction = n as f64 * p * delta.ln();
    let exact = nu * horizon - nu * horizon * nu.ln();
    interval + correction - exact
}

/// Expected corrected spatial difference on a `k`-cell grid of the unit
/// square for Poisson(`lambda`) data; it does not depend on the forecast.
fn spatial_expectation(lambda: f64, k: usize) -> f64 {
    let k = k as f64;
    let mu = lambda / k;
    k.ln() * (lambda - k * -(-mu).exp_m1())
}

#[test]
fn temporal_corrected_difference_matches_closed_form() {
    let nu = 4.0;
    let horizon = 50.0;
    let config = HawkesConfig::new(nu, TriggeringKernel::Zero, horizon);
    let forecast = CondIntensityForecast::hawkes("poisson", nu, TriggeringKernel::Zero).unwrap();
    let ns = [10, 100, 1000];
    let sample = |s: SeedSpec| sample_hawkes(&config, s);
    let t = convergence_experiment_temporal(&[forecast], &sample, horizon, &ns, 2000, 3).unwrap();
    for (i, &n) in ns.iter().enumerate() {
        let expected = temporal_expectation(nu, horizon, n);
        let dev = (t.mean[i][0] - expected).abs();
        assert!(dev <= 4.0 * t.std_error[i][0], "n={n}: {} vs {expected} (se {})", t.mean[i][0], t.std_error[i][0]);
    }
}

#[test]
fn spatial_corrected_difference_matches_closed_form() {
    let w = Window::unit_square();
    let lambda = 40.0;
    let truth = SpatialModel::Poisson { intensity: Arc::new(move |_: &[f64]| lambda), bound: lambda };
    let forecasts = [
        IntensityForecast::new("truth", Arc::new(move |_: &[f64]| lambda), w.clone()).unwrap(),
        IntensityForecast::new("low", Arc::new(|_: &[f64]| 25.0), w.clone()).unwrap(),
    ];
    let ns = [2, 5, 12];
    let sample = |s: SeedSpec| truth.sample(&w, s);
    let t = convergence_experiment_spatial(&forecasts, &sample, &w, &ns, 2000, 4).unwrap();
    for (i, &n) in ns.iter().enumerate() {
        let expected = spatial_expectation(lambda, n * n);
        for f in 0..2 {
            let dev = (t.mean[i][f] - expected).abs();
            assert!(dev <= 4.0 * t.std_error[i][f] + 1e-9, "n={n} f={f}: {} vs {expected}", t.mean[i][f]);
        }
        // constant forecasts differ only by terms that cancel pattern by pattern
        assert!((t.mean[i][0] - t.mean[i][1]).abs() < 1e-9);
    }
}

#[test]
fn closed_forms_vanish_in_the_limit() {
    assert!(temporal_expectation(4.0, 50.0, 1_000_000).abs() < 0.01);
    assert!(temporal_expectation(4.0, 50.0, 10).abs() > 10.0);
    assert!(spatial_expectation(40.0, 1).abs() < 1e-12);
}
