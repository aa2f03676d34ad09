use rand::Rng;

use super::SeedSpec;
use crate::error::{Error, Result};
use crate::patterns::TemporalPattern;
use crate::triggering::TriggeringKernel;

/// Linear Hawkes process `λ*(t) = ν + Σ_{t_i<t} g(t − t_i)` on `(0, T]`.
#[derive(Debug, Clone)]
pub struct HawkesConfig {
    pub background: f64,
    pub kernel: TriggeringKernel,
    pub horizon: f64,
}

impl HawkesConfig {
    pub fn new(background: f64, kernel: TriggeringKernel, horizon: f64) -> Self {
        Self { background, kernel, horizon }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.background >= 0.0 && self.background.is_finite()) {
            return Err(Error::InvalidModel(format!("background rate must be >= 0, got {}", self.background)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidModel(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !self.kernel.is_valid() {
            return Err(Error::InvalidModel(format!("invalid triggering function {:?}", self.kernel)));
        }
        if !self.kernel.is_nonincreasing() {
            return Err(Error::InvalidModel(format!(
                "triggering function {:?} is not non-increasing; thinning bound would be invalid",
                self.kernel
            )));
        }
        let mass = self.kernel.total_mass();
        if !(mass < 1.0) {
            return Err(Error::InvalidModel(format!("supercritical triggering: branching ratio {mass} >= 1")));
        }
        Ok(())
    }

    /// Stationary mean rate `ν / (1 − ∫g)`.
    pub fn stationary_rate(&self) -> f64 {
        self.background / (1.0 - self.kernel.total_mass())
    }
}

/// Sum of `g(t − t_j)` over retained history with `t_j ≤ t`, dropping
/// events whose contribution has decayed below rounding level.
pub(crate) struct Excitation<'a> {
    kernel: &'a TriggeringKernel,
    cutoff: f64,
    start: usize,
}

impl<'a> Excitation<'a> {
    pub(crate) fn new(kernel: &'a TriggeringKernel, background: f64) -> Self {
        let reference = if background > 0.0 { background } else { kernel.value(0.0).max(f64::MIN_POSITIVE) };
        Self {
            kernel,
            cutoff: kernel.negligible_after(reference * 1e-18),
            start: 0,
        }
    }

    pub(crate) fn at(&mut self, t: f64, events: &[f64]) -> f64 {
        while self.start < events.len() && t - events[self.start] > self.cutoff {
            self.start += 1;
        }
        events[self.start..].iter().map(|&s| self.kernel.value(t - s)).sum()
    }
}

pub fn sample_hawkes(config: &HawkesConfig, seed: SeedSpec) -> Result<TemporalPattern> {
    sample_hawkes_with(config, &mut seed.rng())
}

/// Ogata thinning. With `g` non-increasing the intensity just after the
/// current time bounds it until the next event.
pub fn sample_hawkes_with<R: Rng + ?Sized>(config: &HawkesConfig, rng: &mut R) -> Result<TemporalPattern> {
    config.validate()?;
    let nu = config.background;
    let horizon = config.horizon;
    let mut events: Vec<f64> = Vec::new();
    let mut excitation = Excitation::new(&config.kernel, nu);
    let mut t = 0.0;
    loop {
        // events at exactly t contribute g(0⁺)
        let bound = nu + excitation.at(t, &events);
        if bound <= 0.0 {
            break;
        }
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / bound;
        if t > horizon {
            break;
        }
        let rate = nu + excitation.at(t, &events);
        if rng.gen::<f64>() * bound <= rate {
            if events.last().is_some_and(|&last| t <= last) {
                // consecutive draws collapsed in floating point; skip
                continue;
            }
            events.push(t);
        }
    }
    TemporalPattern::new(events, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let exp = TriggeringKernel::Exponential { scale: 2.0, rate: 4.0 };
        assert!(HawkesConfig::new(2.0, exp.clone(), 50.0).validate().is_ok());
        let lin = TriggeringKernel::Linear { scale: 2.0, intercept: 4.0, slope: 6.0 };
        assert!(HawkesConfig::new(2.0, lin, 50.0).validate().is_err());
        let bump = TriggeringKernel::Custom {
            name: "bump".into(),
            value: std::sync::Arc::new(|t: f64| t * (-t).exp() * 0.1),
            support: 50.0,
            nonincreasing: false,
        };
        assert!(HawkesConfig::new(2.0, bump, 50.0).validate().is_err());
        assert!(HawkesConfig::new(-1.0, exp, 50.0).validate().is_err());
    }

    #[test]
    fn no_triggering_is_poisson() {
        let cfg = HawkesConfig::new(2.0, TriggeringKernel::Zero, 50.0);
        let mut rng = SeedSpec::new(3, 0).rng();
        let reps = 2000;
        let total: usize = (0..reps).map(|_| sample_hawkes_with(&cfg, &mut rng).unwrap().len()).sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 100.0).abs() < 4.0 * (100.0f64 / reps as f64).sqrt());
    }

    #[test]
    fn times_strictly_increasing_in_horizon() {
        let cfg = HawkesConfig::new(2.0, TriggeringKernel::Box { height: 1.0, width: 0.8 }, 50.0);
        for rep in 0..50 {
            let p = sample_hawkes(&cfg, SeedSpec::new(5, rep)).unwrap();
            let t = p.times();
            assert!(t.windows(2).all(|w| w[0] < w[1]));
            assert!(t.iter().all(|&x| x > 0.0 && x <= 50.0));
        }
    }

    #[test]
    fn zero_background_zero_events() {
        let cfg = HawkesConfig::new(0.0, TriggeringKernel::Exponential { scale: 2.0, rate: 4.0 }, 10.0);
        assert!(sample_hawkes(&cfg, SeedSpec::new(1, 1)).unwrap().is_empty());
    }
}
