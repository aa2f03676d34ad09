//! Scores for conditional-intensity forecasts of temporal point processes
//! and their interval approximations.

use std::fmt;
use std::sync::Arc;

use crate::elementary::{binary_log_score, crps, BinaryScore, LogScore};
use crate::error::{Error, Result};
use crate::patterns::{count_in_intervals, IntervalPartition, TemporalPattern};
use crate::quadrature::{adaptive_simpson, integrate_1d};
use crate::simulate::{sample_hawkes, HawkesConfig, SeedSpec};
use crate::triggering::TriggeringKernel;

/// History-dependent event rate.
pub trait ConditionalIntensity: Send + Sync {
    /// `λ*(t)` given `history`, all of whose events precede `t`.
    fn rate(&self, t: f64, history: &[f64]) -> f64;

    /// `∫ₐᵇ λ*(u) du` assuming no events in `(a, b)`; `history` holds the
    /// events up to and including `a`.
    fn integrated(&self, a: f64, b: f64, history: &[f64]) -> f64;
}

/// Closed-form Hawkes intensity `ν + Σ g(t − t_j)`.
#[derive(Debug, Clone)]
pub struct HawkesIntensity {
    background: f64,
    kernel: TriggeringKernel,
    cutoff: f64,
}

impl HawkesIntensity {
    pub fn new(background: f64, kernel: TriggeringKernel) -> Result<Self> {
        if !(background >= 0.0 && background.is_finite()) {
            return Err(Error::InvalidModel(format!("background rate must be >= 0, got {background}")));
        }
        if !kernel.is_valid() {
            return Err(Error::InvalidModel(format!("invalid triggering function {kernel:?}")));
        }
        // contributions below this are lost in rounding against the rate itself
        let reference = background.max(kernel.value(0.0)).max(f64::MIN_POSITIVE);
        let cutoff = kernel.negligible_after(reference * 1e-18);
        Ok(Self { background, kernel, cutoff })
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn kernel(&self) -> &TriggeringKernel {
        &self.kernel
    }

    fn recent<'h>(&self, from: f64, history: &'h [f64]) -> &'h [f64] {
        let start = history.partition_point(|&s| s < from - self.cutoff);
        &history[start..]
    }
}

impl ConditionalIntensity for HawkesIntensity {
    fn rate(&self, t: f64, history: &[f64]) -> f64 {
        self.background + self.recent(t, history).iter().map(|&s| self.kernel.value(t - s)).sum::<f64>()
    }

    fn integrated(&self, a: f64, b: f64, history: &[f64]) -> f64 {
        self.background * (b - a)
            + self
                .recent(a, history)
                .iter()
                .map(|&s| self.kernel.mass_between(a - s, b - s))
                .sum::<f64>()
    }
}

type RateFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// General rate whose integral is computed by adaptive Simpson quadrature.
/// The rate should be smooth between events: a jump inside `(a, b)` can
/// pass the error estimate unnoticed.
#[derive(Clone)]
pub struct QuadratureIntensity {
    rate: RateFn,
    tolerance: f64,
}

impl QuadratureIntensity {
    pub fn new(rate: RateFn, tolerance: f64) -> Self {
        Self { rate, tolerance }
    }
}

impl ConditionalIntensity for QuadratureIntensity {
    fn rate(&self, t: f64, history: &[f64]) -> f64 {
        (self.rate)(t, history)
    }

    fn integrated(&self, a: f64, b: f64, history: &[f64]) -> f64 {
        if b <= a {
            return 0.0;
        }
        adaptive_simpson(&|u| (self.rate)(u, history), a, b, self.tolerance)
    }
}

#[derive(Clone)]
enum Model {
    Hawkes(HawkesIntensity),
    General(Arc<dyn ConditionalIntensity>),
}

/// Named conditional-intensity forecast.
#[derive(Clone)]
pub struct CondIntensityForecast {
    name: String,
    model: Model,
}

impl fmt::Debug for CondIntensityForecast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.model {
            Model::Hawkes(h) => write!(f, "CondIntensityForecast({}: nu={}, {:?})", self.name, h.background, h.kernel),
            Model::General(_) => write!(f, "CondIntensityForecast({}: general)", self.name),
        }
    }
}

impl CondIntensityForecast {
    /// Hawkes forecast; supercritical kernels are allowed as reports.
    pub fn hawkes(name: impl Into<String>, background: f64, kernel: TriggeringKernel) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            model: Model::Hawkes(HawkesIntensity::new(background, kernel)?),
        })
    }

    pub fn general(name: impl Into<String>, model: Arc<dyn ConditionalIntensity>) -> Self {
        Self { name: name.into(), model: Model::General(model) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn model(&self) -> &dyn ConditionalIntensity {
        match &self.model {
            Model::Hawkes(h) => h,
            Model::General(g) => g.as_ref(),
        }
    }

    pub fn rate(&self, t: f64, history: &[f64]) -> f64 {
        self.model().rate(t, history)
    }

    pub fn integrated(&self, a: f64, b: f64, history: &[f64]) -> f64 {
        self.model().integrated(a, b, history)
    }

    /// `∫₀ᵀ λ*(u) du` along the observed pattern.
    pub fn compensator(&self, pattern: &TemporalPattern) -> f64 {
        let times = pattern.times();
        let horizon = pattern.horizon();
        match &self.model {
            Model::Hawkes(h) => {
                h.background * horizon + times.iter().map(|&s| h.kernel.cumulative(horizon - s)).sum::<f64>()
            }
            Model::General(_) => segment_compensator(self, times, horizon),
        }
    }

    /// Sampling configuration when the forecast is a Hawkes model.
    pub fn hawkes_config(&self, horizon: f64) -> Option<HawkesConfig> {
        match &self.model {
            Model::Hawkes(h) => Some(HawkesConfig::new(h.background, h.kernel.clone(), horizon)),
            Model::General(_) => None,
        }
    }
}

/// Sum of `integrated` over the inter-event segments.
pub fn segment_compensator(f: &CondIntensityForecast, times: &[f64], horizon: f64) -> f64 {
    let mut total = 0.0;
    let mut prev = 0.0;
    for (i, &t) in times.iter().enumerate() {
        total += f.integrated(prev, t, &times[..i]);
        prev = t;
    }
    total + f.integrated(prev, horizon, times)
}

/// `−Σ log λ*(t_i) + ∫₀ᵀ λ*`; `+∞` if the rate vanishes at an event.
pub fn score_cond_intensity_log(f: &CondIntensityForecast, pattern: &TemporalPattern) -> f64 {
    let times = pattern.times();
    let mut log_sum = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let v = f.rate(t, &times[..i]);
        if !(v > 0.0) {
            return f64::INFINITY;
        }
        log_sum += v.ln();
    }
    -log_sum + f.compensator(pattern)
}

/// Distribution of the next event time after `start` given the history.
pub struct WaitingTime<'a> {
    forecast: &'a CondIntensityForecast,
    start: f64,
    history: &'a [f64],
}

impl WaitingTime<'_> {
    pub fn start(&self) -> f64 {
        self.start
    }

    fn cumulative_rate(&self, t: f64) -> f64 {
        if t <= self.start {
            0.0
        } else {
            self.forecast.integrated(self.start, t, self.history)
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        -(-self.cumulative_rate(t)).exp_m1()
    }

    pub fn log_density(&self, t: f64) -> f64 {
        if t <= self.start {
            return f64::NEG_INFINITY;
        }
        self.forecast.rate(t, self.history).ln() - self.cumulative_rate(t)
    }

    pub fn density(&self, t: f64) -> f64 {
        self.log_density(t).exp()
    }
}

/// Scoring slot for the waiting-time distributions of the stepwise score.
pub trait WaitingTimeScore: Send + Sync {
    fn score(&self, distribution: &WaitingTime<'_>, observed: f64) -> f64;
}

impl WaitingTimeScore for LogScore {
    fn score(&self, distribution: &WaitingTime<'_>, observed: f64) -> f64 {
        -distribution.log_density(observed)
    }
}

/// CRPS of the waiting time, integrated over `[start, start + span]`.
#[derive(Debug, Clone, Copy)]
pub struct WaitingTimeCrps {
    pub span: f64,
}

impl WaitingTimeScore for WaitingTimeCrps {
    fn score(&self, distribution: &WaitingTime<'_>, observed: f64) -> f64 {
        let start = distribution.start();
        crps(&|x| distribution.cdf(x), observed, start, start + self.span).value
    }
}

/// `Σ S_i(f_i, t_i) + S′(1 − F_{n+1}(T), 1)`.
pub fn score_temporal_stepwise(
    f: &CondIntensityForecast,
    pattern: &TemporalPattern,
    step_score: &dyn WaitingTimeScore,
    tail_score: &dyn BinaryScore,
) -> f64 {
    let times = pattern.times();
    let mut total = 0.0;
    let mut prev = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let dist = WaitingTime { forecast: f, start: prev, history: &times[..i] };
        total += step_score.score(&dist, t);
        prev = t;
    }
    let survival = (-f.integrated(prev, pattern.horizon(), times)).exp();
    total + tail_score.score(survival, true)
}

/// Occupancy probabilities `p_1..p_k` for the intervals of a partition.
#[derive(Debug, Clone)]
pub struct IntervalProbForecast {
    partition: IntervalPartition,
    probabilities: Vec<f64>,
}

impl IntervalProbForecast {
    pub fn new(partition: IntervalPartition, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != partition.len() {
            return Err(Error::LengthMismatch(probabilities.len(), partition.len()));
        }
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("occupancy probability {p} outside [0, 1]")));
        }
        Ok(Self { partition, probabilities })
    }

    pub fn partition(&self) -> &IntervalPartition {
        &self.partition
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

fn check_horizon(partition: &IntervalPartition, pattern: &TemporalPattern) -> Result<()> {
    if partition.horizon() != pattern.horizon() {
        return Err(Error::HorizonMismatch { partition: partition.horizon(), pattern: pattern.horizon() });
    }
    Ok(())
}

/// `p_i = 1 − exp(−∫_{a_i}^{b_i} λ*)` conditioning on events up to `a_i`.
pub fn interval_reports_from_cond_intensity(
    f: &CondIntensityForecast,
    partition: &IntervalPartition,
    pattern: &TemporalPattern,
) -> Result<IntervalProbForecast> {
    check_horizon(partition, pattern)?;
    let times = pattern.times();
    let mut known = 0;
    let probabilities = partition
        .intervals()
        .map(|(a, b)| {
            while known < times.len() && times[known] <= a {
                known += 1;
            }
            -(-f.integrated(a, b, &times[..known])).exp_m1()
        })
        .collect();
    IntervalProbForecast::new(partition.clone(), probabilities)
}

fn occupancy(partition: &IntervalPartition, pattern: &TemporalPattern) -> Result<Vec<bool>> {
    Ok(count_in_intervals(pattern, partition)?.into_iter().map(|c| c > 0).collect())
}

/// `Σ_i S(p_i, 1{interval i occupied})` with the binary log score.
pub fn score_interval(f: &IntervalProbForecast, pattern: &TemporalPattern) -> Result<f64> {
    let occupied = occupancy(&f.partition, pattern)?;
    Ok(f.probabilities.iter().zip(occupied).map(|(&p, x)| binary_log_score(p, x)).sum())
}

/// `Σ_i 1{interval i occupied} log(b_i − a_i)`.
pub fn temporal_correction_term(pattern: &TemporalPattern, partition: &IntervalPartition) -> Result<f64> {
    let occupied = occupancy(partition, pattern)?;
    Ok(partition
        .intervals()
        .zip(occupied)
        .filter(|(_, x)| *x)
        .map(|((a, b), _)| (b - a).ln())
        .sum())
}

/// Mean information gain per unit time of `p` over the reference `q`.
pub fn information_gain(p: &IntervalProbForecast, q: &IntervalProbForecast, pattern: &TemporalPattern) -> Result<f64> {
    if p.partition.breakpoints() != q.partition.breakpoints() {
        return Err(Error::InvalidPartition("forecasts use different interval partitions".into()));
    }
    let occupied = occupancy(&p.partition, pattern)?;
    let total: f64 = p
        .probabilities
        .iter()
        .zip(&q.probabilities)
        .zip(occupied)
        .map(|((&pi, &qi), x)| if x { (pi / qi).ln() } else { (-pi).ln_1p() - (-qi).ln_1p() })
        .sum();
    Ok(total / pattern.horizon())
}

const ENTROPY_PIECE: f64 = 0.05;
const ENTROPY_DEGREE: usize = 8;

/// Time average of `λ* log λ*` along one simulated path minus `λ̄ log λ̄`.
pub fn estimate_entropy_gain(f: &CondIntensityForecast, horizon: f64, seed: SeedSpec) -> Result<f64> {
    let config = f
        .hawkes_config(horizon)
        .ok_or_else(|| Error::InvalidModel("entropy gain needs a Hawkes forecast to simulate from".into()))?;
    config.validate()?;
    let path = sample_hawkes(&config, seed)?;
    let times = path.times();
    let mut rate_log_rate = 0.0;
    let mut prev = 0.0;
    for i in 0..=times.len() {
        let end = if i < times.len() { times[i] } else { horizon };
        let history = &times[..i];
        let pieces = ((end - prev) / ENTROPY_PIECE).ceil().max(1.0) as usize;
        let h = (end - prev) / pieces as f64;
        for k in 0..pieces {
            let a = prev + k as f64 * h;
            rate_log_rate += integrate_1d(a, a + h, ENTROPY_DEGREE, |u| {
                let v = f.rate(u, history);
                v * v.ln()
            });
        }
        prev = end;
    }
    let mean_rate = f.compensator(&path) / horizon;
    Ok(rate_log_rate / horizon - mean_rate * mean_rate.ln())
}
