//! Drivers for the bundled simulation experiments: data models, pattern
//! generation and scoring of whole forecast catalogs.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::dm::DmSpec;
use super::table::{preference_table_from_scores, PreferenceTable, RepScores};
use crate::elementary::{BregmanGenerator, LogScore};
use crate::error::{Error, Result};
use crate::patterns::{IntervalPartition, SpatialPattern, TemporalPattern, Window};
use crate::scores::{
    estimate_entropy_gain, information_gain, interval_reports_from_cond_intensity, score_cond_intensity_log,
    score_intensity_combined, score_intensity_poisson, score_interval, score_product_density, CondIntensityForecast,
    IntensityForecast, IntervalProbForecast, ProductDensityForecast,
};
use crate::simulate::{
    sample_hawkes_with, sample_lgcp_batch_with, sample_lgcp_with, sample_poisson_inhom_with, sample_thomas_with, Covariance, HawkesConfig,
    LgcpConfig, SeedSpec, ThomasConfig,
};
use crate::SpatialFn;

/// Largest value of `f` on a regular `(m+1)^d` lattice including the boundary.
pub fn lattice_max(f: &dyn Fn(&[f64]) -> f64, window: &Window, m: usize) -> f64 {
    let d = window.dim();
    let total = (m + 1).pow(d as u32);
    let mut p = vec![0.0; d];
    let mut best = f64::NEG_INFINITY;
    for flat in 0..total {
        let mut rem = flat;
        for (k, x) in p.iter_mut().enumerate() {
            let i = rem % (m + 1);
            rem /= m + 1;
            *x = window.lower()[k] + window.side(k) * i as f64 / m as f64;
        }
        best = best.max(f(&p));
    }
    best
}

const BOUND_LATTICE: usize = 200;
const BOUND_MARGIN: f64 = 1.0001;

/// Spatial data-generating process.
#[derive(Clone)]
pub enum SpatialModel {
    Poisson { intensity: SpatialFn, bound: f64 },
    Lgcp(LgcpConfig),
    Thomas(ThomasConfig),
}

impl SpatialModel {
    /// Poisson process with the thinning bound taken from a lattice maximum.
    pub fn poisson(intensity: SpatialFn, window: &Window) -> Self {
        let bound = BOUND_MARGIN * lattice_max(&*intensity, window, BOUND_LATTICE);
        Self::Poisson { intensity, bound }
    }

    /// LGCP with `μ = log λ − C(s,s)/2`, so its intensity is `λ`.
    pub fn lgcp_matching(intensity: SpatialFn, covariance: Covariance, grid: usize) -> Self {
        let half_variance = 0.5 * covariance.value(&[0.0, 0.0], &[0.0, 0.0]);
        let mean: SpatialFn = Arc::new(move |s: &[f64]| intensity(s).ln() - half_variance);
        Self::Lgcp(LgcpConfig::new(mean, covariance, grid))
    }

    /// Thomas process with parent intensity `λ / mean_offspring` on the
    /// buffered window.
    pub fn thomas_matching(
        intensity: SpatialFn,
        window: &Window,
        mean_offspring: f64,
        sigma: f64,
        buffer: f64,
    ) -> Result<Self> {
        if !(mean_offspring > 0.0) {
            return Err(Error::InvalidModel(format!("mean offspring must be positive, got {mean_offspring}")));
        }
        let parents: SpatialFn = Arc::new(move |s: &[f64]| intensity(s) / mean_offspring);
        let outer = window.expanded(buffer)?;
        let bound = BOUND_MARGIN * lattice_max(&*parents, &outer, BOUND_LATTICE);
        let mut config = ThomasConfig::new(parents, bound, mean_offspring, sigma);
        config.buffer = buffer;
        config.validate()?;
        Ok(Self::Thomas(config))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, window: &Window, rng: &mut R) -> Result<SpatialPattern> {
        match self {
            Self::Poisson { intensity, bound } => sample_poisson_inhom_with(&**intensity, *bound, window, rng),
            Self::Lgcp(c) => sample_lgcp_with(c, window, rng),
            Self::Thomas(c) => sample_thomas_with(c, window, rng),
        }
    }

    pub fn sample(&self, window: &Window, seed: SeedSpec) -> Result<SpatialPattern> {
        self.sample_with(window, &mut seed.rng())
    }

    /// `count` patterns from one stream. LGCP fields are drawn as a batch
    /// (see `sample_lgcp_batch_with`), other models one pattern at a time.
    pub fn sample_batch_with<R: Rng + ?Sized>(
        &self,
        window: &Window,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<SpatialPattern>> {
        match self {
            Self::Lgcp(c) => sample_lgcp_batch_with(c, window, count, rng),
            _ => (0..count).map(|_| self.sample_with(window, rng)).collect(),
        }
    }
}

/// `patterns[rep][i]`: the `n` patterns of each repetition, all drawn from
/// that repetition's stream.
pub fn draw_spatial_patterns(
    model: &SpatialModel,
    window: &Window,
    n: usize,
    repetitions: usize,
    master_seed: u64,
) -> Result<Vec<Vec<SpatialPattern>>> {
    (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            model.sample_batch_with(window, n, &mut SeedSpec::new(master_seed, rep as u64).rng())
        })
        .collect()
}

/// One Hawkes path per repetition.
pub fn draw_hawkes_paths(config: &HawkesConfig, repetitions: usize, master_seed: u64) -> Result<Vec<TemporalPattern>> {
    config.validate()?;
    (0..repetitions)
        .into_par_iter()
        .map(|rep| sample_hawkes_with(config, &mut SeedSpec::new(master_seed, rep as u64).rng()))
        .collect()
}

/// Scoring function for intensity forecasts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensityScore {
    /// Log score on the normalized density plus `c` times the squared-error
    /// Bregman score of the total mass.
    S1 { c: f64 },
    /// The Poisson log score `−Σ log λ(y_i) + |Λ|`.
    S2,
}

impl IntensityScore {
    pub fn evaluate(&self, f: &IntensityForecast, pattern: &SpatialPattern) -> Result<f64> {
        match *self {
            Self::S1 { c } => score_intensity_combined(f, pattern, &LogScore, &BregmanGenerator::squared_error(), c),
            Self::S2 => score_intensity_poisson(f, pattern),
        }
    }
}

/// Scores and preference table of a catalog comparison.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub labels: Vec<String>,
    /// `reps[rep][forecast][pattern]`
    pub reps: Vec<RepScores>,
    pub table: PreferenceTable,
}

fn compare<F, S>(
    labels: Vec<String>,
    forecasts: &[F],
    patterns: &[Vec<SpatialPattern>],
    score: S,
    test: DmSpec,
) -> Result<Comparison>
where
    F: Sync,
    S: Fn(&F, &SpatialPattern) -> Result<f64> + Sync,
{
    let (table, reps) = super::table::preference_table(&labels, forecasts, patterns, score, test)?;
    Ok(Comparison { labels, reps, table })
}

pub fn compare_intensity_forecasts(
    forecasts: &[IntensityForecast],
    patterns: &[Vec<SpatialPattern>],
    score: IntensityScore,
    test: DmSpec,
) -> Result<Comparison> {
    let labels = forecasts.iter().map(|f| f.name().to_string()).collect();
    compare(labels, forecasts, patterns, |f, p| score.evaluate(f, p), test)
}

pub fn compare_product_densities(
    forecasts: &[ProductDensityForecast],
    patterns: &[Vec<SpatialPattern>],
    c: f64,
    test: DmSpec,
) -> Result<Comparison> {
    let labels = forecasts.iter().map(|f| f.name().to_string()).collect();
    compare(labels, forecasts, patterns, |f, p| score_product_density(f, p, c), test)
}

/// Re-aggregates stored scores, e.g. after restricting to fewer patterns.
pub fn comparison_from_scores(labels: Vec<String>, reps: Vec<RepScores>, test: DmSpec) -> Result<Comparison> {
    let table = preference_table_from_scores(&labels, &reps, test)?;
    Ok(Comparison { labels, reps, table })
}

/// Per-repetition Hawkes scores, divided by the horizon.
#[derive(Debug, Clone)]
pub struct HawkesComparison {
    pub labels: Vec<String>,
    pub truth: usize,
    pub horizon: f64,
    /// `exact[rep][forecast]` conditional-intensity log scores per unit time.
    pub exact: Vec<Vec<f64>>,
    /// Interval scores per unit time on `interval_count` equal intervals.
    pub interval: Option<Vec<Vec<f64>>>,
    pub interval_count: Option<usize>,
}

impl HawkesComparison {
    /// `differences[rep][forecast]` = competitor score minus truth score;
    /// positive values favour the truth.
    pub fn differences(&self) -> Vec<Vec<f64>> {
        self.exact
            .iter()
            .map(|row| row.iter().map(|s| s - row[self.truth]).collect())
            .collect()
    }

    /// Median difference per forecast (zero for the truth itself).
    pub fn median_differences(&self) -> Vec<f64> {
        let diffs = self.differences();
        (0..self.labels.len())
            .map(|j| {
                let mut col: Vec<f64> = diffs.iter().map(|r| r[j]).filter(|v| v.is_finite()).collect();
                median(&mut col)
            })
            .collect()
    }

    /// Per forecast, the fraction of repetitions in which the interval
    /// scores order it against the truth as the exact scores do. The
    /// truth's own entry is 1.
    pub fn truth_pair_agreement(&self) -> Option<Vec<f64>> {
        let interval = self.interval.as_ref()?;
        let m = self.exact.len().max(1) as f64;
        Some(
            (0..self.labels.len())
                .map(|j| {
                    let same = self
                        .exact
                        .iter()
                        .zip(interval)
                        .filter(|(e, i)| (e[j] - e[self.truth]).total_cmp(&0.0) == (i[j] - i[self.truth]).total_cmp(&0.0))
                        .count();
                    same as f64 / m
                })
                .collect(),
        )
    }

    /// Fraction of repetitions in which the interval scores order all
    /// forecasts exactly as the exact scores do.
    pub fn ranking_agreement(&self) -> Option<f64> {
        let interval = self.interval.as_ref()?;
        let agree = self
            .exact
            .iter()
            .zip(interval)
            .filter(|(e, i)| ranking(e) == ranking(i))
            .count();
        Some(agree as f64 / self.exact.len().max(1) as f64)
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Indices sorted by ascending score, stable in the index.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    idx
}

/// Scores every forecast on one path per repetition. `truth` indexes the
/// forecast whose model generated the data.
pub fn compare_hawkes_forecasts(
    forecasts: &[CondIntensityForecast],
    truth: usize,
    paths: &[TemporalPattern],
    interval_count: Option<usize>,
) -> Result<HawkesComparison> {
    if truth >= forecasts.len() {
        return Err(Error::Domain(format!("truth index {truth} out of range for {} forecasts", forecasts.len())));
    }
    let horizon = paths.first().map_or(0.0, |p| p.horizon());
    let partition = interval_count.map(|n| IntervalPartition::uniform(horizon, n)).transpose()?;
    let rows: Vec<(Vec<f64>, Option<Vec<f64>>)> = paths
        .par_iter()
        .map(|path| {
            let t = path.horizon();
            let exact = forecasts.iter().map(|f| score_cond_intensity_log(f, path) / t).collect();
            let interval = partition
                .as_ref()
                .map(|part| {
                    forecasts
                        .iter()
                        .map(|f| Ok(score_interval(&interval_reports_from_cond_intensity(f, part, path)?, path)? / t))
                        .collect::<Result<Vec<f64>>>()
                })
                .transpose()?;
            Ok((exact, interval))
        })
        .collect::<Result<_>>()?;
    let (exact, interval): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let interval = interval.into_iter().collect::<Option<Vec<_>>>();
    Ok(HawkesComparison {
        labels: forecasts.iter().map(|f| f.name().to_string()).collect(),
        truth,
        horizon,
        exact,
        interval: if interval_count.is_some() { interval } else { None },
        interval_count,
    })
}

/// Mean information gain per unit time against a homogeneous Poisson
/// reference, indexed `[n][forecast]`, plus the entropy gain of the truth.
#[derive(Debug, Clone)]
pub struct InfoGainTable {
    pub truth: String,
    pub ns: Vec<usize>,
    pub labels: Vec<String>,
    pub reference_rate: f64,
    pub mean: Vec<Vec<f64>>,
    pub entropy_gain: f64,
}

pub fn information_gain_experiment(
    forecasts: &[CondIntensityForecast],
    truth: &CondIntensityForecast,
    paths: &[TemporalPattern],
    ns: &[usize],
    master_seed: u64,
) -> Result<InfoGainTable> {
    let horizon = paths.first().map_or(0.0, |p| p.horizon());
    let config = truth
        .hawkes_config(horizon)
        .ok_or_else(|| Error::InvalidModel("information gain needs a Hawkes truth".into()))?;
    config.validate()?;
    let reference_rate = config.stationary_rate();
    let partitions: Vec<IntervalPartition> =
        ns.iter().map(|&n| IntervalPartition::uniform(horizon, n)).collect::<Result<_>>()?;
    let per_rep: Vec<Vec<Vec<f64>>> = paths
        .par_iter()
        .map(|path| {
            partitions
                .iter()
                .map(|part| {
                    let q: Vec<f64> = part.intervals().map(|(a, b)| -(-reference_rate * (b - a)).exp_m1()).collect();
                    let q = IntervalProbForecast::new(part.clone(), q)?;
                    forecasts
                        .iter()
                        .map(|f| information_gain(&interval_reports_from_cond_intensity(f, part, path)?, &q, path))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let m = per_rep.len().max(1) as f64;
    let mean = (0..ns.len())
        .map(|i| (0..forecasts.len()).map(|j| per_rep.iter().map(|r| r[i][j]).sum::<f64>() / m).collect())
        .collect();
    let entropy: Vec<f64> = (0..paths.len())
        .into_par_iter()
        .map(|rep| estimate_entropy_gain(truth, horizon, SeedSpec::new(master_seed ^ ENTROPY_SEED_SALT, rep as u64)))
        .collect::<Result<_>>()?;
    Ok(InfoGainTable {
        truth: truth.name().to_string(),
        ns: ns.to_vec(),
        labels: forecasts.iter().map(|f| f.name().to_string()).collect(),
        reference_rate,
        mean,
        entropy_gain: entropy.iter().sum::<f64>() / m,
    })
}

/// Keeps the entropy-gain paths independent of the scored paths.
const ENTROPY_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triggering::TriggeringKernel;

    #[test]
    fn lattice_max_hits_corners() {
        let w = Window::unit_square();
        let v = lattice_max(&|s: &[f64]| 30.0 * s[0].hypot(s[1]), &w, 10);
        assert!((v - 30.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ranking_orders_ascending() {
        assert_eq!(ranking(&[3.0, 1.0, 2.0]), vec![1, 2, 0]);
    }

    #[test]
    fn patterns_are_reproducible() {
        let w = Window::unit_square();
        let model = SpatialModel::poisson(Arc::new(|_: &[f64]| 50.0), &w);
        let a = draw_spatial_patterns(&model, &w, 3, 4, 11).unwrap();
        let b = draw_spatial_patterns(&model, &w, 3, 4, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0][0], a[0][1]);
        assert_ne!(a[0][0], a[1][0]);
    }

    #[test]
    fn hawkes_differences_are_zero_for_truth() {
        let fs = vec![
            CondIntensityForecast::hawkes("f1", 2.0, TriggeringKernel::Exponential { scale: 2.0, rate: 4.0 }).unwrap(),
            CondIntensityForecast::hawkes("p", 4.0, TriggeringKernel::Zero).unwrap(),
        ];
        let config = fs[0].hawkes_config(20.0).unwrap();
        let paths = draw_hawkes_paths(&config, 6, 3).unwrap();
        let cmp = compare_hawkes_forecasts(&fs, 0, &paths, Some(200)).unwrap();
        assert!(cmp.differences().iter().all(|r| r[0] == 0.0));
        assert_eq!(cmp.median_differences()[0], 0.0);
        assert!(cmp.ranking_agreement().unwrap() >= 0.0);
        assert_eq!(cmp.truth_pair_agreement().unwrap()[0], 1.0);
    }
}
