use rayon::prelude::*;

use crate::error::Result;
use crate::patterns::{GridPartition, IntervalPartition, SpatialPattern, TemporalPattern, Window};
use crate::scores::{
    bin_reports_from_intensity, interval_reports_from_cond_intensity, score_bin, score_cond_intensity_log,
    score_interval, score_intensity_poisson, spatial_correction_term, temporal_correction_term, BinForecast,
    CondIntensityForecast, IntensityForecast,
};
use crate::simulate::SeedSpec;

/// Mean corrected differences between an approximate score and the exact
/// score, indexed `[n][forecast]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub ns: Vec<usize>,
    pub labels: Vec<String>,
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub repetitions: usize,
}

impl ConvergenceTable {
    pub fn value(&self, n: usize, label: &str) -> Option<f64> {
        let i = self.ns.iter().position(|&v| v == n)?;
        let j = self.labels.iter().position(|l| l == label)?;
        Some(self.mean[i][j])
    }

    fn from_samples(ns: Vec<usize>, labels: Vec<String>, samples: &[Vec<Vec<f64>>]) -> Self {
        let m = samples.len();
        let mut mean = vec![vec![0.0; labels.len()]; ns.len()];
        let mut std_error = vec![vec![0.0; labels.len()]; ns.len()];
        for i in 0..ns.len() {
            for j in 0..labels.len() {
                let values: Vec<f64> = samples.iter().map(|s| s[i][j]).collect();
                let mu = values.iter().sum::<f64>() / m as f64;
                let var = if m > 1 {
                    values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m - 1) as f64
                } else {
                    0.0
                };
                mean[i][j] = mu;
                std_error[i][j] = (var / m as f64).sqrt();
            }
        }
        Self { ns, labels, mean, std_error, repetitions: m }
    }
}

/// `score_bin + correction − score_intensity_poisson` on an `n × n` grid.
pub fn corrected_spatial_difference(
    f: &IntensityForecast,
    bins: &BinForecast,
    pattern: &SpatialPattern,
) -> Result<f64> {
    Ok(score_bin(bins, pattern)? + spatial_correction_term(pattern, bins.partition())?
        - score_intensity_poisson(f, pattern)?)
}

/// One pattern per repetition from `sample`; grid sizes `ns` per axis.
pub fn convergence_experiment_spatial(
    forecasts: &[IntensityForecast],
    sample: &(dyn Fn(SeedSpec) -> Result<SpatialPattern> + Sync),
    window: &Window,
    ns: &[usize],
    repetitions: usize,
    master_seed: u64,
) -> Result<ConvergenceTable> {
    let bins: Vec<Vec<BinForecast>> = ns
        .iter()
        .map(|&n| {
            let grid = GridPartition::uniform(window.clone(), n)?;
            forecasts.iter().map(|f| bin_reports_from_intensity(f, &grid)).collect()
        })
        .collect::<Result<_>>()?;
    let samples: Vec<Vec<Vec<f64>>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let pattern = sample(SeedSpec::new(master_seed, rep as u64))?;
            bins.iter()
                .map(|row| {
                    forecasts
                        .iter()
                        .zip(row)
                        .map(|(f, b)| corrected_spatial_difference(f, b, &pattern))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let labels = forecasts.iter().map(|f| f.name().to_string()).collect();
    Ok(ConvergenceTable::from_samples(ns.to_vec(), labels, &samples))
}

/// `score_interval + correction − score_cond_intensity_log` with `n`
/// equal intervals.
pub fn corrected_temporal_difference(
    f: &CondIntensityForecast,
    partition: &IntervalPartition,
    pattern: &TemporalPattern,
) -> Result<f64> {
    let reports = interval_reports_from_cond_intensity(f, partition, pattern)?;
    Ok(score_interval(&reports, pattern)? + temporal_correction_term(pattern, partition)?
        - score_cond_intensity_log(f, pattern))
}

pub fn convergence_experiment_temporal(
    forecasts: &[CondIntensityForecast],
    sample: &(dyn Fn(SeedSpec) -> Result<TemporalPattern> + Sync),
    horizon: f64,
    ns: &[usize],
    repetitions: usize,
    master_seed: u64,
) -> Result<ConvergenceTable> {
    let partitions: Vec<IntervalPartition> =
        ns.iter().map(|&n| IntervalPartition::uniform(horizon, n)).collect::<Result<_>>()?;
    let samples: Vec<Vec<Vec<f64>>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let pattern = sample(SeedSpec::new(master_seed, rep as u64))?;
            partitions
                .iter()
                .map(|part| {
                    forecasts
                        .iter()
                        .map(|f| corrected_temporal_difference(f, part, &pattern))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let labels = forecasts.iter().map(|f| f.name().to_string()).collect();
    Ok(ConvergenceTable::from_samples(ns.to_vec(), labels, &samples))
}
