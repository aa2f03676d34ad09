//! Executes an experiment configuration and writes its CSV outputs.
//!
//! Output schemas (one header row each):
//!
//! | file                  | columns                                              |
//! |-----------------------|------------------------------------------------------|
//! | `scores.csv`          | `rep,pattern_idx,forecast,score,finite_flag`         |
//! | `interval_scores.csv` | same as `scores.csv` (Hawkes runs with intervals)    |
//! | `dm.csv`              | `rep,forecast_a,forecast_b,delta,t,p,decision`       |
//! | `table.csv`           | `forecast,<label>...`, empty diagonal                |
//! | `convergence.csv`     | `n,forecast,mean_corrected_diff`                     |
//! | `infogain.csv`        | `n,forecast,mean_information_gain`                   |
//! | `entropy.csv`         | `truth,reference_rate,entropy_gain`                  |
//!
//! Hawkes scores are per unit time. `decision` is `prefer_a`, `prefer_b` or
//! `none`; `delta` is the mean of `score_a − score_b`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::catalog::{self, ForecastSpec};
use crate::config::{ExperimentConfig, ExperimentKind, IntensityScoreChoice, ModelSpec};
use crate::error::{Error, Result};
use crate::evaluation::experiments::{
    compare_hawkes_forecasts, compare_intensity_forecasts, compare_product_densities, draw_hawkes_paths,
    draw_spatial_patterns, information_gain_experiment, Comparison, HawkesComparison, InfoGainTable, IntensityScore,
    SpatialModel,
};
use crate::evaluation::{
    convergence_experiment_spatial, convergence_experiment_temporal, pair_tests, ConvergenceTable, RepScores,
};
use crate::patterns::Window;
use crate::scores::{CondIntensityForecast, IntensityForecast};
use crate::simulate::{HawkesConfig, LgcpConfig, SeedSpec};

#[derive(Debug, Clone)]
pub enum Outcome {
    Comparison(Comparison),
    Hawkes(HawkesComparison),
    Convergence(ConvergenceTable),
    InfoGain(InfoGainTable),
}

fn intensity_forecasts(specs: &[ForecastSpec], window: &Window) -> Result<Vec<IntensityForecast>> {
    specs.iter().map(|s| catalog::intensity_forecast(s, window)).collect()
}

fn cond_forecasts(specs: &[ForecastSpec]) -> Result<Vec<CondIntensityForecast>> {
    specs.iter().map(catalog::cond_intensity_forecast).collect()
}

/// Spatial data model of a configuration.
pub fn spatial_model(config: &ExperimentConfig) -> Result<SpatialModel> {
    let window = &config.window;
    Ok(match &config.model {
        ModelSpec::Poisson { intensity } => {
            SpatialModel::poisson(catalog::intensity_forecast(intensity, window)?.density_fn().clone(), window)
        }
        ModelSpec::Lgcp { intensity, covariance, variance, scale, grid } => SpatialModel::lgcp_matching(
            catalog::intensity_forecast(intensity, window)?.density_fn().clone(),
            covariance.build(*variance, *scale),
            *grid,
        ),
        ModelSpec::Thomas { intensity, mean_offspring, sigma, buffer } => SpatialModel::thomas_matching(
            catalog::intensity_forecast(intensity, window)?.density_fn().clone(),
            window,
            *mean_offspring,
            *sigma,
            *buffer,
        )?,
        ModelSpec::HomogeneousPoisson { lambda } => {
            let lambda = *lambda;
            SpatialModel::Poisson { intensity: Arc::new(move |_: &[f64]| lambda), bound: lambda }
        }
        ModelSpec::StationaryLgcp { lambda, covariance, variance, scale, grid } => {
            let mean = lambda.ln() - 0.5 * variance;
            SpatialModel::Lgcp(LgcpConfig::new(
                Arc::new(move |_: &[f64]| mean),
                covariance.build(*variance, *scale),
                *grid,
            ))
        }
        ModelSpec::Hawkes { .. } => {
            return Err(Error::InvalidModel("a Hawkes model has no spatial patterns".into()));
        }
    })
}

fn hawkes_truth(config: &ExperimentConfig) -> Result<(ForecastSpec, HawkesConfig)> {
    match &config.model {
        ModelSpec::Hawkes { truth, horizon } => {
            let f = catalog::cond_intensity_forecast(truth)?;
            let h = f.hawkes_config(*horizon).expect("catalog forecasts are Hawkes");
            Ok((truth.clone(), h))
        }
        _ => Err(Error::InvalidModel("experiment needs a Hawkes model".into())),
    }
}

/// Runs the experiment; no files are written.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    let window = &config.window;
    match config.kind {
        ExperimentKind::Intensity => {
            let forecasts = intensity_forecasts(&config.forecasts, window)?;
            let patterns =
                draw_spatial_patterns(&spatial_model(config)?, window, config.patterns, config.repetitions, config.seed)?;
            let score = match config.score {
                Some(IntensityScoreChoice::S2) => IntensityScore::S2,
                _ => IntensityScore::S1 { c: config.c },
            };
            Ok(Outcome::Comparison(compare_intensity_forecasts(&forecasts, &patterns, score, config.test)?))
        }
        ExperimentKind::Product => {
            let forecasts: Vec<_> = config
                .forecasts
                .iter()
                .map(|s| catalog::product_density_forecast(s, window))
                .collect::<Result<_>>()?;
            let patterns =
                draw_spatial_patterns(&spatial_model(config)?, window, config.patterns, config.repetitions, config.seed)?;
            Ok(Outcome::Comparison(compare_product_densities(&forecasts, &patterns, config.c, config.test)?))
        }
        ExperimentKind::Hawkes => {
            let (truth, model) = hawkes_truth(config)?;
            let forecasts = cond_forecasts(&config.forecasts)?;
            let truth_idx = config.forecasts.iter().position(|f| f.label() == truth.label()).expect("validated");
            let paths = draw_hawkes_paths(&model, config.repetitions, config.seed)?;
            Ok(Outcome::Hawkes(compare_hawkes_forecasts(&forecasts, truth_idx, &paths, config.interval_count)?))
        }
        ExperimentKind::ConvergenceSpatial => {
            let forecasts = intensity_forecasts(&config.forecasts, window)?;
            let model = spatial_model(config)?;
            let sample = |seed: SeedSpec| model.sample(window, seed);
            Ok(Outcome::Convergence(convergence_experiment_spatial(
                &forecasts,
                &sample,
                window,
                &config.ns,
                config.repetitions,
                config.seed,
            )?))
        }
        ExperimentKind::ConvergenceTemporal => {
            let (_, model) = hawkes_truth(config)?;
            let forecasts = cond_forecasts(&config.forecasts)?;
            let sample = |seed: SeedSpec| crate::simulate::sample_hawkes(&model, seed);
            Ok(Outcome::Convergence(convergence_experiment_temporal(
                &forecasts,
                &sample,
                model.horizon,
                &config.ns,
                config.repetitions,
                config.seed,
            )?))
        }
        ExperimentKind::InfoGain => {
            let (truth, model) = hawkes_truth(config)?;
            let forecasts = cond_forecasts(&config.forecasts)?;
            let paths = draw_hawkes_paths(&model, config.repetitions, config.seed)?;
            let truth = catalog::cond_intensity_forecast(&truth)?;
            Ok(Outcome::InfoGain(information_gain_experiment(&forecasts, &truth, &paths, &config.ns, config.seed)?))
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn writer(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<csv::Writer<std::fs::File>> {
    let path = dir.join(name);
    let w = csv::Writer::from_path(&path)?;
    written.push(path);
    Ok(w)
}

fn write_scores(
    dir: &Path,
    name: &str,
    labels: &[String],
    reps: &[RepScores],
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    let mut w = writer(dir, name, written)?;
    w.write_record(["rep", "pattern_idx", "forecast", "score", "finite_flag"])?;
    for (rep, scores) in reps.iter().enumerate() {
        for (label, row) in labels.iter().zip(scores) {
            for (i, &s) in row.iter().enumerate() {
                let flag = if s.is_finite() { "1" } else { "0" };
                w.write_record([rep.to_string(), i.to_string(), label.clone(), num(s), flag.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `[rep][forecast]` rows as one-pattern repetitions.
fn as_rep_scores(rows: &[Vec<f64>]) -> Vec<RepScores> {
    rows.iter().map(|r| r.iter().map(|&s| vec![s]).collect()).collect()
}

/// Writes the CSV files of an outcome into `dir` (created if missing).
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match outcome {
        Outcome::Comparison(c) => {
            write_scores(dir, "scores.csv", &c.labels, &c.reps, &mut written)?;
            let mut w = writer(dir, "dm.csv", &mut written)?;
            w.write_record(["rep", "forecast_a", "forecast_b", "delta", "t", "p", "decision"])?;
            for t in pair_tests(&c.reps, c.table.test)? {
                let (delta, tstat, p, decision) = match t.result {
                    Some(r) => (r.mean, r.t, r.p_value, r.decision.as_str()),
                    None => (f64::NAN, f64::NAN, f64::NAN, "none"),
                };
                w.write_record([
                    t.rep.to_string(),
                    c.labels[t.row].clone(),
                    c.labels[t.column].clone(),
                    num(delta),
                    num(tstat),
                    num(p),
                    decision.to_string(),
                ])?;
            }
            w.flush()?;
            let mut w = writer(dir, "table.csv", &mut written)?;
            let mut header = vec!["forecast".to_string()];
            header.extend(c.labels.iter().cloned());
            w.write_record(&header)?;
            for (i, label) in c.labels.iter().enumerate() {
                let mut row = vec![label.clone()];
                row.extend(
                    c.table.fractions[i].iter().enumerate().map(|(j, v)| if i == j { String::new() } else { num(*v) }),
                );
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        Outcome::Hawkes(h) => {
            write_scores(dir, "scores.csv", &h.labels, &as_rep_scores(&h.exact), &mut written)?;
            if let Some(interval) = &h.interval {
                write_scores(dir, "interval_scores.csv", &h.labels, &as_rep_scores(interval), &mut written)?;
            }
        }
        Outcome::Convergence(t) => {
            let mut w = writer(dir, "convergence.csv", &mut written)?;
            w.write_record(["n", "forecast", "mean_corrected_diff"])?;
            for (i, n) in t.ns.iter().enumerate() {
                for (label, v) in t.labels.iter().zip(&t.mean[i]) {
                    w.write_record([n.to_string(), label.clone(), num(*v)])?;
                }
            }
            w.flush()?;
        }
        Outcome::InfoGain(g) => {
            let mut w = writer(dir, "infogain.csv", &mut written)?;
            w.write_record(["n", "forecast", "mean_information_gain"])?;
            for (i, n) in g.ns.iter().enumerate() {
                for (label, v) in g.labels.iter().zip(&g.mean[i]) {
                    w.write_record([n.to_string(), label.clone(), num(*v)])?;
                }
            }
            w.flush()?;
            let mut w = writer(dir, "entropy.csv", &mut written)?;
            w.write_record(["truth", "reference_rate", "entropy_gain"])?;
            w.write_record([g.truth.clone(), num(g.reference_rate), num(g.entropy_gain)])?;
            w.flush()?;
        }
    }
    Ok(written)
}

/// Human-readable summary printed by the CLI.
pub fn summary(config: &ExperimentConfig, outcome: &Outcome) -> String {
    let mut out = format!(
        "experiment {} ({}), seed {}, {} repetitions\n",
        config.name,
        config.kind.as_str(),
        config.seed,
        config.repetitions
    );
    match outcome {
        Outcome::Comparison(c) => {
            let _ = writeln!(
                out,
                "fraction of repetitions in which the row forecast was preferred ({} DM test, alpha = {}, N = {})",
                c.table.test.sidedness.as_str(),
                c.table.test.alpha,
                config.patterns
            );
            out.push_str(&c.table.to_text());
            let _ = writeln!(
                out,
                "infinite scores: {} of {} paired comparisons dropped ({:.3}%)",
                c.table.dropped,
                c.table.compared,
                100.0 * c.table.drop_rate()
            );
        }
        Outcome::Hawkes(h) => {
            let _ = writeln!(out, "score differences per unit time, competitor minus truth ({})", h.labels[h.truth]);
            for (label, m) in h.labels.iter().zip(h.median_differences()) {
                let _ = writeln!(out, "  {label:>8}  median {m:+.4}");
            }
            if let (Some(n), Some(pairs), Some(full)) = (h.interval_count, h.truth_pair_agreement(), h.ranking_agreement())
            {
                let _ = writeln!(out, "interval scores with n = {n}: truth-vs-forecast order agreement");
                for (label, a) in h.labels.iter().zip(pairs) {
                    let _ = writeln!(out, "  {label:>8}  {a:.3}");
                }
                let _ = writeln!(out, "  full ranking agreement {full:.3}");
            }
        }
        Outcome::Convergence(t) => {
            let _ = writeln!(out, "mean corrected differences (approximate minus exact score)");
            let _ = write!(out, "{:>6}", "n");
            for l in &t.labels {
                let _ = write!(out, " {l:>10}");
            }
            out.push('\n');
            for (i, n) in t.ns.iter().enumerate() {
                let _ = write!(out, "{n:>6}");
                for v in &t.mean[i] {
                    let _ = write!(out, " {v:>10.4}");
                }
                out.push('\n');
            }
        }
        Outcome::InfoGain(g) => {
            let _ = writeln!(
                out,
                "mean information gain per unit time against Poisson rate {:.4}; entropy gain of {} = {:.4}",
                g.reference_rate, g.truth, g.entropy_gain
            );
            for (i, n) in g.ns.iter().enumerate() {
                let _ = write!(out, "{n:>6}");
                for (l, v) in g.labels.iter().zip(&g.mean[i]) {
                    let _ = write!(out, "  {l} {v:+.4}");
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Executes, writes outputs and returns the summary text.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<String> {
    let outcome = execute(config)?;
    write_outputs(&outcome, out_dir)?;
    Ok(summary(config, &outcome))
}
