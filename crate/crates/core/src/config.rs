//! Experiment configuration files.
//!
//! One TOML file per experiment with the sections `[experiment]`, `[model]`,
//! `[forecasts]`, and optionally `[score]` and `[grid]`. Forecasts are catalog
//! names with numeric overrides, e.g. `"f3(scale=50)"`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::catalog::{self, CatalogKind, ForecastSpec};
use crate::error::{Error, Result};
use crate::evaluation::{DmSpec, Sidedness};
use crate::patterns::Window;
use crate::simulate::Covariance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Intensity,
    Product,
    Hawkes,
    ConvergenceSpatial,
    ConvergenceTemporal,
    InfoGain,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Intensity => "intensity",
            Self::Product => "product",
            Self::Hawkes => "hawkes",
            Self::ConvergenceSpatial => "convergence-spatial",
            Self::ConvergenceTemporal => "convergence-temporal",
            Self::InfoGain => "infogain",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Self::Intensity,
            Self::Product,
            Self::Hawkes,
            Self::ConvergenceSpatial,
            Self::ConvergenceTemporal,
            Self::InfoGain,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }

    fn is_temporal(self) -> bool {
        matches!(self, Self::Hawkes | Self::ConvergenceTemporal | Self::InfoGain)
    }
}

/// Data-generating process.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Inhomogeneous Poisson with a catalog intensity.
    Poisson { intensity: ForecastSpec },
    /// LGCP whose intensity matches a catalog intensity.
    Lgcp { intensity: ForecastSpec, covariance: CovarianceKind, variance: f64, scale: f64, grid: usize },
    Thomas { intensity: ForecastSpec, mean_offspring: f64, sigma: f64, buffer: f64 },
    /// Homogeneous Poisson of rate `lambda`.
    HomogeneousPoisson { lambda: f64 },
    /// Stationary LGCP of intensity `lambda`.
    StationaryLgcp { lambda: f64, covariance: CovarianceKind, variance: f64, scale: f64, grid: usize },
    /// Hawkes process of a triggering catalog entry.
    Hawkes { truth: ForecastSpec, horizon: f64 },
}

/// Covariance family of a latent Gaussian field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    /// `variance · exp(−r / scale)`
    Exponential,
    /// `variance · exp(−(r / scale)²)`
    Gaussian,
}

impl CovarianceKind {
    pub fn build(self, variance: f64, scale: f64) -> Covariance {
        match self {
            Self::Exponential => Covariance::Exponential { variance, scale },
            Self::Gaussian => Covariance::SquaredExponential { variance, scale },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensityScoreChoice {
    S1,
    S2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: String,
    pub seed: u64,
    pub repetitions: usize,
    /// Patterns per repetition.
    pub patterns: usize,
    pub test: DmSpec,
    pub window: Window,
    pub model: ModelSpec,
    pub forecasts: Vec<ForecastSpec>,
    pub score: Option<IntensityScoreChoice>,
    /// Weight of the count or pair-mass term.
    pub c: f64,
    /// Interval count for Hawkes interval scores.
    pub interval_count: Option<usize>,
    /// Grid sizes per axis (spatial) or interval counts (temporal).
    pub ns: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    model: RawModel,
    forecasts: RawForecasts,
    #[serde(default)]
    score: RawScore,
    #[serde(default)]
    grid: RawGrid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: String,
    name: Option<String>,
    seed: Option<u64>,
    repetitions: Option<usize>,
    patterns: Option<usize>,
    alpha: Option<f64>,
    test: Option<String>,
    window: Option<[f64; 4]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    intensity: Option<String>,
    truth: Option<String>,
    lambda: Option<f64>,
    variance: Option<f64>,
    scale: Option<f64>,
    grid: Option<usize>,
    covariance: Option<String>,
    mean_offspring: Option<f64>,
    sigma: Option<f64>,
    buffer: Option<f64>,
    horizon: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForecasts {
    names: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScore {
    kind: Option<String>,
    c: Option<f64>,
    intervals: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    ns: Option<Vec<usize>>,
    n_min: Option<usize>,
    n_max: Option<usize>,
}

const DEFAULT_SPATIAL_NS: std::ops::RangeInclusive<usize> = 1..=35;
const DEFAULT_TEMPORAL_NS: &[usize] = &[5, 10, 25, 50, 100, 250, 500, 1000];

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path, format!("cannot read: {e}")))?;
        Self::from_str(&text, path)
    }

    /// Parses and validates; `origin` is used only in diagnostics.
    pub fn from_str(text: &str, origin: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::config(origin, e.to_string()))?;
        Validator { origin: origin.to_path_buf() }.build(raw)
    }

    /// Temporal horizon of Hawkes-based experiments.
    pub fn horizon(&self) -> Option<f64> {
        match self.model {
            ModelSpec::Hawkes { horizon, .. } => Some(horizon),
            _ => None,
        }
    }
}

struct Validator {
    origin: PathBuf,
}

impl Validator {
    fn err(&self, field: &str, message: impl std::fmt::Display) -> Error {
        Error::config(&self.origin, format!("{field}: {message}"))
    }

    fn require<T>(&self, field: &str, v: Option<T>) -> Result<T> {
        v.ok_or_else(|| self.err(field, "missing required field"))
    }

    fn positive(&self, field: &str, v: f64) -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(field, format!("must be positive and finite, got {v}")))
        }
    }

    fn spec(&self, field: &str, kind: CatalogKind, text: &str) -> Result<ForecastSpec> {
        let spec = ForecastSpec::parse(text).map_err(|e| self.err(field, e))?;
        catalog::entry(kind, &spec.name).map_err(|e| self.err(field, e))?;
        // resolve parameters now so bad overrides fail at load time
        let check = match kind {
            CatalogKind::Intensity => catalog::intensity_forecast(&spec, &Window::unit_square()).map(|_| ()),
            CatalogKind::ProductDensity => catalog::product_density_radial(&spec).map(|_| ()),
            CatalogKind::Triggering => catalog::cond_intensity_forecast(&spec).map(|_| ()),
        };
        check.map_err(|e| self.err(field, e))?;
        Ok(spec)
    }

    fn build(&self, raw: RawConfig) -> Result<ExperimentConfig> {
        let e = &raw.experiment;
        let kind = ExperimentKind::parse(&e.kind).ok_or_else(|| {
            self.err(
                "experiment.kind",
                format!(
                    "unknown kind '{}' (expected intensity, product, hawkes, convergence-spatial, \
                     convergence-temporal or infogain)",
                    e.kind
                ),
            )
        })?;
        let repetitions = e.repetitions.unwrap_or(500);
        if repetitions == 0 {
            return Err(self.err("experiment.repetitions", "must be at least 1"));
        }
        let patterns = e.patterns.unwrap_or(20);
        if matches!(kind, ExperimentKind::Intensity | ExperimentKind::Product) && patterns < 2 {
            return Err(self.err("experiment.patterns", "preference tables need at least 2 patterns"));
        }
        let alpha = e.alpha.unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(self.err("experiment.alpha", format!("must lie in (0, 1), got {alpha}")));
        }
        let sidedness = match e.test.as_deref().unwrap_or("one-sided") {
            "one-sided" => Sidedness::OneSided,
            "two-sided" => Sidedness::TwoSided,
            other => return Err(self.err("experiment.test", format!("expected one-sided or two-sided, got '{other}'"))),
        };
        let window = match e.window {
            Some([x0, x1, y0, y1]) => Window::rectangle(x0, x1, y0, y1).map_err(|err| self.err("experiment.window", err))?,
            None => Window::unit_square(),
        };

        let model = self.model(kind, &raw.model)?;
        let forecast_kind = match kind {
            ExperimentKind::Intensity | ExperimentKind::ConvergenceSpatial => CatalogKind::Intensity,
            ExperimentKind::Product => CatalogKind::ProductDensity,
            _ => CatalogKind::Triggering,
        };
        if raw.forecasts.names.is_empty() {
            return Err(self.err("forecasts.names", "at least one forecast is required"));
        }
        let forecasts = raw
            .forecasts
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| self.spec(&format!("forecasts.names[{i}]"), forecast_kind, n))
            .collect::<Result<Vec<_>>>()?;
        let mut labels: Vec<String> = forecasts.iter().map(|f| f.label()).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(self.err("forecasts.names", "duplicate forecast"));
        }
        if let ModelSpec::Hawkes { truth, .. } = &model {
            if kind != ExperimentKind::ConvergenceTemporal && !forecasts.iter().any(|f| f.label() == truth.label()) {
                return Err(self.err("model.truth", format!("'{}' must also appear in forecasts.names", truth.label())));
            }
        }

        let s = &raw.score;
        let score = match kind {
            ExperimentKind::Intensity => Some(match s.kind.as_deref().unwrap_or("S1") {
                "S1" | "s1" => IntensityScoreChoice::S1,
                "S2" | "s2" => IntensityScoreChoice::S2,
                other => return Err(self.err("score.kind", format!("expected S1 or S2, got '{other}'"))),
            }),
            _ => {
                if s.kind.is_some() {
                    return Err(self.err("score.kind", format!("not used by {} experiments", kind.as_str())));
                }
                None
            }
        };
        let default_c = if kind == ExperimentKind::Product { 1e-5 } else { 0.1 };
        let c = self.positive("score.c", s.c.unwrap_or(default_c))?;
        let interval_count = match (kind, s.intervals) {
            (ExperimentKind::Hawkes, Some(0)) => return Err(self.err("score.intervals", "must be at least 1")),
            (ExperimentKind::Hawkes, v) => v,
            (_, Some(_)) => return Err(self.err("score.intervals", "only used by hawkes experiments")),
            (_, None) => None,
        };

        let ns = self.ns(kind, &raw.grid)?;
        Ok(ExperimentConfig {
            kind,
            name: e.name.clone().unwrap_or_else(|| kind.as_str().to_string()),
            seed: e.seed.unwrap_or(1),
            repetitions,
            patterns,
            test: DmSpec { alpha, sidedness },
            window,
            model,
            forecasts,
            score,
            c,
            interval_count,
            ns,
        })
    }

    fn model(&self, kind: ExperimentKind, m: &RawModel) -> Result<ModelSpec> {
        let allowed: &[&str] = match kind {
            ExperimentKind::Intensity => &["poisson", "lgcp", "thomas"],
            ExperimentKind::ConvergenceSpatial => &["poisson", "lgcp", "thomas"],
            ExperimentKind::Product => &["homogeneous-poisson", "stationary-lgcp"],
            _ => &["hawkes"],
        };
        if !allowed.contains(&m.kind.as_str()) {
            return Err(self.err(
                "model.kind",
                format!("'{}' not available for {} experiments (expected {})", m.kind, kind.as_str(), allowed.join(", ")),
            ));
        }
        let intensity = || -> Result<ForecastSpec> {
            let text = m.intensity.as_deref().unwrap_or("f0");
            self.spec("model.intensity", CatalogKind::Intensity, text)
        };
        let grid = || -> Result<usize> {
            match m.grid.unwrap_or(64) {
                0 => Err(self.err("model.grid", "must be at least 1")),
                g => Ok(g),
            }
        };
        let covariance = |default: CovarianceKind| -> Result<CovarianceKind> {
            match m.covariance.as_deref() {
                None => Ok(default),
                Some("exponential") => Ok(CovarianceKind::Exponential),
                Some("gaussian") => Ok(CovarianceKind::Gaussian),
                Some(other) => Err(self.err("model.covariance", format!("expected exponential or gaussian, got '{other}'"))),
            }
        };
        let spec = match m.kind.as_str() {
            "poisson" => ModelSpec::Poisson { intensity: intensity()? },
            "lgcp" => ModelSpec::Lgcp {
                intensity: intensity()?,
                covariance: covariance(CovarianceKind::Exponential)?,
                variance: self.positive("model.variance", m.variance.unwrap_or(0.25))?,
                scale: self.positive("model.scale", m.scale.unwrap_or(1.0))?,
                grid: grid()?,
            },
            "thomas" => {
                let sigma = self.positive("model.sigma", m.sigma.unwrap_or(0.05))?;
                let buffer = m.buffer.unwrap_or(4.0 * sigma);
                if !(buffer >= 4.0 * sigma) {
                    return Err(self.err("model.buffer", format!("must be at least 4*sigma = {}", 4.0 * sigma)));
                }
                ModelSpec::Thomas {
                    intensity: intensity()?,
                    mean_offspring: self.positive("model.mean_offspring", m.mean_offspring.unwrap_or(2.0))?,
                    sigma,
                    buffer,
                }
            }
            "homogeneous-poisson" => {
                ModelSpec::HomogeneousPoisson { lambda: self.positive("model.lambda", m.lambda.unwrap_or(40.0))? }
            }
            "stationary-lgcp" => ModelSpec::StationaryLgcp {
                lambda: self.positive("model.lambda", m.lambda.unwrap_or(40.0))?,
                covariance: covariance(CovarianceKind::Gaussian)?,
                variance: self.positive("model.variance", m.variance.unwrap_or(std::f64::consts::LN_2))?,
                scale: self.positive("model.scale", m.scale.unwrap_or(0.05))?,
                grid: grid()?,
            },
            "hawkes" => {
                let truth = self.spec("model.truth", CatalogKind::Triggering, &self.require("model.truth", m.truth.clone())?)?;
                let horizon = self.positive("model.horizon", m.horizon.unwrap_or(50.0))?;
                let config = catalog::cond_intensity_forecast(&truth)
                    .ok()
                    .and_then(|f| f.hawkes_config(horizon))
                    .ok_or_else(|| self.err("model.truth", "not a Hawkes model"))?;
                config.validate().map_err(|e| self.err("model.truth", e))?;
                ModelSpec::Hawkes { truth, horizon }
            }
            _ => unreachable!("checked against the allowed list"),
        };
        let unused: &[(&str, bool)] = &[
            ("model.intensity", m.intensity.is_some() && !matches!(spec, ModelSpec::Poisson { .. } | ModelSpec::Lgcp { .. } | ModelSpec::Thomas { .. })),
            ("model.truth", m.truth.is_some() && !matches!(spec, ModelSpec::Hawkes { .. })),
            ("model.horizon", m.horizon.is_some() && !matches!(spec, ModelSpec::Hawkes { .. })),
            ("model.lambda", m.lambda.is_some() && !matches!(spec, ModelSpec::HomogeneousPoisson { .. } | ModelSpec::StationaryLgcp { .. })),
            ("model.variance", m.variance.is_some() && !matches!(spec, ModelSpec::Lgcp { .. } | ModelSpec::StationaryLgcp { .. })),
            ("model.scale", m.scale.is_some() && !matches!(spec, ModelSpec::Lgcp { .. } | ModelSpec::StationaryLgcp { .. })),
            ("model.covariance", m.covariance.is_some() && !matches!(spec, ModelSpec::Lgcp { .. } | ModelSpec::StationaryLgcp { .. })),
            ("model.grid", m.grid.is_some() && !matches!(spec, ModelSpec::Lgcp { .. } | ModelSpec::StationaryLgcp { .. })),
            ("model.mean_offspring", m.mean_offspring.is_some() && !matches!(spec, ModelSpec::Thomas { .. })),
            ("model.sigma", m.sigma.is_some() && !matches!(spec, ModelSpec::Thomas { .. })),
            ("model.buffer", m.buffer.is_some() && !matches!(spec, ModelSpec::Thomas { .. })),
        ];
        if let Some((field, _)) = unused.iter().find(|(_, bad)| *bad) {
            return Err(self.err(field, format!("not used by model '{}'", m.kind)));
        }
        Ok(spec)
    }

    fn ns(&self, kind: ExperimentKind, g: &RawGrid) -> Result<Vec<usize>> {
        let used = matches!(
            kind,
            ExperimentKind::ConvergenceSpatial | ExperimentKind::ConvergenceTemporal | ExperimentKind::InfoGain
        );
        let given = g.ns.is_some() || g.n_min.is_some() || g.n_max.is_some();
        if !used {
            if given {
                return Err(self.err("grid", format!("not used by {} experiments", kind.as_str())));
            }
            return Ok(Vec::new());
        }
        let ns: Vec<usize> = match (&g.ns, g.n_min, g.n_max) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(self.err("grid", "give either ns or n_min/n_max, not both"))
            }
            (Some(v), None, None) => v.clone(),
            (None, lo, hi) if lo.is_some() || hi.is_some() => {
                let lo = self.require("grid.n_min", lo)?;
                let hi = self.require("grid.n_max", hi)?;
                if lo > hi {
                    return Err(self.err("grid.n_min", format!("{lo} exceeds n_max {hi}")));
                }
                (lo..=hi).collect()
            }
            _ if kind.is_temporal() => DEFAULT_TEMPORAL_NS.to_vec(),
            _ => DEFAULT_SPATIAL_NS.collect(),
        };
        if ns.is_empty() || ns.contains(&0) {
            return Err(self.err("grid.ns", "needs at least one value, all positive"));
        }
        Ok(ns)
    }
}
