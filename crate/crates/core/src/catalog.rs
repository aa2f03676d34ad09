//! Named forecast families used by the bundled experiments.
//!
//! Entries are addressed by name with optional numeric overrides, written
//! `f3(scale=50, cx=0.25)`.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;
use std::sync::Arc;

use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::patterns::Window;
use crate::scores::{distance_integral, CondIntensityForecast, IntensityForecast, ProductDensityForecast};
use crate::triggering::TriggeringKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogKind {
    Intensity,
    ProductDensity,
    Triggering,
}

impl CatalogKind {
    fn title(self) -> &'static str {
        match self {
            Self::Intensity => "intensity forecasts on [0,1]^2",
            Self::ProductDensity => "product density forecasts rho(r), stationary and isotropic",
            Self::Triggering => "Hawkes triggering functions g(t), background rate nu",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub kind: CatalogKind,
    pub name: &'static str,
    pub formula: &'static str,
    pub defaults: &'static [(&'static str, f64)],
    pub note: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        kind: CatalogKind::Intensity,
        name: "f0",
        formula: "30*sqrt(x^2+y^2)",
        defaults: &[("scale", 30.0), ("cx", 0.0), ("cy", 0.0)],
        note: "true intensity of the spatial data models",
    },
    CatalogEntry {
        kind: CatalogKind::Intensity,
        name: "f1",
        formula: "40*sqrt((x-0.2)^2+(y-0.1)^2)",
        defaults: &[("scale", 40.0), ("cx", 0.2), ("cy", 0.1)],
        note: "shifted cone, nearly optimal",
    },
    CatalogEntry {
        kind: CatalogKind::Intensity,
        name: "f2",
        formula: "11.78*(x+3*y)",
        defaults: &[("scale", 11.78), ("wx", 1.0), ("wy", 3.0)],
        note: "linear",
    },
    CatalogEntry {
        kind: CatalogKind::Intensity,
        name: "f3",
        formula: "45*sqrt((x-0.2)^2+(y-0.1)^2)",
        defaults: &[("scale", 45.0), ("cx", 0.2), ("cy", 0.1)],
        note: "f1 with inflated scale",
    },
    CatalogEntry {
        kind: CatalogKind::Intensity,
        name: "f4",
        formula: "9.5*(1/sqrt(1.2-x)+2*(1-y))",
        defaults: &[("scale", 9.5), ("shift", 1.2), ("weight", 2.0)],
        note: "different shape",
    },
    CatalogEntry {
        kind: CatalogKind::Intensity,
        name: "f5",
        formula: "46*exp(-2*(x^2+(y-0.5)^2))",
        defaults: &[("scale", 46.0), ("rate", 2.0), ("cx", 0.0), ("cy", 0.5)],
        note: "different shape",
    },
    CatalogEntry {
        kind: CatalogKind::ProductDensity,
        name: "f1",
        formula: "exp(2*mu+sigma2*(1+exp(-(r/scale)^2))), mu=log(lambda)-sigma2/2",
        defaults: &[("lambda", 40.0), ("sigma2", LN_2), ("scale", 0.05)],
        note: "LGCP with Gaussian covariance (clustering)",
    },
    CatalogEntry {
        kind: CatalogKind::ProductDensity,
        name: "f2",
        formula: "exp(2*mu+sigma2*(1+exp(-r/scale))), mu=log(lambda)-sigma2/2",
        defaults: &[("lambda", 40.0), ("sigma2", LN_2), ("scale", 0.05)],
        note: "LGCP with exponential covariance (clustering)",
    },
    CatalogEntry {
        kind: CatalogKind::ProductDensity,
        name: "f3",
        formula: "lambda^2",
        defaults: &[("lambda", 40.0)],
        note: "homogeneous Poisson",
    },
    CatalogEntry {
        kind: CatalogKind::ProductDensity,
        name: "f4",
        formula: "lambda^2*(1-exp(-2*r/gamma))",
        defaults: &[("lambda", 40.0), ("gamma", 0.06)],
        note: "DPP with exponential covariance (inhibition)",
    },
    CatalogEntry {
        kind: CatalogKind::ProductDensity,
        name: "f5",
        formula: "lambda^2*(1-exp(-2*(r/gamma)^2))",
        defaults: &[("lambda", 40.0), ("gamma", 0.06)],
        note: "DPP with Gaussian covariance (inhibition)",
    },
    CatalogEntry {
        kind: CatalogKind::Triggering,
        name: "f1",
        formula: "2*exp(-4*t)",
        defaults: &[("nu", 2.0), ("a", 2.0), ("b", 4.0)],
        note: "branching ratio 0.5",
    },
    CatalogEntry {
        kind: CatalogKind::Triggering,
        name: "f2",
        formula: "1.25*exp(-2*t)",
        defaults: &[("nu", 2.0), ("a", 1.25), ("b", 2.0)],
        note: "branching ratio 0.625",
    },
    CatalogEntry {
        kind: CatalogKind::Triggering,
        name: "f3",
        formula: "2*exp(-4.5*t^2)",
        defaults: &[("nu", 2.0), ("a", 2.0), ("b", 4.5)],
        note: "branching ratio 2*sqrt(pi/18)",
    },
    CatalogEntry {
        kind: CatalogKind::Triggering,
        name: "f4",
        formula: "2*max(4-6*t,0)",
        defaults: &[("nu", 2.0), ("a", 2.0), ("c", 4.0), ("d", 6.0)],
        note: "branching ratio 8/3, usable as a report only",
    },
    CatalogEntry {
        kind: CatalogKind::Triggering,
        name: "f5",
        formula: "1{t in [0,0.8]}",
        defaults: &[("nu", 2.0), ("height", 1.0), ("width", 0.8)],
        note: "branching ratio 0.8",
    },
];

/// Catalog reference with resolved overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSpec {
    pub name: String,
    pub overrides: BTreeMap<String, f64>,
}

impl ForecastSpec {
    /// Parses `name` or `name(key=value, ...)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, rest) = match text.find('(') {
            Some(i) => (&text[..i], Some(&text[i + 1..])),
            None => (text, None),
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::UnknownCatalogEntry(text.to_string()));
        }
        let mut overrides = BTreeMap::new();
        if let Some(rest) = rest {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::UnknownCatalogEntry(format!("{text}: missing ')'")))?;
            for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| Error::UnknownCatalogEntry(format!("{text}: expected key=value, got '{item}'")))?;
                let value: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::UnknownCatalogEntry(format!("{text}: '{}' is not a number", v.trim())))?;
                overrides.insert(k.trim().to_string(), value);
            }
        }
        Ok(Self { name: name.to_string(), overrides })
    }

    /// Display label; the bare name when no overrides are given.
    pub fn label(&self) -> String {
        if self.overrides.is_empty() {
            return self.name.clone();
        }
        let args: Vec<String> = self.overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.name, args.join(","))
    }
}

pub fn entry(kind: CatalogKind, name: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.kind == kind && e.name == name)
        .ok_or_else(|| Error::UnknownCatalogEntry(format!("{name} ({})", kind.title())))
}

/// Defaults merged with overrides; unknown keys are rejected.
fn resolve(kind: CatalogKind, spec: &ForecastSpec) -> Result<BTreeMap<&'static str, f64>> {
    let e = entry(kind, &spec.name)?;
    let mut params: BTreeMap<&'static str, f64> = e.defaults.iter().copied().collect();
    for (k, v) in &spec.overrides {
        let slot = params.keys().copied().find(|p| p == k).ok_or_else(|| {
            let known: Vec<&str> = e.defaults.iter().map(|(n, _)| *n).collect();
            Error::UnknownCatalogEntry(format!("{}: unknown parameter '{k}' (known: {})", spec.name, known.join(", ")))
        })?;
        if !v.is_finite() {
            return Err(Error::UnknownCatalogEntry(format!("{}: parameter '{k}' must be finite", spec.name)));
        }
        params.insert(slot, *v);
    }
    Ok(params)
}

/// `∫ₐᵇ exp(−r (x − c)²) dx`.
fn gaussian_segment(a: f64, b: f64, rate: f64, c: f64) -> f64 {
    let s = rate.sqrt();
    0.5 * (PI / rate).sqrt() * (erf(s * (b - c)) - erf(s * (a - c)))
}

pub fn intensity_forecast(spec: &ForecastSpec, window: &Window) -> Result<IntensityForecast> {
    if window.dim() != 2 {
        return Err(Error::InvalidModel("catalog intensities are planar".into()));
    }
    let p = resolve(CatalogKind::Intensity, spec)?;
    let label = spec.label();
    let scale = p["scale"];
    match spec.name.as_str() {
        "f0" | "f1" | "f3" => {
            let c = [p["cx"], p["cy"]];
            IntensityForecast::with_exact_mass(
                label,
                Arc::new(move |s: &[f64]| scale * (s[0] - c[0]).hypot(s[1] - c[1])),
                window.clone(),
                move |b: &Window| scale * distance_integral(c, b),
            )
        }
        "f2" => {
            let (wx, wy) = (p["wx"], p["wy"]);
            IntensityForecast::with_exact_mass(
                label,
                Arc::new(move |s: &[f64]| scale * (wx * s[0] + wy * s[1])),
                window.clone(),
                move |b: &Window| {
                    let mx = 0.5 * (b.lower()[0] + b.upper()[0]);
                    let my = 0.5 * (b.lower()[1] + b.upper()[1]);
                    scale * b.volume() * (wx * mx + wy * my)
                },
            )
        }
        "f4" => {
            let (shift, weight) = (p["shift"], p["weight"]);
            if shift <= window.upper()[0] {
                return Err(Error::InvalidModel(format!("f4: shift {shift} must exceed the window's x range")));
            }
            IntensityForecast::with_exact_mass(
                label,
                Arc::new(move |s: &[f64]| scale * (1.0 / (shift - s[0]).sqrt() + weight * (1.0 - s[1]))),
                window.clone(),
                move |b: &Window| {
                    let (x0, x1) = (b.lower()[0], b.upper()[0]);
                    let (y0, y1) = (b.lower()[1], b.upper()[1]);
                    let ix = 2.0 * ((shift - x0).sqrt() - (shift - x1).sqrt());
                    let iy = (y1 - y0) - 0.5 * (y1 * y1 - y0 * y0);
                    scale * (ix * (y1 - y0) + weight * (x1 - x0) * iy)
                },
            )
        }
        "f5" => {
            let (rate, cx, cy) = (p["rate"], p["cx"], p["cy"]);
            if rate <= 0.0 {
                return Err(Error::InvalidModel("f5: rate must be positive".into()));
            }
            IntensityForecast::with_exact_mass(
                label,
                Arc::new(move |s: &[f64]| scale * (-rate * ((s[0] - cx).powi(2) + (s[1] - cy).powi(2))).exp()),
                window.clone(),
                move |b: &Window| {
                    scale
                        * gaussian_segment(b.lower()[0], b.upper()[0], rate, cx)
                        * gaussian_segment(b.lower()[1], b.upper()[1], rate, cy)
                },
            )
        }
        _ => unreachable!("resolved catalog entry"),
    }
}

/// Radial product density `ρ₀(r)` of a catalog entry.
pub fn product_density_radial(spec: &ForecastSpec) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    let p = resolve(CatalogKind::ProductDensity, spec)?;
    let lambda = p["lambda"];
    let lam2 = lambda * lambda;
    Ok(match spec.name.as_str() {
        "f1" | "f2" => {
            let sigma2 = p["sigma2"];
            let scale = p["scale"];
            let mu = lambda.ln() - 0.5 * sigma2;
            if spec.name == "f1" {
                Arc::new(move |r: f64| (2.0 * mu + sigma2 * (1.0 + (-(r / scale).powi(2)).exp())).exp())
            } else {
                Arc::new(move |r: f64| (2.0 * mu + sigma2 * (1.0 + (-r / scale).exp())).exp())
            }
        }
        "f3" => Arc::new(move |_| lam2),
        "f4" => {
            let gamma = p["gamma"];
            Arc::new(move |r: f64| -lam2 * (-2.0 * r / gamma).exp_m1())
        }
        "f5" => {
            let gamma = p["gamma"];
            Arc::new(move |r: f64| -lam2 * (-2.0 * (r / gamma).powi(2)).exp_m1())
        }
        _ => unreachable!("resolved catalog entry"),
    })
}

pub fn product_density_forecast(spec: &ForecastSpec, window: &Window) -> Result<ProductDensityForecast> {
    ProductDensityForecast::new(spec.label(), product_density_radial(spec)?, window.clone())
}

pub fn triggering_kernel(spec: &ForecastSpec) -> Result<TriggeringKernel> {
    let p = resolve(CatalogKind::Triggering, spec)?;
    let kernel = match spec.name.as_str() {
        "f1" | "f2" => TriggeringKernel::Exponential { scale: p["a"], rate: p["b"] },
        "f3" => TriggeringKernel::Gaussian { scale: p["a"], rate: p["b"] },
        "f4" => TriggeringKernel::Linear { scale: p["a"], intercept: p["c"], slope: p["d"] },
        "f5" => TriggeringKernel::Box { height: p["height"], width: p["width"] },
        _ => unreachable!("resolved catalog entry"),
    };
    if !kernel.is_valid() {
        return Err(Error::InvalidModel(format!("{}: invalid parameters {kernel:?}", spec.label())));
    }
    Ok(kernel)
}

pub fn background_rate(spec: &ForecastSpec) -> Result<f64> {
    Ok(resolve(CatalogKind::Triggering, spec)?["nu"])
}

pub fn cond_intensity_forecast(spec: &ForecastSpec) -> Result<CondIntensityForecast> {
    CondIntensityForecast::hawkes(spec.label(), background_rate(spec)?, triggering_kernel(spec)?)
}

/// Product density of a stationary LGCP whose log-field has covariance
/// `sigma2 · exp(−(r/scale)²)` and intensity `lambda`.
pub fn lgcp_log_gaussian_radial(lambda: f64, sigma2: f64, scale: f64) -> impl Fn(f64) -> f64 {
    move |r| lambda * lambda * (sigma2 * (-(r / scale).powi(2)).exp()).exp()
}

const MODELS: &[(&str, &str)] = &[
    ("poisson", "inhomogeneous Poisson with the chosen intensity (thinning)"),
    (
        "lgcp",
        "log-Gaussian Cox matching the chosen intensity, covariance=exponential|gaussian variance=0.25 scale=1 grid=64",
    ),
    ("thomas", "Thomas cluster, parents intensity/mean_offspring, mean_offspring=2 sigma=0.05 buffer=4*sigma"),
    ("homogeneous-poisson", "stationary Poisson, lambda=40"),
    ("stationary-lgcp", "stationary log-Gaussian Cox, covariance=gaussian variance=ln2 scale=0.05 lambda=40 grid=64"),
    ("hawkes", "linear Hawkes by Ogata thinning, truth from the triggering catalog, nu=2 horizon=50"),
];

/// Human-readable catalog listing.
pub fn list_catalog() -> String {
    let mut out = String::new();
    for kind in [CatalogKind::Intensity, CatalogKind::ProductDensity, CatalogKind::Triggering] {
        let _ = writeln!(out, "# {}", kind.title());
        for e in CATALOG.iter().filter(|e| e.kind == kind) {
            let defaults: Vec<String> = e.defaults.iter().map(|(k, v)| format!("{k}={}", fmt_default(*v))).collect();
            let _ = writeln!(out, "{:<4}{:<70}[{}]  {}", e.name, e.formula, defaults.join(", "), e.note);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "# data models");
    for (name, text) in MODELS {
        let _ = writeln!(out, "{name:<9}{text}");
    }
    out
}

fn fmt_default(v: f64) -> String {
    if (v - LN_2).abs() < 1e-15 {
        "ln2".into()
    } else {
        format!("{v}")
    }
}
