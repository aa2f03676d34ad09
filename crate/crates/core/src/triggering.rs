//! Triggering functions `g: (0, ∞) → [0, ∞)` of linear Hawkes processes.

use std::fmt;
use std::sync::Arc;

use statrs::function::erf::erf;

use crate::quadrature::adaptive_simpson;

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum TriggeringKernel {
    Zero,
    /// `scale · exp(−rate · t)`
    Exponential { scale: f64, rate: f64 },
    /// `scale · exp(−rate · t²)`
    Gaussian { scale: f64, rate: f64 },
    /// `scale · max(intercept − slope · t, 0)`
    Linear { scale: f64, intercept: f64, slope: f64 },
    /// `height · 1{t ∈ [0, width]}`
    Box { height: f64, width: f64 },
    /// Arbitrary kernel; cumulative mass by adaptive quadrature over `[0, support]`.
    Custom {
        name: String,
        value: KernelFn,
        support: f64,
        nonincreasing: bool,
    },
}

impl fmt::Debug for TriggeringKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Exponential { scale, rate } => write!(f, "Exponential({scale}·exp(-{rate}t))"),
            Self::Gaussian { scale, rate } => write!(f, "Gaussian({scale}·exp(-{rate}t²))"),
            Self::Linear { scale, intercept, slope } => write!(f, "Linear({scale}·max({intercept}-{slope}t,0))"),
            Self::Box { height, width } => write!(f, "Box({height}·1[0,{width}])"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

const CUSTOM_QUAD_TOL: f64 = 1e-12;

impl TriggeringKernel {
    /// `g(t)` for `t > 0`; at `t = 0` the right limit `g(0⁺)`; zero for `t < 0`.
    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            Self::Zero => 0.0,
            Self::Exponential { scale, rate } => scale * (-rate * t).exp(),
            Self::Gaussian { scale, rate } => scale * (-rate * t * t).exp(),
            Self::Linear { scale, intercept, slope } => scale * (intercept - slope * t).max(0.0),
            Self::Box { height, width } => {
                if t <= *width {
                    *height
                } else {
                    0.0
                }
            }
            Self::Custom { value, support, .. } => {
                if t <= *support {
                    value(t)
                } else {
                    0.0
                }
            }
        }
    }

    /// `G(s) = ∫₀ˢ g(u) du`, zero for `s ≤ 0`.
    pub fn cumulative(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Zero => 0.0,
            Self::Exponential { scale, rate } => scale / rate * -(-rate * s).exp_m1(),
            Self::Gaussian { scale, rate } => {
                scale * 0.5 * (std::f64::consts::PI / rate).sqrt() * erf(rate.sqrt() * s)
            }
            Self::Linear { scale, intercept, slope } => {
                let end = intercept / slope;
                let u = s.min(end);
                scale * (intercept * u - 0.5 * slope * u * u)
            }
            Self::Box { height, width } => height * s.min(*width),
            Self::Custom { value, support, .. } => {
                let upper = s.min(*support);
                let v = value.clone();
                adaptive_simpson(&move |t| v(t), 0.0, upper, CUSTOM_QUAD_TOL)
            }
        }
    }

    /// `∫ₐᵇ g(u) du` for `0 ≤ a ≤ b`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        match self {
            // avoid cancellation far in the tail
            Self::Exponential { scale, rate } if a > 0.0 => {
                scale / rate * (-rate * a).exp() * -(-rate * (b - a)).exp_m1()
            }
            _ => self.cumulative(b) - self.cumulative(a),
        }
    }

    /// Branching ratio `∫₀^∞ g`.
    pub fn total_mass(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Exponential { scale, rate } => scale / rate,
            Self::Gaussian { scale, rate } => scale * 0.5 * (std::f64::consts::PI / rate).sqrt(),
            Self::Linear { scale, intercept, slope } => scale * intercept * intercept / (2.0 * slope),
            Self::Box { height, width } => height * width,
            Self::Custom { support, .. } => self.cumulative(*support),
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Exponential { scale, rate } | Self::Gaussian { scale, rate } => *scale >= 0.0 && *rate > 0.0,
            Self::Linear { scale, intercept, slope } => *scale >= 0.0 && *intercept >= 0.0 && *slope > 0.0,
            Self::Box { height, width } => *height >= 0.0 && *width > 0.0,
            Self::Custom { nonincreasing, .. } => *nonincreasing,
        }
    }

    pub fn is_valid(&self) -> bool {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Self::Zero => true,
            Self::Exponential { scale, rate } | Self::Gaussian { scale, rate } => {
                finite(&[*scale, *rate]) && *scale >= 0.0 && *rate > 0.0
            }
            Self::Linear { scale, intercept, slope } => {
                finite(&[*scale, *intercept, *slope]) && *scale >= 0.0 && *intercept >= 0.0 && *slope > 0.0
            }
            Self::Box { height, width } => finite(&[*height, *width]) && *height >= 0.0 && *width > 0.0,
            Self::Custom { support, .. } => support.is_finite() && *support > 0.0,
        }
    }

    /// A lag beyond which `g` stays below `threshold`.
    pub fn negligible_after(&self, threshold: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Exponential { scale, rate } => (scale / threshold).ln().max(0.0) / rate,
            Self::Gaussian { scale, rate } => ((scale / threshold).ln().max(0.0) / rate).sqrt(),
            Self::Linear { intercept, slope, .. } => intercept / slope,
            Self::Box { width, .. } => *width,
            Self::Custom { support, .. } => *support,
        }
    }
}
