use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Per-repetition scores of one forecast under one scoring function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub forecast: String,
    pub score: String,
    pub values: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(forecast: impl Into<String>, score: impl Into<String>, values: Vec<f64>) -> Self {
        Self { forecast: forecast.into(), score: score.into(), values }
    }

    pub fn finite_mask(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.is_finite()).collect()
    }
}

/// Mean of `a − b` over entries where both are finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreDifference {
    pub mean: f64,
    pub used: usize,
    pub excluded: usize,
}

pub fn avg_score_difference(a: &ScoreSeries, b: &ScoreSeries) -> Result<ScoreDifference> {
    let diffs = paired_differences(&a.values, &b.values)?;
    let used = diffs.values.len();
    let mean = if used == 0 { f64::NAN } else { diffs.values.iter().sum::<f64>() / used as f64 };
    Ok(ScoreDifference { mean, used, excluded: diffs.dropped })
}

pub(crate) struct Paired {
    pub values: Vec<f64>,
    pub dropped: usize,
}

pub(crate) fn paired_differences(a: &[f64], b: &[f64]) -> Result<Paired> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let mut values = Vec::with_capacity(a.len());
    let mut dropped = 0;
    for (x, y) in a.iter().zip(b) {
        if x.is_finite() && y.is_finite() {
            values.push(x - y);
        } else {
            dropped += 1;
        }
    }
    Ok(Paired { values, dropped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    /// The first forecast has significantly smaller scores.
    PreferA,
    PreferB,
    NoDecision,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::PreferA => "prefer_a",
            Decision::PreferB => "prefer_b",
            Decision::NoDecision => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmResult {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub t: f64,
    pub p_value: f64,
    pub decision: Decision,
    /// Set when the variance estimate is zero and no test was possible.
    pub degenerate: bool,
}

/// How rejection regions are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sidedness {
    /// Reject when `|t| > z_{1−α/2}`.
    TwoSided,
    /// Each direction is its own level-`α` test: prefer A when
    /// `t < −z_{1−α}`, prefer B when `t > z_{1−α}`.
    #[default]
    OneSided,
}

impl Sidedness {
    pub fn as_str(self) -> &'static str {
        match self {
            Sidedness::TwoSided => "two-sided",
            Sidedness::OneSided => "one-sided",
        }
    }
}

/// Level and sidedness of a DM test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmSpec {
    pub alpha: f64,
    pub sidedness: Sidedness,
}

impl DmSpec {
    pub fn two_sided(alpha: f64) -> Self {
        Self { alpha, sidedness: Sidedness::TwoSided }
    }

    pub fn one_sided(alpha: f64) -> Self {
        Self { alpha, sidedness: Sidedness::OneSided }
    }
}

impl Default for DmSpec {
    fn default() -> Self {
        Self::one_sided(0.05)
    }
}

/// Two-sided Diebold-Mariano test on differences `S_A − S_B`, with the
/// sample variance and normal critical values.
pub fn dm_test(diffs: &[f64], alpha: f64) -> Result<DmResult> {
    dm_test_with(diffs, DmSpec::two_sided(alpha))
}

/// DM test with explicit sidedness. The reported p-value is the two-sided
/// one, or the one-sided one in the direction of the sign of the mean.
pub fn dm_test_with(diffs: &[f64], spec: DmSpec) -> Result<DmResult> {
    let alpha = spec.alpha;
    let n = diffs.len();
    if n < 2 {
        return Err(Error::Domain(format!("DM test needs at least 2 differences, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("test level must lie in (0, 1), got {alpha}")));
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let variance = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // relative threshold: constant differences give rounding-level variance
    let scale = diffs.iter().map(|d| d.abs()).fold(0.0, f64::max);
    if !(variance > (1e-13 * scale).powi(2)) {
        return Ok(DmResult {
            n,
            mean,
            variance,
            t: f64::NAN,
            p_value: f64::NAN,
            decision: Decision::NoDecision,
            degenerate: true,
        });
    }
    let t = (n as f64).sqrt() * mean / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let tail = normal.cdf(-t.abs());
    let p_value = match spec.sidedness {
        Sidedness::TwoSided => 2.0 * tail,
        Sidedness::OneSided => tail,
    };
    let decision = if p_value < alpha {
        if mean < 0.0 {
            Decision::PreferA
        } else {
            Decision::PreferB
        }
    } else {
        Decision::NoDecision
    };
    Ok(DmResult { n, mean, variance, t, p_value, decision, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_inputs() {
        let r = dm_test(&[0.0; 20], 0.05).unwrap();
        assert!(r.degenerate && r.decision == Decision::NoDecision);
        let r = dm_test(&[1.0; 20], 0.05).unwrap();
        assert!(r.degenerate && r.decision == Decision::NoDecision);
        assert!(dm_test(&[1.0], 0.05).is_err());
    }

    #[test]
    fn t_statistic_by_hand() {
        let d = [-1.0, -2.0, -3.0, -1.5];
        let r = dm_test(&d, 0.05).unwrap();
        let mean = -7.5 / 4.0;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        assert!((r.t - 2.0 * mean / var.sqrt()).abs() < 1e-12);
        assert_eq!(r.decision, Decision::PreferA);
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        assert_eq!(dm_test(&neg, 0.05).unwrap().decision, Decision::PreferB);
    }

    #[test]
    fn one_sided_rejects_between_critical_values() {
        // t = 1.8 lies between z_0.95 and z_0.975
        let d: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { -0.59 } else { 0.41 }).collect();
        let two = dm_test(&d, 0.05).unwrap();
        let one = dm_test_with(&d, DmSpec::one_sided(0.05)).unwrap();
        assert!(two.t < -1.645 && two.t > -1.96, "t = {}", two.t);
        assert_eq!(two.decision, Decision::NoDecision);
        assert_eq!(one.decision, Decision::PreferA);
        assert!((2.0 * one.p_value - two.p_value).abs() < 1e-15);
    }

    #[test]
    fn averages_skip_infinite() {
        let a = ScoreSeries::new("a", "s", vec![1.0, f64::INFINITY, 3.0]);
        let b = ScoreSeries::new("b", "s", vec![0.5, 1.0, 1.0]);
        let d = avg_score_difference(&a, &b).unwrap();
        assert_eq!((d.used, d.excluded), (2, 1));
        assert!((d.mean - 1.25).abs() < 1e-15);
        let e = avg_score_difference(&b, &a).unwrap();
        assert_eq!(e.mean, -d.mean);
        assert_eq!(avg_score_difference(&a, &a).unwrap().mean, 0.0);
        let short = ScoreSeries::new("c", "s", vec![1.0]);
        assert!(avg_score_difference(&a, &short).is_err());
    }
}
