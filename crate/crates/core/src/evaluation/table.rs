use rayon::prelude::*;

use super::dm::{dm_test_with, paired_differences, Decision, DmResult, DmSpec};
use crate::error::{Error, Result};

/// Scores of every forecast on every pattern of one repetition,
/// indexed `[forecast][pattern]`.
pub type RepScores = Vec<Vec<f64>>;

/// Outcome of one ordered pair in one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTest {
    pub rep: usize,
    pub row: usize,
    pub column: usize,
    pub dropped: usize,
    pub result: Option<DmResult>,
}

/// Fraction of repetitions in which the row forecast was preferred over
/// the column forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceTable {
    pub labels: Vec<String>,
    pub test: DmSpec,
    pub repetitions: usize,
    /// `fractions[row][col]`; the diagonal is `NaN`.
    pub fractions: Vec<Vec<f64>>,
    /// Patterns dropped because one of the two scores was infinite.
    pub dropped: usize,
    pub compared: usize,
}

impl PreferenceTable {
    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == row)?;
        let j = self.labels.iter().position(|l| l == col)?;
        Some(self.fractions[i][j])
    }

    pub fn drop_rate(&self) -> f64 {
        if self.compared == 0 {
            0.0
        } else {
            self.dropped as f64 / self.compared as f64
        }
    }

    /// Rendered with two decimals, `-` on the diagonal.
    pub fn to_text(&self) -> String {
        let width = self.labels.iter().map(|l| l.len()).max().unwrap_or(2).max(4);
        let mut out = format!("{:width$}", "");
        for l in &self.labels {
            out.push_str(&format!(" {l:>width$}"));
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("{l:width$}"));
            for j in 0..self.labels.len() {
                if i == j {
                    out.push_str(&format!(" {:>width$}", "-"));
                } else {
                    out.push_str(&format!(" {:>width$.2}", self.fractions[i][j]));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the DM test for every ordered pair in every repetition.
pub fn pair_tests(reps: &[RepScores], test: DmSpec) -> Result<Vec<PairTest>> {
    let k = reps.first().map_or(0, |r| r.len());
    let mut out = Vec::with_capacity(reps.len() * k * k.saturating_sub(1));
    for (rep, scores) in reps.iter().enumerate() {
        if scores.len() != k {
            return Err(Error::LengthMismatch(scores.len(), k));
        }
        for row in 0..k {
            for column in 0..k {
                if row == column {
                    continue;
                }
                let paired = paired_differences(&scores[row], &scores[column])?;
                let result = if paired.values.len() >= 2 { Some(dm_test_with(&paired.values, test)?) } else { None };
                out.push(PairTest { rep, row, column, dropped: paired.dropped, result });
            }
        }
    }
    Ok(out)
}

/// Aggregates per-repetition score matrices into a preference table.
pub fn preference_table_from_scores(labels: &[String], reps: &[RepScores], test: DmSpec) -> Result<PreferenceTable> {
    let k = labels.len();
    let tests = pair_tests(reps, test)?;
    let mut wins = vec![vec![0usize; k]; k];
    let mut dropped = 0;
    let mut compared = 0;
    for t in &tests {
        dropped += t.dropped;
        compared += reps[t.rep][t.row].len();
        if let Some(r) = t.result {
            if r.decision == Decision::PreferA {
                wins[t.row][t.column] += 1;
            }
        }
    }
    let m = reps.len().max(1) as f64;
    let fractions = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { f64::NAN } else { wins[i][j] as f64 / m })
                .collect()
        })
        .collect();
    Ok(PreferenceTable {
        labels: labels.to_vec(),
        test,
        repetitions: reps.len(),
        fractions,
        dropped,
        compared,
    })
}

/// Scores all forecasts on the patterns of each repetition in parallel and
/// aggregates. `patterns[rep]` holds the `N` patterns of repetition `rep`.
pub fn preference_table<F, P, S>(
    labels: &[String],
    forecasts: &[F],
    patterns: &[Vec<P>],
    score: S,
    test: DmSpec,
) -> Result<(PreferenceTable, Vec<RepScores>)>
where
    F: Sync,
    P: Sync,
    S: Fn(&F, &P) -> Result<f64> + Sync,
{
    if labels.len() != forecasts.len() {
        return Err(Error::LengthMismatch(labels.len(), forecasts.len()));
    }
    if let Some(bad) = patterns.iter().find(|p| p.len() < 2) {
        return Err(Error::Domain(format!("preference tables need N >= 2 patterns, got {}", bad.len())));
    }
    let reps: Vec<RepScores> = patterns
        .par_iter()
        .map(|pats| {
            forecasts
                .iter()
                .map(|f| pats.iter().map(|p| score(f, p)).collect::<Result<Vec<f64>>>())
                .collect::<Result<RepScores>>()
        })
        .collect::<Result<_>>()?;
    let table = preference_table_from_scores(labels, &reps, test)?;
    Ok((table, reps))
}
