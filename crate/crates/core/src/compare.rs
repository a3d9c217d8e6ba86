//! Predicted head-to-head probabilities against observed records.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("pairs present on one side only: {}", .0.join(", "))]
    MismatchedPairs(Vec<String>),
    #[error("actuals line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Wilson score interval for `wins` successes in `games` trials.
/// `None` when there are no games.
pub fn wilson_interval(wins: u32, games: u32, z: f64) -> Option<(f64, f64)> {
    if games == 0 || wins > games {
        return None;
    }
    let n = f64::from(games);
    let p = f64::from(wins) / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Some(((centre - half).max(0.0), (centre + half).min(1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActualRecord {
    Counts { wins: u32, games: u32 },
    /// A published percentage without game counts; no interval is possible.
    Percent { pct: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub a: String,
    pub b: String,
    /// All percentages are on the 0–100 scale.
    pub predicted_pct: f64,
    pub actual_pct: Option<f64>,
    pub ci_low_pct: Option<f64>,
    pub ci_high_pct: Option<f64>,
    pub inside: Option<bool>,
    pub flag: Option<String>,
}

/// One row per ordered pair, keyed `(a, b)` with values `P(a beats b)` in
/// [0, 1]. Both maps must cover the same pairs.
pub fn compare_to_actuals(
    predicted: &BTreeMap<(String, String), f64>,
    actual: &BTreeMap<(String, String), ActualRecord>,
) -> Result<Vec<ComparisonRow>, CompareError> {
    let missing: Vec<String> = predicted
        .keys()
        .filter(|k| !actual.contains_key(*k))
        .chain(actual.keys().filter(|k| !predicted.contains_key(*k)))
        .map(|(a, b)| format!("{a}-{b}"))
        .collect();
    if !missing.is_empty() {
        return Err(CompareError::MismatchedPairs(missing));
    }
    Ok(predicted
        .iter()
        .map(|((a, b), &p)| {
            let predicted_pct = 100.0 * p;
            let mut row = ComparisonRow {
                a: a.clone(),
                b: b.clone(),
                predicted_pct,
                actual_pct: None,
                ci_low_pct: None,
                ci_high_pct: None,
                inside: None,
                flag: None,
            };
            match actual[&(a.clone(), b.clone())] {
                ActualRecord::Counts { wins, games } => match wilson_interval(wins, games, Z_95) {
                    Some((lo, hi)) => {
                        row.actual_pct = Some(100.0 * f64::from(wins) / f64::from(games));
                        row.ci_low_pct = Some(100.0 * lo);
                        row.ci_high_pct = Some(100.0 * hi);
                        row.inside = Some((lo..=hi).contains(&p));
                    }
                    None => row.flag = Some("no data".into()),
                },
                ActualRecord::Percent { pct } => {
                    row.actual_pct = Some(pct);
                    row.flag = Some("no counts".into());
                }
            }
            row
        })
        .collect())
}

#[derive(Debug, Deserialize)]
struct ActualLine {
    a: String,
    b: String,
    wins: Option<u32>,
    games: Option<u32>,
    pct: Option<f64>,
}

/// Reads `a,b,wins,games,pct` rows; either the counts or `pct` may be blank.
pub fn read_actuals<R: Read>(reader: R) -> Result<BTreeMap<(String, String), ActualRecord>, CompareError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = BTreeMap::new();
    for (i, row) in rdr.deserialize::<ActualLine>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CompareError::Parse { line, message: e.to_string() })?;
        let record = match (row.wins, row.games, row.pct) {
            (Some(wins), Some(games), _) if wins <= games => ActualRecord::Counts { wins, games },
            (Some(_), Some(_), _) => {
                return Err(CompareError::Parse { line, message: "wins exceed games".into() });
            }
            (_, _, Some(pct)) if (0.0..=100.0).contains(&pct) => ActualRecord::Percent { pct },
            _ => return Err(CompareError::Parse { line, message: "need wins and games, or pct in [0, 100]".into() }),
        };
        out.insert((row.a, row.b), record);
    }
    Ok(out)
}
