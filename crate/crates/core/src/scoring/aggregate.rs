use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How per-descriptor similarities combine into a category score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Max,
}

impl Aggregation {
    /// `None` for an empty slice. Sums run left to right.
    pub fn apply(self, phis: &[f64]) -> Option<f64> {
        if phis.is_empty() {
            return None;
        }
        Some(match self {
            Aggregation::Mean => phis.iter().fold(0.0, |acc, p| acc + p) / phis.len() as f64,
            Aggregation::Max => phis.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            other => Err(Error::InvalidArgument(format!("unknown aggregation {other:?}"))),
        }
    }
}

/// Descending by score, ties by ascending id.
pub(crate) fn by_score_then_id(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// Sorts `(id, score)` pairs into decision order.
pub fn rank<S: AsRef<str>>(scores: &mut [(S, f64)]) {
    scores.sort_by(|a, b| by_score_then_id((a.0.as_ref(), a.1), (b.0.as_ref(), b.1)));
}
