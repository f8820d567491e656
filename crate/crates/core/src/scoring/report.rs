use serde::{Deserialize, Serialize};

use super::aggregate::Aggregation;

/// One descriptor's contribution to a category score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorScore {
    pub phrase: String,
    pub grounded_text: String,
    pub phi: f64,
}

/// Per-descriptor evidence and the aggregate score for one category.
///
/// `per_descriptor` follows dictionary order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub category_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup_name: Option<String>,
    pub per_descriptor: Vec<DescriptorScore>,
    pub aggregate: f64,
    pub aggregation_mode: Aggregation,
}

impl ScoreReport {
    /// Descriptors ordered by similarity, highest first; equal values keep
    /// dictionary order.
    pub fn sorted_by_phi(&self) -> Vec<&DescriptorScore> {
        let mut sorted: Vec<&DescriptorScore> = self.per_descriptor.iter().collect();
        sorted.sort_by(|a, b| b.phi.total_cmp(&a.phi));
        sorted
    }

    pub fn phis(&self) -> Vec<f64> {
        self.per_descriptor.iter().map(|d| d.phi).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCategory {
    pub category_id: String,
    pub score: f64,
}

/// Outcome of classifying one image: full ranking plus the evidence for
/// every category, in ranking order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub image_id: String,
    pub ranked: Vec<RankedCategory>,
    pub winner: String,
    pub reports: Vec<ScoreReport>,
}

impl ClassificationResult {
    pub fn report(&self, category_id: &str) -> Option<&ScoreReport> {
        self.reports.iter().find(|r| r.category_id == category_id)
    }

    pub fn ranked_ids(&self) -> Vec<&str> {
        self.ranked.iter().map(|r| r.category_id.as_str()).collect()
    }

    /// Compact JSON, the exact bytes the CLI and the HTTP service emit.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("classification result serializes")
    }
}
