use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::report::{ClassificationResult, ScoreReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub phrase: String,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub category_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<String>,
    pub bars: Vec<Bar>,
}

impl Panel {
    fn from_report(report: &ScoreReport) -> Self {
        Self {
            category_id: report.category_id.clone(),
            subgroup: report.subgroup_name.clone(),
            bars: report
                .sorted_by_phi()
                .into_iter()
                .map(|d| Bar {
                    phrase: d.phrase.clone(),
                    phi: d.phi,
                })
                .collect(),
        }
    }
}

/// Why the winner was chosen and, optionally, why another category was not.
///
/// The first panel is always the winner; a contrast panel follows when requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationView {
    pub image_id: String,
    pub winner: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast: Option<String>,
    pub panels: Vec<Panel>,
}

impl ExplanationView {
    pub fn from_result(result: &ClassificationResult, contrast: Option<&str>) -> Result<Self> {
        let panel = |id: &str| {
            result
                .report(id)
                .map(Panel::from_report)
                .ok_or_else(|| Error::UnknownCategory(id.to_owned()))
        };
        let mut panels = vec![panel(&result.winner)?];
        if let Some(id) = contrast {
            panels.push(panel(id)?);
        }
        Ok(Self {
            image_id: result.image_id.clone(),
            winner: result.winner.clone(),
            contrast: contrast.map(str::to_owned),
            panels,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("explanation serializes")
    }

    /// Text bar chart, `width` characters for a similarity of 1.0.
    pub fn render_text(&self, width: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "image {}", self.image_id);
        for (i, panel) in self.panels.iter().enumerate() {
            let label = if i == 0 { "chosen" } else { "contrast" };
            let _ = match &panel.subgroup {
                Some(s) => writeln!(out, "\n[{label}] {} ({s})", panel.category_id),
                None => writeln!(out, "\n[{label}] {}", panel.category_id),
            };
            let name_width = panel.bars.iter().map(|b| b.phrase.chars().count()).max().unwrap_or(0);
            for bar in &panel.bars {
                let len = (bar.phi.max(0.0) * width as f64).round() as usize;
                let _ = writeln!(
                    out,
                    "  {:<name_width$}  {:>7.4}  {}",
                    bar.phrase,
                    bar.phi,
                    "#".repeat(len)
                );
            }
        }
        out
    }
}
