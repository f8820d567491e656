use std::collections::BTreeMap;
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::DatasetManifest;
use crate::dictionary::DictionarySet;
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::scoring::{Aggregation, BaselineSpec, ScoringIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAccuracy {
    pub n: usize,
    pub method_correct: usize,
    pub baseline_correct: usize,
    pub method_accuracy: f64,
    pub baseline_accuracy: f64,
}

/// Top-1 accuracy of descriptor scoring against the class-name baseline on
/// the same images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub n: usize,
    pub mode: Aggregation,
    pub baseline_templates: usize,
    pub method_correct: usize,
    pub baseline_correct: usize,
    pub method_accuracy: f64,
    pub baseline_accuracy: f64,
    pub delta: f64,
    pub per_category: BTreeMap<String, CategoryAccuracy>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dataset {} ({} images, {} aggregation)",
            self.dataset, self.n, self.mode
        );
        let _ = writeln!(out, "{:<24} {:>8} {:>8} {:>8}", "", "ours", "baseline", "delta");
        let _ = writeln!(
            out,
            "{:<24} {:>8.2} {:>8.2} {:>8.2}",
            "top-1 accuracy (%)",
            100.0 * self.method_accuracy,
            100.0 * self.baseline_accuracy,
            100.0 * self.delta
        );
        let _ = writeln!(out);
        for (id, c) in &self.per_category {
            let _ = writeln!(
                out,
                "{:<24} {:>8.2} {:>8.2} {:>8}",
                id,
                100.0 * c.method_accuracy,
                100.0 * c.baseline_accuracy,
                c.n
            );
        }
        out
    }
}

fn ratio(correct: usize, n: usize) -> f64 {
    correct as f64 / n as f64
}

/// Classifies every manifest image with both methods.
///
/// Scoring runs over the whole dictionary set; every gold label must name a
/// category in it.
pub fn evaluate(
    manifest: &DatasetManifest,
    dictionaries: &DictionarySet,
    images: &EmbeddingStore,
    texts: &EmbeddingStore,
    mode: Aggregation,
    baseline: &BaselineSpec,
) -> Result<EvalReport> {
    if manifest.is_empty() {
        return Err(Error::EmptyManifest);
    }
    if let Some(c) = manifest.category_set().iter().find(|c| !dictionaries.contains(c)) {
        return Err(Error::UnknownCategory(c.clone()));
    }
    let method = ScoringIndex::build(dictionaries, texts)?;
    let base = ScoringIndex::baseline(dictionaries, texts, baseline)?;

    let rows: Vec<(&String, &String)> = manifest.labels().iter().map(|(id, l)| (id, &l.category_id)).collect();
    let outcomes = rows
        .par_iter()
        .map(|(id, gold)| {
            let ours = method.classify(id, images, mode)?;
            let theirs = base.classify(id, images, Aggregation::Mean)?;
            Ok((gold.as_str(), ours.winner == **gold, theirs.winner == **gold))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_category: BTreeMap<String, CategoryAccuracy> = BTreeMap::new();
    for (gold, ours, theirs) in &outcomes {
        let entry = per_category.entry(gold.to_string()).or_insert(CategoryAccuracy {
            n: 0,
            method_correct: 0,
            baseline_correct: 0,
            method_accuracy: 0.0,
            baseline_accuracy: 0.0,
        });
        entry.n += 1;
        entry.method_correct += usize::from(*ours);
        entry.baseline_correct += usize::from(*theirs);
    }
    for c in per_category.values_mut() {
        c.method_accuracy = ratio(c.method_correct, c.n);
        c.baseline_accuracy = ratio(c.baseline_correct, c.n);
    }
    let n = outcomes.len();
    let method_correct = outcomes.iter().filter(|o| o.1).count();
    let baseline_correct = outcomes.iter().filter(|o| o.2).count();
    let method_accuracy = ratio(method_correct, n);
    let baseline_accuracy = ratio(baseline_correct, n);
    Ok(EvalReport {
        dataset: manifest.name().to_owned(),
        n,
        mode,
        baseline_templates: baseline.templates().len(),
        method_correct,
        baseline_correct,
        method_accuracy,
        baseline_accuracy,
        delta: method_accuracy - baseline_accuracy,
        per_category,
    })
}
