use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::manifest::DatasetManifest;
use crate::dictionary::DictionarySet;
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::scoring::{Aggregation, ScoringIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupStat {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Per-subgroup fraction of images classified as their gold category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubgroupAccuracy {
    pub subgroups: BTreeMap<String, SubgroupStat>,
}

impl SubgroupAccuracy {
    pub fn accuracy(&self, subgroup: &str) -> Result<f64> {
        self.subgroups
            .get(subgroup)
            .map(|s| s.accuracy)
            .ok_or_else(|| Error::UnknownSubgroup(subgroup.to_owned()))
    }
}

/// Scores only the manifest rows that carry a subgroup tag.
pub fn subgroup_accuracy(
    manifest: &DatasetManifest,
    dictionaries: &DictionarySet,
    images: &EmbeddingStore,
    texts: &EmbeddingStore,
    mode: Aggregation,
) -> Result<SubgroupAccuracy> {
    let index = ScoringIndex::build(dictionaries, texts)?;
    let mut subgroups: BTreeMap<String, SubgroupStat> = BTreeMap::new();
    for (image_id, label) in manifest.labels() {
        let Some(subgroup) = &label.subgroup else {
            continue;
        };
        if !dictionaries.contains(&label.category_id) {
            return Err(Error::UnknownCategory(label.category_id.clone()));
        }
        let result = index.classify(image_id, images, mode)?;
        let stat = subgroups.entry(subgroup.clone()).or_insert(SubgroupStat {
            n: 0,
            correct: 0,
            accuracy: 0.0,
        });
        stat.n += 1;
        stat.correct += usize::from(result.winner == label.category_id);
    }
    if subgroups.is_empty() {
        return Err(Error::Manifest("no rows carry a subgroup tag".into()));
    }
    for stat in subgroups.values_mut() {
        stat.accuracy = stat.correct as f64 / stat.n as f64;
    }
    Ok(SubgroupAccuracy { subgroups })
}
