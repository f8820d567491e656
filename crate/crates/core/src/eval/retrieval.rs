use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dictionary::DictionarySet;
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::scoring::{rank, Aggregation, BaselineSpec, ScoringIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedImage {
    pub image_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallReport {
    pub category_id: String,
    pub k: usize,
    pub hits: usize,
    pub total_relevant: usize,
    pub recall: f64,
    pub retrieved_ids: Vec<String>,
}

fn rank_images(
    index: &ScoringIndex,
    category_id: &str,
    images: &EmbeddingStore,
    k: usize,
    mode: Aggregation,
) -> Result<Vec<RetrievedImage>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut scored = images
        .iter()
        .map(|(id, v)| Ok((id, index.score_category(category_id, v, mode)?.aggregate)))
        .collect::<Result<Vec<_>>>()?;
    rank(&mut scored);
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(id, score)| RetrievedImage {
            image_id: id.to_owned(),
            score,
        })
        .collect())
}

/// The `k` images scoring highest for one category's descriptors.
pub fn retrieve_topk(
    category_id: &str,
    dictionaries: &DictionarySet,
    images: &EmbeddingStore,
    texts: &EmbeddingStore,
    k: usize,
    mode: Aggregation,
) -> Result<Vec<RetrievedImage>> {
    let single = dictionaries.subset([category_id])?;
    let index = ScoringIndex::build(&single, texts)?;
    rank_images(&index, category_id, images, k, mode)
}

/// The `k` images closest to the category's rendered class-name templates.
pub fn retrieve_topk_baseline(
    category_id: &str,
    dictionaries: &DictionarySet,
    images: &EmbeddingStore,
    texts: &EmbeddingStore,
    k: usize,
    baseline: &BaselineSpec,
) -> Result<Vec<RetrievedImage>> {
    let single = dictionaries.subset([category_id])?;
    let index = ScoringIndex::baseline(&single, texts, baseline)?;
    rank_images(&index, category_id, images, k, Aggregation::Mean)
}

/// Fraction of `relevant` found in the first `k` entries of `ranked`.
pub fn recall_at_k(
    category_id: &str,
    ranked: &[RetrievedImage],
    relevant: &BTreeSet<String>,
    k: usize,
) -> Result<RecallReport> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevantSet);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let retrieved_ids: Vec<String> = ranked.iter().take(k).map(|r| r.image_id.clone()).collect();
    let hits = retrieved_ids.iter().filter(|id| relevant.contains(*id)).count();
    Ok(RecallReport {
        category_id: category_id.to_owned(),
        k,
        hits,
        total_relevant: relevant.len(),
        recall: hits as f64 / relevant.len() as f64,
        retrieved_ids,
    })
}
