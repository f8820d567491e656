//! Descriptor scoring, classification and explanations.
//!
//! For an image `x` and a category with descriptors `D`, each descriptor
//! contributes `phi(d, x)`, the cosine between the grounded descriptor's text
//! embedding and the image embedding. The category score is the mean of those
//! values (or their maximum under [`Aggregation::Max`]); a category realized
//! as several subgroup dictionaries scores as its best subgroup. The winner
//! is the highest-scoring category, ties going to the smaller category id.
//!
//! Scores are raw cosines. Logit scaling or a softmax over categories would
//! be a positive affine map of every score and changes no decision.

mod aggregate;
mod baseline;
mod explain;
mod index;
mod report;

pub use aggregate::{rank, Aggregation};
pub use baseline::{BaselineSpec, DEFAULT_TEMPLATE, ENSEMBLE_TEMPLATES};
pub use explain::{Bar, ExplanationView, Panel};
pub use index::ScoringIndex;
pub use report::{ClassificationResult, DescriptorScore, RankedCategory, ScoreReport};

use crate::dictionary::{Category, CategoryDictionary, DictionarySet, SubgroupDictionarySet};
use crate::embedding::{cosine, EmbeddingStore, EmbeddingVector};
use crate::error::Result;

/// Similarity between a grounded descriptor embedding and an image embedding.
pub fn phi(descriptor: &EmbeddingVector, image: &EmbeddingVector) -> Result<f64> {
    cosine(descriptor, image)
}

/// Scores one dictionary against an image.
pub fn score(
    dict: &CategoryDictionary,
    image: &EmbeddingVector,
    texts: &EmbeddingStore,
    mode: Aggregation,
) -> Result<ScoreReport> {
    index::CompiledDictionary::from_dictionary(dict, None, texts)?.score(dict.category_id(), image, mode)
}

/// Scores every subgroup and returns the report of the best one.
pub fn score_subgroup(
    set: &SubgroupDictionarySet,
    image: &EmbeddingVector,
    texts: &EmbeddingStore,
    mode: Aggregation,
) -> Result<ScoreReport> {
    score_category(&Category::Subgroups(set.clone()), image, texts, mode)
}

pub fn score_category(
    category: &Category,
    image: &EmbeddingVector,
    texts: &EmbeddingStore,
    mode: Aggregation,
) -> Result<ScoreReport> {
    index::CompiledCategory::compile(category, texts)?.score(image, mode)
}

/// Classifies one image from the image store.
pub fn classify(
    image_id: &str,
    dictionaries: &DictionarySet,
    images: &EmbeddingStore,
    texts: &EmbeddingStore,
    mode: Aggregation,
) -> Result<ClassificationResult> {
    ScoringIndex::build(dictionaries, texts)?.classify(image_id, images, mode)
}

/// Classifies one image by comparing it to the rendered class-name templates.
pub fn classify_baseline(
    image_id: &str,
    dictionaries: &DictionarySet,
    images: &EmbeddingStore,
    texts: &EmbeddingStore,
    baseline: &BaselineSpec,
) -> Result<ClassificationResult> {
    ScoringIndex::baseline(dictionaries, texts, baseline)?.classify(image_id, images, Aggregation::Mean)
}

/// The evidence behind a decision, optionally contrasted with another category.
pub fn explain(result: &ClassificationResult, contrast: Option<&str>) -> Result<ExplanationView> {
    ExplanationView::from_result(result, contrast)
}

#[cfg(test)]
mod tests;
