use rayon::prelude::*;

use super::aggregate::{by_score_then_id, Aggregation};
use super::baseline::BaselineSpec;
use super::report::{ClassificationResult, DescriptorScore, RankedCategory, ScoreReport};
use crate::dictionary::{Category, CategoryDictionary, DictionarySet};
use crate::embedding::{dot, EmbeddingStore, EmbeddingVector};
use crate::error::{Error, Result};

/// One dictionary with its descriptor embeddings packed row-major.
#[derive(Debug, Clone)]
pub(crate) struct CompiledDictionary {
    subgroup: Option<String>,
    labels: Vec<(String, String)>,
    dim: usize,
    rows: Vec<f32>,
}

impl CompiledDictionary {
    fn from_texts<'a>(
        subgroup: Option<&str>,
        labels: impl Iterator<Item = (&'a str, &'a str)>,
        texts: &EmbeddingStore,
        missing: &mut Vec<String>,
    ) -> Self {
        let mut out = Self {
            subgroup: subgroup.map(str::to_owned),
            labels: Vec::new(),
            dim: texts.dim(),
            rows: Vec::new(),
        };
        for (phrase, text) in labels {
            match texts.get(text) {
                Some(v) => out.rows.extend_from_slice(v.as_slice()),
                None => {
                    if !missing.iter().any(|m| m == text) {
                        missing.push(text.to_owned());
                    }
                }
            }
            out.labels.push((phrase.to_owned(), text.to_owned()));
        }
        out
    }

    pub(crate) fn from_dictionary(
        dict: &CategoryDictionary,
        subgroup: Option<&str>,
        texts: &EmbeddingStore,
    ) -> Result<Self> {
        let mut missing = Vec::new();
        let labels = dict.descriptors().iter().map(|d| (d.phrase(), d.grounded_text()));
        let compiled = Self::from_texts(subgroup, labels, texts, &mut missing);
        if !missing.is_empty() {
            return Err(Error::MissingEmbedding(missing));
        }
        Ok(compiled)
    }

    fn phis(&self, image: &[f32]) -> Result<Vec<f64>> {
        if image.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: image.len(),
            });
        }
        self.rows
            .chunks_exact(self.dim)
            .map(|row| Ok(dot(row, image)?.clamp(-1.0, 1.0)))
            .collect()
    }

    pub(crate) fn score(&self, category_id: &str, image: &EmbeddingVector, mode: Aggregation) -> Result<ScoreReport> {
        let phis = self.phis(image.as_slice())?;
        let aggregate = mode
            .apply(&phis)
            .ok_or_else(|| Error::EmptyDictionary(category_id.to_owned()))?;
        Ok(ScoreReport {
            category_id: category_id.to_owned(),
            subgroup_name: self.subgroup.clone(),
            per_descriptor: self
                .labels
                .iter()
                .zip(phis)
                .map(|((phrase, grounded_text), phi)| DescriptorScore {
                    phrase: phrase.clone(),
                    grounded_text: grounded_text.clone(),
                    phi,
                })
                .collect(),
            aggregate,
            aggregation_mode: mode,
        })
    }
}

/// A category's dictionaries (one per subgroup), ready to score.
#[derive(Debug, Clone)]
pub(crate) struct CompiledCategory {
    id: String,
    dictionaries: Vec<CompiledDictionary>,
}

impl CompiledCategory {
    fn collect(category: &Category, texts: &EmbeddingStore, missing: &mut Vec<String>) -> Self {
        let dictionaries = category
            .dictionaries()
            .into_iter()
            .map(|(subgroup, dict)| {
                let labels = dict.descriptors().iter().map(|d| (d.phrase(), d.grounded_text()));
                CompiledDictionary::from_texts(subgroup, labels, texts, missing)
            })
            .collect();
        Self {
            id: category.id().to_owned(),
            dictionaries,
        }
    }

    pub(crate) fn compile(category: &Category, texts: &EmbeddingStore) -> Result<Self> {
        let mut missing = Vec::new();
        let compiled = Self::collect(category, texts, &mut missing);
        if !missing.is_empty() {
            return Err(Error::MissingEmbedding(missing));
        }
        Ok(compiled)
    }

    /// Best subgroup report; ties keep the first subgroup in name order.
    pub(crate) fn score(&self, image: &EmbeddingVector, mode: Aggregation) -> Result<ScoreReport> {
        let mut best: Option<ScoreReport> = None;
        for dict in &self.dictionaries {
            let report = dict.score(&self.id, image, mode)?;
            if best.as_ref().is_none_or(|b| report.aggregate > b.aggregate) {
                best = Some(report);
            }
        }
        best.ok_or_else(|| Error::EmptyDictionary(self.id.clone()))
    }
}

/// Every category's descriptor embeddings resolved once, reusable across images.
#[derive(Debug, Clone)]
pub struct ScoringIndex {
    dim: usize,
    categories: Vec<CompiledCategory>,
}

impl ScoringIndex {
    /// Resolves every grounded text; fails listing all texts without an embedding.
    pub fn build(dictionaries: &DictionarySet, texts: &EmbeddingStore) -> Result<Self> {
        let mut missing = Vec::new();
        let categories = dictionaries
            .iter()
            .map(|c| CompiledCategory::collect(c, texts, &mut missing))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingEmbedding(missing));
        }
        Ok(Self {
            dim: texts.dim(),
            categories,
        })
    }

    /// Class-name scoring: each category's "descriptors" are the rendered templates.
    pub fn baseline(dictionaries: &DictionarySet, texts: &EmbeddingStore, spec: &BaselineSpec) -> Result<Self> {
        let mut missing = Vec::new();
        let categories = dictionaries
            .iter()
            .map(|c| {
                let rendered: Vec<(String, String)> = spec
                    .templates()
                    .iter()
                    .map(|t| (t.clone(), BaselineSpec::render(t, c.display_name())))
                    .collect();
                let labels = rendered.iter().map(|(t, r)| (t.as_str(), r.as_str()));
                CompiledCategory {
                    id: c.id().to_owned(),
                    dictionaries: vec![CompiledDictionary::from_texts(None, labels, texts, &mut missing)],
                }
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingEmbedding(missing));
        }
        Ok(Self {
            dim: texts.dim(),
            categories,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn category_ids(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.id.as_str())
    }

    /// Report for a single category.
    pub fn score_category(&self, category_id: &str, image: &EmbeddingVector, mode: Aggregation) -> Result<ScoreReport> {
        self.categories
            .iter()
            .find(|c| c.id == category_id)
            .ok_or_else(|| Error::UnknownCategory(category_id.to_owned()))?
            .score(image, mode)
    }

    pub fn classify_vector(
        &self,
        image_id: &str,
        image: &EmbeddingVector,
        mode: Aggregation,
    ) -> Result<ClassificationResult> {
        if self.categories.is_empty() {
            return Err(Error::InvalidArgument("no categories to classify against".into()));
        }
        let mut reports = self
            .categories
            .iter()
            .map(|c| c.score(image, mode))
            .collect::<Result<Vec<_>>>()?;
        reports.sort_by(|a, b| by_score_then_id((&a.category_id, a.aggregate), (&b.category_id, b.aggregate)));
        let ranked: Vec<RankedCategory> = reports
            .iter()
            .map(|r| RankedCategory {
                category_id: r.category_id.clone(),
                score: r.aggregate,
            })
            .collect();
        Ok(ClassificationResult {
            image_id: image_id.to_owned(),
            winner: ranked[0].category_id.clone(),
            ranked,
            reports,
        })
    }

    pub fn classify(&self, image_id: &str, images: &EmbeddingStore, mode: Aggregation) -> Result<ClassificationResult> {
        let image = images
            .get(image_id)
            .ok_or_else(|| Error::UnknownImage(image_id.to_owned()))?;
        self.classify_vector(image_id, image, mode)
    }

    /// Classifies every image in the store, in id order. Images are scored in parallel.
    pub fn classify_all(&self, images: &EmbeddingStore, mode: Aggregation) -> Result<Vec<ClassificationResult>> {
        let entries: Vec<(&str, &EmbeddingVector)> = images.iter().collect();
        entries
            .par_iter()
            .map(|(id, v)| self.classify_vector(id, v, mode))
            .collect()
    }
}
