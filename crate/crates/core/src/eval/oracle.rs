//! Synthetic verification data with brute-force answers.
//!
//! Each category gets `n_descriptors` random unit descriptor embeddings and
//! a class-name embedding that leans toward the descriptors' centroid. Each
//! image is a random convex combination of all its gold category's
//! descriptors, renormalized, plus isotropic Gaussian noise with standard
//! deviation `noise` per coordinate.
//!
//! The answers are computed here without touching the scoring engine: the
//! mean-mode score uses the identity `mean_d <d, x> = <mean_d d, x>` (one dot
//! product with the descriptor centroid), the max mode and the baseline
//! are explicit loops over the stored vectors.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::manifest::{DatasetManifest, ManifestRow};
use crate::dictionary::{CategoryDictionary, DictionarySet};
use crate::embedding::{EmbeddingStore, EmbeddingVector, StoreKind};
use crate::error::{Error, Result};

/// Text template the synthetic class-name embeddings are stored under.
pub const ORACLE_TEMPLATE: &str = "a photo of a {}";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub seed: u64,
    pub n_categories: usize,
    pub n_descriptors: usize,
    pub n_images: usize,
    pub noise: f64,
    pub dim: usize,
}

impl OracleConfig {
    pub fn new(seed: u64, n_categories: usize, n_descriptors: usize, n_images: usize, noise: f64) -> Self {
        Self {
            seed,
            n_categories,
            n_descriptors,
            n_images,
            noise,
            dim: 64,
        }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }
}

/// Brute-force answers for one image. Rankings are best first, ties by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleAnswer {
    pub image_id: String,
    pub gold: String,
    pub mean_ranking: Vec<String>,
    pub max_ranking: Vec<String>,
    pub baseline_ranking: Vec<String>,
}

impl OracleAnswer {
    pub fn mean_winner(&self) -> &str {
        &self.mean_ranking[0]
    }

    pub fn max_winner(&self) -> &str {
        &self.max_ranking[0]
    }

    pub fn baseline_winner(&self) -> &str {
        &self.baseline_ranking[0]
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    pub config: OracleConfig,
    pub images: EmbeddingStore,
    pub texts: EmbeddingStore,
    pub dictionaries: DictionarySet,
    pub manifest: DatasetManifest,
    pub answers: Vec<OracleAnswer>,
}

impl SyntheticOracle {
    fn accuracy(&self, winner: impl Fn(&OracleAnswer) -> &str) -> f64 {
        let correct = self.answers.iter().filter(|a| winner(a) == a.gold).count();
        correct as f64 / self.answers.len() as f64
    }

    pub fn mean_accuracy(&self) -> f64 {
        self.accuracy(OracleAnswer::mean_winner)
    }

    pub fn max_accuracy(&self) -> f64 {
        self.accuracy(OracleAnswer::max_winner)
    }

    pub fn baseline_accuracy(&self) -> f64 {
        self.accuracy(OracleAnswer::baseline_winner)
    }
}

pub(super) fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

pub(super) fn unit64(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

pub(super) fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

fn category_id(i: usize) -> String {
    format!("cat{i:02}")
}

fn inner(a: &[f32], b: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        total += f64::from(a[i]) * b[i];
    }
    total
}

fn ordered(mut scores: Vec<(String, f64)>) -> Vec<String> {
    scores.sort_by(|a, b| match b.1.partial_cmp(&a.1).expect("finite scores") {
        std::cmp::Ordering::Equal => a.0.cmp(&b.0),
        other => other,
    });
    scores.into_iter().map(|s| s.0).collect()
}

/// Generates stores, dictionaries, a manifest and brute-force answers.
pub fn make_synthetic_oracle(config: OracleConfig) -> Result<SyntheticOracle> {
    let OracleConfig {
        seed,
        n_categories,
        n_descriptors,
        n_images,
        noise,
        dim,
    } = config;
    if n_categories == 0 || n_descriptors == 0 || n_images == 0 || dim == 0 {
        return Err(Error::InvalidArgument("oracle sizes must be positive".into()));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise must be non-negative, got {noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut texts = EmbeddingStore::new(StoreKind::Text, dim)?;
    let mut images = EmbeddingStore::new(StoreKind::Image, dim)?;
    let mut dictionaries = DictionarySet::new();
    let mut descriptor_vectors: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n_categories);

    for c in 0..n_categories {
        let id = category_id(c);
        let display = format!("category {c}");
        let phrases: Vec<String> = (0..n_descriptors).map(|d| format!("feature {d} of {id}")).collect();
        let dict = CategoryDictionary::new(&id, &display, &phrases)?;
        let vectors: Vec<Vec<f64>> = (0..n_descriptors).map(|_| unit64(gaussian(&mut rng, dim))).collect();
        for (text, v) in dict.grounded_texts().zip(&vectors) {
            texts.insert(text, EmbeddingVector::new(to_f32(v))?)?;
        }
        let centroid: Vec<f64> = (0..dim).map(|k| vectors.iter().map(|v| v[k]).sum::<f64>()).collect();
        let centroid = unit64(centroid);
        let jitter = unit64(gaussian(&mut rng, dim));
        let name: Vec<f64> = centroid.iter().zip(&jitter).map(|(a, b)| a + b).collect();
        texts.insert(
            ORACLE_TEMPLATE.replacen("{}", &display, 1),
            EmbeddingVector::new(to_f32(&unit64(name)))?,
        )?;
        descriptor_vectors.push(vectors);
        dictionaries.insert(dict);
    }

    let mut rows = Vec::with_capacity(n_images);
    for i in 0..n_images {
        let gold = i % n_categories;
        let weights: Vec<f64> = (0..n_descriptors).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut mix = vec![0.0f64; dim];
        for (w, v) in weights.iter().zip(&descriptor_vectors[gold]) {
            for k in 0..dim {
                mix[k] += w / total * v[k];
            }
        }
        let mix = unit64(mix);
        let jitter = gaussian(&mut rng, dim);
        let raw: Vec<f64> = mix.iter().zip(&jitter).map(|(m, j)| m + noise * j).collect();
        let image_id = format!("img{i:05}");
        images.insert(image_id.clone(), EmbeddingVector::new(to_f32(&raw))?)?;
        rows.push(ManifestRow {
            image_id,
            category_id: category_id(gold),
            subgroup: None,
        });
    }
    let manifest = DatasetManifest::new(format!("oracle-{seed}"), rows)?;
    let answers = brute_force_answers(&manifest, &dictionaries, &images, &texts)?;
    Ok(SyntheticOracle {
        config,
        images,
        texts,
        dictionaries,
        manifest,
        answers,
    })
}

/// Exhaustive scoring of every manifest image against every category.
///
/// Works for any stores and simple dictionaries, not only generated ones.
pub fn brute_force_answers(
    manifest: &DatasetManifest,
    dictionaries: &DictionarySet,
    images: &EmbeddingStore,
    texts: &EmbeddingStore,
) -> Result<Vec<OracleAnswer>> {
    struct Prepared {
        id: String,
        rows: Vec<Vec<f64>>,
        centroid: Vec<f64>,
        name: Vec<f64>,
    }
    let lookup = |text: &str| -> Result<Vec<f64>> {
        texts
            .get(text)
            .map(|v| v.as_slice().iter().map(|&x| f64::from(x)).collect())
            .ok_or_else(|| Error::MissingEmbedding(vec![text.to_owned()]))
    };
    let mut prepared = Vec::new();
    for category in dictionaries.iter() {
        let dicts = category.dictionaries();
        let [(None, dict)] = dicts.as_slice() else {
            return Err(Error::InvalidArgument(
                "brute-force oracle handles simple categories only".into(),
            ));
        };
        let rows = dict.grounded_texts().map(lookup).collect::<Result<Vec<_>>>()?;
        let n = rows.len() as f64;
        let centroid = (0..texts.dim())
            .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n)
            .collect();
        prepared.push(Prepared {
            id: category.id().to_owned(),
            rows,
            centroid,
            name: lookup(&ORACLE_TEMPLATE.replacen("{}", category.display_name(), 1))?,
        });
    }

    let mut by_image = BTreeMap::new();
    for (image_id, label) in manifest.labels() {
        let x = images
            .get(image_id)
            .ok_or_else(|| Error::UnknownImage(image_id.clone()))?
            .as_slice();
        let mut mean = Vec::new();
        let mut max = Vec::new();
        let mut base = Vec::new();
        for p in &prepared {
            mean.push((p.id.clone(), inner(x, &p.centroid)));
            let best = p.rows.iter().map(|r| inner(x, r)).fold(f64::NEG_INFINITY, f64::max);
            max.push((p.id.clone(), best));
            base.push((p.id.clone(), inner(x, &p.name)));
        }
        by_image.insert(
            image_id.clone(),
            OracleAnswer {
                image_id: image_id.clone(),
                gold: label.category_id.clone(),
                mean_ranking: ordered(mean),
                max_ranking: ordered(max),
                baseline_ranking: ordered(base),
            },
        );
    }
    Ok(by_image.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_images_are_perfectly_separable() {
        for seed in 0..4 {
            let o = make_synthetic_oracle(OracleConfig::new(seed, 10, 8, 100, 0.0)).unwrap();
            assert_eq!(o.mean_accuracy(), 1.0, "seed {seed}");
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let a = make_synthetic_oracle(OracleConfig::new(7, 5, 3, 20, 0.3)).unwrap();
        let b = make_synthetic_oracle(OracleConfig::new(7, 5, 3, 20, 0.3)).unwrap();
        assert_eq!(a.images.to_bytes(), b.images.to_bytes());
        assert_eq!(a.texts.to_bytes(), b.texts.to_bytes());
        assert_eq!(a.answers, b.answers);
        let c = make_synthetic_oracle(OracleConfig::new(8, 5, 3, 20, 0.3)).unwrap();
        assert_ne!(a.images.to_bytes(), c.images.to_bytes());
    }

    #[test]
    fn shapes() {
        let o = make_synthetic_oracle(OracleConfig::new(1, 3, 2, 7, 0.1)).unwrap();
        assert_eq!(o.images.len(), 7);
        assert_eq!(o.texts.len(), 3 * 2 + 3);
        assert_eq!(o.dictionaries.len(), 3);
        assert_eq!(o.answers.len(), 7);
        assert!(o.answers.iter().all(|a| a.mean_ranking.len() == 3));
        assert!(o.dictionaries.missing_texts(&o.texts).is_empty());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(make_synthetic_oracle(OracleConfig::new(1, 0, 2, 7, 0.1)).is_err());
        assert!(make_synthetic_oracle(OracleConfig::new(1, 2, 2, 7, -0.1)).is_err());
    }
}
