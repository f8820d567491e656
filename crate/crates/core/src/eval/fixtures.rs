//! Planted fixtures for retrieval and subgroup experiments.
//!
//! Both are deterministic and small enough to rebuild per test.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::manifest::{DatasetManifest, ManifestRow};
use super::oracle::{gaussian, to_f32, unit64};
use crate::dictionary::{Category, CategoryDictionary, DictionarySet};
use crate::embedding::{EmbeddingStore, EmbeddingVector, StoreKind};
use crate::error::Result;
use crate::scoring::DEFAULT_TEMPLATE;

const DIM: usize = 64;

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    unit64(gaussian(rng, dim))
}

/// `normalize(center + spread * u)` for a fresh random unit `u`.
fn around(rng: &mut ChaCha8Rng, center: &[f64], spread: f64) -> Vec<f64> {
    let u = random_unit(rng, center.len());
    unit64(center.iter().zip(&u).map(|(c, x)| c + spread * x).collect())
}

fn vector(v: &[f64]) -> Result<EmbeddingVector> {
    EmbeddingVector::new(to_f32(v))
}

/// A category absent from any training vocabulary: a handful of relevant
/// images hidden among distractors, descriptors that point at the relevant
/// cluster and a class-name embedding that points somewhere else.
#[derive(Debug, Clone)]
pub struct NovelCategoryFixture {
    pub category_id: String,
    pub images: EmbeddingStore,
    pub texts: EmbeddingStore,
    pub dictionaries: DictionarySet,
    pub relevant: BTreeSet<String>,
}

pub const NOVEL_CATEGORY_ID: &str = "ever_given";

const NOVEL_DESCRIPTORS: [&str; 5] = [
    "a massive container ship",
    "the word EVERGREEN painted on its hull",
    "a ship wedged across a canal",
    "excavators digging at the canal bank",
    "desert sand along the shore",
];

/// 5 relevant images among 500, distractors in 9 clusters of 55.
pub fn novel_category() -> Result<NovelCategoryFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut images = EmbeddingStore::new(StoreKind::Image, DIM)?;
    let mut texts = EmbeddingStore::new(StoreKind::Text, DIM)?;

    let target = random_unit(&mut rng, DIM);
    let clusters: Vec<Vec<f64>> = (0..9).map(|_| random_unit(&mut rng, DIM)).collect();

    let dict = CategoryDictionary::new(NOVEL_CATEGORY_ID, "Ever Given", NOVEL_DESCRIPTORS)?;
    for text in dict.grounded_texts() {
        texts.insert(text, vector(&around(&mut rng, &target, 0.5))?)?;
    }
    let name = DEFAULT_TEMPLATE.replacen("{}", dict.display_name(), 1);
    texts.insert(name, vector(&around(&mut rng, &clusters[0], 0.2))?)?;

    let mut relevant = BTreeSet::new();
    for i in 0..5 {
        let id = format!("evergiven_{i:02}");
        images.insert(id.clone(), vector(&around(&mut rng, &target, 0.3))?)?;
        relevant.insert(id);
    }
    for (c, center) in clusters.iter().enumerate() {
        for i in 0..55 {
            images.insert(format!("ship_{c}_{i:02}"), vector(&around(&mut rng, center, 0.3))?)?;
        }
    }
    let mut dictionaries = DictionarySet::new();
    dictionaries.insert(dict);
    Ok(NovelCategoryFixture {
        category_id: NOVEL_CATEGORY_ID.to_owned(),
        images,
        texts,
        dictionaries,
        relevant,
    })
}

/// The dictionary file behind [`wedding`]. The non-Western subgroups
/// substitute one culture-specific phrase per Western one; the choices are a
/// reconstruction rather than a published list.
pub const WEDDING_DICTIONARY_JSON: &str = include_str!("../../fixtures/wedding.json");

pub const WEDDING_ID: &str = "wedding";
pub const WESTERN: &str = "western";
pub const WEDDING_IMAGES_PER_SUBGROUP: usize = 10;

/// Background descriptors that share a visual concept with a wedding
/// descriptor, by phrase. Unlisted descriptors get an unrelated direction.
const ALIGNED: [(&str, &str); 11] = [
    ("a man in a dark suit", "a groom wearing a tuxedo"),
    ("a fitted silk dress with a high collar", "a bride wearing a red qipao"),
    ("a mandarin collar", "a groom wearing a changshan"),
    ("stained glass windows", "a church ceremony"),
    ("a wooden altar", "a church ceremony"),
    ("a loose colorful tunic", "a groom wearing a dashiki"),
    ("bold embroidered patterns", "a bride wearing a gele headwrap"),
    (
        "a long robe with wide sleeves",
        "a bride wearing a white shiromuku kimono",
    ),
    ("a wide obi sash", "a groom wearing a montsuki kimono"),
    ("a long draped fabric", "a bride wearing a red lehenga"),
    ("an embroidered border", "a groom wearing a sherwani"),
];

const ALIGNMENT: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct WeddingFixture {
    pub images: EmbeddingStore,
    pub texts: EmbeddingStore,
    /// Subgroup-tagged manifest, every image labelled `wedding`.
    pub manifest: DatasetManifest,
    /// The dictionary file as shipped, including `bridegroom`.
    pub shipped: DictionarySet,
    /// Five subgroups, `bridegroom` removed.
    pub edited: DictionarySet,
    /// Western descriptors only as a simple category, `bridegroom` removed.
    pub unedited: DictionarySet,
}

/// Each image holds every concept of its subgroup's descriptor list.
/// Every grounded text of the shipped file is embedded.
pub fn wedding() -> Result<WeddingFixture> {
    let shipped = DictionarySet::from_json(WEDDING_DICTIONARY_JSON)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let dim = 128;

    let Some(Category::Subgroups(set)) = shipped.get(WEDDING_ID) else {
        return Err(crate::Error::Dictionary("wedding fixture lacks subgroup sets".into()));
    };
    let mut concepts: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for dict in set.subgroups().values() {
        for phrase in dict.phrases() {
            if !concepts.contains_key(phrase) {
                concepts.insert(phrase, random_unit(&mut rng, dim));
            }
        }
    }

    let mut texts = EmbeddingStore::new(StoreKind::Text, dim)?;
    for category in shipped.iter() {
        for (_, dict) in category.dictionaries() {
            for descriptor in dict.descriptors() {
                if texts.contains(descriptor.grounded_text()) {
                    continue;
                }
                let aligned = ALIGNED.iter().find(|(p, _)| *p == descriptor.phrase());
                let v = match (category.id() == WEDDING_ID, aligned) {
                    (true, _) => concepts[descriptor.phrase()].clone(),
                    (false, Some((_, concept))) => {
                        let c = &concepts[concept];
                        let u = random_unit(&mut rng, dim);
                        let rest = (1.0 - ALIGNMENT * ALIGNMENT).sqrt();
                        unit64(c.iter().zip(&u).map(|(a, b)| ALIGNMENT * a + rest * b).collect())
                    }
                    (false, None) => random_unit(&mut rng, dim),
                };
                texts.insert(descriptor.grounded_text(), vector(&v)?)?;
            }
        }
    }

    let mut images = EmbeddingStore::new(StoreKind::Image, dim)?;
    let mut rows = Vec::new();
    for (name, dict) in set.subgroups() {
        let mut sum = vec![0.0f64; dim];
        for phrase in dict.phrases() {
            for (s, c) in sum.iter_mut().zip(&concepts[phrase]) {
                *s += c;
            }
        }
        let center = unit64(sum);
        for i in 0..WEDDING_IMAGES_PER_SUBGROUP {
            let image_id = format!("wedding_{name}_{i:02}");
            images.insert(image_id.clone(), vector(&around(&mut rng, &center, 0.3))?)?;
            rows.push(ManifestRow {
                image_id,
                category_id: WEDDING_ID.to_owned(),
                subgroup: Some(name.clone()),
            });
        }
    }

    let mut edited = shipped.clone();
    edited.remove("bridegroom");
    let mut unedited = edited.clone();
    unedited.insert(set.subgroup(WESTERN)?.clone());
    let manifest = DatasetManifest::new("wedding", rows)?.with_category_set(edited.ids().map(str::to_owned))?;
    Ok(WeddingFixture {
        images,
        texts,
        manifest,
        shipped,
        edited,
        unedited,
    })
}
