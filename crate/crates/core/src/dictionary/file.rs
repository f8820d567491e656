//! JSON dictionary file.
//!
//! ```json
//! {
//!   "hen": {"display_name": "hen", "descriptors": ["a beak", "feathers"]},
//!   "wedding": {"display_name": "wedding", "subgroups": {"western": ["a tuxedo"]}}
//! }
//! ```
//!
//! Grounded texts are derived on load and never written.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::descriptor::{Category, CategoryDictionary, DictionarySet, SubgroupDictionarySet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CategoryEntry {
    Simple {
        display_name: String,
        descriptors: Vec<String>,
    },
    Subgroups {
        display_name: String,
        subgroups: BTreeMap<String, Vec<String>>,
    },
}

impl CategoryEntry {
    pub fn from_category(category: &Category) -> Self {
        let phrases = |d: &CategoryDictionary| d.phrases().map(str::to_owned).collect();
        match category {
            Category::Simple(d) => CategoryEntry::Simple {
                display_name: d.display_name().to_owned(),
                descriptors: phrases(d),
            },
            Category::Subgroups(s) => CategoryEntry::Subgroups {
                display_name: s.display_name().to_owned(),
                subgroups: s
                    .subgroups()
                    .iter()
                    .map(|(name, d)| (name.clone(), phrases(d)))
                    .collect(),
            },
        }
    }

    pub fn into_category(self, category_id: &str) -> Result<Category> {
        Ok(match self {
            CategoryEntry::Simple {
                display_name,
                descriptors,
            } => CategoryDictionary::new(category_id, &display_name, descriptors)?.into(),
            CategoryEntry::Subgroups {
                display_name,
                subgroups,
            } => SubgroupDictionarySet::new(category_id, &display_name, subgroups)?.into(),
        })
    }
}

impl DictionarySet {
    pub fn to_json(&self) -> String {
        let entries: BTreeMap<&str, CategoryEntry> =
            self.iter().map(|c| (c.id(), CategoryEntry::from_category(c))).collect();
        let mut out = serde_json::to_string_pretty(&entries).expect("dictionary entries serialize");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let entries: BTreeMap<String, CategoryEntry> =
            serde_json::from_str(text).map_err(|e| Error::Dictionary(e.to_string()))?;
        entries
            .into_iter()
            .map(|(id, entry)| entry.into_category(&id))
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::error::write_atomic(path, self.to_json().as_bytes())
    }
}
