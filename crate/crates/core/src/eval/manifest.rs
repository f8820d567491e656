use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One JSON Lines record: `{"image_id", "category_id", "subgroup"?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRow {
    pub image_id: String,
    pub category_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub category_id: String,
    pub subgroup: Option<String>,
}

/// Gold labels for a set of images.
///
/// Labels are keyed by image id, so iteration order never depends on the
/// order rows were read in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    name: String,
    labels: BTreeMap<String, Label>,
    category_set: BTreeSet<String>,
}

impl DatasetManifest {
    /// The category set defaults to the labels' categories.
    pub fn new(name: impl Into<String>, rows: impl IntoIterator<Item = ManifestRow>) -> Result<Self> {
        let mut labels = BTreeMap::new();
        for row in rows {
            if row.image_id.is_empty() || row.category_id.is_empty() {
                return Err(Error::Manifest("empty image or category id".into()));
            }
            let label = Label {
                category_id: row.category_id,
                subgroup: row.subgroup,
            };
            if labels.insert(row.image_id.clone(), label).is_some() {
                return Err(Error::Manifest(format!("duplicate image id {:?}", row.image_id)));
            }
        }
        let category_set = labels.values().map(|l| l.category_id.clone()).collect();
        Ok(Self {
            name: name.into(),
            labels,
            category_set,
        })
    }

    /// Widens the category set; every label must remain inside it.
    pub fn with_category_set(mut self, categories: impl IntoIterator<Item = String>) -> Result<Self> {
        let set: BTreeSet<String> = categories.into_iter().collect();
        if let Some(missing) = self.category_set.iter().find(|c| !set.contains(*c)) {
            return Err(Error::Manifest(format!(
                "label category {missing:?} outside the category set"
            )));
        }
        self.category_set = set;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &BTreeMap<String, Label> {
        &self.labels
    }

    pub fn label(&self, image_id: &str) -> Option<&Label> {
        self.labels.get(image_id)
    }

    pub fn category_set(&self) -> &BTreeSet<String> {
        &self.category_set
    }

    pub fn rows(&self) -> impl Iterator<Item = ManifestRow> + '_ {
        self.labels.iter().map(|(id, l)| ManifestRow {
            image_id: id.clone(),
            category_id: l.category_id.clone(),
            subgroup: l.subgroup.clone(),
        })
    }

    pub fn from_jsonl(name: impl Into<String>, reader: impl BufRead) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Manifest(format!("line {}: {e}", n + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: ManifestRow =
                serde_json::from_str(&line).map_err(|e| Error::Manifest(format!("line {}: {e}", n + 1)))?;
            rows.push(row);
        }
        Self::new(name, rows)
    }

    pub fn to_jsonl(&self) -> String {
        self.rows()
            .map(|r| serde_json::to_string(&r).expect("row serializes") + "\n")
            .collect()
    }

    /// Named after the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_jsonl(name, std::io::BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::error::write_atomic(path, self.to_jsonl().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROWS: &str = r#"{"image_id": "b.jpg", "category_id": "hen"}

{"image_id": "a.jpg", "category_id": "wedding", "subgroup": "japanese"}
"#;

    #[test]
    fn parses_jsonl() {
        let m = DatasetManifest::from_jsonl("t", ROWS.as_bytes()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.label("a.jpg").unwrap().subgroup.as_deref(), Some("japanese"));
        assert_eq!(m.category_set().iter().collect::<Vec<_>>(), ["hen", "wedding"]);
        let again = DatasetManifest::from_jsonl("t", m.to_jsonl().as_bytes()).unwrap();
        assert_eq!(again, m);
        assert!(m.to_jsonl().starts_with(r#"{"image_id":"a.jpg""#));
    }

    #[test]
    fn rejects_bad_rows() {
        let dup = "{\"image_id\":\"a\",\"category_id\":\"x\"}\n{\"image_id\":\"a\",\"category_id\":\"y\"}\n";
        assert!(DatasetManifest::from_jsonl("t", dup.as_bytes()).is_err());
        assert!(DatasetManifest::from_jsonl("t", "{\"image_id\":\"a\"}".as_bytes()).is_err());
        assert!(
            DatasetManifest::from_jsonl("t", "{\"image_id\":\"a\",\"category_id\":\"x\",\"extra\":1}".as_bytes())
                .is_err()
        );
        assert!(DatasetManifest::from_jsonl("t", "nope".as_bytes()).is_err());
    }

    #[test]
    fn category_set_must_cover_labels() {
        let m = DatasetManifest::from_jsonl("t", ROWS.as_bytes()).unwrap();
        assert!(m.clone().with_category_set(["hen".to_string()]).is_err());
        let wide = m
            .with_category_set(["hen", "owl", "wedding"].map(String::from))
            .unwrap();
        assert_eq!(wide.category_set().len(), 3);
    }
}
