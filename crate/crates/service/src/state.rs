use std::path::PathBuf;
use std::sync::{Arc, OnceLock, RwLock};

use descry_core::dictionary::DictionarySet;
use descry_core::embedding::EmbeddingStore;
use descry_core::scoring::{BaselineSpec, ScoringIndex};
use descry_core::Result;

/// One immutable version of the session. Requests score against the
/// snapshot current when they start; edits publish a new one.
#[derive(Debug)]
pub struct Snapshot {
    pub version: u64,
    pub dictionaries: Arc<DictionarySet>,
    pub images: Arc<EmbeddingStore>,
    pub texts: Arc<EmbeddingStore>,
    method: OnceLock<Arc<ScoringIndex>>,
    single: OnceLock<Arc<ScoringIndex>>,
    ensemble: OnceLock<Arc<ScoringIndex>>,
}

impl Snapshot {
    pub fn new(
        version: u64,
        dictionaries: Arc<DictionarySet>,
        images: Arc<EmbeddingStore>,
        texts: Arc<EmbeddingStore>,
    ) -> Self {
        Self {
            version,
            dictionaries,
            images,
            texts,
            method: OnceLock::new(),
            single: OnceLock::new(),
            ensemble: OnceLock::new(),
        }
    }

    fn cached(
        cell: &OnceLock<Arc<ScoringIndex>>,
        build: impl FnOnce() -> Result<ScoringIndex>,
    ) -> Result<Arc<ScoringIndex>> {
        if let Some(index) = cell.get() {
            return Ok(index.clone());
        }
        let index = Arc::new(build()?);
        Ok(cell.get_or_init(|| index).clone())
    }

    pub fn method_index(&self) -> Result<Arc<ScoringIndex>> {
        Self::cached(&self.method, || ScoringIndex::build(&self.dictionaries, &self.texts))
    }

    pub fn baseline_index(&self, ensemble: bool) -> Result<Arc<ScoringIndex>> {
        if ensemble {
            Self::cached(&self.ensemble, || {
                ScoringIndex::baseline(&self.dictionaries, &self.texts, &BaselineSpec::ensemble())
            })
        } else {
            Self::cached(&self.single, || {
                ScoringIndex::baseline(&self.dictionaries, &self.texts, &BaselineSpec::single())
            })
        }
    }
}

/// Shared state: the current snapshot behind a single-writer guard.
#[derive(Debug)]
pub struct AppState {
    current: RwLock<Arc<Snapshot>>,
    dictionary_path: Option<PathBuf>,
}

impl AppState {
    pub fn new(dictionaries: DictionarySet, images: EmbeddingStore, texts: EmbeddingStore) -> Self {
        let snapshot = Snapshot::new(1, Arc::new(dictionaries), Arc::new(images), Arc::new(texts));
        Self {
            current: RwLock::new(Arc::new(snapshot)),
            dictionary_path: None,
        }
    }

    /// Where `POST /save` and shutdown write the dictionary file.
    pub fn with_dictionary_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.dictionary_path = Some(path.into());
        self
    }

    pub fn dictionary_path(&self) -> Option<&PathBuf> {
        self.dictionary_path.as_ref()
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Runs `edit` against the current snapshot while holding the write lock.
    /// A returned snapshot replaces the current one.
    pub fn update<T, E>(&self, edit: impl FnOnce(&Snapshot) -> Result<(Option<Snapshot>, T), E>) -> Result<T, E> {
        let mut guard = self.current.write().unwrap_or_else(|e| e.into_inner());
        let (next, out) = edit(&guard)?;
        if let Some(next) = next {
            *guard = Arc::new(next);
        }
        Ok(out)
    }

    /// Writes the current dictionaries, if a path is configured.
    pub fn save(&self) -> Result<Option<(PathBuf, u64)>> {
        let Some(path) = &self.dictionary_path else {
            return Ok(None);
        };
        let snapshot = self.snapshot();
        snapshot.dictionaries.save(path)?;
        Ok(Some((path.clone(), snapshot.version)))
    }
}
