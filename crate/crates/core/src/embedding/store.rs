use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::vector::{normalize, EmbeddingVector};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DSCR";
pub const FORMAT_VERSION: u32 = 1;
/// magic + version + kind + dim + count
pub const HEADER_LEN: usize = 4 + 4 + 1 + 4 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreKind {
    Image,
    Text,
}

impl StoreKind {
    fn tag(self) -> u8 {
        match self {
            StoreKind::Image => 0,
            StoreKind::Text => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(StoreKind::Image),
            1 => Ok(StoreKind::Text),
            other => Err(Error::Format(format!("unknown store kind {other}"))),
        }
    }
}

/// Unit-norm vectors keyed by id, all of the same dimension.
///
/// Ids iterate in byte-lexicographic order, which is also the on-disk order.
/// A store is immutable once shared; mutation goes through an owned value.
///
/// File layout (little-endian):
///
/// ```text
/// "DSCR" | version u32 = 1 | kind u8 | dim u32 | count u32
/// count × [ id_len u16 | id UTF-8 | dim × f32 ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    kind: StoreKind,
    dim: usize,
    entries: BTreeMap<String, EmbeddingVector>,
}

impl EmbeddingStore {
    pub fn new(kind: StoreKind, dim: usize) -> Result<Self> {
        if dim == 0 || dim > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("invalid store dimension {dim}")));
        }
        Ok(Self {
            kind,
            dim,
            entries: BTreeMap::new(),
        })
    }

    pub fn kind(&self) -> StoreKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingVector> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Inserts a new entry, normalizing it. Fails on a repeated id.
    pub fn insert(&mut self, id: impl Into<String>, vector: EmbeddingVector) -> Result<()> {
        let id = id.into();
        if self.entries.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.upsert(id, vector).map(|_| ())
    }

    /// Inserts or overwrites an entry. Returns true when an entry was replaced.
    pub fn upsert(&mut self, id: impl Into<String>, vector: EmbeddingVector) -> Result<bool> {
        let id = id.into();
        validate_id(&id)?;
        if vector.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.dim(),
            });
        }
        let unit = normalize(&vector)?;
        Ok(self.entries.insert(id, unit).is_some())
    }

    pub fn remove(&mut self, id: &str) -> Option<EmbeddingVector> {
        self.entries.remove(id)
    }

    /// Serialized length in bytes.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.entries.keys().map(|id| 2 + id.len() + 4 * self.dim).sum::<usize>()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.kind.tag());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for (id, vector) in &self.entries {
            out.extend_from_slice(&(id.len() as u16).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
            for value in vector.as_slice() {
                out.extend_from_slice(&value.to_le_bytes());
            }
        }
        out
    }

    /// Parses a store, normalizing every vector.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let kind = StoreKind::from_tag(r.u8()?)?;
        let dim = r.u32()? as usize;
        let count = r.u32()? as usize;
        let mut store = EmbeddingStore::new(kind, dim).map_err(|_| Error::Format("dimension is zero".into()))?;

        let mut previous: Option<String> = None;
        let mut warned_order = false;
        for _ in 0..count {
            let id_len = r.u16()? as usize;
            let id = std::str::from_utf8(r.take(id_len)?)
                .map_err(|_| Error::Format("id is not valid UTF-8".into()))?
                .to_owned();
            let payload = r.take(4 * dim)?;
            let values = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            if !warned_order && previous.as_deref().is_some_and(|p| p > id.as_str()) {
                log::warn!("store ids are not in lexicographic order; they will be re-sorted on save");
                warned_order = true;
            }
            store.insert(id.clone(), EmbeddingVector::new(values)?)?;
            previous = Some(id);
        }
        if r.pos != bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::error::write_atomic(path, &self.to_bytes())
    }
}

fn validate_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::InvalidId("id is empty".into()));
    }
    if id.len() > u16::MAX as usize {
        return Err(Error::InvalidId(format!(
            "id is {} bytes, limit is {}",
            id.len(),
            u16::MAX
        )));
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
