use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Squared-norm tolerance under which a vector already counts as unit length.
///
/// Vectors inside the tolerance are returned untouched by [`normalize`], which
/// keeps normalization exactly idempotent on its own output.
const UNIT_TOLERANCE: f64 = 1e-6;

/// A finite, non-empty vector of 32-bit floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("embedding vector has no entries".into()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    /// Builds a unit-norm vector from raw values.
    pub fn unit(values: Vec<f32>) -> Result<Self> {
        normalize(&Self::new(values)?)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    /// Euclidean norm accumulated in f64.
    pub fn norm(&self) -> f64 {
        squared_norm(&self.0).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (squared_norm(&self.0) - 1.0).abs() <= UNIT_TOLERANCE
    }
}

impl AsRef<[f32]> for EmbeddingVector {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

fn squared_norm(values: &[f32]) -> f64 {
    values.iter().fold(0.0f64, |acc, &v| acc + f64::from(v) * f64::from(v))
}

/// Scales `v` to unit Euclidean norm.
pub fn normalize(v: &EmbeddingVector) -> Result<EmbeddingVector> {
    let sq = squared_norm(&v.0);
    if sq == 0.0 || !sq.is_normal() {
        return Err(Error::ZeroVector);
    }
    if (sq - 1.0).abs() <= UNIT_TOLERANCE {
        return Ok(v.clone());
    }
    let norm = sq.sqrt();
    let values = v.0.iter().map(|&x| (f64::from(x) / norm) as f32).collect();
    Ok(EmbeddingVector(values))
}

/// Dot product accumulated in f64, strictly left to right.
pub fn dot(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (&x, &y)| acc + f64::from(x) * f64::from(y)))
}

/// Cosine similarity of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    Ok(dot(&a.0, &b.0)?.clamp(-1.0, 1.0))
}
