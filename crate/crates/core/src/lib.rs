//! Zero-shot classification by description.
//!
//! Images are scored against per-category dictionaries of natural-language
//! descriptors. A category's score is the mean similarity between the image
//! embedding and the embeddings of its grounded descriptors, the winner is
//! the highest-scoring category, and every decision carries the
//! per-descriptor similarities that produced it.
//!
//! The engine never runs a neural network: image and text embeddings come
//! from [`embedding::EmbeddingStore`] files produced offline.

pub mod dictionary;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod scoring;

pub use error::{Error, Result};
