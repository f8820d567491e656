//! Unit-norm embedding vectors and the on-disk store that holds them.
//!
//! The store is the only bridge between the engine and a vision-language
//! model: image embeddings are keyed by image id, text embeddings by the
//! exact grounded text that was embedded.
//!
//! Similarity between a grounded descriptor and an image is the cosine of
//! their unit-normalized embeddings. Only the ordering and averages of these
//! values matter for classification, so no temperature or softmax is applied.

mod store;
mod vector;

pub use store::{EmbeddingStore, StoreKind, FORMAT_VERSION, HEADER_LEN, MAGIC};
pub use vector::{cosine, dot, normalize, EmbeddingVector};
