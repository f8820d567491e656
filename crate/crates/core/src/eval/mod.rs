//! Accuracy, retrieval and subgroup evaluation, plus the synthetic data used
//! to verify the engine without real embeddings.

mod evaluate;
pub mod fixtures;
mod manifest;
pub mod oracle;
mod retrieval;
mod subgroup;

pub use evaluate::{evaluate, CategoryAccuracy, EvalReport};
pub use manifest::{DatasetManifest, Label, ManifestRow};
pub use oracle::{make_synthetic_oracle, OracleAnswer, OracleConfig, SyntheticOracle};
pub use retrieval::{recall_at_k, retrieve_topk, retrieve_topk_baseline, RecallReport, RetrievedImage};
pub use subgroup::{subgroup_accuracy, SubgroupAccuracy, SubgroupStat};
