//! Demographic-bias auditing and debiasing for text-to-image backends.

pub mod audit;
pub mod classifier;
pub mod debias;
pub mod demographic;
pub mod embedding;
pub mod ingest;
pub mod simulator;
pub mod stats;

pub use audit::{
    compare_backends, run_audit, AuditConfig, AuditError, AuditReport, ComparisonTable, DemographicClassifier,
    PromptGroup, PromptSpec, SvmClassifier, TrueLabelClassifier, VariantPolicy,
};
pub use classifier::{EvalMetrics, Gamma, SvmError, SvmHyperParams, SvmModel};
pub use demographic::{
    bias_sigma, chi_square_gof, total_variation, Axis, Category, CountTable, DemographicDistribution,
    DemographicError, DemographicLabel, Gender, GenderDistribution, LabelDistribution, Race, RaceDistribution,
};
pub use embedding::{EmbeddingError, EmbeddingVector};
pub use ingest::{EmbeddingRecord, IngestError};
pub use debias::{TargetDistribution, VariantKey};
pub use simulator::{BackendError, BackendSpec, GenerationBackend, SyntheticBackend, SyntheticWorldConfig};
