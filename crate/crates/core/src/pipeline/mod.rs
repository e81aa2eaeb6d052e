//! End-to-end experiments: configuration, variant runs and synthetic data.

mod config;
mod experiment;
mod synthetic;

pub use config::{ClusterScope, DictionaryInput, ExperimentConfig, LexiconInput, SynonymInput, Variant, VectorInput};
pub use experiment::{
    compare_variants, prepare, run_experiment, run_prepared, Comparison, ComparisonRow, ConstraintSummary,
    ExperimentOutcome, InputRecord, Manifest, PreparedInputs,
};
pub use synthetic::{run_synthetic, SyntheticExperiment, SyntheticSpec, HIGH_NOISE};
