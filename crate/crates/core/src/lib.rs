//! Cross-lingual induction of verb classes.
//!
//! A source-language verb classification is transferred to a target language
//! through a joint word-vector space:
//!
//! 1. [`embedding`] loads and merges per-language word vectors.
//! 2. [`constraints`] turns verb classes, translation dictionaries and synonym
//!    sets into ATTRACT word pairs.
//! 3. [`specializer`] fine-tunes the joint space so that constrained pairs move
//!    closer than their in-batch neighbours.
//! 4. [`clustering`] groups the target verbs with normalised-cut spectral
//!    clustering, estimating the number of classes from the eigenvectors.
//! 5. [`evaluation`] scores the induced classes against a gold standard.
//!
//! [`pipeline`] wires the stages together and includes a synthetic
//! experiment generator.

pub mod clustering;
pub mod constraints;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod pipeline;
pub mod specializer;

pub use error::{Error, Result};
