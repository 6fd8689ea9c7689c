//! Topic-model stability toolkit.
//!
//! Fits LDA (collapsed Gibbs sampling) and PCA-with-Varimax factor models on
//! the same word-document matrix, and quantifies how the two model families
//! behave under corpus ablation (topSim), how semantically coherent their
//! topics are, and how reliable LDA is across random seeds (Cramér's V).
//!
//! The numeric kernels are generic over the scalar type through
//! [`scalar::Real`]; the pipeline and CLI run in `f64` via the aliases at
//! the crate root.

pub mod chart;
pub mod cooccur;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod lda;
pub mod linalg;
pub mod metrics;
pub mod pca;
pub mod scalar;
pub mod special;
pub mod synth;
pub mod topics;

pub use error::{Error, Result};

/// `f64` specializations used by the pipeline.
pub type LdaConfig64 = lda::LdaConfig<f64>;
pub type LdaModel64 = lda::LdaModel<f64>;
pub type FactorModel64 = pca::FactorModel<f64>;
pub type FactorScores64 = pca::FactorScores<f64>;
pub type CorrelationMatrix64 = pca::CorrelationMatrix<f64>;
pub type WordGraph64 = cooccur::WordGraph<f64>;
pub type Partition64 = cooccur::Partition<f64>;
pub type CramersV64 = metrics::CramersV<f64>;
