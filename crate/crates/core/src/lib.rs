//! Transferability estimation for frozen encoder features.
//!
//! * [`evidence`] computes LogME, the normalized maximum evidence of a
//!   Bayesian linear model from features to targets.
//! * [`pooling`] turns token-level embeddings into instance features.
//! * [`store`] reads and writes the binary feature/label interchange files.
//! * [`rank`] ranks candidate models and correlates scores with observed
//!   performance.

pub mod error;
pub mod evidence;
pub mod matrix;
pub mod numeric;
pub mod pooling;
pub mod rank;
pub mod store;

pub use error::{Error, Result};
pub use evidence::{
    log_evidence, logme_score, maximize_evidence, spectral_decompose, EvidenceResult,
    FeatureSpectrum, LogmeScore, SolverConfig, SpectralDecomposition,
};
pub use matrix::{FeatureMatrix, TargetVector};
pub use pooling::{
    pool_cls, pool_mean_sequence, pool_mean_token, PoolingStrategy, SequenceAlignment,
    SubwordAlignment, TokenEmbeddingStore,
};
pub use rank::{
    evaluate_ranking, pearson, prob_better, rank_models, weighted_kendall_tau, CandidateScore,
    RankingReport, Setting, TauVariant,
};
pub use store::{read_feature_store, write_feature_store, Dtype, StoreManifest};
