//! Knowledge graph embeddings for explainable recommendation.
//!
//! Ratings and aspect opinions form a user/item/aspect graph
//! ([`graph`]); every node and relation is embedded as a complex vector
//! ([`embedding`]); items are recommended by cosine proximity
//! ([`recommend`]), evaluated by cross-validation ([`eval`]) and explained
//! through the aspect opinions of similar users ([`explain`]).

pub mod embedding;
pub mod error;
pub mod eval;
pub mod explain;
pub mod graph;
pub mod recommend;
pub mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Single-precision model, the checkpoint and serving default.
pub type Model = embedding::EmbeddingModel<f32>;
pub type Model64 = embedding::EmbeddingModel<f64>;
pub type ComplexVec = embedding::ComplexVector<f32>;
