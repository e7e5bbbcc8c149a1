//! Counterfactual triplet construction, a decoupled triplet contrastive
//! objective trained jointly with a language-modeling loss, and
//! StereoSet-style bias metrics (SS, LM Score, ICAT), at toy scale.
//!
//! Pipeline:
//!
//! - [`corpus`] reads and writes every dataset file
//! - [`forge`] turns counterfactual pairs into filtered triplets
//! - [`encoder`] is the trainable toy sentence encoder and causal LM head
//! - [`objectives`] holds cosine similarity and the losses with exact gradients
//! - [`trainer`] optimizes the joint objective with Adam
//! - [`biaseval`] scores evaluation items and aggregates bias metrics
//! - [`ablation`] runs the three training modes side by side
//! - [`synth`] generates seeded synthetic worlds with planted correlations

pub mod ablation;
pub mod biaseval;
pub mod corpus;
pub mod encoder;
mod error;
pub mod forge;
pub mod manifest;
pub mod objectives;
pub mod synth;
pub mod text;
pub mod trainer;

pub use error::{Error, Result};
