//! Toy trainable sentence encoder and causal LM head.
//!
//! The encoder mean-pools token embeddings and applies one `tanh` projection.
//! The LM head predicts the next token from the same projection applied to
//! the running prefix mean, so both objectives share `E`, `W` and `b`.

mod checkpoint;
mod model;
mod vocab;

pub use model::{
    EncodeCache, Encoded, EncoderGrads, EncoderParams, HeadGrads, LmHeadParams, Matrix,
    ModelGrads, ToyModel, BLOCK_NAMES, DEFAULT_DIM, INIT_SCALE,
};
pub use vocab::{Vocab, BOS, PAD, UNK};

/// Default minimum token frequency for vocabulary construction.
pub const DEFAULT_MIN_FREQ: usize = 2;
