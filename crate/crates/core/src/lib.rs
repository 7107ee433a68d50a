//! Visual analogy solving for ARC grids.
//!
//! Grids are canonicalized onto a 10x30x30 one-hot canvas, embedded with a
//! convolutional variational autoencoder, and solved by latent arithmetic:
//! the prediction for a test input `c` is `g(f(c) + r)` where `r` combines the
//! per-example rule vectors `f(b) - f(a)`.

pub mod analysis;
pub mod augment;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod nn;
pub mod preprocess;
pub mod seed;
pub mod solver;
pub mod vae;

pub use error::{Error, Result};
