//! Core library for the voxmae pipeline: volume handling, the autodiff
//! engine, the masked-autoencoder model, training loops, and evaluation.

pub mod error;
pub mod mat;
pub mod par;
pub mod rng;
pub mod volume;

pub use error::{Result, VoxError};
