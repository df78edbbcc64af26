//! Attention-aware rendering capacity allocation.
//!
//! The crate covers the whole pipeline without touching IO:
//!
//! - [`world`]: a seeded synthetic world of users, objects and grouped scene
//!   images with per-user latent interest.
//! - [`attention`]: gaze-weighted attention values and their 5-level
//!   quantization; dense ground truth.
//! - [`sparsify`]: sparse per-user history records drawn by sampling service
//!   groups and a random share of their images.
//! - [`predict`]: bias-augmented matrix factorization, mean baselines and
//!   held-out metrics.
//! - [`qoe`]: logarithmic (Weber-Fechner) QoE and the link-dependent
//!   connection coefficient.
//! - [`allocator`]: weighted log-utility water-filling with per-object
//!   floors, the uniform baseline and a brute-force grid oracle.
//! - [`experiment`]: the end-to-end harness comparing uniform, attention-aware
//!   and oracle allocations.
//!
//! The crate is `no_std` and only needs `alloc`. All transcendental functions
//! go through `libm` so results are bit-identical across platforms.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod allocator;
pub mod attention;
mod error;
pub mod experiment;
pub mod predict;
pub mod qoe;
pub mod records;
pub mod rng;
pub mod sparsify;
pub mod world;

pub use error::{Error, Result};
pub use records::{Level, SparseAttentionRecords};

/// Index of a user, `0..num_users`.
pub type UserId = usize;
/// Index of an object in the catalog, `0..num_objects`.
pub type ObjectId = usize;
/// Index of a scene image, `0..num_images`.
pub type ImageId = usize;
