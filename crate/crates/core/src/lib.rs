//! Anisotropic diffusion maps on point clouds.
//!
//! The pipeline runs left to right:
//!
//! ```text
//! PointCloud ─► KernelMatrix + DensityEstimate ─► MarkovEnsemble (α) ─► SpectralDecomposition ─► embedding
//! ```
//!
//! [`potentials`] and [`sampler`] generate equilibrium samples of `p = e^{-U}`
//! for test systems whose spectra are known in closed form ([`oracles`]), and
//! [`analysis`] turns embeddings into clusters and figure-level statistics.

pub mod analysis;
pub mod cli;
pub mod dataset;
pub mod diffusion;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod oracles;
pub mod potentials;
pub mod recipes;
pub mod rng;
pub mod sampler;

pub use dataset::{LabeledPointCloud, PointCloud};
pub use diffusion::{DiffusionEmbedding, MarkovEnsemble, SpectralDecomposition};
pub use error::{Error, Result};
pub use kernel::{DensityEstimate, KernelMatrix, KernelParams};
pub use potentials::PotentialSpec;
