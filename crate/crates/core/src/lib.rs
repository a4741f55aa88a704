//! Modal-basis image features and baselines, with a from-scratch MLP and a
//! reproducible benchmark harness.
//!
//! The centerpiece is the DRIFT transform: an image is treated as a simply
//! supported rectangular plate, and its pixels are projected (by cosine
//! similarity) onto the plate's sampled vibration mode shapes
//! `sin(n*pi*x/Lx) * sin(m*pi*y/Ly)`. Keeping the `N` lowest-frequency modes
//! turns a `W*H*C` image into an `N`-dimensional feature vector. PCA and a
//! raw-pixel "full" baseline sit next to it behind the same feature-matrix
//! interface so the three can be compared under identical training.
//!
//! Modules:
//! - [`modal`]: mode enumeration and the orthonormal sampled basis.
//! - [`dataset`]: MNIST/IDX and CIFAR-100 binary ingestion, bilinear resize,
//!   stratified subsampling, plus writers for fixtures.
//! - [`transform`]: DRIFT / PCA / full feature extraction and standardization.
//! - [`mlp`]: feedforward classifier with softmax cross-entropy, backprop,
//!   SGD/Adam, and deterministic training.
//! - [`experiment`]: single runs, grids, generalization-gap statistics, and
//!   CSV output.
//! - [`synth`]: deterministic synthetic datasets for fixtures and demos.
//!
//! All numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the default `f64` precision used by the CLI.

pub mod dataset;
pub mod error;
pub mod experiment;
mod linalg;
pub mod mlp;
pub mod modal;
pub mod scalar;
pub mod synth;
pub mod transform;

pub use error::{Error, ParseKind, Result};
pub use scalar::Scalar;

pub use dataset::{Dataset, Image};
pub use experiment::{ExperimentConfig, GapStats, GridRun, RunRecord, SweepAxis};
pub use mlp::{EpochMetrics, MlpModel, TrainConfig};
pub use modal::{ModalBasis, ModeIndex};
pub use transform::{ChannelPolicy, FeatureMatrix, PcaModel, Standardizer};

/// Default working precision for the CLI and experiment harness.
pub type Real = f64;
/// A modal basis at the default precision.
pub type Basis = ModalBasis<Real>;
/// A feature matrix at the default precision.
pub type Features = FeatureMatrix<Real>;
/// A classifier at the default precision.
pub type Model = MlpModel<Real>;
/// A fitted PCA reduction at the default precision.
pub type Pca = PcaModel<Real>;
