//! Training-set curation by class-centroid distance in a learned
//! low-dimensional embedding.
//!
//! The crate embeds a labelled dataset with a UMAP-style reducer, ranks
//! every sample by its distance to its class centroid, emits exclusion
//! manifests (nearest, furthest or random per class), measures class
//! separability with σ-trimmed convex hulls, and runs seeded surrogate
//! training experiments whose results are compared with Welch's t-test.

pub mod dataset;
pub mod error;
pub mod exclusion;
pub mod harness;
pub mod json;
pub mod reduction;
pub mod rng;
pub mod severability;
pub mod stats;
pub mod synthetic;

pub use dataset::{load_cifar_bin, load_idx, load_matrix, Dataset, DatasetView};
pub use error::{Error, Result};
pub use exclusion::{class_geometry, select_exclusions, ClassGeometry, ExclusionManifest, Strategy};
pub use reduction::{reduce, Embedding, ReductionParams};

pub const TOOL_VERSION: &str = concat!("severance/", env!("CARGO_PKG_VERSION"));
