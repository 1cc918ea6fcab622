//! Geometry, synthetic representation worlds, and attack analysis for
//! face-verification systems that compare unit-hypersphere embeddings by
//! angular distance.
//!
//! The crate is organised around the lifecycle of a multiple-identity-image
//! (MII) poisoning attack:
//!
//! - [`sphere`]: embeddings on the unit sphere, angular/MII distances,
//!   spherical midpoints, uniform sampling.
//! - [`world`]: calibratable synthetic representation spaces — identities as
//!   von Mises-Fisher clusters plus families of correlated comparators.
//! - [`eval`]: the verification protocol — FAR/TAR, thresholds, ROC/AUROC,
//!   Pearson transfer correlations, attack-success scoring.
//! - [`ideal`]: the hypothetical ideal generator (midpoint MIIs) and its
//!   reference distributions.
//! - [`gallery`]: gallery-search MIIs with an exact scan, a coarse-quantized
//!   index, and gallery-size-vs-success extrapolation.
//! - [`morph`]: landmark-driven image-space morphing (boundary landmarks,
//!   Delaunay, per-triangle affine warps, cross-dissolve).
//! - [`losses`]: representation-space attack targets and decoder-training
//!   loss algebra with a pluggable decoder oracle.
//! - [`attack`]: orchestration of attack construction and cross-comparator
//!   scoring on synthetic worlds.
//! - [`io`]: flat binary and CSV interchange formats for embeddings.

pub mod attack;
pub mod error;
pub mod eval;
pub mod gallery;
pub mod ideal;
pub mod io;
pub mod losses;
pub mod morph;
pub mod sphere;
pub mod vmf;
pub mod world;

mod rng;

pub use error::{MiiError, Result};
pub use sphere::{
    angular_distance, mii_distance, sample_uniform_sphere, spherical_midpoint, AngularDistance,
    Embedding,
};
