//! Image-space MII construction: landmark-driven face morphing.
//!
//! The pipeline takes two aligned images with 68-point landmark files,
//! appends 20 boundary landmarks, Delaunay-triangulates the blended
//! landmark positions, warps each image onto them triangle by triangle,
//! and cross-dissolves the warped pair.

pub mod delaunay;
pub mod landmarks;
pub mod raster;
pub mod warp;

pub use delaunay::{delaunay, TriangleMesh};
pub use landmarks::{
    add_boundary_landmarks, blend, LandmarkSet, Point, BOUNDARY_LANDMARKS, FACIAL_LANDMARKS,
};
pub use raster::{RasterImage, CHANNELS};
pub use warp::{affine_from_triangles, morph, warp_to_mean, AffineTransform};
