//! Fundamental-measure machinery for hard convex particles.
//!
//! The crate is organized as a pipeline from single-body geometry to
//! many-body thermodynamics:
//!
//! - [`geometry`]: convex bodies (sphere, spheroid, triangle mesh), surface
//!   quadrature with principal curvatures, Minkowski measures `(V, S, M, χ)`,
//!   discrete Gauss–Bonnet, support functions, and OFF/STL mesh input.
//! - [`weights`]: the curvature weight-function basis (Euler, mean-curvature,
//!   curvature-deviator, normal-tensor, and volume weights) together with the
//!   two- and three-body Euler-form integrands and their truncated
//!   tensor-series expansions.
//! - [`fmt_model`]: excess free-energy densities over weighted densities
//!   (Rosenfeld, tensor-corrected third order, and a generalized
//!   coefficient-table form), bulk thermodynamics, the scaled-particle
//!   residual, and the virial expansion of the bulk pressure.
//! - [`kinematic`]: Monte Carlo integration over rigid motions (Haar
//!   rotations × translations) for excluded volumes and the second/third
//!   virial coefficients, with deterministic parallel substreams.
//! - [`planar_dft`]: a one-dimensional hard-sphere density-functional solver
//!   (compact projected kernels, Picard iteration, grand potential, and
//!   wall-theorem diagnostics).
//!
//! All Monte Carlo estimators are deterministic functions of `(inputs, seed)`
//! and produce identical results for any thread count.

pub mod fmt_model;
pub mod geometry;
pub mod kinematic;
pub mod planar_dft;
pub mod weights;

/// Crate version, re-exported for run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
