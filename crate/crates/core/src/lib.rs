//! Design-space exploration with quadratic active subspaces.
//!
//! * [`dataset`]: design tables on the normalized hypercube, sampling and
//!   synthetic ridge oracles.
//! * [`surrogate`]: quadratic fit, gradient covariance, eigendecomposition,
//!   projection and ridge profiles.
//! * [`geometry`]: STL meshes, the design-to-mesh catalog and shape diffs.
//! * [`linkage`]: the linked-view session state machine.
//! * [`demo`]: a synthetic blade dataset with two ridge-shaped quantities.

pub mod dataset;
pub mod demo;
pub mod geometry;
pub mod json;
pub mod linkage;
pub mod surrogate;
