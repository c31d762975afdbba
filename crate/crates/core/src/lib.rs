//! Quaternion-valued graph Laplacians and a quaternion-weighted spectral GCN.
//!
//! The crate is organized around a pipeline:
//!
//! 1. [`graph`] — weighted digraphs, edge-list ingestion, and a seeded
//!    stochastic block model generator with a controllable digon fraction.
//! 2. [`laplacian`] — construction of the quaternionic Laplacian and its
//!    relatives (classical, sign-magnetic), plus the renormalized
//!    propagation matrix consumed by the network.
//! 3. [`quat`] / [`qmat`] / [`eig`] — quaternion scalar and matrix algebra
//!    with Hermitian right-eigendecomposition via the complex adjoint.
//! 4. [`verify`] — batch property suites (generalization identities,
//!    positive semidefiniteness, spectral bounds, topology reconstruction)
//!    over seeded graph corpora.
//! 5. [`nn`] — a small reverse-mode tensor engine and the quaternion
//!    convolution network built on it.
//! 6. [`harness`] — cross-validated experiment recipes for node
//!    classification and k-class edge prediction.

pub mod eig;
pub mod error;
pub mod graph;
pub mod harness;
pub mod laplacian;
pub mod mat;
pub mod nn;
pub mod qmat;
pub mod quat;
pub mod rng;
pub mod textio;
pub mod split;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Digraph, DsbmConfig};
pub use mat::Mat;
pub use qmat::{CMat, QMatrix};
pub use quat::Quaternion;
