//! Product-graph calculus for random neural networks.
//!
//! * [`graph`]: product and operator graphs, their values and operations.
//! * [`wick`]: admissible pairings, quotients and Gaussian expectations.
//! * [`trees`]: rooted-tree expansions of networks, Jacobians and cycles.
//! * [`kernels`]: infinite-width GP, NTK and Jacobian moment recursions.
//! * [`montecarlo`]: sampling random networks and comparing to the limits.

pub mod activation;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod montecarlo;
pub mod report;
pub mod scalar;
pub mod trees;
pub mod wick;

pub use error::{Error, Result};
