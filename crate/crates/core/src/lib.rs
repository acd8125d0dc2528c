//! Uniform random graphs and plane trees with prescribed degrees near
//! criticality, their exact counts, and their scaling limits.

// `!(x > 0.0)` style checks are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod degrees;
pub mod error;
pub mod exact;
pub mod graphs;
pub mod limits;
pub mod mmspace;
pub mod plane_tree;
pub mod rng;
pub mod stats;
pub mod surgery;
pub mod vacant;

pub use degrees::{ChildSequence, DegreeSequence};
pub use error::{Error, Result};
pub use graphs::MultiGraph;
pub use mmspace::FiniteMMSpace;
pub use plane_tree::PlaneTree;
