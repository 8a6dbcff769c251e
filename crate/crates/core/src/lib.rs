//! Shared-memory parallel deep multilevel graph partitioning.

pub mod balancer;
pub mod cli;
pub mod coarsening;
pub mod deep;
pub mod error;
pub mod eval;
pub mod generate;
pub mod graph;
pub mod initial;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod refinement;
pub(crate) mod util;

pub use error::{Error, Result};
pub use graph::{BlockId, EdgeWeight, Graph, NodeId, NodeWeight};
pub use partition::Partition;
pub use util::random::{rng_from_seed, Rng};
