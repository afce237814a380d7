//! Reinforced k-out percolation on the square lattice.
//!
//! The crate evolves edge weights under top-`k` reinforcement (`alpha = inf`)
//! or weight-proportional tuple sampling (finite `alpha`), classifies edges
//! after `n` rounds as certainly vacant or occupied, and checks whether the
//! certainly occupied edges cross a coarse-grained 80 x 40 cell. Monte Carlo
//! estimates of that crossing probability are compared against the
//! 1-dependent percolation threshold 0.8457.

pub mod classify;
pub mod connectivity;
pub mod dynamics;
pub mod edge_set;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod properties;
pub mod rng;
pub mod snapshot;
pub mod stats;

pub use classify::{EdgeStatus, StatusField};
pub use dynamics::{Alpha, ColoredState, WeightState};
pub use edge_set::EdgeSet;
pub use error::{Error, Result};
pub use lattice::{Boundary, Lattice, LatticeConfig};
pub use rng::RngStream;
