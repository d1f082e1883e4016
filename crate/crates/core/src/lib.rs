//! Fake Brownian motion: a Markov martingale whose one-dimensional marginals
//! are those of Brownian motion started from `N(0, 1)`, built from a system of
//! disjoint intervals where particles either wait (lazy) or diffuse (busy).
//!
//! The crate provides the exact discrete chain on a lattice, a continuous-time
//! Monte Carlo sampler, statistical diagnostics, and the `fakebm` CLI.

pub mod analysis;
pub mod cli;
pub mod continuous_sim;
pub mod densities;
pub mod discrete_chain;
pub mod error;
pub mod intervals;
pub mod lazy_walk;
pub mod output;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use intervals::{IntervalSystem, LatticeSystem};
pub use rng::{PathSeed, Purpose};
pub use scalar::{Backend, Mass};
