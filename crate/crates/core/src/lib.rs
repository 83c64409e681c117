//! Rearrangements of zero-sum planar vector families with bounded partial sums.
//!
//! The crate provides four greedy constructions (interleaved half-plane
//! blocks, the obtuse-step Steinitz greedy, the most-obtuse sector greedy and
//! the weighted obtuse greedy), exact oracles for the optimal confinement
//! radius, seeded instance generators, an adversarial hill-climbing search
//! and the experiment harness behind the `confine` CLI.

pub mod balance;
pub mod constructions;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod search;
pub mod subset;

pub use error::{Error, Result};
pub use geometry::{Instance, PartialSumTrace, Permutation, PlanarVector, WeightedInstance};
