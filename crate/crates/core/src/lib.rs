//! Online vector balancing with lattice walks that preserve the Gaussian.
//!
//! Given a stream of vectors with `|v|_2 <= 1`, assign each a sign
//! (`{-1, 0, +1}` or `{-1, +1, +2}`) using only the vectors seen so far, so that
//! every prefix sum stays small in `l_inf`. The signs come from one step of a
//! discrete random walk on the projection of a Gaussian point; the walk's
//! transition probabilities are theta series evaluated in [`theta`].

pub mod balancer;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod rng;
pub mod theta;
pub mod vector;

pub use balancer::{
    full_coloring, Balancer, Discrepancy, DyadicRouter, FullColoring, Mode, RandomSigner,
    SignCounts, SignRecord, Signer,
};
pub use error::{Result, WalkError};
pub use lattice::{decompose, sample_step, LatticePosition, StepProbabilities, Walk};
pub use theta::{Probability, WalkParams, DEFAULT_TOL};
pub use vector::SparseVector;
