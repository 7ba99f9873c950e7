//! Exact stationarity check on a finite window of the lattice.

use serde::Serialize;

use crate::error::Result;
use crate::lattice::{LatticePosition, Walk};
use crate::theta::{WalkParams, DEFAULT_TOL};

/// The walk restricted to `f + {-N, ..., N}`; moves that would leave the
/// window stay put instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedChain {
    pub params: WalkParams,
    pub walk: Walk,
    pub radius: i64,
    /// Row-stochastic, `(2N + 1) x (2N + 1)`, row `i` is state `i - N`.
    pub transitions: Vec<Vec<f64>>,
    /// Discrete Gaussian on the window.
    pub pi: Vec<f64>,
    /// `pi`-weight of the moves redirected at the edges.
    pub boundary_mass: f64,
}

/// Truncation radius giving negligible edge mass.
pub fn default_radius(sigma: f64) -> i64 {
    (12.0 * sigma).ceil() as i64
}

pub fn build_truncated_chain(params: WalkParams, walk: Walk, radius: i64) -> Result<TruncatedChain> {
    let WalkParams { sigma, f } = WalkParams::new(params.sigma, params.f)?;
    let size = (2 * radius + 1) as usize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|n| {
            let x = n as f64 + f;
            (-(x * x) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let pi: Vec<f64> = weights.iter().map(|w| w / total).collect();

    let mut transitions = vec![vec![0.0; size]; size];
    let mut boundary_mass = 0.0;
    for (row, n) in (-radius..=radius).enumerate() {
        let pos = LatticePosition {
            n,
            f,
            x: n as f64 + f,
        };
        let dist = walk.distribution_at(pos, sigma, DEFAULT_TOL)?;
        for (offset, p) in dist.support() {
            let target = n + i64::from(offset);
            if target.abs() > radius {
                transitions[row][row] += p;
                boundary_mass += pi[row] * p;
            } else {
                transitions[row][(target + radius) as usize] += p;
            }
        }
    }
    Ok(TruncatedChain {
        params: WalkParams { sigma, f },
        walk,
        radius,
        transitions,
        pi,
        boundary_mass,
    })
}

/// `|pi P - pi|_1`.
pub fn stationarity_residual(chain: &TruncatedChain) -> f64 {
    let size = chain.pi.len();
    let mut pushed = vec![0.0; size];
    for (row, weight) in chain.transitions.iter().zip(&chain.pi) {
        for (acc, p) in pushed.iter_mut().zip(row) {
            *acc += weight * p;
        }
    }
    pushed.iter().zip(&chain.pi).map(|(a, b)| (a - b).abs()).sum()
}
