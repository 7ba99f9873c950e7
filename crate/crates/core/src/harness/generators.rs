//! Oblivious adversaries: vector streams fixed by a seed independent of the
//! signer's randomness.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{seeded, INPUT_STREAM};
use crate::vector::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Uniformly random dense unit vectors.
    RandomUnit,
    /// `e_0, e_1, ..., e_{n-1}, e_0, ...`.
    BasisCycle,
    /// One random unit vector, repeated.
    RepeatedVector,
    /// Random directions with norms `2^-k`, `k` in `0..=12`, plus occasional
    /// vectors short enough to be filtered.
    MixedNorms,
    /// Unit vectors with `nnz` random nonzero coordinates.
    SparseRandom,
}

impl Generator {
    pub const ALL: [Generator; 5] = [
        Generator::RandomUnit,
        Generator::BasisCycle,
        Generator::RepeatedVector,
        Generator::MixedNorms,
        Generator::SparseRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::RandomUnit => "random_unit",
            Generator::BasisCycle => "basis_cycle",
            Generator::RepeatedVector => "repeated_vector",
            Generator::MixedNorms => "mixed_norms",
            Generator::SparseRandom => "sparse_random",
        }
    }

    /// A stream over dimension `n`; `nnz` only matters for [`Generator::SparseRandom`].
    pub fn stream(self, n: usize, nnz: usize, seed: u64) -> VectorStream {
        assert!(n > 0, "dimension must be positive");
        let mut rng = seeded(seed, INPUT_STREAM);
        let repeated = (self == Generator::RepeatedVector).then(|| random_unit(&mut rng, n));
        VectorStream {
            generator: self,
            n,
            nnz: nnz.clamp(1, n),
            rng,
            t: 0,
            repeated,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown generator `{s}`"))
    }
}

/// Endless iterator of vectors with norm at most one.
#[derive(Debug, Clone)]
pub struct VectorStream {
    generator: Generator,
    n: usize,
    nnz: usize,
    rng: ChaCha8Rng,
    t: usize,
    repeated: Option<SparseVector>,
}

fn normalized(entries: Vec<(usize, f64)>) -> SparseVector {
    let norm = entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
    SparseVector::new(entries.into_iter().map(|(i, x)| (i, x / norm)).collect())
        .expect("normalized vector is valid")
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> SparseVector {
    normalized((0..n).map(|i| (i, rng.sample(StandardNormal))).collect())
}

impl Iterator for VectorStream {
    type Item = SparseVector;

    fn next(&mut self) -> Option<SparseVector> {
        let t = self.t;
        self.t += 1;
        let v = match self.generator {
            Generator::RandomUnit => random_unit(&mut self.rng, self.n),
            Generator::BasisCycle => SparseVector::basis(t % self.n),
            Generator::RepeatedVector => self.repeated.clone().expect("set at construction"),
            Generator::MixedNorms => {
                let dir = random_unit(&mut self.rng, self.n);
                let scale = if self.rng.random_ratio(1, 32) {
                    1e-12
                } else {
                    0.5f64.powi(self.rng.random_range(0..=12))
                };
                dir.scaled(scale).expect("scaling down keeps norm <= 1")
            }
            Generator::SparseRandom => {
                let mut idx = index::sample(&mut self.rng, self.n, self.nnz).into_vec();
                idx.sort_unstable();
                normalized(idx.into_iter().map(|i| (i, self.rng.sample(StandardNormal))).collect())
            }
        };
        Some(v)
    }
}
