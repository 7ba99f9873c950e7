//! One step of the lattice walks that preserve the Gaussian on each coset `f + Z`.
//!
//! [`Walk::Jacobi`] takes steps in `{-1, 0, +1}` and is defined for any
//! `sigma > 0`. [`Walk::Ramanujan`] replaces the lazy move at the origin with a
//! jump of `+2` and is defined for `sigma >= 1`.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Result, WalkError};
use crate::theta::{eval_p, eval_r_series, WalkParams, DEFAULT_TOL};

/// Step offsets any walk may take, in sampling order.
pub const OFFSETS: [i8; 4] = [-1, 0, 1, 2];

const SUM_SLACK: f64 = 1e-9;

// Positions beyond this cannot hold a fractional part with any precision.
const MAX_ABS_POSITION: f64 = 4_503_599_627_370_496.0; // 2^52

/// A real number split as `x = n + f` with `f` in `[-1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticePosition {
    pub n: i64,
    pub f: f64,
    pub x: f64,
}

impl LatticePosition {
    /// Moves by an integer offset; the shift `f` is carried exactly.
    pub fn shifted(self, offset: i8) -> Self {
        let n = self.n + i64::from(offset);
        Self {
            n,
            f: self.f,
            x: n as f64 + self.f,
        }
    }
}

pub fn decompose(x: f64) -> Result<LatticePosition> {
    if !x.is_finite() {
        return Err(WalkError::NonFinite("position"));
    }
    if x.abs() >= MAX_ABS_POSITION {
        return Err(domain("position", x, "too large to split into n + f"));
    }
    // With n the nearest integer, x - n is exact.
    let mut n = x.round();
    let mut f = x - n;
    if f >= 0.5 {
        n += 1.0;
        f -= 1.0;
    }
    Ok(LatticePosition { n: n as i64, f, x })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Walk {
    /// Steps in `{-1, 0, +1}`.
    Jacobi,
    /// Steps in `{-1, +1, +2}`; requires `sigma >= 1`.
    Ramanujan,
}

impl Walk {
    pub fn support(self) -> &'static [i8] {
        match self {
            Walk::Jacobi => &[-1, 0, 1],
            Walk::Ramanujan => &[-1, 1, 2],
        }
    }

    pub fn distribution(self, x: f64, sigma: f64, tol: f64) -> Result<StepProbabilities> {
        self.distribution_at(decompose(x)?, sigma, tol)
    }

    pub fn distribution_at(
        self,
        pos: LatticePosition,
        sigma: f64,
        tol: f64,
    ) -> Result<StepProbabilities> {
        match self {
            Walk::Jacobi => jacobi_at(pos, sigma, tol),
            Walk::Ramanujan => ramanujan_at(pos, sigma, tol),
        }
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Walk::Jacobi => "jacobi",
            Walk::Ramanujan => "ramanujan",
        })
    }
}

/// Transition probabilities over [`OFFSETS`] for one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepProbabilities {
    walk: Walk,
    probs: [f64; 4],
}

impl StepProbabilities {
    /// Validates and renormalizes probabilities indexed like [`OFFSETS`].
    ///
    /// Offsets outside the walk's support must carry zero mass.
    pub fn new(walk: Walk, probs: [f64; 4]) -> Result<Self> {
        for (offset, &p) in OFFSETS.iter().zip(&probs) {
            if !(0.0..=1.0).contains(&p) {
                return Err(WalkError::Consistency(format!(
                    "probability {p} for offset {offset} outside [0, 1]"
                )));
            }
            if p > 0.0 && !walk.support().contains(offset) {
                return Err(WalkError::Consistency(format!(
                    "{walk} walk cannot take offset {offset}"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_SLACK {
            return Err(WalkError::Consistency(format!(
                "step probabilities sum to {total}"
            )));
        }
        Ok(Self {
            walk,
            probs: probs.map(|p| p / total),
        })
    }

    pub fn walk(&self) -> Walk {
        self.walk
    }

    pub fn prob(&self, offset: i8) -> f64 {
        OFFSETS
            .iter()
            .position(|&o| o == offset)
            .map_or(0.0, |i| self.probs[i])
    }

    /// `(offset, probability)` over the walk's support.
    pub fn support(&self) -> impl Iterator<Item = (i8, f64)> + '_ {
        self.walk.support().iter().map(|&o| (o, self.prob(o)))
    }

    /// Maps one uniform draw in `[0, 1)` to an offset.
    pub fn offset_for(&self, u: f64) -> i8 {
        let mut acc = 0.0;
        let mut last = 0;
        for (offset, p) in OFFSETS.iter().zip(&self.probs) {
            if *p <= 0.0 {
                continue;
            }
            acc += p;
            last = *offset;
            if u < acc {
                return *offset;
            }
        }
        last
    }
}

fn per_probability_tol(tol: f64) -> f64 {
    tol / 4.0
}

/// Distribution of the `{-1, 0, +1}` step from `x`.
pub fn jacobi_distribution(x: f64, sigma: f64, tol: f64) -> Result<StepProbabilities> {
    jacobi_at(decompose(x)?, sigma, tol)
}

fn jacobi_at(pos: LatticePosition, sigma: f64, tol: f64) -> Result<StepProbabilities> {
    let tol = per_probability_tol(tol);
    let (n, f) = (pos.n, pos.f);
    let probs = if n >= 1 {
        let up = eval_p(n as f64 + f, sigma, tol)?.value;
        [1.0 - up, 0.0, up, 0.0]
    } else if n <= -1 {
        let down = eval_p((-n) as f64 - f, sigma, tol)?.value;
        [down, 0.0, 1.0 - down, 0.0]
    } else {
        let up = eval_p(f, sigma, tol)?.value;
        let down = eval_p(-f, sigma, tol)?.value;
        let stay = eval_r_series(WalkParams::new(sigma, f)?, tol)?.value;
        [down, stay, up, 0.0]
    };
    StepProbabilities::new(Walk::Jacobi, probs)
}

/// Distribution of the `{-1, +1, +2}` step from `x`.
pub fn ramanujan_distribution(x: f64, sigma: f64, tol: f64) -> Result<StepProbabilities> {
    ramanujan_at(decompose(x)?, sigma, tol)
}

fn ramanujan_at(pos: LatticePosition, sigma: f64, tol: f64) -> Result<StepProbabilities> {
    if !(sigma >= 1.0) {
        return Err(domain("sigma", sigma, "the +2 walk requires sigma >= 1"));
    }
    let (n, f) = (pos.n, pos.f);
    match n {
        0 => {
            let ptol = per_probability_tol(tol);
            let up = eval_p(f, sigma, ptol)?.value;
            let down = eval_p(-f, sigma, ptol)?.value;
            let jump = eval_r_series(WalkParams::new(sigma, f)?, ptol)?.value;
            StepProbabilities::new(Walk::Ramanujan, [down, 0.0, up, jump])
        }
        1 => {
            let up = one_to_two_probability(sigma, f, per_probability_tol(tol))?;
            StepProbabilities::new(Walk::Ramanujan, [1.0 - up, 0.0, up, 0.0])
        }
        _ => {
            let jacobi = jacobi_at(pos, sigma, tol)?;
            StepProbabilities::new(Walk::Ramanujan, jacobi.probs)
        }
    }
}

/// Probability that `1 + f` moves to `2 + f` in the `+2` walk.
fn one_to_two_probability(sigma: f64, f: f64, tol: f64) -> Result<f64> {
    let p = eval_p(1.0 + f, sigma, tol)?;
    let r = eval_r_series(WalkParams::new(sigma, f)?, tol)?;
    let weight = ((2.0 * f + 1.0) / (2.0 * sigma * sigma)).exp();
    let value = p.value - r.value * weight;
    let err = p.abs_error_bound + r.abs_error_bound * weight;
    if value < -err {
        return Err(WalkError::Consistency(format!(
            "transition 1+f -> 2+f has probability {value} at sigma = {sigma}, f = {f}"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Draws one offset, consuming exactly one uniform from `rng`.
pub fn sample_step<R: Rng + ?Sized>(dist: &StepProbabilities, rng: &mut R) -> i8 {
    let u: f64 = rng.random();
    dist.offset_for(u)
}

/// Takes one step at the default tolerance.
pub fn step<R: Rng + ?Sized>(
    walk: Walk,
    pos: LatticePosition,
    sigma: f64,
    rng: &mut R,
) -> Result<LatticePosition> {
    let dist = walk.distribution_at(pos, sigma, DEFAULT_TOL)?;
    Ok(pos.shifted(sample_step(&dist, rng)))
}
