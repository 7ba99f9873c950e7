//! Online signing of a vector stream.
//!
//! A [`Balancer`] keeps a point `w` that starts at a Gaussian `w0` and moves
//! by `s * v` for each incoming `v`, where `s` is one step of a lattice walk
//! on the projection `<w, v> / |v|` at scale `sigma / |v|`. Because the walk
//! preserves the Gaussian, every `w_i` stays Gaussian and `w - w0 = sum s_i v_i`
//! stays small in every coordinate.
//!
//! [`FullColoring`] reruns partial coloring on zero-signed vectors until each
//! vector gets a nonzero sign. [`DyadicRouter`] splits vectors by norm so every
//! walk runs at a scale in `[1, 2]`.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, WalkError};
use crate::lattice::{sample_step, Walk};
use crate::rng::{derive_seed, indexed_gaussian, seeded, START_STREAM, STEP_STREAM};
use crate::theta::DEFAULT_TOL;
use crate::vector::SparseVector;

/// Smallest per-step tolerance handed to the theta kernel.
pub const MIN_STEP_TOL: f64 = 1e-15;

/// Default cap on full-coloring rounds.
pub const DEFAULT_ROUND_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Signs in `{-1, 0, +1}`.
    Partial,
    /// Signs in `{-1, +1, +2}`; needs `sigma >= 1`.
    Balance,
}

impl Mode {
    pub fn walk(self) -> Walk {
        match self {
            Mode::Partial => Walk::Jacobi,
            Mode::Balance => Walk::Ramanujan,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignRecord {
    /// 1-based position in the stream.
    pub step_index: u64,
    pub sign: i8,
    /// Signed by the short-vector rule rather than by a walk step.
    pub filtered: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SignCounts {
    pub minus_one: u64,
    pub zero: u64,
    pub plus_one: u64,
    pub plus_two: u64,
}

impl SignCounts {
    pub fn record(&mut self, sign: i8) {
        match sign {
            -1 => self.minus_one += 1,
            0 => self.zero += 1,
            1 => self.plus_one += 1,
            2 => self.plus_two += 1,
            _ => unreachable!("walk offsets are in -1..=2"),
        }
    }

    pub fn total(&self) -> u64 {
        self.minus_one + self.zero + self.plus_one + self.plus_two
    }

    /// Fraction of vectors given a nonzero sign; 1 for an empty stream.
    pub fn used_fraction(&self) -> f64 {
        match self.total() {
            0 => 1.0,
            t => 1.0 - self.zero as f64 / t as f64,
        }
    }
}

/// A coordinate-wise snapshot of a signed sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub coords: BTreeMap<usize, f64>,
    pub max_abs: f64,
}

impl Discrepancy {
    fn from_pairs(pairs: impl Iterator<Item = (usize, f64)>) -> Self {
        let coords: BTreeMap<usize, f64> = pairs.collect();
        let max_abs = coords.values().fold(0.0f64, |m, x| m.max(x.abs()));
        Self { coords, max_abs }
    }
}

/// Running `sum eps_i v_i` and the largest coordinate it has ever reached.
#[derive(Debug, Clone, Default)]
pub struct SignedSum {
    coords: HashMap<usize, f64>,
    max_running: f64,
}

impl SignedSum {
    pub fn add(&mut self, v: &SparseVector, sign: i8) {
        if sign == 0 {
            return;
        }
        let s = f64::from(sign);
        for &(i, x) in v.entries() {
            let c = self.coords.entry(i).or_insert(0.0);
            *c += s * x;
            self.max_running = self.max_running.max(c.abs());
        }
    }

    /// `max_l |sum_{i <= l} eps_i v_i|_inf` over all prefixes so far.
    pub fn max_running(&self) -> f64 {
        self.max_running
    }

    pub fn snapshot(&self) -> Discrepancy {
        Discrepancy::from_pairs(self.coords.iter().map(|(&i, &x)| (i, x)))
    }
}

/// Something that signs a stream of vectors one at a time.
pub trait Signer {
    fn sign(&mut self, v: &SparseVector) -> Result<SignRecord>;
    fn counts(&self) -> SignCounts;
    fn signed_sum(&self) -> &SignedSum;
}

/// Vectors shorter than this at 1-based step `t` are signed `+1` without a walk step.
pub fn short_vector_threshold(t: u64) -> f64 {
    let t = t as f64;
    1.0 / (2.0 * t * t)
}

/// Theta-evaluation tolerance at step `t`: the `delta / (2 t^2)` budget,
/// never looser than [`DEFAULT_TOL`].
pub fn step_tolerance(delta: f64, t: u64) -> f64 {
    let t = t as f64;
    (delta / (2.0 * t * t)).clamp(MIN_STEP_TOL, DEFAULT_TOL)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(domain("delta", delta, "must lie in (0, 1/2)"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Coordinate {
    start: f64,
    point: f64,
}

/// Online partial coloring (`Mode::Partial`) or `{-1, +1, +2}` balancing
/// (`Mode::Balance`) at Gaussian scale `sigma`.
#[derive(Debug, Clone)]
pub struct Balancer {
    mode: Mode,
    sigma: f64,
    delta: f64,
    seed: u64,
    t: u64,
    coords: HashMap<usize, Coordinate>,
    step_rng: ChaCha8Rng,
    start_rng: ChaCha8Rng,
    counts: SignCounts,
    filtered: u64,
    signed: SignedSum,
}

impl Balancer {
    pub fn new(mode: Mode, sigma: f64, delta: f64, seed: u64) -> Result<Self> {
        if mode == Mode::Balance && !(sigma >= 1.0) {
            return Err(domain("sigma", sigma, "balance mode requires sigma >= 1"));
        }
        Self::at_scale(mode, sigma, delta, seed)
    }

    /// Skips the `sigma >= 1` check: the dyadic router guarantees
    /// `sigma / |v| >= 1` per vector instead.
    fn at_scale(mode: Mode, sigma: f64, delta: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(domain("sigma", sigma, "must be positive and finite"));
        }
        check_delta(delta)?;
        Ok(Self {
            mode,
            sigma,
            delta,
            seed,
            t: 0,
            coords: HashMap::new(),
            step_rng: seeded(seed, STEP_STREAM),
            start_rng: seeded(seed, START_STREAM),
            counts: SignCounts::default(),
            filtered: 0,
            signed: SignedSum::default(),
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Vectors processed so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Vectors signed by the short-vector rule.
    pub fn filtered(&self) -> u64 {
        self.filtered
    }

    /// Current coordinate of `w`, if it has been touched.
    pub fn point(&self, index: usize) -> Option<f64> {
        self.coords.get(&index).map(|c| c.point)
    }

    /// Signs `v`, applying the short-vector rule first.
    pub fn process(&mut self, v: &SparseVector) -> Result<SignRecord> {
        let t = self.t + 1;
        let record = if v.norm2() < short_vector_threshold(t) {
            self.absorb_short(v);
            self.filtered += 1;
            SignRecord {
                step_index: t,
                sign: 1,
                filtered: true,
            }
        } else {
            SignRecord {
                step_index: t,
                sign: self.walk_step(v, t)?,
                filtered: false,
            }
        };
        self.t = t;
        self.counts.record(record.sign);
        self.signed.add(v, record.sign);
        Ok(record)
    }

    /// `w - w0` over touched coordinates. Filtered vectors move `w` and `w0`
    /// together and so do not appear here; see [`Signer::signed_sum`].
    pub fn discrepancy(&self) -> Discrepancy {
        Discrepancy::from_pairs(self.coords.iter().map(|(&i, c)| (i, c.point - c.start)))
    }

    fn touch(&mut self, index: usize) -> &mut Coordinate {
        let Self {
            coords,
            start_rng,
            sigma,
            ..
        } = self;
        coords.entry(index).or_insert_with(|| {
            let start = *sigma * indexed_gaussian(start_rng, index);
            Coordinate {
                start,
                point: start,
            }
        })
    }

    fn absorb_short(&mut self, v: &SparseVector) {
        for &(i, x) in v.entries() {
            let c = self.touch(i);
            c.point += x;
            c.start += x;
        }
    }

    /// One walk step for `v` using the tolerance budget of stream step `t`.
    fn walk_step(&mut self, v: &SparseVector, t: u64) -> Result<i8> {
        // Norms within NORM_SLACK above one count as unit.
        let norm = v.norm2().min(1.0);
        if norm <= 0.0 {
            return Err(WalkError::InvalidVector(
                "zero vector reached the walk step".into(),
            ));
        }
        let mut dot = 0.0;
        for &(i, x) in v.entries() {
            dot += self.touch(i).point * x;
        }
        let scale = self.sigma / norm;
        let dist = self
            .mode
            .walk()
            .distribution(dot / norm, scale, step_tolerance(self.delta, t))?;
        let sign = sample_step(&dist, &mut self.step_rng);
        if sign != 0 {
            let s = f64::from(sign);
            for &(i, x) in v.entries() {
                self.touch(i).point += s * x;
            }
        }
        Ok(sign)
    }
}

impl Signer for Balancer {
    fn sign(&mut self, v: &SparseVector) -> Result<SignRecord> {
        self.process(v)
    }

    fn counts(&self) -> SignCounts {
        self.counts
    }

    fn signed_sum(&self) -> &SignedSum {
        &self.signed
    }
}

/// Signs every vector `+-1` by rerunning partial coloring on zero-signed
/// vectors.
///
/// Round `k` sees exactly the vectors that got `0` in round `k - 1`, in input
/// order, so the rounds can run side by side and each sign is final as soon
/// as it is emitted.
#[derive(Debug, Clone)]
pub struct FullColoring {
    sigma: f64,
    delta: f64,
    seed: u64,
    round_cap: usize,
    rounds: Vec<Balancer>,
    t: u64,
    counts: SignCounts,
    signed: SignedSum,
}

impl FullColoring {
    pub fn new(sigma: f64, delta: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 1.0 && sigma.is_finite()) {
            return Err(domain("sigma", sigma, "full coloring requires sigma >= 1"));
        }
        check_delta(delta)?;
        Ok(Self {
            sigma,
            delta,
            seed,
            round_cap: DEFAULT_ROUND_CAP,
            rounds: Vec::new(),
            t: 0,
            counts: SignCounts::default(),
            signed: SignedSum::default(),
        })
    }

    pub fn with_round_cap(mut self, cap: usize) -> Self {
        self.round_cap = cap;
        self
    }

    /// Rounds opened so far.
    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn process(&mut self, v: &SparseVector) -> Result<SignRecord> {
        for k in 0.. {
            if k == self.round_cap {
                return Err(WalkError::RoundCapExceeded {
                    cap: self.round_cap,
                });
            }
            if k == self.rounds.len() {
                self.rounds.push(Balancer::new(
                    Mode::Partial,
                    self.sigma,
                    self.delta,
                    derive_seed(self.seed, k as u64),
                )?);
            }
            let record = self.rounds[k].process(v)?;
            if record.sign != 0 {
                self.t += 1;
                self.counts.record(record.sign);
                self.signed.add(v, record.sign);
                return Ok(SignRecord {
                    step_index: self.t,
                    ..record
                });
            }
        }
        unreachable!()
    }
}

impl Signer for FullColoring {
    fn sign(&mut self, v: &SparseVector) -> Result<SignRecord> {
        self.process(v)
    }

    fn counts(&self) -> SignCounts {
        self.counts
    }

    fn signed_sum(&self) -> &SignedSum {
        &self.signed
    }
}

/// Final signs and round count of a batch full coloring.
#[derive(Debug, Clone, PartialEq)]
pub struct FullColoringOutcome {
    pub signs: Vec<i8>,
    pub rounds: usize,
}

pub fn full_coloring(
    vectors: &[SparseVector],
    sigma: f64,
    delta: f64,
    seed: u64,
) -> Result<FullColoringOutcome> {
    let mut coloring = FullColoring::new(sigma, delta, seed)?;
    let signs = vectors
        .iter()
        .map(|v| coloring.process(v).map(|r| r.sign))
        .collect::<Result<Vec<_>>>()?;
    Ok(FullColoringOutcome {
        signs,
        rounds: coloring.rounds(),
    })
}

/// Dyadic class `k >= 0` with `|v|` in `[2^-k, 2^(1-k)]`, up to the unit-norm slack.
pub fn dyadic_scale(norm: f64) -> u32 {
    debug_assert!(norm > 0.0);
    let mut e = norm.log2().floor() as i32 + 1;
    // Fix up log2 rounding with exact power-of-two comparisons.
    while 2f64.powi(e - 1) > norm {
        e -= 1;
    }
    while 2f64.powi(e) <= norm {
        e += 1;
    }
    // norm in [2^(e-1), 2^e); norm == 1 lands in e = 1, i.e. class 0.
    (1 - e).max(0) as u32
}

/// Walk scale for dyadic class `k`, chosen so `sigma / |v|` lies in `[1, 2]`.
pub fn dyadic_sigma(k: u32) -> f64 {
    2f64.powi(1 - k as i32)
}

/// Routes each vector to an independent balancer for its dyadic norm class.
#[derive(Debug, Clone)]
pub struct DyadicRouter {
    mode: Mode,
    delta: f64,
    seed: u64,
    t: u64,
    scales: BTreeMap<u32, Balancer>,
    counts: SignCounts,
    filtered: u64,
    signed: SignedSum,
}

impl DyadicRouter {
    pub fn new(mode: Mode, delta: f64, seed: u64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self {
            mode,
            delta,
            seed,
            t: 0,
            scales: BTreeMap::new(),
            counts: SignCounts::default(),
            filtered: 0,
            signed: SignedSum::default(),
        })
    }

    pub fn active_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn scale_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.scales.keys().copied()
    }

    pub fn filtered(&self) -> u64 {
        self.filtered
    }

    /// Summed `w - w0` across scales.
    pub fn discrepancy(&self) -> Discrepancy {
        let mut total: BTreeMap<usize, f64> = BTreeMap::new();
        for b in self.scales.values() {
            for (i, x) in b.discrepancy().coords {
                *total.entry(i).or_insert(0.0) += x;
            }
        }
        Discrepancy::from_pairs(total.into_iter())
    }

    pub fn process(&mut self, v: &SparseVector) -> Result<SignRecord> {
        let t = self.t + 1;
        let norm = v.norm2();
        let (sign, filtered) = if norm < short_vector_threshold(t) {
            self.filtered += 1;
            (1, true)
        } else {
            let k = dyadic_scale(norm);
            let balancer = match self.scales.entry(k) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => e.insert(Balancer::at_scale(
                    self.mode,
                    dyadic_sigma(k),
                    self.delta,
                    derive_seed(self.seed, 0x5CA1_E000 + u64::from(k)),
                )?),
            };
            (balancer.walk_step(v, t)?, false)
        };
        self.t = t;
        self.counts.record(sign);
        self.signed.add(v, sign);
        Ok(SignRecord {
            step_index: t,
            sign,
            filtered,
        })
    }
}

impl Signer for DyadicRouter {
    fn sign(&mut self, v: &SparseVector) -> Result<SignRecord> {
        self.process(v)
    }

    fn counts(&self) -> SignCounts {
        self.counts
    }

    fn signed_sum(&self) -> &SignedSum {
        &self.signed
    }
}

/// Independent uniform `+-1` signs; the baseline the walks are compared with.
#[derive(Debug, Clone)]
pub struct RandomSigner {
    rng: ChaCha8Rng,
    t: u64,
    counts: SignCounts,
    signed: SignedSum,
}

impl RandomSigner {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: seeded(seed, STEP_STREAM),
            t: 0,
            counts: SignCounts::default(),
            signed: SignedSum::default(),
        }
    }
}

impl Signer for RandomSigner {
    fn sign(&mut self, v: &SparseVector) -> Result<SignRecord> {
        self.t += 1;
        let sign = if self.rng.random::<bool>() { 1 } else { -1 };
        self.counts.record(sign);
        self.signed.add(v, sign);
        Ok(SignRecord {
            step_index: self.t,
            sign,
            filtered: false,
        })
    }

    fn counts(&self) -> SignCounts {
        self.counts
    }

    fn signed_sum(&self) -> &SignedSum {
        &self.signed
    }
}
