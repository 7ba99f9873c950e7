//! Streams generated vectors through a signer and summarizes the run.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::balancer::{Balancer, DyadicRouter, FullColoring, Mode, RandomSigner, Signer};
use crate::error::Result;
use crate::harness::generators::Generator;
use crate::rng::RNG_NAME;
use crate::theta::DEFAULT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Partial,
    Balance,
    Full,
    Dyadic,
    /// Uniform random `+-1`, the baseline.
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Partial,
        Algorithm::Balance,
        Algorithm::Full,
        Algorithm::Dyadic,
        Algorithm::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Partial => "partial",
            Algorithm::Balance => "balance",
            Algorithm::Full => "full",
            Algorithm::Dyadic => "dyadic",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub generator: Generator,
    pub algorithm: Algorithm,
    pub sigma: f64,
    pub delta: f64,
    pub t: usize,
    pub n: usize,
    /// Nonzeros per vector for the sparse generator.
    pub nnz: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(generator: Generator, algorithm: Algorithm, t: usize, n: usize, seed: u64) -> Self {
        Self {
            generator,
            algorithm,
            sigma: 1.0,
            delta: 0.01,
            t,
            n,
            nnz: 10,
            seed,
        }
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn nnz(mut self, nnz: usize) -> Self {
        self.nnz = nnz;
        self
    }
}

/// Summary of one run; serialized as a flat JSON object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub mode: Algorithm,
    pub generator: Generator,
    pub sigma: f64,
    pub delta: f64,
    pub t: usize,
    pub n: usize,
    pub nnz: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub base_tolerance: f64,
    /// `max_l |sum_{i <= l} eps_i v_i|_inf`.
    pub max_running_discrepancy: f64,
    /// `|sum_i eps_i v_i|_inf` at the end.
    pub final_discrepancy: f64,
    /// `2 sigma sqrt(2 log(2 n t / delta))`.
    pub running_bound: f64,
    /// `2 sigma sqrt(2 log(2 n / delta))`.
    pub final_bound: f64,
    pub sign_minus_one: u64,
    pub sign_zero: u64,
    pub sign_plus_one: u64,
    pub sign_plus_two: u64,
    pub used_fraction: f64,
    pub filtered: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active_scales: Option<usize>,
    /// Left unset by default so reports stay byte-reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

pub fn running_bound(sigma: f64, n: usize, t: usize, delta: f64) -> f64 {
    2.0 * sigma * (2.0 * (2.0 * n as f64 * t as f64 / delta).ln()).sqrt()
}

pub fn final_bound(sigma: f64, n: usize, delta: f64) -> f64 {
    2.0 * sigma * (2.0 * (2.0 * n as f64 / delta).ln()).sqrt()
}

enum AnySigner {
    Walk(Balancer),
    Full(FullColoring),
    Dyadic(DyadicRouter),
    Random(RandomSigner),
}

impl AnySigner {
    fn as_signer(&mut self) -> &mut dyn Signer {
        match self {
            AnySigner::Walk(s) => s,
            AnySigner::Full(s) => s,
            AnySigner::Dyadic(s) => s,
            AnySigner::Random(s) => s,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run(config, None)
}

/// Like [`run_experiment`], also returning the running maximum after every step.
pub fn run_experiment_traced(config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<f64>)> {
    let mut trace = Vec::with_capacity(config.t);
    let report = run(config, Some(&mut trace))?;
    Ok((report, trace))
}

fn run(config: &ExperimentConfig, mut trace: Option<&mut Vec<f64>>) -> Result<ExperimentReport> {
    let started = Instant::now();
    let &ExperimentConfig {
        generator,
        algorithm,
        sigma,
        delta,
        t,
        n,
        nnz,
        seed,
    } = config;
    let mut signer = match algorithm {
        Algorithm::Partial => AnySigner::Walk(Balancer::new(Mode::Partial, sigma, delta, seed)?),
        Algorithm::Balance => AnySigner::Walk(Balancer::new(Mode::Balance, sigma, delta, seed)?),
        Algorithm::Full => AnySigner::Full(FullColoring::new(sigma, delta, seed)?),
        Algorithm::Dyadic => AnySigner::Dyadic(DyadicRouter::new(Mode::Balance, delta, seed)?),
        Algorithm::Random => AnySigner::Random(RandomSigner::new(seed)),
    };
    let mut filtered = 0;
    for v in generator.stream(n, nnz, seed).take(t) {
        let s = signer.as_signer();
        filtered += u64::from(s.sign(&v)?.filtered);
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(s.signed_sum().max_running());
        }
    }

    let (rounds, active_scales) = match &signer {
        AnySigner::Full(fc) => (Some(fc.rounds()), None),
        AnySigner::Dyadic(r) => (None, Some(r.active_scales())),
        _ => (None, None),
    };
    let s = signer.as_signer();
    let counts = s.counts();
    let sum = s.signed_sum();
    Ok(ExperimentReport {
        mode: algorithm,
        generator,
        sigma,
        delta,
        t,
        n,
        nnz,
        seed,
        rng: RNG_NAME,
        base_tolerance: DEFAULT_TOL,
        max_running_discrepancy: sum.max_running(),
        final_discrepancy: sum.snapshot().max_abs,
        running_bound: running_bound(sigma, n, t, delta),
        final_bound: final_bound(sigma, n, delta),
        sign_minus_one: counts.minus_one,
        sign_zero: counts.zero,
        sign_plus_one: counts.plus_one,
        sign_plus_two: counts.plus_two,
        used_fraction: counts.used_fraction(),
        filtered,
        rounds,
        active_scales,
        wall_time_secs: Some(started.elapsed().as_secs_f64()),
    })
}
