//! Grid checks of the kernel identities, the `+2` walk inequality, and exact
//! stationarity on truncated chains.

use serde::Serialize;

use crate::error::Result;
use crate::harness::chain::{build_truncated_chain, default_radius, stationarity_residual};
use crate::lattice::Walk;
use crate::theta::{check_balance_inequality, eval_p, eval_r_product, eval_r_series, WalkParams, DEFAULT_TOL};

/// `|p(f) + r(f) + p(-f) - 1|` must stay below this.
pub const SUM_IDENTITY_TOL: f64 = 3e-12;
/// Series and product forms of `r` must agree to this.
pub const CROSS_FORMULA_TOL: f64 = 1e-10;
/// Allowed excess of `r_sigma(f)` over `exp(-sigma^2)`.
pub const DECAY_BOUND_SLACK: f64 = 1e-10;
/// Largest acceptable `|pi P - pi|_1`.
pub const RESIDUAL_TOL: f64 = 1e-8;

pub const STATIONARITY_SIGMAS: [f64; 3] = [1.0, 1.5, 2.0];
pub const JACOBI_EXTRA_SIGMA: f64 = 0.75;
pub const STATIONARITY_SHIFTS: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.49];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Stationarity,
    Inequality,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Identities, Suite::Stationarity, Suite::Inequality];
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub grid_points: usize,
    pub worst_sum_defect: f64,
    pub worst_sum_defect_at: (f64, f64),
    pub worst_cross_formula_gap: f64,
    pub worst_cross_formula_gap_at: (f64, f64),
    /// Largest `r_sigma(f) - exp(-sigma^2)` over the grid.
    pub worst_decay_excess: f64,
    /// Smallest `exp(-sigma^2) - r_sigma(0)` for sigma in [1/2, 2], spacing 1e-3.
    pub fine_decay_min_margin: f64,
    pub fine_decay_min_margin_at: f64,
    pub passed: bool,
}

/// `(sigma, f)` grid of `count x count` points over `[1/2, 4] x [-1/2, 1/2]`.
pub fn verify_identities(count: usize) -> Result<IdentityReport> {
    let mut worst_sum = (0.0, (0.0, 0.0));
    let mut worst_gap = (0.0, (0.0, 0.0));
    let mut worst_excess = f64::NEG_INFINITY;
    for &sigma in &linspace(0.5, 4.0, count) {
        for &f in &linspace(-0.5, 0.5, count) {
            let params = WalkParams::new(sigma, f)?;
            let up = eval_p(f, sigma, DEFAULT_TOL)?.value;
            let down = eval_p(-f, sigma, DEFAULT_TOL)?.value;
            let series = eval_r_series(params, DEFAULT_TOL)?.value;
            let product = eval_r_product(params, DEFAULT_TOL)?.value;
            let defect = (up + series + down - 1.0).abs();
            if defect > worst_sum.0 {
                worst_sum = (defect, (sigma, f));
            }
            let gap = (series - product).abs();
            if gap > worst_gap.0 {
                worst_gap = (gap, (sigma, f));
            }
            worst_excess = worst_excess.max(series - (-sigma * sigma).exp());
        }
    }
    let mut fine = (f64::INFINITY, 0.0);
    for &sigma in &linspace(0.5, 2.0, 1501) {
        let r = eval_r_series(WalkParams::new(sigma, 0.0)?, DEFAULT_TOL)?.value;
        let margin = (-sigma * sigma).exp() - r;
        if margin < fine.0 {
            fine = (margin, sigma);
        }
    }
    Ok(IdentityReport {
        grid_points: count * count,
        worst_sum_defect: worst_sum.0,
        worst_sum_defect_at: worst_sum.1,
        worst_cross_formula_gap: worst_gap.0,
        worst_cross_formula_gap_at: worst_gap.1,
        worst_decay_excess: worst_excess,
        fine_decay_min_margin: fine.0,
        fine_decay_min_margin_at: fine.1,
        passed: worst_sum.0 <= SUM_IDENTITY_TOL
            && worst_gap.0 <= CROSS_FORMULA_TOL
            && worst_excess <= DECAY_BOUND_SLACK
            && fine.0 >= -DECAY_BOUND_SLACK,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub grid_points: usize,
    pub min_margin: f64,
    pub min_margin_sigma: f64,
    pub min_margin_f: f64,
    pub failures: usize,
    pub passed: bool,
}

/// sigma in `[1, 8]` and f in `[-1/2, 1/2]`, both at spacing 0.01.
pub fn verify_inequality() -> Result<InequalityReport> {
    let sigmas = linspace(1.0, 8.0, 701);
    let shifts = linspace(-0.5, 0.5, 101);
    let mut min = (f64::INFINITY, 0.0, 0.0);
    let mut failures = 0;
    for &sigma in &sigmas {
        for &f in &shifts {
            let m = check_balance_inequality(WalkParams::new(sigma, f)?)?;
            if !m.holds || m.margin < 0.0 {
                failures += 1;
            }
            if m.margin < min.0 {
                min = (m.margin, sigma, f);
            }
        }
    }
    Ok(InequalityReport {
        grid_points: sigmas.len() * shifts.len(),
        min_margin: min.0,
        min_margin_sigma: min.1,
        min_margin_f: min.2,
        failures,
        passed: failures == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainResidual {
    pub walk: Walk,
    pub sigma: f64,
    pub f: f64,
    pub radius: i64,
    pub residual: f64,
    pub boundary_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub chains: Vec<ChainResidual>,
    pub worst_residual: f64,
    pub passed: bool,
}

pub fn verify_stationarity() -> Result<StationarityReport> {
    let mut cases: Vec<(Walk, f64)> = Vec::new();
    for walk in [Walk::Jacobi, Walk::Ramanujan] {
        cases.extend(STATIONARITY_SIGMAS.iter().map(|&s| (walk, s)));
    }
    cases.push((Walk::Jacobi, JACOBI_EXTRA_SIGMA));

    let mut chains = Vec::new();
    for (walk, sigma) in cases {
        for &f in &STATIONARITY_SHIFTS {
            let radius = default_radius(sigma);
            let chain = build_truncated_chain(WalkParams::new(sigma, f)?, walk, radius)?;
            chains.push(ChainResidual {
                walk,
                sigma,
                f,
                radius,
                residual: stationarity_residual(&chain),
                boundary_mass: chain.boundary_mass,
            });
        }
    }
    let worst_residual = chains.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(StationarityReport {
        chains,
        worst_residual,
        passed: worst_residual <= RESIDUAL_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationarity: Option<StationarityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<InequalityReport>,
    pub passed: bool,
}

pub fn run_verification(suites: &[Suite]) -> Result<VerifyReport> {
    let mut report = VerifyReport {
        identities: None,
        stationarity: None,
        inequality: None,
        passed: true,
    };
    for suite in suites {
        let passed = match suite {
            Suite::Identities => {
                let r = verify_identities(101)?;
                let ok = r.passed;
                report.identities = Some(r);
                ok
            }
            Suite::Stationarity => {
                let r = verify_stationarity()?;
                let ok = r.passed;
                report.stationarity = Some(r);
                ok
            }
            Suite::Inequality => {
                let r = verify_inequality()?;
                let ok = r.passed;
                report.inequality = Some(r);
                ok
            }
        };
        report.passed &= passed;
    }
    Ok(report)
}
