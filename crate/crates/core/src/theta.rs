//! Theta-series transition probabilities.
//!
//! The walks are driven by two functions of a lattice shift:
//!
//! ```text
//! p(x) = sum_{j >= 1} (-1)^(j-1) exp(-(j^2 + 2 x j) / (2 sigma^2))
//! r(f) = sum_{j in Z} (-1)^j     exp(-(j^2 + 2 f j) / (2 sigma^2))
//! ```
//!
//! For `x >= -1/2` the terms of `p` decrease strictly, so truncating at the
//! first term below `tol` leaves a tail bounded by that term. `r` also has a
//! triple-product form with factors in `[0, 1]`, evaluated separately by
//! [`eval_r_product`] as a cross-check of [`eval_r_series`].

use serde::Serialize;

use crate::error::{domain, Result, WalkError};

/// Default absolute tolerance for every series evaluation.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Values further than this outside `[0, 1]` are treated as logic errors, not roundoff.
pub const CLAMP_SLACK: f64 = 1e-9;

// Terms are produced by a multiplicative recurrence; re-anchor with a direct
// `exp` this often so relative drift stays at a few ulps.
const REANCHOR_EVERY: usize = 32;

/// Scale and lattice shift of one walk transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkParams {
    pub sigma: f64,
    pub f: f64,
}

impl WalkParams {
    pub fn new(sigma: f64, f: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if !f.is_finite() || f.abs() > 0.5 {
            return Err(domain("f", f, "shift must lie in [-1/2, 1/2]"));
        }
        Ok(Self { sigma, f })
    }
}

/// A probability together with a guaranteed bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probability {
    pub value: f64,
    pub abs_error_bound: f64,
}

/// Outcome of checking `p(1+f) >= r(f) exp((2f+1)/(2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceMargin {
    pub holds: bool,
    pub margin: f64,
    pub error_bound: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(domain("sigma", sigma, "must be positive and finite"));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(domain("tol", tol, "must lie in (0, 1)"));
    }
    Ok(())
}

fn clamp_probability(value: f64, abs_error_bound: f64, what: &str) -> Result<Probability> {
    if !value.is_finite() || !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&value) {
        return Err(WalkError::Consistency(format!(
            "{what} evaluated to {value}, outside [0, 1]"
        )));
    }
    Ok(Probability {
        value: value.clamp(0.0, 1.0),
        abs_error_bound,
    })
}

/// Iterates `exp(-(j^2 + 2 x j) / (2 sigma^2))` for `j = 1, 2, ...`.
struct GaussianTerms {
    x: f64,
    inv: f64,
    j: usize,
    term: f64,
    ratio: f64,
    decay: f64,
}

impl GaussianTerms {
    fn new(x: f64, sigma: f64) -> Self {
        let inv = 0.5 / (sigma * sigma);
        let mut terms = Self {
            x,
            inv,
            j: 1,
            term: 0.0,
            ratio: 0.0,
            decay: (-2.0 * inv).exp(),
        };
        terms.anchor();
        terms
    }

    fn anchor(&mut self) {
        let j = self.j as f64;
        self.term = (-(j * j + 2.0 * self.x * j) * self.inv).exp();
        self.ratio = (-(2.0 * j + 1.0 + 2.0 * self.x) * self.inv).exp();
    }
}

impl Iterator for GaussianTerms {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.term;
        self.j += 1;
        if self.j.is_multiple_of(REANCHOR_EVERY) {
            self.anchor();
        } else {
            self.term *= self.ratio;
            self.ratio *= self.decay;
        }
        Some(out)
    }
}

fn rounding_bound(terms: usize, lead: f64) -> f64 {
    4.0 * (terms as f64 + 1.0) * f64::EPSILON * lead.max(f64::MIN_POSITIVE)
}

/// Evaluates `p_sigma(x)` to within `tol`.
pub fn eval_p(x: f64, sigma: f64, tol: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(WalkError::NonFinite("x"));
    }
    if x < -0.5 {
        return Err(domain("x", x, "alternating tail bound needs x >= -1/2"));
    }
    check_sigma(sigma)?;
    check_tol(tol)?;

    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut lead = 0.0;
    let mut used = 0;
    let mut tail = 0.0;
    for term in GaussianTerms::new(x, sigma) {
        if term < tol {
            tail = term;
            break;
        }
        if used == 0 {
            lead = term;
        }
        sum += sign * term;
        sign = -sign;
        used += 1;
    }
    clamp_probability(sum, tail + rounding_bound(used, lead), "p")
}

/// Evaluates `r_sigma(f)` from its two-sided alternating series.
pub fn eval_r_series(params: WalkParams, tol: f64) -> Result<Probability> {
    let WalkParams { sigma, f } = WalkParams::new(params.sigma, params.f)?;
    check_tol(tol)?;

    // j and -j paired: each side decreases in j since +-f >= -1/2.
    let mut sum = 1.0;
    let mut sign = -1.0;
    let mut used = 0;
    let mut tail = 0.0;
    for (a, b) in GaussianTerms::new(f, sigma).zip(GaussianTerms::new(-f, sigma)) {
        let pair = a + b;
        if pair < tol {
            tail = pair;
            break;
        }
        sum += sign * pair;
        sign = -sign;
        used += 1;
    }
    clamp_probability(sum, tail + rounding_bound(2 * used, 1.0), "r (series)")
}

/// Evaluates `r_sigma(f)` from its triple-product form.
///
/// Every factor lies in `[0, 1]` on the valid shift range, so this never
/// cancels and serves as an independent check of [`eval_r_series`].
pub fn eval_r_product(params: WalkParams, tol: f64) -> Result<Probability> {
    let WalkParams { sigma, f } = WalkParams::new(params.sigma, params.f)?;
    check_tol(tol)?;

    let inv = 1.0 / (sigma * sigma);
    let one_minus_q = -(-inv).exp_m1();
    let mut product = 1.0;
    let mut j = 0usize;
    let truncation = loop {
        j += 1;
        let jf = j as f64;
        product *= -(-jf * inv).exp_m1()
            * -(-(2.0 * jf + 2.0 * f - 1.0) * 0.5 * inv).exp_m1()
            * -(-(2.0 * jf - 2.0 * f - 1.0) * 0.5 * inv).exp_m1();
        if product == 0.0 {
            break 0.0;
        }
        // Remaining factors are 1 - y with sum(y) <= 3 q^j / (1 - q), y <= q^j.
        let largest = (-jf * inv).exp();
        let mass = 3.0 * largest / one_minus_q;
        let bound = product * mass / (1.0 - largest);
        if bound < 0.5 * tol {
            break bound;
        }
    };
    let rounding = 4.0 * (3 * j + 1) as f64 * f64::EPSILON * product;
    clamp_probability(product, truncation + rounding, "r (product)")
}

/// Checks the inequality that makes the `{-1, +1, +2}` walk well defined.
///
/// Failure is declared only when the margin is negative beyond the combined
/// evaluation error.
pub fn check_balance_inequality(params: WalkParams) -> Result<BalanceMargin> {
    let WalkParams { sigma, f } = WalkParams::new(params.sigma, params.f)?;
    if sigma < 1.0 {
        return Err(domain("sigma", sigma, "inequality requires sigma >= 1"));
    }
    let p = eval_p(1.0 + f, sigma, DEFAULT_TOL)?;
    let r = eval_r_series(WalkParams { sigma, f }, DEFAULT_TOL)?;
    let weight = ((2.0 * f + 1.0) / (2.0 * sigma * sigma)).exp();
    let margin = p.value - r.value * weight;
    let error_bound = p.abs_error_bound + r.abs_error_bound * weight;
    Ok(BalanceMargin {
        holds: margin >= -error_bound,
        margin,
        error_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Frozen from a 40-digit summation (|j| <= 80) done independently of this code.
    const P_1_AT_0: f64 = 0.481_972_621_832_437_55;
    const R_1_AT_0: f64 = 0.036_054_756_335_124_906;
    const P_1_AT_1_5: f64 = 0.128_719_916_572_169_52;
    const R_1_3_AT_0_4: f64 = 5.042_756_734_977_542e-4;
    const R_1_AT_0_3: f64 = 0.022_167_897_354_864_435;
    const P_1_AT_50: f64 = 1.169_845_917_706_196_5e-22;
    const MARGIN_8_AT_0: f64 = 0.496_078_451_396_776;

    fn params(sigma: f64, f: f64) -> WalkParams {
        WalkParams::new(sigma, f).unwrap()
    }

    #[test]
    fn p_matches_frozen_values() {
        let p = eval_p(0.0, 1.0, 1e-12).unwrap();
        assert!((p.value - P_1_AT_0).abs() < 1e-12);
        assert!(p.abs_error_bound <= 1.1e-12);

        let p = eval_p(1.5, 1.0, 1e-12).unwrap();
        assert!((p.value - P_1_AT_1_5).abs() < 1e-12);
        assert!(p.value >= 0.12);

        let p = eval_p(50.0, 1.0, 1e-12).unwrap();
        assert!(p.value <= (-101.0f64 / 2.0).exp());
        assert!(p.value < 1e-21);
        assert!((p.value - P_1_AT_50).abs() < 1e-12);
    }

    #[test]
    fn r_matches_frozen_values() {
        let r = eval_r_series(params(1.0, 0.0), 1e-12).unwrap();
        assert!((r.value - R_1_AT_0).abs() < 1e-12);
        assert!(1.0 - r.value >= 0.9639);

        let r = eval_r_series(params(1.3, 0.4), 1e-12).unwrap();
        assert!((r.value - R_1_3_AT_0_4).abs() < 1e-12);

        let r = eval_r_series(params(1.0, 0.3), 1e-12).unwrap();
        assert!((r.value - R_1_AT_0_3).abs() < 1e-12);
    }

    #[test]
    fn r_decays_like_exp_minus_sigma_squared() {
        let r = eval_r_series(params(2.0, 0.2), 1e-12).unwrap();
        assert!(r.value <= (-4.0f64).exp());
    }

    #[test]
    fn r_is_symmetric_in_shift() {
        let a = eval_r_series(params(1.3, 0.4), 1e-12).unwrap();
        let b = eval_r_series(params(1.3, -0.4), 1e-12).unwrap();
        assert!((a.value - b.value).abs() <= 1e-12);
    }

    #[test]
    fn product_agrees_with_series() {
        let s = eval_r_series(params(1.0, 0.0), 1e-12).unwrap();
        let p = eval_r_product(params(1.0, 0.0), 1e-12).unwrap();
        assert!((s.value - p.value).abs() <= 1e-10);
        assert!((p.value - R_1_AT_0).abs() <= 1e-12);
    }

    #[test]
    fn product_vanishes_at_half_shift() {
        for f in [0.5, -0.5] {
            let p = eval_r_product(params(1.0, f), 1e-12).unwrap();
            assert_eq!(p.value, 0.0);
            let s = eval_r_series(params(1.0, f), 1e-12).unwrap();
            assert!(s.value <= 1e-12);
        }
    }

    #[test]
    fn product_peaks_at_zero_shift() {
        let centered = eval_r_product(params(1.0, 0.0), 1e-12).unwrap();
        let shifted = eval_r_product(params(1.0, 0.3), 1e-12).unwrap();
        assert!(shifted.value <= centered.value);
    }

    #[test]
    fn inequality_holds_at_extremes() {
        let m = check_balance_inequality(params(1.0, 0.5)).unwrap();
        assert!(m.holds);
        assert!((m.margin - P_1_AT_1_5).abs() < 1e-11);

        let m = check_balance_inequality(params(8.0, 0.0)).unwrap();
        assert!(m.holds);
        assert!((m.margin - MARGIN_8_AT_0).abs() < 1e-11);
    }

    #[test]
    fn inequality_rejects_small_sigma() {
        assert!(matches!(
            check_balance_inequality(params(0.9, 0.0)),
            Err(WalkError::Domain { what: "sigma", .. })
        ));
    }

    #[test]
    fn domain_errors() {
        assert!(eval_p(-0.6, 1.0, 1e-12).is_err());
        assert!(eval_p(0.0, 0.0, 1e-12).is_err());
        assert!(eval_p(0.0, -1.0, 1e-12).is_err());
        assert!(eval_p(0.0, 1.0, 0.0).is_err());
        assert!(eval_p(0.0, 1.0, 1.0).is_err());
        assert!(eval_p(f64::NAN, 1.0, 1e-12).is_err());
        assert!(WalkParams::new(1.0, 0.51).is_err());
        assert!(eval_r_series(WalkParams { sigma: 1.0, f: 0.7 }, 1e-12).is_err());
        assert!(eval_r_product(WalkParams { sigma: 1.0, f: 0.0 }, 2.0).is_err());
    }

    #[test]
    fn tail_bound_respects_tolerance() {
        for tol in [1e-3, 1e-6, 1e-9] {
            let coarse = eval_p(0.2, 1.7, tol).unwrap();
            let fine = eval_p(0.2, 1.7, 1e-14).unwrap();
            assert!((coarse.value - fine.value).abs() <= coarse.abs_error_bound + 1e-14);
            assert!(coarse.abs_error_bound <= tol * 1.001);
        }
    }

    #[test]
    fn large_sigma_terms_stay_accurate() {
        // Many re-anchored recurrence steps.
        let p = eval_p(0.0, 40.0, 1e-12).unwrap();
        let r = eval_r_series(params(40.0, 0.0), 1e-12).unwrap();
        assert!((2.0 * p.value + r.value - 1.0).abs() < 1e-11);
        assert!(r.value < 1e-11);
    }

    proptest! {
        #[test]
        fn three_way_identity(sigma in 0.3f64..6.0, f in -0.5f64..=0.5) {
            let tol = 1e-12;
            let up = eval_p(f, sigma, tol).unwrap().value;
            let down = eval_p(-f, sigma, tol).unwrap().value;
            let stay = eval_r_series(params(sigma, f), tol).unwrap().value;
            prop_assert!((up + down + stay - 1.0).abs() <= 3.0 * tol);
        }

        #[test]
        fn series_and_product_agree(sigma in 0.5f64..4.0, f in -0.5f64..=0.5) {
            let s = eval_r_series(params(sigma, f), 1e-12).unwrap().value;
            let p = eval_r_product(params(sigma, f), 1e-12).unwrap().value;
            prop_assert!((s - p).abs() <= 2e-12);
        }

        #[test]
        fn p_is_a_probability(x in -0.5f64..30.0, sigma in 0.2f64..8.0) {
            let p = eval_p(x, sigma, 1e-12).unwrap();
            prop_assert!((0.0..1.0).contains(&p.value));
            // A leading term above tol keeps the truncated sum strictly positive.
            if (-(1.0 + 2.0 * x) / (2.0 * sigma * sigma)).exp() >= 1e-12 {
                prop_assert!(p.value > 0.0);
            }
        }

        #[test]
        fn pointwise_stationarity(x in 0.5f64..10.0, sigma in 0.5f64..4.0) {
            let tol = 1e-12;
            let g = |y: f64| (-(y * y) / (2.0 * sigma * sigma)).exp();
            let lhs = eval_p(x - 1.0, sigma, tol).unwrap().value * g(x - 1.0)
                + (1.0 - eval_p(x + 1.0, sigma, tol).unwrap().value) * g(x + 1.0);
            prop_assert!((lhs - g(x)).abs() <= 10.0 * tol);
        }
    }
}
