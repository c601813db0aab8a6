//! The rattling coefficient: root of the front-speed balance equation.
//!
//! In the quadratic switching law `t_n ≈ a·n²` the coefficient `a` is
//! determined by the scalar balance
//!
//! ```text
//! g(a) = −c + (h₁ − 2c)·a − h₁·I_f(a) = 0 ,
//! ```
//!
//! where `I_f` is the weighted scaling-profile integral
//! ([`crate::green::integral_If`]). The equation has a solution only in
//! the rattling regime `0 < 2c < h₁`; `g(0⁺) = −c < 0` and
//! `g(a) → +∞`, so a sign change exists and is found by a geometric
//! bracket scan followed by a bisection/secant hybrid.
//!
//! [`verify_hypothesis`] checks the quadratic law against observed
//! switching times: with `q_n = t_n − a·n²` the hypothesis holds with
//! margin `E` up to node `n₀` when `|q_n| ≤ E·√n` for `1 ≤ n ≤ n₀`.

use crate::error::{Error, Result};
use crate::green::integral_If;
use crate::lattice1d::SwitchRecord;

/// Solved front-speed balance: the coefficient with its residual and the
/// bracket located by the geometric scan.
#[derive(Debug, Clone, Copy)]
pub struct RattlingCoefficient {
    pub c: f64,
    pub h1: f64,
    pub a: f64,
    /// `g(a)` at the returned root (guaranteed `≤ 1e−9` in magnitude).
    pub residual: f64,
    /// Sign-change bracket from the geometric scan, before refinement.
    pub bracket: (f64, f64),
}

/// Residual budget for the returned root of the balance equation.
pub const SOLVE_A_RESIDUAL_TOL: f64 = 1e-9;

fn check_regime(c: f64, h1: f64) -> Result<()> {
    if !c.is_finite() || !h1.is_finite() || c <= 0.0 || h1 <= 2.0 * c {
        return Err(Error::Validation(format!(
            "the rattling regime requires 0 < 2c < h1 (got c = {c}, h1 = {h1})"
        )));
    }
    Ok(())
}

/// The balance residual `g(a) = −c + (h₁ − 2c)·a − h₁·I_f(a)`.
pub fn balance_residual(c: f64, h1: f64, a: f64) -> Result<f64> {
    Ok(-c + (h1 - 2.0 * c) * a - h1 * integral_If(a)?)
}

/// Solve the front-speed balance for the rattling coefficient `a`.
///
/// Errors: [`Error::Validation`] outside the regime `0 < 2c < h1`;
/// [`Error::NoBracket`] if the geometric scan over
/// `a ∈ [2⁻⁴⁰, 2⁶⁰]` finds no sign change; [`Error::ToleranceNotMet`]
/// if refinement cannot push `|g(a)|` below [`SOLVE_A_RESIDUAL_TOL`].
pub fn solve_a(c: f64, h1: f64) -> Result<RattlingCoefficient> {
    check_regime(c, h1)?;
    let g = |a: f64| balance_residual(c, h1, a);

    // Geometric scan for a sign change, outward from a = 2⁻¹⁰.
    let mut lo = 2f64.powi(-10);
    let mut g_lo = g(lo)?;
    let (mut lo, mut g_lo, mut hi, mut g_hi) = if g_lo > 0.0 {
        // Root below the seed: walk downward.
        let (mut hi, mut g_hi) = (lo, g_lo);
        loop {
            lo *= 0.5;
            if lo < 2f64.powi(-40) {
                return Err(Error::NoBracket(format!(
                    "no sign change of the balance residual above a = 2^-40 \
                     (c = {c}, h1 = {h1})"
                )));
            }
            g_lo = g(lo)?;
            if g_lo <= 0.0 {
                break (lo, g_lo, hi, g_hi);
            }
            hi = lo;
            g_hi = g_lo;
        }
    } else {
        // Walk upward until the residual turns positive.
        let mut hi = 2.0 * lo;
        loop {
            let g_hi = g(hi)?;
            if g_hi >= 0.0 {
                break (lo, g_lo, hi, g_hi);
            }
            if hi > 2f64.powi(60) {
                return Err(Error::NoBracket(format!(
                    "no sign change of the balance residual below a = 2^60 \
                     (c = {c}, h1 = {h1})"
                )));
            }
            lo = hi;
            g_lo = g_hi;
            hi *= 2.0;
        }
    };
    let bracket = (lo, hi);

    // Bisection/secant hybrid: a secant candidate is accepted when it
    // falls strictly inside the interval, otherwise the midpoint is used.
    let mut best = if g_lo.abs() <= g_hi.abs() { (lo, g_lo) } else { (hi, g_hi) };
    for _ in 0..200 {
        if best.1.abs() <= SOLVE_A_RESIDUAL_TOL
            && (hi - lo) <= 1e-10 * hi.abs().max(1.0)
        {
            break;
        }
        let secant = lo - g_lo * (hi - lo) / (g_hi - g_lo);
        let mid = if secant.is_finite() && secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break; // interval exhausted at floating-point resolution
        }
        let g_mid = g(mid)?;
        if g_mid.abs() < best.1.abs() {
            best = (mid, g_mid);
        }
        if g_mid == 0.0 {
            break;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    let (a, residual) = best;
    if residual.abs() > SOLVE_A_RESIDUAL_TOL {
        return Err(Error::ToleranceNotMet(format!(
            "balance-equation refinement stalled at |g| = {:.3e} (a = {a})",
            residual.abs()
        )));
    }
    Ok(RattlingCoefficient { c, h1, a, residual, bracket })
}

/// Outcome of testing the quadratic switching law against observed
/// switching times.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    /// The margin the law was tested against.
    pub e_bound: f64,
    /// Largest node index tested.
    pub n0: usize,
    /// Observed switching times for nodes `1..=n0`.
    pub switch_times: Vec<f64>,
    /// True iff `|t_n − a·n²| ≤ e_bound·√n` for every tested node.
    pub verdict: bool,
    /// `max_n |t_n − a·n²| / √n` — the smallest margin that would pass.
    pub max_normalized_residual: f64,
}

/// Test the quadratic law `t_n = a·n² + O(√n)` with margin `e_bound` on
/// nodes `1..=n0`, using simulated switch records.
///
/// Errors with [`Error::MissingSwitch`] when a node in `1..=n0` has no
/// record or never switched within the simulated horizon.
pub fn verify_hypothesis(
    c: f64,
    h1: f64,
    a: f64,
    e_bound: f64,
    n0: usize,
    records: &[SwitchRecord],
) -> Result<HypothesisReport> {
    check_regime(c, h1)?;
    if !(a.is_finite() && a > 0.0) || !(e_bound.is_finite() && e_bound > 0.0) || n0 == 0 {
        return Err(Error::Validation(format!(
            "need a > 0, e_bound > 0, n0 >= 1 (got a = {a}, e_bound = {e_bound}, n0 = {n0})"
        )));
    }
    let mut switch_times = Vec::with_capacity(n0);
    let mut max_r = 0.0_f64;
    for n in 1..=n0 {
        let t_n = records
            .iter()
            .find(|r| r.n == n as i64)
            .map(|r| r.t_switch)
            .ok_or_else(|| {
                Error::MissingSwitch(format!("no switch record for node {n}"))
            })?;
        if !t_n.is_finite() {
            return Err(Error::MissingSwitch(format!(
                "node {n} never switched within the simulated horizon"
            )));
        }
        switch_times.push(t_n);
        let q = t_n - a * (n as f64) * (n as f64);
        max_r = max_r.max(q.abs() / (n as f64).sqrt());
    }
    Ok(HypothesisReport {
        e_bound,
        n0,
        switch_times,
        verdict: max_r <= e_bound,
        max_normalized_residual: max_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_rejects_parameters_outside_the_regime() {
        assert!(solve_a(0.5, 1.0).is_err()); // h1 == 2c
        assert!(solve_a(0.5, 0.8).is_err()); // h1 < 2c
        assert!(solve_a(0.0, 1.0).is_err());
        assert!(solve_a(-0.5, 1.0).is_err());
        assert!(solve_a(0.5, f64::NAN).is_err());
    }

    #[test]
    fn reference_case_and_frozen_root() {
        let sol = solve_a(0.5, 2.0).unwrap();
        assert!(sol.residual.abs() <= SOLVE_A_RESIDUAL_TOL);
        assert!(sol.bracket.0 < sol.a && sol.a < sol.bracket.1);
        // Frozen at build time; the root of −1/2 + a − 2·I_f(a).
        assert!((sol.a - 1.334942763439).abs() < 1e-8, "a = {:.12}", sol.a);
        // The residual changes sign across the root.
        assert!(balance_residual(0.5, 2.0, sol.a - 0.05).unwrap() < 0.0);
        assert!(balance_residual(0.5, 2.0, sol.a + 0.05).unwrap() > 0.0);
    }

    #[test]
    fn scaling_the_pair_leaves_the_root_unchanged() {
        let base = solve_a(0.5, 2.0).unwrap();
        for lambda in [0.5, 3.0] {
            let scaled = solve_a(lambda * 0.5, lambda * 2.0).unwrap();
            assert!(
                (scaled.a - base.a).abs() <= 1e-8,
                "a({lambda}·) = {} vs {}",
                scaled.a,
                base.a
            );
        }
    }

    #[test]
    fn extreme_gap_cases_converge() {
        // Nearly closing gap: the root grows like c/(h1 − 2c).
        let tight = solve_a(0.5, 1.01).unwrap();
        assert!(tight.residual.abs() <= SOLVE_A_RESIDUAL_TOL);
        assert!(tight.a > 100.0);
        // Wide gap: the root is small.
        let wide = solve_a(0.5, 100.0).unwrap();
        assert!(wide.residual.abs() <= SOLVE_A_RESIDUAL_TOL);
        assert!(wide.a < 0.01);
    }

    fn records_from(times: &[(i64, f64)]) -> Vec<SwitchRecord> {
        times.iter().map(|&(n, t_switch)| SwitchRecord { n, t_switch }).collect()
    }

    #[test]
    fn hypothesis_verdicts() {
        let a = 1.5;
        // t_n = a n² + 0.5 √n: normalized residual exactly 0.5 everywhere.
        let recs: Vec<SwitchRecord> = (0..=6)
            .map(|n| SwitchRecord {
                n,
                t_switch: a * (n * n) as f64 + 0.5 * (n as f64).sqrt(),
            })
            .collect();
        let pass = verify_hypothesis(0.5, 2.0, a, 1.0, 6, &recs).unwrap();
        assert!(pass.verdict);
        assert!((pass.max_normalized_residual - 0.5).abs() < 1e-12);
        assert_eq!(pass.switch_times.len(), 6);
        assert_eq!(pass.n0, 6);

        let fail = verify_hypothesis(0.5, 2.0, a, 0.4, 6, &recs).unwrap();
        assert!(!fail.verdict);
        assert_eq!(fail.max_normalized_residual, pass.max_normalized_residual);
    }

    #[test]
    fn hypothesis_requires_complete_switch_data() {
        let recs = records_from(&[(1, 1.0), (2, 4.0), (4, 16.0)]);
        assert!(matches!(
            verify_hypothesis(0.5, 2.0, 1.0, 1.0, 4, &recs),
            Err(Error::MissingSwitch(_))
        ));
        let with_inf = records_from(&[(1, 1.0), (2, f64::INFINITY)]);
        assert!(matches!(
            verify_hypothesis(0.5, 2.0, 1.0, 1.0, 2, &with_inf),
            Err(Error::MissingSwitch(_))
        ));
        assert!(verify_hypothesis(0.5, 2.0, 1.0, 1.0, 0, &recs).is_err());
        assert!(verify_hypothesis(0.5, 2.0, -1.0, 1.0, 2, &recs).is_err());
    }
}
