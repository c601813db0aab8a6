//! Post-hoc analysis of switch records and trajectories: the quadratic
//! switching-time law, switch-density ratio, co-prime block pattern,
//! gradient bound, and the coarse-grained (weak-limit) hysteresis
//! profile.
//!
//! All statistics here consume the output of a lattice run. Switching
//! times obey `t_n = a·n² + q_n` with `|q_n| ≤ E√n` when the post-switch
//! source vanishes (and `O(n)` residuals otherwise); in the mixed-sign
//! regime the switched/unswitched node densities approach the ratio
//! `|h₋₁|/h₁`, locking into exact co-prime blocks when that ratio is
//! rational.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice1d::{SwitchRecord, Trajectory};

/// Default first tail index used by the quadratic fit.
pub const DEFAULT_TAIL_START: i64 = 10;
/// Fraction of blocks that must match exactly for a positive verdict.
pub const BLOCK_PATTERN_THRESHOLD: f64 = 0.9;
/// Default moving-average width for the coarse-grained profile.
pub const DEFAULT_WEAK_WINDOW: usize = 11;

/// Result of fitting `t_n ≈ a·n²` to the finite switching times.
#[derive(Debug, Clone)]
pub struct QuadraticFit {
    /// Fitted (or hinted) quadratic coefficient.
    pub a_fit: f64,
    /// Residuals `(n, t_n − a_fit·n²)` for every finite record, `n ≠ 0`.
    pub q: Vec<(i64, f64)>,
    /// Smallest constant with `|q_n| ≤ E·√|n|` across the residuals.
    pub e_min: f64,
    /// Number of tail records that entered the least-squares sum.
    pub n_used: usize,
}

/// Least-squares fit of the switching-time law over the tail
/// `|n| ≥ n_min`, through the origin in the variable `n²`.
///
/// With `a_hint` present the coefficient is taken as given (e.g. from the
/// balance-equation root) and only residuals and `E_min` are computed.
/// Requires at least 10 finite switching times in the tail
/// ([`Error::InsufficientData`] otherwise).
pub fn fit_quadratic_law_with_tail(
    records: &[SwitchRecord],
    a_hint: Option<f64>,
    n_min: i64,
) -> Result<QuadraticFit> {
    if n_min < 1 {
        return Err(Error::Validation(format!("tail start must be >= 1 (got {n_min})")));
    }
    let tail: Vec<&SwitchRecord> = records
        .iter()
        .filter(|r| r.n.abs() >= n_min && r.t_switch.is_finite())
        .collect();
    if tail.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "quadratic fit needs at least 10 finite switch times with |n| >= {n_min} \
             (got {})",
            tail.len()
        )));
    }
    let a_fit = match a_hint {
        Some(a) => {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::Validation(format!(
                    "hinted coefficient must be positive (got {a})"
                )));
            }
            a
        }
        None => {
            let (mut num, mut den) = (0.0, 0.0);
            for r in &tail {
                let n2 = (r.n as f64) * (r.n as f64);
                num += n2 * r.t_switch;
                den += n2 * n2;
            }
            num / den
        }
    };
    let mut q: Vec<(i64, f64)> = records
        .iter()
        .filter(|r| r.n != 0 && r.t_switch.is_finite())
        .map(|r| (r.n, r.t_switch - a_fit * (r.n as f64) * (r.n as f64)))
        .collect();
    q.sort_by_key(|&(n, _)| (n.abs(), n));
    let e_min = q
        .iter()
        .map(|&(n, qn)| qn.abs() / (n.abs() as f64).sqrt())
        .fold(0.0f64, f64::max);
    Ok(QuadraticFit { a_fit, q, e_min, n_used: tail.len() })
}

/// [`fit_quadratic_law_with_tail`] at the default tail start.
pub fn fit_quadratic_law(records: &[SwitchRecord], a_hint: Option<f64>) -> Result<QuadraticFit> {
    fit_quadratic_law_with_tail(records, a_hint, DEFAULT_TAIL_START)
}

/// Log–log regression slope of the residual magnitudes `|q_n|` against
/// `n` over the tail `n ≥ n_min` (positive side). A slope near `1/2`
/// matches `√n`-sized residuals; `O(n)` residuals push it toward 1.
pub fn residual_exponent(q: &[(i64, f64)], n_min: i64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = q
        .iter()
        .filter(|&&(n, qn)| n >= n_min && qn.abs() > 1e-12)
        .map(|&(n, qn)| ((n as f64).ln(), qn.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "residual-exponent regression needs at least 5 nonzero tail residuals \
             (got {})",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Ok((m * sxy - sx * sy) / (m * sxx - sx * sx))
}

/// Ratio of non-switching to switching nodes over the symmetric index
/// set `{u_{±j} : j_min ≤ j ≤ j_max}` (plus `u₀` once when `j_min = 0`).
///
/// A node counts as switching iff its recorded time is finite; when no
/// node in the range switches the ratio is reported as `∞`. Every index
/// in the range must be present among the records.
pub fn switch_ratio(records: &[SwitchRecord], j_min: usize, j_max: usize) -> Result<f64> {
    if j_min >= j_max {
        return Err(Error::Validation(format!(
            "need j_min < j_max (got {j_min}, {j_max})"
        )));
    }
    let by_node: HashMap<i64, f64> = records.iter().map(|r| (r.n, r.t_switch)).collect();
    let mut switching = 0usize;
    let mut non_switching = 0usize;
    let mut tally = |n: i64| -> Result<()> {
        match by_node.get(&n) {
            Some(t) if t.is_finite() => switching += 1,
            Some(_) => non_switching += 1,
            None => {
                return Err(Error::Validation(format!(
                    "switch ratio needs a record for node {n}"
                )))
            }
        }
        Ok(())
    };
    if j_min == 0 {
        tally(0)?;
    }
    for j in j_min.max(1)..=j_max {
        tally(j as i64)?;
        tally(-(j as i64))?;
    }
    if switching == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(non_switching as f64 / switching as f64)
}

/// Tally of co-prime switching blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTally {
    /// Number of complete blocks examined (both signs of `n`).
    pub blocks: usize,
    /// Blocks containing exactly `p_s` switching nodes.
    pub exact: usize,
    /// `exact / blocks`.
    pub fraction: f64,
    /// `fraction ≥` [`BLOCK_PATTERN_THRESHOLD`].
    pub verdict: bool,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Check the tail block pattern: every window `{u_{j+1}, …, u_{j+p_s+p_ns}}`
/// of consecutive nodes should contain exactly `p_s` switching nodes once
/// `j` is large enough. Blocks are walked on the positive side starting
/// at `j_start` and mirrored to negative `n`, using complete blocks with
/// `j + p_s + p_ns ≤ j_end` only.
///
/// `h1`/`h_m1` are the run's source strengths; the block shape must match
/// them: [`Error::ParamMismatch`] unless `p_ns/p_s = |h_m1|/h1`. The two
/// block sizes must be co-prime.
pub fn block_pattern(
    records: &[SwitchRecord],
    p_s: u32,
    p_ns: u32,
    j_start: usize,
    j_end: usize,
    h1: f64,
    h_m1: f64,
) -> Result<BlockTally> {
    if p_s == 0 {
        return Err(Error::Validation("p_s must be positive".into()));
    }
    if gcd(p_s as u64, p_ns as u64) != 1 {
        return Err(Error::Validation(format!(
            "block sizes must be co-prime (got p_s = {p_s}, p_ns = {p_ns})"
        )));
    }
    if !(h1 > 0.0) || h_m1 > 0.0 {
        return Err(Error::Validation(format!(
            "need h1 > 0 >= h_m1 (got h1 = {h1}, h_m1 = {h_m1})"
        )));
    }
    let claimed = p_ns as f64 / p_s as f64;
    let actual = h_m1.abs() / h1;
    if (claimed - actual).abs() > 1e-9 * actual.max(1.0) {
        return Err(Error::ParamMismatch(format!(
            "block shape p_ns/p_s = {claimed} does not match |h_m1|/h1 = {actual}"
        )));
    }
    let by_node: HashMap<i64, f64> = records.iter().map(|r| (r.n, r.t_switch)).collect();
    let len = (p_s + p_ns) as usize;
    let mut blocks = 0usize;
    let mut exact = 0usize;
    let mut j = j_start;
    while j + len <= j_end {
        for sign in [1i64, -1] {
            let mut switchers = 0u32;
            let mut complete = true;
            for m in 1..=len {
                let n = sign * (j + m) as i64;
                match by_node.get(&n) {
                    Some(t) if t.is_finite() => switchers += 1,
                    Some(_) => {}
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                blocks += 1;
                if switchers == p_s {
                    exact += 1;
                }
            }
        }
        j += len;
    }
    if blocks == 0 {
        return Err(Error::InsufficientData(format!(
            "no complete blocks of length {len} between j = {j_start} and {j_end}"
        )));
    }
    let fraction = exact as f64 / blocks as f64;
    Ok(BlockTally { blocks, exact, fraction, verdict: fraction >= BLOCK_PATTERN_THRESHOLD })
}

/// Largest sampled neighbor difference `|u_{k+1} − u_k|` over the region
/// where the bound is claimed: the pair at `k` enters at times
/// `t ≥ t_{|k|}` (after the front has passed it). Pairs whose gate time
/// is not finite never enter.
pub fn gradient_bound(trajectory: &Trajectory, records: &[SwitchRecord]) -> Result<f64> {
    let by_node: HashMap<i64, f64> = records.iter().map(|r| (r.n, r.t_switch)).collect();
    let n = trajectory.n as i64;
    let mut bound = 0.0f64;
    for state in &trajectory.states {
        for k in -n..n {
            let gate = match by_node.get(&k.abs()) {
                Some(t) if t.is_finite() => *t,
                _ => continue,
            };
            if state.t < gate {
                continue;
            }
            let i = (k + n) as usize;
            let diff = (state.u[i + 1] - state.u[i]).abs();
            bound = bound.max(diff);
        }
    }
    Ok(bound)
}

/// Moving-window averages of the per-node hysteresis output, with the
/// step profile they should approach.
#[derive(Debug, Clone)]
pub struct WeakLimitProfile {
    /// Snapshot times (from the trajectory).
    pub times: Vec<f64>,
    /// Node indices for which a full window fits.
    pub nodes: Vec<i64>,
    /// `averaged[ti][ni]`: mean output over the window centered at node.
    pub averaged: Vec<Vec<f64>>,
    /// `reference[ti][ni]`: 0 inside `|n| < √(t/a)`, `h1` outside.
    pub reference: Vec<Vec<f64>>,
    pub window_width: usize,
}

/// Coarse-grain the hysteresis output (`h1` before a node's switch, `h_m1`
/// after) with a centered moving average of `window_width` nodes, at every
/// trajectory snapshot time. Wide windows reveal the weak limit — a step
/// profile vanishing on the front interior — while `window_width = 1`
/// returns the raw alternating values, which have no pointwise limit.
pub fn weak_limit_profile(
    trajectory: &Trajectory,
    records: &[SwitchRecord],
    a: f64,
    window_width: usize,
    h1: f64,
    h_m1: f64,
) -> Result<WeakLimitProfile> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Validation(format!("coefficient must be positive (got {a})")));
    }
    if window_width == 0 || window_width % 2 == 0 {
        return Err(Error::Validation(format!(
            "window width must be odd and positive (got {window_width})"
        )));
    }
    let by_node: HashMap<i64, f64> = records.iter().map(|r| (r.n, r.t_switch)).collect();
    let n = trajectory.n as i64;
    let half = (window_width / 2) as i64;
    let nodes: Vec<i64> = (-(n - half)..=(n - half)).collect();
    if nodes.is_empty() {
        return Err(Error::InsufficientData(
            "window wider than the recorded node range".into(),
        ));
    }
    let output_at = |k: i64, t: f64| -> Result<f64> {
        match by_node.get(&k) {
            Some(tk) if *tk <= t => Ok(h_m1),
            Some(_) => Ok(h1),
            None => Err(Error::IncompleteHistory(format!(
                "weak-limit averaging needs the switch record of node {k}"
            ))),
        }
    };
    let mut times = Vec::with_capacity(trajectory.states.len());
    let mut averaged = Vec::with_capacity(trajectory.states.len());
    let mut reference = Vec::with_capacity(trajectory.states.len());
    for state in &trajectory.states {
        let t = state.t;
        let mut row = Vec::with_capacity(nodes.len());
        let mut refs = Vec::with_capacity(nodes.len());
        for &center in &nodes {
            let mut acc = 0.0;
            for k in (center - half)..=(center + half) {
                acc += output_at(k, t)?;
            }
            row.push(acc / window_width as f64);
            let inside = (center as f64).abs() < (t / a).sqrt();
            refs.push(if inside { 0.0 } else { h1 });
        }
        times.push(t);
        averaged.push(row);
        reference.push(refs);
    }
    Ok(WeakLimitProfile { times, nodes, averaged, reference, window_width })
}

/// Summary of all pattern statistics for one lattice run.
#[derive(Debug, Clone)]
pub struct RattlingReport {
    pub fit: QuadraticFit,
    /// Non-switching/switching ratio over the classifiable guarded window.
    pub ratio: f64,
    /// Index window `(j_min, j_max)` the ratio was computed over.
    pub ratio_window: (usize, usize),
    /// Block tally when `|h_m1|/h1` is a small rational; `None` otherwise.
    pub block: Option<BlockTally>,
    /// Block shape `(p_s, p_ns)` used for the tally.
    pub block_shape: Option<(u32, u32)>,
    pub gradient_bound_b: f64,
    pub weak_limit: WeakLimitProfile,
}

/// Express `|h_m1|/h1` as a co-prime fraction `p_ns/p_s` with a small
/// denominator, if it is one.
pub fn rational_block_shape(h1: f64, h_m1: f64) -> Option<(u32, u32)> {
    let r = h_m1.abs() / h1;
    for p_s in 1..=16u32 {
        let p_ns = (r * p_s as f64).round();
        if p_ns >= 0.0 && (p_ns / p_s as f64 - r).abs() <= 1e-9 * r.max(1.0) {
            let p_ns = p_ns as u32;
            if gcd(p_s as u64, p_ns as u64) == 1 {
                return Some((p_s, p_ns));
            }
        }
    }
    None
}

/// Assemble the full report for one run.
///
/// The ratio and block statistics use a guarded window: 10% of the node
/// range nearest the window edge is dropped (truncation bias is largest
/// there), and indices are kept only where the horizon is long enough to
/// classify "never switches" against the fitted law — the horizon must
/// exceed `a_fit·n² + 3·E_min·√n`.
pub fn build_report(
    trajectory: &Trajectory,
    records: &[SwitchRecord],
    h1: f64,
    h_m1: f64,
) -> Result<RattlingReport> {
    let fit = fit_quadratic_law(records, None)?;
    let n = trajectory.n;
    let horizon = trajectory
        .states
        .last()
        .map(|s| s.t)
        .ok_or_else(|| Error::InsufficientData("trajectory has no snapshots".into()))?;
    let guard = n - n / 10;
    let mut classifiable = 0usize;
    for j in 1..=guard {
        let jf = j as f64;
        if horizon > fit.a_fit * jf * jf + 3.0 * fit.e_min * jf.sqrt() {
            classifiable = j;
        } else {
            break;
        }
    }
    let j_max = classifiable.max(2);
    let ratio = switch_ratio(records, 0, j_max)?;
    let block_shape = rational_block_shape(h1, h_m1);
    let block = match block_shape {
        Some((p_s, p_ns)) => {
            match block_pattern(records, p_s, p_ns, j_max / 2, j_max, h1, h_m1) {
                Ok(tally) => Some(tally),
                Err(Error::InsufficientData(_)) => None,
                Err(e) => return Err(e),
            }
        }
        None => None,
    };
    let gradient_bound_b = gradient_bound(trajectory, records)?;
    let weak_limit = weak_limit_profile(
        trajectory,
        records,
        fit.a_fit,
        DEFAULT_WEAK_WINDOW.min(2 * n / 3).max(1) | 1,
        h1,
        h_m1,
    )?;
    Ok(RattlingReport {
        fit,
        ratio,
        ratio_window: (0, j_max),
        block,
        block_shape,
        gradient_bound_b,
        weak_limit,
    })
}
