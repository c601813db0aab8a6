//! Relay hysteresis operators on piecewise-linear inputs.
//!
//! Three related operators act on a [`Signal`]:
//!
//! * [`relay_trace`] — the non-ideal relay. The state `ξ ∈ {−1, +1}`
//!   selects a branch: the `+1` branch `H₁` is defined for inputs up to
//!   the upper threshold `β`, the `−1` branch `H₋₁` for inputs down to
//!   the lower threshold `α`. The branch set excludes the far endpoint,
//!   so *touching* a threshold already forces the switch: `ξ` flips from
//!   `+1` to `−1` the instant the input reaches `β`, and from `−1` to
//!   `+1` the instant it reaches `α`. Outputs are right-continuous at
//!   switch instants.
//! * [`alt_relay_trace`] — an alternative relay with constant branches
//!   `±1` whose admissible set pins the output only *at* the thresholds.
//!   It agrees with the relay on strict monotone crossings but behaves
//!   differently when the input dwells at a threshold: the output ramps
//!   through intermediate values during a dwell and jumps to the far
//!   branch value as soon as the input leaves the threshold — even when
//!   the input retreats to the side it came from.
//! * [`completed_relay_admissible`] — membership test for the completed
//!   (convexified) relay, whose graph joins the two branches by the full
//!   segment of intermediate values over the hysteresis strip `[α, β]`.
//!   Many outputs are admissible for one input; in particular a constant
//!   intermediate output is admissible while the input stays inside the
//!   strip, which is exactly where the alternative relay is forced to
//!   jump. This non-uniqueness is deliberate and tested.
//!
//! The lower threshold `α` may be absent (`None`), meaning the `−1`
//! branch is valid for all inputs and a relay that has switched to `−1`
//! never switches back.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Absolute tolerance used by [`completed_relay_admissible`] when testing
/// sampled membership, initial data, and jump-direction conditions.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

/// One output branch of a relay: either a constant or an arbitrary
/// function of the input value.
#[derive(Clone)]
pub enum Branch {
    Const(f64),
    Eval(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Branch {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Branch::Const(c) => *c,
            Branch::Eval(f) => f(u),
        }
    }

    fn const_value(&self) -> Option<f64> {
        match self {
            Branch::Const(c) => Some(*c),
            Branch::Eval(_) => None,
        }
    }
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Const(c) => write!(f, "Const({c})"),
            Branch::Eval(_) => write!(f, "Eval(<fn>)"),
        }
    }
}

/// Thresholds and output branches of a relay.
///
/// `branch_hi` is the output while `ξ = +1` (valid for `u ≤ β`);
/// `branch_lo` is the output while `ξ = −1` (valid for `u ≥ α`).
/// `alpha = None` encodes an absent lower threshold: the `−1` branch is
/// then valid for every input and a `−1` state is permanent.
#[derive(Debug, Clone)]
pub struct RelayParams {
    alpha: Option<f64>,
    beta: f64,
    branch_hi: Branch,
    branch_lo: Branch,
}

impl RelayParams {
    /// Validate and build relay parameters.
    ///
    /// Requires `α < β` when `α` is present, finite branch values on the
    /// hysteresis strip, and branches that differ at every sampled point
    /// of `[α, β]` (33 uniformly spaced points; skipped when the strip is
    /// unbounded below).
    pub fn new(alpha: Option<f64>, beta: f64, branch_hi: Branch, branch_lo: Branch) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Validation("upper threshold must be finite".into()));
        }
        if let Some(a) = alpha {
            if !a.is_finite() {
                return Err(Error::Validation(
                    "lower threshold must be finite or absent (None)".into(),
                ));
            }
            if a >= beta {
                return Err(Error::Validation(format!(
                    "thresholds must satisfy alpha < beta (got {a} >= {beta})"
                )));
            }
            for k in 0..=32 {
                let u = a + (beta - a) * (k as f64) / 32.0;
                let (hi, lo) = (branch_hi.eval(u), branch_lo.eval(u));
                if !hi.is_finite() || !lo.is_finite() {
                    return Err(Error::Validation(format!(
                        "branch values must be finite on the hysteresis strip (at u = {u})"
                    )));
                }
                if hi == lo {
                    return Err(Error::Validation(format!(
                        "branches must differ on the hysteresis strip (equal at u = {u})"
                    )));
                }
            }
        } else {
            for u in [beta, beta - 1.0, beta - 10.0] {
                let (hi, lo) = (branch_hi.eval(u), branch_lo.eval(u));
                if !hi.is_finite() || !lo.is_finite() {
                    return Err(Error::Validation(format!(
                        "branch values must be finite on the hysteresis strip (at u = {u})"
                    )));
                }
            }
        }
        Ok(RelayParams { alpha, beta, branch_hi, branch_lo })
    }

    /// Relay with constant branches `H₁ ≡ +1`, `H₋₁ ≡ −1`.
    pub fn standard(alpha: Option<f64>, beta: f64) -> Result<Self> {
        RelayParams::new(alpha, beta, Branch::Const(1.0), Branch::Const(-1.0))
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn branch_hi(&self) -> &Branch {
        &self.branch_hi
    }

    pub fn branch_lo(&self) -> &Branch {
        &self.branch_lo
    }

    /// Output on the branch selected by `xi`.
    pub fn output(&self, xi: i8, u: f64) -> f64 {
        if xi > 0 {
            self.branch_hi.eval(u)
        } else {
            self.branch_lo.eval(u)
        }
    }

    /// True when the branches are the constants `+1` and `−1`, the only
    /// configuration for which the alternative and completed relays are
    /// defined.
    pub fn has_unit_branches(&self) -> bool {
        self.branch_hi.const_value() == Some(1.0) && self.branch_lo.const_value() == Some(-1.0)
    }

    fn require_unit_branches(&self, who: &str) -> Result<()> {
        if self.has_unit_branches() {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "{who} is defined only for constant branches +1 / -1"
            )))
        }
    }
}

/// Discrete relay state: current branch, initial branch, and the first
/// switching instant observed so far (if any).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayState {
    pub xi: i8,
    pub xi0: i8,
    pub switched_at: Option<f64>,
}

/// Output of [`relay_trace_events`]: the output signal, the final state,
/// and every switch performed during this trace as `(time, new ξ)`.
#[derive(Debug, Clone)]
pub struct RelayTrace {
    pub output: Signal,
    pub state: RelayState,
    pub switches: Vec<(f64, i8)>,
}

fn check_xi(xi: i8, what: &str) -> Result<()> {
    if xi == 1 || xi == -1 {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} must be +1 or -1 (got {xi})")))
    }
}

/// Consistency of a branch choice with an input value: strict violations
/// (input beyond the far end of the branch domain) are errors; sitting
/// exactly on a threshold is allowed and resolves to an immediate switch
/// when traced.
fn check_consistent(params: &RelayParams, xi: i8, u0: f64) -> Result<()> {
    if xi == 1 && u0 > params.beta {
        return Err(Error::InconsistentInitialData(format!(
            "xi = +1 requires u <= beta = {} (got u = {u0})",
            params.beta
        )));
    }
    if xi == -1 {
        if let Some(a) = params.alpha {
            if u0 < a {
                return Err(Error::InconsistentInitialData(format!(
                    "xi = -1 requires u >= alpha = {a} (got u = {u0})"
                )));
            }
        }
    }
    Ok(())
}

/// Construct the relay state for initial input value `u0`.
///
/// Errors with [`Error::InconsistentInitialData`] iff `u0` lies strictly
/// beyond the domain of the requested branch (`u0 > β` with `ξ₀ = +1`,
/// or `u0 < α` with `ξ₀ = −1`). Starting exactly on a threshold is
/// accepted; tracing such a state switches at the first instant.
pub fn relay_init(params: &RelayParams, xi0: i8, u0: f64) -> Result<RelayState> {
    check_xi(xi0, "xi0")?;
    if !u0.is_finite() {
        return Err(Error::Validation("initial input value must be finite".into()));
    }
    check_consistent(params, xi0, u0)?;
    Ok(RelayState { xi: xi0, xi0, switched_at: None })
}

/// Earliest time in `(t_lo, tb]` at which the linear segment from
/// `(ta, ua)` to `(tb, ub)` reaches `level`. Constant segments never
/// report a hit (segments resting *at* a level are handled by the
/// callers' contact logic).
fn segment_level_time(ta: f64, tb: f64, ua: f64, ub: f64, level: f64, t_lo: f64) -> Option<f64> {
    if ua == ub {
        return None;
    }
    let s = (level - ua) / (ub - ua);
    if !(0.0..=1.0).contains(&s) {
        return None;
    }
    let t = if ub == level { tb } else { (ta + s * (tb - ta)).min(tb) };
    (t > t_lo).then_some(t)
}

fn push_sample(times: &mut Vec<f64>, values: &mut Vec<f64>, t: f64, v: f64) {
    match times.last() {
        Some(&last) if t <= last => *values.last_mut().unwrap() = v,
        _ => {
            times.push(t);
            values.push(v);
        }
    }
}

/// Trace the relay over an input signal, returning the output and the
/// switch events. Output samples sit at every input time and every
/// switch instant; at a switch instant the output already takes the
/// post-switch branch value (right-continuity).
pub fn relay_trace_events(
    params: &RelayParams,
    state0: &RelayState,
    input: &Signal,
) -> Result<RelayTrace> {
    check_xi(state0.xi, "state xi")?;
    check_xi(state0.xi0, "state xi0")?;
    let t = input.times();
    let u = input.values();
    check_consistent(params, state0.xi, u[0])?;

    let mut xi = state0.xi;
    let mut switched_at = state0.switched_at;
    let mut switches: Vec<(f64, i8)> = Vec::new();
    let mut out_t: Vec<f64> = Vec::with_capacity(t.len() + 4);
    let mut out_v: Vec<f64> = Vec::with_capacity(t.len() + 4);

    let flip = |xi: &mut i8, ts: f64, switched_at: &mut Option<f64>, sw: &mut Vec<(f64, i8)>| {
        *xi = -*xi;
        switched_at.get_or_insert(ts);
        sw.push((ts, *xi));
    };

    // A state sitting exactly on its far threshold switches immediately.
    if (xi == 1 && u[0] == params.beta) || (xi == -1 && params.alpha == Some(u[0])) {
        flip(&mut xi, t[0], &mut switched_at, &mut switches);
    }
    let v0 = params.output(xi, u[0]);
    if !v0.is_finite() {
        return Err(Error::Validation(format!("branch output not finite at u = {}", u[0])));
    }
    push_sample(&mut out_t, &mut out_v, t[0], v0);

    for i in 0..t.len().saturating_sub(1) {
        let (ta, tb, ua, ub) = (t[i], t[i + 1], u[i], u[i + 1]);
        let mut t_cur = ta;
        // Within one monotone linear segment at most one switch at β and
        // one at α can occur, alternating; scan until none remains.
        loop {
            let hit = match xi {
                1 => segment_level_time(ta, tb, ua, ub, params.beta, t_cur),
                _ => params
                    .alpha
                    .and_then(|a| segment_level_time(ta, tb, ua, ub, a, t_cur)),
            };
            let Some(ts) = hit else { break };
            flip(&mut xi, ts, &mut switched_at, &mut switches);
            let us = input.value_at(ts);
            push_sample(&mut out_t, &mut out_v, ts, params.output(xi, us));
            t_cur = ts;
        }
        let vb = params.output(xi, ub);
        if !vb.is_finite() {
            return Err(Error::Validation(format!("branch output not finite at u = {ub}")));
        }
        push_sample(&mut out_t, &mut out_v, tb, vb);
    }

    Ok(RelayTrace {
        output: Signal::new(out_t, out_v)?,
        state: RelayState { xi, xi0: state0.xi0, switched_at },
        switches,
    })
}

/// Trace the relay over an input signal; see [`relay_trace_events`] for
/// the event list as well.
pub fn relay_trace(
    params: &RelayParams,
    state0: &RelayState,
    input: &Signal,
) -> Result<(Signal, RelayState)> {
    let trace = relay_trace_events(params, state0, input)?;
    Ok((trace.output, trace.state))
}

/// Trace the alternative relay (constant branches `±1` only).
///
/// Away from the thresholds the output is locked to `+1` below the strip,
/// `−1` above it, and constant inside it. Contact with a threshold is
/// resolved as follows:
///
/// * an instantaneous contact (the input touches or crosses and moves on)
///   jumps the output to the far branch at the contact instant: `−1` at
///   `β`, `+1` at `α` — including touch-and-retreat contacts;
/// * a dwell (the input rests exactly on the threshold over an interval)
///   ramps the output at unit rate toward the far branch value, clamped
///   to `[−1, 1]`, and jumps it to the far branch value the moment the
///   input leaves the threshold in either direction;
/// * the initial value is pinned to `ξ₀` whenever the input starts inside
///   the closed strip `[α, β]`, even when it starts exactly on a
///   threshold; contacts at later samples take the post-jump value.
pub fn alt_relay_trace(params: &RelayParams, xi0: i8, input: &Signal) -> Result<Signal> {
    params.require_unit_branches("the alternative relay")?;
    check_xi(xi0, "xi0")?;
    let t = input.times();
    let u = input.values();
    let n = t.len();
    check_consistent(params, xi0, u[0])?;
    let beta = params.beta;

    let mut out_t: Vec<f64> = Vec::with_capacity(n + 4);
    let mut out_v: Vec<f64> = Vec::with_capacity(n + 4);

    let below_alpha = |x: f64| params.alpha.map_or(false, |a| x < a);
    let mut v: f64 = if u[0] > beta {
        -1.0
    } else if below_alpha(u[0]) {
        1.0
    } else {
        xi0 as f64
    };
    push_sample(&mut out_t, &mut out_v, t[0], v);

    // (level, is_beta, dwell start, value on arrival at the threshold)
    let mut contact: Option<(f64, bool, f64, f64)> = None;
    if u[0] == beta {
        contact = Some((beta, true, t[0], v));
    } else if params.alpha == Some(u[0]) {
        contact = Some((params.alpha.unwrap(), false, t[0], v));
    }

    let ramp = |is_beta: bool, v_entry: f64, dt: f64| {
        if is_beta {
            (v_entry - dt).max(-1.0)
        } else {
            (v_entry + dt).min(1.0)
        }
    };
    let jump_value = |is_beta: bool| if is_beta { -1.0 } else { 1.0 };

    for i in 0..n.saturating_sub(1) {
        let (ta, tb, ua, ub) = (t[i], t[i + 1], u[i], u[i + 1]);
        if let Some((level, is_beta, since, v_entry)) = contact {
            if ua == level && ub == level {
                // The dwell extends through this (necessarily constant) segment.
                v = ramp(is_beta, v_entry, tb - since);
                push_sample(&mut out_t, &mut out_v, tb, v);
                continue;
            }
            // Departure at ta: the sample at ta keeps its ramped value, the
            // output jumps immediately after.
            v = jump_value(is_beta);
            contact = None;
        }
        let mut t_cur = ta;
        loop {
            let mut hit: Option<(f64, f64, bool)> = None;
            for (level, is_beta) in [(Some(beta), true), (params.alpha, false)] {
                let Some(level) = level else { continue };
                if let Some(ts) = segment_level_time(ta, tb, ua, ub, level, t_cur) {
                    if hit.map_or(true, |(hts, _, _)| ts < hts) {
                        hit = Some((ts, level, is_beta));
                    }
                }
            }
            let Some((ts, level, is_beta)) = hit else {
                push_sample(&mut out_t, &mut out_v, tb, v);
                break;
            };
            if ts < tb || ub != level {
                // Contact strictly inside the segment: instantaneous, jump now.
                v = jump_value(is_beta);
                push_sample(&mut out_t, &mut out_v, ts, v);
                t_cur = ts;
                continue;
            }
            // Contact exactly at the segment-end sample: a following
            // constant segment at the level starts a dwell, anything else
            // is an instantaneous contact; at the trace end no departure
            // is witnessed and the arrival value stands.
            let last = i + 2 == n;
            if last {
                push_sample(&mut out_t, &mut out_v, tb, v);
            } else if u[i + 2] == level {
                contact = Some((level, is_beta, tb, v));
                push_sample(&mut out_t, &mut out_v, tb, v);
            } else {
                v = jump_value(is_beta);
                push_sample(&mut out_t, &mut out_v, tb, v);
            }
            break;
        }
    }

    Signal::new(out_t, out_v)
}

/// Test whether `candidate` is an admissible completed-relay output for
/// `input` with initial branch parameter `xi0 ∈ [−1, 1]`.
///
/// The completed relay joins the constant branches `+1` (valid for
/// `u ≤ β`) and `−1` (valid for `u ≥ α`) by all intermediate values over
/// the strip `[α, β]`. Sampled checks, each with tolerance
/// [`ADMISSIBILITY_TOL`]:
///
/// 1. graph membership at every sample;
/// 2. the initial condition: `v(0) = ξ₀` strictly inside the strip,
///    `v(0) ∈ [ξ₀, 1]` at `u(0) = α`, `v(0) ∈ [−1, ξ₀]` at `u(0) = β`;
/// 3. the output may change across a sampling segment only if the segment
///    meets a threshold — upward changes need `α`, downward changes need
///    `β`;
/// 4. at samples lying on a threshold the output is locally monotone:
///    non-increasing through `β`, non-decreasing through `α`.
///
/// Both signals must share the same sampling grid
/// ([`Error::GridMismatch`] otherwise).
pub fn completed_relay_admissible(
    params: &RelayParams,
    xi0: f64,
    input: &Signal,
    candidate: &Signal,
) -> Result<bool> {
    params.require_unit_branches("the completed relay")?;
    if !(-1.0..=1.0).contains(&xi0) {
        return Err(Error::Validation(format!(
            "xi0 must lie in [-1, 1] (got {xi0})"
        )));
    }
    if input.times() != candidate.times() {
        return Err(Error::GridMismatch(
            "input and candidate must share the same sampling grid".into(),
        ));
    }
    let tol = ADMISSIBILITY_TOL;
    let t = input.times();
    let u = input.values();
    let v = candidate.values();
    let n = t.len();
    let beta = params.beta;
    let above_alpha = |x: f64| params.alpha.map_or(true, |a| x >= a - tol);
    let at_alpha = |x: f64| params.alpha.map_or(false, |a| (x - a).abs() <= tol);
    let strictly_inside = |x: f64| x < beta - tol && params.alpha.map_or(true, |a| x > a + tol);

    // 1. Graph membership at every sample.
    for i in 0..n {
        let hi_ok = (v[i] - 1.0).abs() <= tol && u[i] <= beta + tol;
        let lo_ok = (v[i] + 1.0).abs() <= tol && above_alpha(u[i]);
        let mid_ok = (-1.0 - tol..=1.0 + tol).contains(&v[i])
            && u[i] <= beta + tol
            && above_alpha(u[i]);
        if !(hi_ok || lo_ok || mid_ok) {
            return Ok(false);
        }
    }

    // 2. Initial condition.
    if (u[0] - beta).abs() <= tol {
        if v[0] > xi0 + tol {
            return Ok(false);
        }
    } else if at_alpha(u[0]) {
        if v[0] < xi0 - tol {
            return Ok(false);
        }
    } else if strictly_inside(u[0]) && (v[0] - xi0).abs() > tol {
        return Ok(false);
    }

    // 3. Changes across a segment require threshold contact with the
    // matching jump direction.
    for i in 0..n - 1 {
        let dv = v[i + 1] - v[i];
        if dv.abs() <= tol {
            continue;
        }
        let (lo, hi) = (u[i].min(u[i + 1]), u[i].max(u[i + 1]));
        let hits_beta = lo <= beta + tol && hi >= beta - tol;
        let hits_alpha = params
            .alpha
            .map_or(false, |a| lo <= a + tol && hi >= a - tol);
        if dv > 0.0 && !hits_alpha {
            return Ok(false);
        }
        if dv < 0.0 && !hits_beta {
            return Ok(false);
        }
    }

    // 4. Local monotonicity at threshold samples.
    for i in 0..n {
        if (u[i] - beta).abs() <= tol {
            if i > 0 && v[i - 1] < v[i] - tol {
                return Ok(false);
            }
            if i + 1 < n && v[i + 1] > v[i] + tol {
                return Ok(false);
            }
        }
        if at_alpha(u[i]) {
            if i > 0 && v[i - 1] > v[i] + tol {
                return Ok(false);
            }
            if i + 1 < n && v[i + 1] < v[i] - tol {
                return Ok(false);
            }
        }
    }

    Ok(true)
}
