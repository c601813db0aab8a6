//! Shared event-driven integrator for relay–diffusion dynamics on graphs.
//!
//! Every lattice simulation in this crate (line, square, triangular, and
//! direct finite-volume cross-checks) reduces to one problem shape; a
//! deviation vector `v` obeys `v̇ = L v + s(ξ)` for a weighted graph
//! Laplacian `L`, the physical node value is `u_i(t) = φ_i + ρ t + v_i(t)`,
//! and a node with relay state `ξ_i = +1` switches permanently to `−1` at
//! the first instant `u_i` reaches zero. Splitting off the affine base
//! `φ_i + ρ t` keeps the integrated deviation small and well conditioned
//! even when `φ` spans many orders of magnitude, and a missing graph edge
//! acts as a reflecting (zero-flux) boundary for the deviation alone —
//! which is what makes a truncated window an accurate stand-in for the
//! infinite lattice until the switching front approaches the window edge.
//!
//! Events are located on the integrator's dense output: strict zero
//! crossings by scan-and-bisection, grazing contacts by an interior
//! maximum probe. Events closer together than `tol_event` commit as one
//! atomic cluster, switched nodes are clamped to `u = 0` exactly, and
//! integration restarts from the event instant.

use crate::error::{Error, Result};
use crate::lattice1d::{LatticeConfig, LatticeState, PaddingPolicy, SwitchRecord, Trajectory};
use crate::ode::{DenseStep, Dopri5, StepControl};

/// Sparse symmetric-structure adjacency (CSR) with positive edge weights.
///
/// The Laplacian action is `(L v)_i = Σ_j w_ij (v_j − v_i)` over stored
/// neighbors `j` of `i`; constants are always in its kernel, so absent
/// edges reflect rather than absorb.
#[derive(Debug, Clone)]
pub struct LatticeTopology {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl LatticeTopology {
    /// Path graph on `n_nodes` nodes with unit edge weights.
    pub fn line(n_nodes: usize) -> Self {
        assert!(n_nodes >= 2, "a line needs at least two nodes");
        let mut offsets = Vec::with_capacity(n_nodes + 1);
        let mut cols = Vec::with_capacity(2 * n_nodes);
        let mut weights = Vec::with_capacity(2 * n_nodes);
        offsets.push(0);
        for i in 0..n_nodes {
            if i > 0 {
                cols.push(i - 1);
                weights.push(1.0);
            }
            if i + 1 < n_nodes {
                cols.push(i + 1);
                weights.push(1.0);
            }
            offsets.push(cols.len());
        }
        LatticeTopology { offsets, cols, weights }
    }

    /// Build from explicit per-node neighbor lists `(neighbor, weight)`.
    pub fn from_weighted(lists: &[Vec<(usize, f64)>]) -> Result<Self> {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (i, row) in lists.iter().enumerate() {
            for &(j, w) in row {
                if j >= n {
                    return Err(Error::Validation(format!(
                        "node {i} lists neighbor {j} outside 0..{n}"
                    )));
                }
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::Validation(format!(
                        "edge ({i}, {j}) has non-positive weight {w}"
                    )));
                }
                cols.push(j);
                weights.push(w);
            }
            offsets.push(cols.len());
        }
        Ok(LatticeTopology { offsets, cols, weights })
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors_of(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.offsets[i]..self.offsets[i + 1]).map(move |e| (self.cols[e], self.weights[e]))
    }

    /// `out = L v`.
    pub fn laplacian_into(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.n_nodes() {
            let mut acc = 0.0;
            for e in self.offsets[i]..self.offsets[i + 1] {
                acc += self.weights[e] * (v[self.cols[e]] - v[i]);
            }
            out[i] = acc;
        }
    }
}

/// Watch bands of window-edge nodes for signs that the truncated window
/// has stopped imitating the infinite lattice. Two symptoms are checked
/// at every accepted step, both against the same margin: a watched node's
/// value rising above `−margin` (the switching front arrived), and the
/// deviation field losing flatness across a band by more than `margin`
/// (the front's diffusive tail arrived, so the reflecting window edge is
/// now feeding spurious mass back toward the interior).
#[derive(Debug, Clone)]
pub struct BoundaryGuard {
    /// Each band is one contiguous run of window-edge nodes.
    pub bands: Vec<Vec<usize>>,
    pub margin: f64,
}

/// One relay–diffusion run on a fixed graph.
///
/// `phi`/`rho` define the affine base; `source_armed[i]` drives node `i`'s
/// deviation while `ξ_i = +1` and `source_switched[i]` afterwards. The
/// optional `state_cap` aborts when any `u` exceeds it (checked on steps
/// without events, where the exact solution cannot be positive), and the
/// optional `boundary_guard` aborts when the window edge shows signs of
/// contaminating the run.
pub struct RelayLatticeProblem<'a> {
    pub topology: &'a LatticeTopology,
    pub phi: &'a [f64],
    pub rho: f64,
    pub source_armed: &'a [f64],
    pub source_switched: &'a [f64],
    pub xi0: &'a [i8],
    /// Initial deviation; zeros when `None`.
    pub v0: Option<&'a [f64]>,
    pub t_end: f64,
    /// Events within this window of the earliest one commit together.
    pub tol_event: f64,
    /// Grazing contacts this close below the threshold count as touches.
    pub tol_touch: f64,
    /// Abort with `NonPhysicalState` if any `u` exceeds this.
    pub state_cap: Option<f64>,
    /// Abort with `BoundaryContamination` if an edge band trips.
    pub boundary_guard: Option<&'a BoundaryGuard>,
    /// Strictly increasing times in `[0, t_end]` at which to record states.
    pub snapshot_times: &'a [f64],
    /// Node indices (in recording order) included in snapshots.
    pub report_nodes: &'a [usize],
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RelayLatticeRun {
    /// First switching time per node (`∞` if the node never switched).
    pub switch_times: Vec<f64>,
    /// Recorded states over the report nodes, one per requested time.
    pub snapshots: Vec<LatticeState>,
    pub t_final: f64,
    pub v_final: Vec<f64>,
    pub xi_final: Vec<i8>,
}

fn base_at(phi: &[f64], rho: f64, i: usize, t: f64) -> f64 {
    phi[i] + rho * t
}

fn report_state(p: &RelayLatticeProblem<'_>, t: f64, v: &[f64], xi: &[i8]) -> LatticeState {
    LatticeState {
        t,
        u: p.report_nodes.iter().map(|&i| base_at(p.phi, p.rho, i, t) + v[i]).collect(),
        xi: p.report_nodes.iter().map(|&i| xi[i]).collect(),
    }
}

fn report_state_dense(
    p: &RelayLatticeProblem<'_>,
    t: f64,
    step: &DenseStep<'_>,
    xi: &[i8],
) -> LatticeState {
    LatticeState {
        t,
        u: p.report_nodes
            .iter()
            .map(|&i| base_at(p.phi, p.rho, i, t) + step.eval_one(t, i))
            .collect(),
        xi: p.report_nodes.iter().map(|&i| xi[i]).collect(),
    }
}

/// Earliest `t` in `[lo, hi]` with `g(t) ≥ 0`, assuming `g(lo) < 0` and a
/// sign change somewhere in the interval: coarse scan for the first
/// non-negative subsample, then bisection.
fn first_zero(g: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const SCAN: usize = 8;
    let mut a = lo;
    let mut b = hi;
    for j in 1..=SCAN {
        let tau = lo + (hi - lo) * (j as f64) / (SCAN as f64);
        if g(tau) >= 0.0 {
            b = tau;
            break;
        }
        a = tau;
    }
    for _ in 0..90 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) >= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// Interior maximum of `φ_i + ρt + v_i(t)` on a step where its time
/// derivative changes sign from positive to negative.
fn interior_max_time(step: &DenseStep<'_>, i: usize, rho: f64) -> f64 {
    let mut a = step.t_start();
    let mut b = step.t_end();
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if rho + step.deriv_one(m, i) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Integrate a relay–diffusion problem over `[0, t_end]`.
pub fn run(p: &RelayLatticeProblem<'_>) -> Result<RelayLatticeRun> {
    let n = p.topology.n_nodes();
    if p.phi.len() != n
        || p.source_armed.len() != n
        || p.source_switched.len() != n
        || p.xi0.len() != n
        || p.v0.map_or(false, |v| v.len() != n)
    {
        return Err(Error::Validation(format!(
            "problem arrays must all have one entry per node ({n})"
        )));
    }
    if p.xi0.iter().any(|&x| x != 1 && x != -1) {
        return Err(Error::Validation("relay states must be +1 or -1".into()));
    }
    if !p.t_end.is_finite() || p.t_end <= 0.0 {
        return Err(Error::Validation(format!("horizon must be positive (got {})", p.t_end)));
    }
    if p.tol_event <= 0.0 || p.tol_touch < 0.0 {
        return Err(Error::Validation("event tolerances must be positive".into()));
    }
    if p.report_nodes.iter().any(|&i| i >= n) {
        return Err(Error::Validation("report node outside the graph".into()));
    }
    if p
        .snapshot_times
        .iter()
        .any(|t| !t.is_finite() || *t < 0.0 || *t > p.t_end)
        || p.snapshot_times.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::Validation(
            "snapshot times must be strictly increasing within [0, t_end]".into(),
        ));
    }

    let mut v: Vec<f64> = p.v0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut xi = p.xi0.to_vec();
    let mut switch_times = vec![f64::INFINITY; n];
    let mut snapshots: Vec<LatticeState> = Vec::with_capacity(p.snapshot_times.len());
    let mut cursor = 0usize;
    let mut t_now = 0.0;

    // A node starting at or beyond its threshold switches immediately.
    for i in 0..n {
        if xi[i] == 1 && base_at(p.phi, p.rho, i, 0.0) + v[i] >= 0.0 {
            xi[i] = -1;
            switch_times[i] = 0.0;
            v[i] = -base_at(p.phi, p.rho, i, 0.0);
        }
    }
    while cursor < p.snapshot_times.len() && p.snapshot_times[cursor] <= t_now {
        snapshots.push(report_state(p, p.snapshot_times[cursor], &v, &xi));
        cursor += 1;
    }

    let mut h_hint: Option<f64> = None;
    while t_now < p.t_end && (p.t_end - t_now) > 1e-14 * p.t_end.max(1.0) {
        let mut pending: Vec<usize> = Vec::new();
        let mut guard_err: Option<Error> = None;
        {
            let xi_ref = &xi;
            let pending_ref = &mut pending;
            let guard_ref = &mut guard_err;
            let snapshots_ref = &mut snapshots;
            let cursor_ref = &mut cursor;

            let rhs = |_t: f64, vv: &[f64], dv: &mut [f64]| {
                p.topology.laplacian_into(vv, dv);
                for i in 0..n {
                    dv[i] +=
                        if xi_ref[i] == 1 { p.source_armed[i] } else { p.source_switched[i] };
                }
            };

            let inspect = |step: &DenseStep<'_>| -> StepControl {
                let t0 = step.t_start();
                let t1 = step.t_end();
                let h = t1 - t0;

                // Window-edge watch: fires well before the edge distorts
                // interior results, so it is checked before event handling.
                if let Some(guard) = p.boundary_guard {
                    for band in &guard.bands {
                        let mut v_lo = f64::INFINITY;
                        let mut v_hi = f64::NEG_INFINITY;
                        for &i in band {
                            let v_end = step.y_end()[i];
                            v_lo = v_lo.min(v_end);
                            v_hi = v_hi.max(v_end);
                            let u_end = base_at(p.phi, p.rho, i, t1) + v_end;
                            if u_end > -guard.margin {
                                *guard_ref = Some(Error::BoundaryContamination(format!(
                                    "window-edge node {i} rose to u = {u_end:.3e} \
                                     (margin {:.3e}) at t = {t1:.6}",
                                    guard.margin
                                )));
                                return StepControl::Halt;
                            }
                        }
                        if v_hi - v_lo > guard.margin {
                            *guard_ref = Some(Error::BoundaryContamination(format!(
                                "deviation field reached the window edge: band spread \
                                 {:.3e} exceeds margin {:.3e} at t = {t1:.6}",
                                v_hi - v_lo,
                                guard.margin
                            )));
                            return StepControl::Halt;
                        }
                    }
                }

                // Event scan over armed nodes.
                let mut t_star = f64::INFINITY;
                let mut cands: Vec<(usize, f64)> = Vec::new();
                for i in 0..n {
                    if xi_ref[i] != 1 {
                        continue;
                    }
                    let g = |tt: f64| base_at(p.phi, p.rho, i, tt) + step.eval_one(tt, i);
                    let g1 = base_at(p.phi, p.rho, i, t1) + step.y_end()[i];
                    let hit = if g1 >= 0.0 {
                        Some(first_zero(&g, t0, t1))
                    } else {
                        // Grazing contact: only possible around an interior
                        // maximum, and only if the node is near the threshold.
                        let d0 = p.rho + step.deriv_start(i);
                        let d1 = p.rho + step.deriv_end(i);
                        if d0 > 0.0 && d1 < 0.0 {
                            let g0 = base_at(p.phi, p.rho, i, t0) + step.eval_one(t0, i);
                            let rise = 4.0 * h * d0.abs().max(d1.abs());
                            if g0.max(g1) + rise >= -p.tol_touch {
                                let tm = interior_max_time(step, i, p.rho);
                                let gm = g(tm);
                                if gm >= 0.0 {
                                    Some(first_zero(&g, t0, tm))
                                } else if gm >= -p.tol_touch {
                                    Some(tm)
                                } else {
                                    None
                                }
                            } else {
                                None
                            }
                        } else {
                            None
                        }
                    };
                    if let Some(te) = hit {
                        if te < t_star {
                            t_star = te;
                        }
                        cands.push((i, te));
                    }
                }

                if cands.is_empty() {
                    // No events this step: on the exact trajectory no value
                    // may be positive, so a large overshoot is a genuine
                    // integration failure rather than a pending switch.
                    if let Some(cap) = p.state_cap {
                        for i in 0..n {
                            let u_end = base_at(p.phi, p.rho, i, t1) + step.y_end()[i];
                            if u_end > cap {
                                *guard_ref = Some(Error::NonPhysicalState(format!(
                                    "node {i} reached u = {u_end:.3e} > cap {cap:.3e} \
                                     at t = {t1:.6} without an event"
                                )));
                                return StepControl::Halt;
                            }
                        }
                    }
                    while *cursor_ref < p.snapshot_times.len()
                        && p.snapshot_times[*cursor_ref] <= t1
                    {
                        let tau = p.snapshot_times[*cursor_ref];
                        snapshots_ref.push(report_state_dense(p, tau, step, xi_ref));
                        *cursor_ref += 1;
                    }
                    StepControl::Continue
                } else {
                    for (i, te) in cands {
                        if te <= t_star + p.tol_event {
                            pending_ref.push(i);
                        }
                    }
                    // States strictly before the event come from this step's
                    // dynamics; the event instant itself is recorded after
                    // the commit (right-continuous convention).
                    while *cursor_ref < p.snapshot_times.len()
                        && p.snapshot_times[*cursor_ref] < t_star
                    {
                        let tau = p.snapshot_times[*cursor_ref];
                        snapshots_ref.push(report_state_dense(p, tau, step, xi_ref));
                        *cursor_ref += 1;
                    }
                    StepControl::StopAt(t_star)
                }
            };

            let solver = Dopri5 {
                rtol: p.rtol,
                atol: p.atol,
                h_init: h_hint,
                h_max: p.h_max,
                max_steps: 20_000_000,
            };
            let out = solver.integrate(rhs, t_now, &v, p.t_end, inspect)?;
            t_now = out.t;
            v = out.y;
            h_hint = Some(out.h_last);
            if guard_err.is_some() {
                return Err(guard_err.unwrap());
            }
            if out.halted {
                for &i in &pending {
                    xi[i] = -1;
                    switch_times[i] = t_now;
                    // Clamp exactly onto the threshold: u_i(t_now) == 0.
                    v[i] = -base_at(p.phi, p.rho, i, t_now);
                }
                while cursor < p.snapshot_times.len() && p.snapshot_times[cursor] <= t_now {
                    snapshots.push(report_state(p, p.snapshot_times[cursor], &v, &xi));
                    cursor += 1;
                }
            }
        }
    }
    // Rounding guard: times indistinguishable from the final instant.
    while cursor < p.snapshot_times.len() {
        snapshots.push(report_state(p, p.snapshot_times[cursor], &v, &xi));
        cursor += 1;
    }

    Ok(RelayLatticeRun { switch_times, snapshots, t_final: t_now, v_final: v, xi_final: xi })
}

/// Uniform grid of `segments + 1` times over `[0, t_end]` with an exact
/// final endpoint.
pub fn uniform_grid(t_end: f64, segments: usize) -> Vec<f64> {
    (0..=segments)
        .map(|k| if k == segments { t_end } else { t_end * (k as f64) / (segments as f64) })
        .collect()
}

/// Line-lattice front-end used by [`crate::lattice1d::simulate`].
pub(crate) fn simulate_line(config: &LatticeConfig) -> Result<(Trajectory, Vec<SwitchRecord>)> {
    let n_rep = config.n;
    let pad = match config.padding {
        PaddingPolicy::Auto => (4.0 * config.t_end.sqrt()).ceil() as usize + 50,
        PaddingPolicy::Off => 0,
    };
    let n_sim = n_rep + pad;
    let total = 2 * n_sim + 1;
    let topology = LatticeTopology::line(total);
    let phi: Vec<f64> = (0..total)
        .map(|i| {
            let node = i as f64 - n_sim as f64;
            -config.c * node * node
        })
        .collect();
    let rho = config.h1 - 2.0 * config.c;
    let source_armed = vec![0.0; total];
    let source_switched = vec![config.h_m1 - config.h1; total];
    let xi0 = vec![1i8; total];
    let default_snaps;
    let snapshot_times: &[f64] = match &config.snapshot_times {
        Some(times) => times,
        None => {
            default_snaps = uniform_grid(config.t_end, 200);
            &default_snaps
        }
    };
    let report_nodes: Vec<usize> = (pad..pad + 2 * n_rep + 1).collect();
    let guard = BoundaryGuard {
        bands: vec![(0..5).collect(), (total - 5..total).collect()],
        margin: config.boundary_margin,
    };

    let problem = RelayLatticeProblem {
        topology: &topology,
        phi: &phi,
        rho,
        source_armed: &source_armed,
        source_switched: &source_switched,
        xi0: &xi0,
        v0: None,
        t_end: config.t_end,
        tol_event: config.tol_event,
        tol_touch: 1e-12 * config.c,
        state_cap: Some(config.tol_state),
        boundary_guard: Some(&guard),
        snapshot_times,
        report_nodes: &report_nodes,
        rtol: 1e-10,
        atol: 1e-12,
        h_max: f64::INFINITY,
    };
    let out = run(&problem)?;
    let records: Vec<SwitchRecord> = (-(n_rep as i64)..=n_rep as i64)
        .map(|k| SwitchRecord {
            n: k,
            t_switch: out.switch_times[(k + n_sim as i64) as usize],
        })
        .collect();
    Ok((Trajectory { n: n_rep, states: out.snapshots }, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::green_y;
    use crate::lattice1d::{simulate, superpose_solution, LatticeConfig};

    fn bisect_zero(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(f(lo) < 0.0 && f(hi) >= 0.0, "bracket does not straddle the root");
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if f(m) >= 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn laplacian_annihilates_constants_and_acts_symmetrically() {
        let topo = LatticeTopology::line(7);
        let mut out = vec![0.0; 7];
        topo.laplacian_into(&[3.5; 7], &mut out);
        assert!(out.iter().all(|&x| x == 0.0));
        // Mirror-symmetric input gives a mirror-symmetric (bitwise) output.
        let v: Vec<f64> = (0..7).map(|i| ((i as f64) - 3.0).powi(2) * 0.371).collect();
        topo.laplacian_into(&v, &mut out);
        for i in 0..7 {
            assert_eq!(out[i].to_bits(), out[6 - i].to_bits());
        }
    }

    #[test]
    fn direct_mode_reproduces_heat_eigenmode_decay() {
        // Zero-flux line eigenmode: v_j = cos(π m (j+½)/M) decays at the
        // exact rate λ = −4 sin²(π m / (2M)).
        let m_nodes = 20usize;
        let mode = 1.0;
        let topo = LatticeTopology::line(m_nodes);
        let v0: Vec<f64> = (0..m_nodes)
            .map(|j| (std::f64::consts::PI * mode * (j as f64 + 0.5) / m_nodes as f64).cos())
            .collect();
        let lambda = -4.0 * (std::f64::consts::PI * mode / (2.0 * m_nodes as f64)).sin().powi(2);
        let phi = vec![0.0; m_nodes];
        let zeros = vec![0.0; m_nodes];
        let xi0 = vec![-1i8; m_nodes];
        let problem = RelayLatticeProblem {
            topology: &topo,
            phi: &phi,
            rho: 0.0,
            source_armed: &zeros,
            source_switched: &zeros,
            xi0: &xi0,
            v0: Some(&v0),
            t_end: 1.0,
            tol_event: 1e-9,
            tol_touch: 0.0,
            state_cap: None,
            boundary_guard: None,
            snapshot_times: &[],
            report_nodes: &[],
            rtol: 1e-11,
            atol: 1e-13,
            h_max: f64::INFINITY,
        };
        let out = run(&problem).unwrap();
        let decay = (lambda * 1.0f64).exp();
        for j in 0..m_nodes {
            assert!(
                (out.v_final[j] - decay * v0[j]).abs() < 1e-9,
                "node {j}: {} vs {}",
                out.v_final[j],
                decay * v0[j]
            );
        }
    }

    #[test]
    fn reports_non_physical_state_when_forced_past_the_cap() {
        let topo = LatticeTopology::line(4);
        let phi = vec![0.0; 4];
        let ones = vec![1.0; 4];
        let zeros = vec![0.0; 4];
        let xi0 = vec![-1i8; 4]; // already switched: no events can fire
        let problem = RelayLatticeProblem {
            topology: &topo,
            phi: &phi,
            rho: 0.0,
            source_armed: &zeros,
            source_switched: &ones,
            xi0: &xi0,
            v0: None,
            t_end: 1.0,
            tol_event: 1e-9,
            tol_touch: 0.0,
            state_cap: Some(1e-6),
            boundary_guard: None,
            snapshot_times: &[],
            report_nodes: &[],
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
        };
        assert!(matches!(run(&problem), Err(Error::NonPhysicalState(_))));
    }

    #[test]
    fn first_switch_times_match_the_green_function_oracle() {
        // With h_m1 = 0 the pre-switch value of node 1 is exactly
        // u_1(t) = −c + (h1 − 2c) t − h1·y_1(t), and after nodes ±1 switch
        // at t_1, node 2 follows u_2(t) = −4c + (h1 − 2c) t −
        // h1·[y_2(t) + y_1(t − t_1) + y_3(t − t_1)] until its own switch.
        let (c, h1) = (0.5, 2.0);
        let config = LatticeConfig {
            snapshot_times: Some(vec![0.0, 14.0]),
            ..LatticeConfig::new(c, h1, 0.0, 12, 14.0)
        };
        let (_, records) = simulate(&config).unwrap();
        let time_of = |k: i64| records.iter().find(|r| r.n == k).unwrap().t_switch;
        assert_eq!(time_of(0), 0.0);

        let u1 = |t: f64| -c + (h1 - 2.0 * c) * t - h1 * green_y(1, t).unwrap();
        let t1 = bisect_zero(&u1, 0.05, 6.0);
        assert!(
            (time_of(1) - t1).abs() < 1e-6,
            "simulated t_1 = {:.12}, oracle {:.12}",
            time_of(1),
            t1
        );

        let u2 = |t: f64| {
            -4.0 * c + (h1 - 2.0 * c) * t
                - h1 * (green_y(2, t).unwrap()
                    + green_y(1, t - t1).unwrap()
                    + green_y(3, t - t1).unwrap())
        };
        let t2 = bisect_zero(&u2, t1 + 1e-6, 13.0);
        assert!(
            (time_of(2) - t2).abs() < 1e-6,
            "simulated t_2 = {:.12}, oracle {:.12}",
            time_of(2),
            t2
        );
        assert!(t1 < t2, "front must move outward");
    }

    #[test]
    fn mirror_nodes_switch_at_bitwise_identical_times() {
        let config = LatticeConfig {
            snapshot_times: Some(vec![30.0]),
            ..LatticeConfig::new(0.5, 2.0, -1.0, 12, 30.0)
        };
        let (_, records) = simulate(&config).unwrap();
        let time_of = |k: i64| records.iter().find(|r| r.n == k).unwrap().t_switch;
        let mut switched = 0;
        for k in 1..=12i64 {
            let (tp, tm) = (time_of(k), time_of(-k));
            assert_eq!(tp.to_bits(), tm.to_bits(), "asymmetry at |n| = {k}");
            if tp.is_finite() {
                switched += 1;
            }
        }
        assert!(switched >= 3, "expected the front to pass several nodes");
        // Switch times grow monotonically with distance from the center.
        let finite: Vec<f64> = (1..=12i64).map(time_of).filter(|t| t.is_finite()).collect();
        for w in finite.windows(2) {
            assert!(w[0] < w[1], "switch times must increase outward: {w:?}");
        }
    }

    #[test]
    fn trajectory_matches_superposition_mid_run() {
        let (c, h1) = (0.5, 2.0);
        let probes = vec![2.0, 5.0, 9.0, 13.0];
        let config = LatticeConfig {
            snapshot_times: Some(probes.clone()),
            ..LatticeConfig::new(c, h1, 0.0, 12, 13.0)
        };
        let (traj, records) = simulate(&config).unwrap();
        assert_eq!(traj.states.len(), probes.len());
        for (si, state) in traj.states.iter().enumerate() {
            assert_eq!(state.t, probes[si]);
            for node in -4i64..=4 {
                let direct = state.u[traj.index_of(node).unwrap()];
                let sup =
                    superpose_solution(c, h1, &records, node, state.t).unwrap();
                assert!(
                    (direct - sup).abs() < 1e-6,
                    "node {node} at t = {}: simulated {direct:.12e} vs superposed {sup:.12e}",
                    state.t
                );
            }
        }
    }

    #[test]
    fn no_node_beyond_center_switches_at_the_critical_drive() {
        // At h1 = 2c the drive exactly balances the curvature: the center
        // node touches at t = 0 but the front never moves.
        let config = LatticeConfig {
            snapshot_times: Some(vec![20.0]),
            ..LatticeConfig::new(0.5, 1.0, 0.0, 10, 20.0)
        };
        let (_, records) = simulate(&config).unwrap();
        for r in &records {
            if r.n == 0 {
                assert_eq!(r.t_switch, 0.0);
            } else {
                assert!(
                    r.t_switch.is_infinite(),
                    "node {} switched at {} despite h1 = 2c",
                    r.n,
                    r.t_switch
                );
            }
        }
    }

    #[test]
    fn unpadded_window_reports_boundary_contamination() {
        let config = LatticeConfig {
            padding: PaddingPolicy::Off,
            snapshot_times: Some(vec![200.0]),
            ..LatticeConfig::new(0.5, 2.0, 0.0, 10, 200.0)
        };
        match simulate(&config) {
            Err(Error::BoundaryContamination(_)) => {}
            other => panic!("expected boundary contamination, got {other:?}"),
        }
    }

    #[test]
    fn snapshots_record_requested_times_with_switch_states() {
        let config = LatticeConfig {
            snapshot_times: Some(vec![0.0, 1.0, 10.0]),
            ..LatticeConfig::new(0.5, 2.0, 0.0, 10, 10.0)
        };
        let (traj, records) = simulate(&config).unwrap();
        assert_eq!(traj.states.len(), 3);
        assert_eq!(traj.states[0].t, 0.0);
        assert_eq!(traj.states[2].t, 10.0);
        // At t = 0 only the center has switched (right-continuous state).
        let center = traj.index_of(0).unwrap();
        assert_eq!(traj.states[0].xi[center], -1);
        assert_eq!(traj.states[0].u[center], 0.0);
        assert_eq!(traj.states[0].xi.iter().filter(|&&x| x == -1).count(), 1);
        // By t = 10 the switched set matches the finite switch records.
        let switched_by_10 = records
            .iter()
            .filter(|r| r.t_switch <= 10.0)
            .count();
        assert_eq!(
            traj.states[2].xi.iter().filter(|&&x| x == -1).count(),
            switched_by_10
        );
        // All node values stay non-positive.
        for state in &traj.states {
            for &u in &state.u {
                assert!(u <= 1e-9, "positive node value {u} at t = {}", state.t);
            }
        }
    }
}
