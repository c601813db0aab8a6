//! One-dimensional relay lattice: configuration, trajectories, switch
//! records, the exact superposition formula, and parabolic rescaling.
//!
//! The system is `du_n/dt = u_{n+1} − 2u_n + u_{n−1} + H(u_n)` on nodes
//! `|n| ≤ N` with initial data `u_n(0) = −c·n²`. Every node carries a
//! relay with upper threshold `0` and no lower threshold: the source is
//! `h₁` until the node's value first reaches `0` (the switch) and `h₋₁`
//! from then on; the center node starts already switched (`t₀ = 0`).
//! In the rattling regime `h₋₁ ≤ 0 < 2c < h₁` the switching front
//! spreads as `t_n ≈ a·n²`.
//!
//! [`simulate`] integrates the lattice and reports switch times;
//! [`superpose_solution`] reconstructs the `h₋₁ = 0` solution exactly
//! from the switch history via the lattice Green function; [`rescale`]
//! applies the parabolic scaling `u ↦ ε²·u(·/ε²)` that connects the
//! lattice to its continuum limit.

use crate::engine::{self, LatticeTopology};
use crate::error::{Error, Result};
use crate::green::green_y;

/// How the simulated domain relates to the reported domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaddingPolicy {
    /// Simulate on a wider window (`N + ⌈4√T⌉ + 50` nodes per side) so
    /// that the reported nodes are unaffected by the artificial boundary,
    /// then report only `|n| ≤ N`.
    Auto,
    /// Simulate exactly the declared window with reflecting ends.
    Off,
}

/// Configuration of a 1-D lattice run.
#[derive(Debug, Clone)]
pub struct LatticeConfig {
    /// Initial-parabola coefficient (`u_n(0) = −c n²`), `c > 0`.
    pub c: f64,
    /// Source strength before the switch.
    pub h1: f64,
    /// Source strength after the switch, `h_m1 ≤ 0 ≤ h1`.
    pub h_m1: f64,
    /// Reported half-width: nodes `|n| ≤ N`.
    pub n: usize,
    /// Time horizon.
    pub t_end: f64,
    /// Clustering tolerance for simultaneous switch events.
    pub tol_event: f64,
    /// Budget for positive overshoot of node values (all `u_n ≤ 0` in
    /// exact arithmetic); larger overshoots abort the run.
    pub tol_state: f64,
    /// The two outermost 5-node bands must stay below `−boundary_margin`;
    /// values above it indicate front contamination of the window edge.
    pub boundary_margin: f64,
    /// Domain padding policy.
    pub padding: PaddingPolicy,
    /// Times at which full lattice states are recorded (evaluated on the
    /// integrator's dense output, so recording is exact to integrator
    /// accuracy). `None` records a uniform 201-point grid over `[0, T]`.
    pub snapshot_times: Option<Vec<f64>>,
}

impl LatticeConfig {
    /// Configuration with default tolerances: `tol_event = 1e−9`,
    /// `tol_state = 1e−6`, `boundary_margin = 1e−4·c·N²`, automatic
    /// padding, and the default snapshot grid.
    pub fn new(c: f64, h1: f64, h_m1: f64, n: usize, t_end: f64) -> Self {
        LatticeConfig {
            c,
            h1,
            h_m1,
            n,
            t_end,
            tol_event: 1e-9,
            tol_state: 1e-6,
            boundary_margin: 1e-4 * c * (n as f64) * (n as f64),
            padding: PaddingPolicy::Auto,
            snapshot_times: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || self.c <= 0.0 {
            return Err(Error::Validation(format!("c must be positive (got {})", self.c)));
        }
        if !self.h1.is_finite() || !self.h_m1.is_finite() || self.h_m1 > 0.0 || self.h1 < 0.0 {
            return Err(Error::Validation(format!(
                "sources must satisfy h_m1 <= 0 <= h1 (got h_m1 = {}, h1 = {})",
                self.h_m1, self.h1
            )));
        }
        if self.n < 10 {
            return Err(Error::Validation(format!(
                "half-width must be at least 10 nodes (got {})",
                self.n
            )));
        }
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return Err(Error::Validation(format!(
                "time horizon must be positive (got {})",
                self.t_end
            )));
        }
        if self.tol_event <= 0.0 || self.tol_state <= 0.0 || self.boundary_margin <= 0.0 {
            return Err(Error::Validation(
                "tolerances and boundary margin must be positive".into(),
            ));
        }
        if let Some(times) = &self.snapshot_times {
            if times.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > self.t_end) {
                return Err(Error::Validation(
                    "snapshot times must lie within [0, t_end]".into(),
                ));
            }
            if times.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(
                    "snapshot times must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Full lattice state at one instant; `u[i]` and `xi[i]` belong to node
/// `n = i − N` of the reporting window.
#[derive(Debug, Clone)]
pub struct LatticeState {
    pub t: f64,
    pub u: Vec<f64>,
    pub xi: Vec<i8>,
}

/// First switching time of one node; `t_switch = ∞` when the node never
/// switched within the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchRecord {
    pub n: i64,
    pub t_switch: f64,
}

/// Recorded lattice states over the reporting window `|n| ≤ N`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Reporting half-width.
    pub n: usize,
    /// Snapshots in strictly increasing time order.
    pub states: Vec<LatticeState>,
}

impl Trajectory {
    pub fn index_of(&self, node: i64) -> Result<usize> {
        let shifted = node + self.n as i64;
        if node.unsigned_abs() as usize > self.n {
            return Err(Error::Validation(format!(
                "node {node} outside the reporting window |n| <= {}",
                self.n
            )));
        }
        Ok(shifted as usize)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }

    /// Node value at time `t`, linearly interpolated between snapshots
    /// (exact at snapshot times).
    pub fn value(&self, node: i64, t: f64) -> Result<f64> {
        let idx = self.index_of(node)?;
        let states = &self.states;
        if states.is_empty() {
            return Err(Error::Validation("trajectory has no snapshots".into()));
        }
        if t <= states[0].t {
            return Ok(states[0].u[idx]);
        }
        if t >= states[states.len() - 1].t {
            return Ok(states[states.len() - 1].u[idx]);
        }
        let hi = states.partition_point(|s| s.t <= t);
        let (s0, s1) = (&states[hi - 1], &states[hi]);
        let w = (t - s0.t) / (s1.t - s0.t);
        Ok(s0.u[idx] + w * (s1.u[idx] - s0.u[idx]))
    }
}

/// Integrate the lattice over `[0, T]`.
///
/// Returns the recorded trajectory on the reporting window and one
/// [`SwitchRecord`] per reported node (including the center node's
/// `(0, 0.0)`; nodes that never switch report `t_switch = ∞`).
///
/// Errors: [`Error::NonPhysicalState`] if any node value exceeds
/// `tol_state` (the exact solution stays `≤ 0`);
/// [`Error::BoundaryContamination`] if either outermost 5-node band of
/// the *simulated* domain rises above `−boundary_margin`, indicating the
/// front reached the artificial boundary.
pub fn simulate(config: &LatticeConfig) -> Result<(Trajectory, Vec<SwitchRecord>)> {
    config.validate()?;
    engine::simulate_line(config)
}

/// Exact solution of the `h₋₁ = 0` lattice by superposition of switch
/// responses:
///
/// ```text
/// u_n(t) = −c n² + (h₁ − 2c) t − h₁ · Σ_k y_{n−k}(t − t_k) ,
/// ```
///
/// summed over all nodes `k` that switched at times `t_k ≤ t` (later
/// switches contribute nothing). The switch history must contain a
/// record for every node `|k| ≤ |n| − 1`
/// ([`Error::IncompleteHistory`] otherwise); records with infinite
/// `t_switch` are legitimate "never switched" entries.
pub fn superpose_solution(
    c: f64,
    h1: f64,
    switch_times: &[SwitchRecord],
    n: i64,
    t: f64,
) -> Result<f64> {
    if !c.is_finite() || c <= 0.0 || !h1.is_finite() {
        return Err(Error::Validation(format!(
            "need finite h1 and c > 0 (got c = {c}, h1 = {h1})"
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Validation(format!("time must be non-negative (got {t})")));
    }
    let na = n.unsigned_abs() as i64;
    for k in -(na - 1).max(0)..=(na - 1).max(0) {
        if na > 0 && !switch_times.iter().any(|r| r.n == k) {
            return Err(Error::IncompleteHistory(format!(
                "superposition at node {n} needs the switch record of node {k}"
            )));
        }
    }
    let mut acc = 0.0;
    for rec in switch_times {
        if rec.t_switch.is_finite() && rec.t_switch <= t {
            acc += green_y(n - rec.n, t - rec.t_switch)?;
        }
    }
    Ok(-c * (n as f64) * (n as f64) + (h1 - 2.0 * c) * t - h1 * acc)
}

/// Parabolic rescaling of a trajectory: with scale `ε > 0` the returned
/// trajectory represents `u_nᵉ(τ) = ε²·u_n(τ/ε²)`, i.e. snapshot times
/// map to `ε²·t` and values to `ε²·u`.
pub fn rescale(eps: f64, trajectory: &Trajectory) -> Result<Trajectory> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Validation(format!("scale must be positive (got {eps})")));
    }
    let e2 = eps * eps;
    Ok(Trajectory {
        n: trajectory.n,
        states: trajectory
            .states
            .iter()
            .map(|s| LatticeState {
                t: e2 * s.t,
                u: s.u.iter().map(|v| e2 * v).collect(),
                xi: s.xi.clone(),
            })
            .collect(),
    })
}

/// Parabolic rescaling of switch times: `t_nᵉ = ε²·t_n`.
pub fn rescale_records(eps: f64, records: &[SwitchRecord]) -> Result<Vec<SwitchRecord>> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Validation(format!("scale must be positive (got {eps})")));
    }
    Ok(records
        .iter()
        .map(|r| SwitchRecord { n: r.n, t_switch: eps * eps * r.t_switch })
        .collect())
}

/// Expose the engine topology used for line lattices (needed by callers
/// that drive the shared engine directly).
pub fn line_topology(n_total: usize) -> LatticeTopology {
    LatticeTopology::line(n_total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let cfg = LatticeConfig::new(0.5, 2.0, 0.0, 80, 50.0);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.tol_event, 1e-9);
        assert_eq!(cfg.tol_state, 1e-6);
        assert!((cfg.boundary_margin - 1e-4 * 0.5 * 6400.0).abs() < 1e-15);
        assert_eq!(cfg.padding, PaddingPolicy::Auto);

        let bad = |f: &dyn Fn(&mut LatticeConfig)| {
            let mut c = LatticeConfig::new(0.5, 2.0, 0.0, 80, 50.0);
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(&|c| c.c = 0.0));
        assert!(bad(&|c| c.h_m1 = 0.5)); // post-switch source must be ≤ 0
        assert!(bad(&|c| c.h1 = -1.0));
        assert!(bad(&|c| c.n = 5));
        assert!(bad(&|c| c.t_end = 0.0));
        assert!(bad(&|c| c.tol_event = 0.0));
        assert!(bad(&|c| c.snapshot_times = Some(vec![0.0, 100.0]))); // beyond t_end
        assert!(bad(&|c| c.snapshot_times = Some(vec![1.0, 1.0])));
    }

    #[test]
    fn trajectory_lookup_and_interpolation() {
        let traj = Trajectory {
            n: 2,
            states: vec![
                LatticeState { t: 0.0, u: vec![0.0, 1.0, 2.0, 3.0, 4.0], xi: vec![1; 5] },
                LatticeState { t: 2.0, u: vec![4.0, 5.0, 6.0, 7.0, 8.0], xi: vec![1; 5] },
            ],
        };
        assert_eq!(traj.value(-2, 0.0).unwrap(), 0.0);
        assert_eq!(traj.value(2, 2.0).unwrap(), 8.0);
        assert_eq!(traj.value(0, 1.0).unwrap(), 4.0); // midpoint
        assert_eq!(traj.value(0, -5.0).unwrap(), 2.0); // clamped
        assert!(traj.value(3, 0.0).is_err());
    }

    #[test]
    fn superposition_small_time_expansion() {
        // With only the center node switched at t = 0:
        // u_0(t) = (h1 − 2c)·t − h1·y_0(t) = −2c·t + h1·t² + O(t³).
        let recs = vec![SwitchRecord { n: 0, t_switch: 0.0 }];
        let (c, h1) = (0.5, 2.0);
        let t = 1e-3;
        let u = superpose_solution(c, h1, &recs, 0, t).unwrap();
        let expansion = -2.0 * c * t + h1 * t * t;
        assert!(
            (u - expansion).abs() < 5.0 * t * t * t,
            "u = {u:.12e}, expansion = {expansion:.12e}"
        );
        // At t = 0 the formula returns the initial parabola.
        assert_eq!(superpose_solution(c, h1, &recs, 1, 0.0).unwrap(), -c);
    }

    #[test]
    fn superposition_requires_inner_history() {
        let recs = vec![
            SwitchRecord { n: 0, t_switch: 0.0 },
            SwitchRecord { n: 2, t_switch: 5.0 },
        ];
        // Node 2 needs records for |k| ≤ 1; node 1 and −1 are absent.
        assert!(matches!(
            superpose_solution(0.5, 2.0, &recs, 2, 1.0),
            Err(Error::IncompleteHistory(_))
        ));
        // Node 0 needs nothing beyond itself.
        assert!(superpose_solution(0.5, 2.0, &recs, 0, 1.0).is_ok());
        // Infinite records are valid history.
        let with_inf = vec![
            SwitchRecord { n: 0, t_switch: 0.0 },
            SwitchRecord { n: 1, t_switch: f64::INFINITY },
            SwitchRecord { n: -1, t_switch: f64::INFINITY },
        ];
        assert!(superpose_solution(0.5, 2.0, &with_inf, 2, 1.0).is_ok());
    }

    #[test]
    fn future_switches_do_not_contribute() {
        let base = vec![SwitchRecord { n: 0, t_switch: 0.0 }];
        let with_future = vec![
            SwitchRecord { n: 0, t_switch: 0.0 },
            SwitchRecord { n: 5, t_switch: 100.0 },
        ];
        let a = superpose_solution(0.5, 2.0, &base, 0, 1.0).unwrap();
        let b = superpose_solution(0.5, 2.0, &with_future, 0, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rescaling_scales_times_and_values_quadratically() {
        let traj = Trajectory {
            n: 1,
            states: vec![
                LatticeState { t: 0.0, u: vec![-1.0, 0.0, -1.0], xi: vec![1, -1, 1] },
                LatticeState { t: 4.0, u: vec![-2.0, -1.0, -2.0], xi: vec![1, -1, 1] },
            ],
        };
        let scaled = rescale(0.5, &traj).unwrap();
        assert_eq!(scaled.states[1].t, 1.0);
        assert_eq!(scaled.states[1].u, vec![-0.5, -0.25, -0.5]);
        assert_eq!(scaled.states[0].xi, traj.states[0].xi);

        let recs = vec![SwitchRecord { n: 2, t_switch: 8.0 }];
        let scaled_recs = rescale_records(0.5, &recs).unwrap();
        assert_eq!(scaled_recs[0].t_switch, 2.0);
        // Infinite stays infinite.
        let inf = rescale_records(2.0, &[SwitchRecord { n: 1, t_switch: f64::INFINITY }])
            .unwrap();
        assert!(inf[0].t_switch.is_infinite());

        assert!(rescale(0.0, &traj).is_err());
        assert!(rescale_records(-1.0, &recs).is_err());
    }
}
