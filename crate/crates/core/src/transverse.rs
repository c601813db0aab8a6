//! 1-D free-boundary solver on the unit interval for a heat equation whose
//! forcing switches discontinuously across moving interface points.
//!
//! The model: `u_t = u_xx + F` on `(0,1)` with zero-flux ends, where
//! `F = h₋₁` on the already-switched region and `h₁` elsewhere (typically
//! `h₋₁ ≤ 0 ≤ h₁`). A point of the armed region switches — permanently —
//! when `u` reaches the threshold `β` there, so a single interface starting
//! at `b̄` obeys the root-tracking law
//!
//! ```text
//! b(t) = max(b̄, max_{0≤s≤t} a(s)),     u(a(t), t) = β,
//! ```
//!
//! with `a` the threshold root near the interface and `b` frozen while the
//! solution sits strictly below `β` there. The solver looks for a fixed
//! point of the map `R`: guess a boundary curve `b₀`, solve the forced heat
//! equation it induces, read the tracked boundary back off the solution.
//! A fixed point is a genuine solution of the discontinuous problem.
//!
//! Discretization: cell-centered finite volumes (default 2000 cells),
//! Crank–Nicolson in time, forcing sampled by exact sub-cell volume
//! fractions, tridiagonal systems solved directly. Interfaces are located
//! by monotone bracketing between cell centers plus linear interpolation,
//! and transversality (`|u_x|` bounded away from zero at the root) is
//! enforced with the `tol_slope` floor.
//!
//! Besides the single-interface fixed point, the module tracks several
//! interface points at once: each follows its own matching threshold
//! crossing, colliding curves merge (the armed island between them has
//! vanished) and curves reaching a domain end are absorbed, after which
//! tracking continues with fewer points.

use crate::engine::uniform_grid;
use crate::error::{Error, Result};

/// Default number of spatial cells on `(0,1)`.
pub const DEFAULT_CELLS: usize = 2000;
/// Default transversality floor for `|u_x|` at a tracked root.
pub const DEFAULT_TOL_SLOPE: f64 = 1e-3;
/// Width (in cells) of the pre-merge zone in which the slope floor is
/// suspended for a collapsing pair of interface points: the slope at each
/// root necessarily vanishes as an armed island closes.
const MERGE_ZONE_CELLS: f64 = 8.0;
/// Horizon halvings attempted by the fixed-point solver before giving up.
const MAX_HORIZON_HALVINGS: u32 = 5;

/// Single-interface problem statement.
#[derive(Debug, Clone)]
pub struct TransverseProblem {
    /// Number of cells of the spatial mesh on `(0,1)` (cell-centered).
    pub n_cells: usize,
    /// Initial data sampled at the cell centers.
    pub phi: Vec<f64>,
    /// Initial interface: `[0, b̄]` is already switched, `(b̄, 1]` armed.
    pub b_bar: f64,
    /// Lower threshold (re-arming level; the initial data must stay above
    /// it on the switched region).
    pub alpha: f64,
    /// Switching threshold.
    pub beta: f64,
    /// Forcing on the armed region (typically `≥ 0`).
    pub h1: f64,
    /// Forcing on the switched region (typically `≤ 0`).
    pub h_m1: f64,
    pub t_end: f64,
    /// Crank–Nicolson steps to `t_end`.
    pub n_steps: usize,
    /// Transversality floor for `|u_x|` at the tracked root.
    pub tol_slope: f64,
}

impl TransverseProblem {
    /// Problem with the default mesh (2000 cells, `dt ≈ dx`) and the
    /// initial profile sampled at cell centers.
    pub fn new(
        b_bar: f64,
        alpha: f64,
        beta: f64,
        h1: f64,
        h_m1: f64,
        t_end: f64,
        profile: impl Fn(f64) -> f64,
    ) -> Self {
        let n_cells = DEFAULT_CELLS;
        let n_steps = ((t_end * n_cells as f64).ceil() as usize).max(16);
        let phi = cell_centers(n_cells).into_iter().map(profile).collect();
        TransverseProblem {
            n_cells,
            phi,
            b_bar,
            alpha,
            beta,
            h1,
            h_m1,
            t_end,
            n_steps,
            tol_slope: DEFAULT_TOL_SLOPE,
        }
    }

    /// Same problem on a coarser or finer mesh (`profile` resampled).
    pub fn with_resolution(
        mut self,
        n_cells: usize,
        n_steps: usize,
        profile: impl Fn(f64) -> f64,
    ) -> Self {
        self.n_cells = n_cells;
        self.n_steps = n_steps;
        self.phi = cell_centers(n_cells).into_iter().map(profile).collect();
        self
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 16 {
            return Err(Error::Validation(format!(
                "mesh too coarse: {} cells",
                self.n_cells
            )));
        }
        if self.n_steps < 2 {
            return Err(Error::Validation("need at least two time steps".into()));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Validation(format!("horizon must be positive (got {})", self.t_end)));
        }
        if !(self.tol_slope > 0.0) {
            return Err(Error::Validation("tol_slope must be positive".into()));
        }
        if !(self.b_bar > 0.0 && self.b_bar < 1.0) {
            return Err(Error::Validation(format!(
                "interface must start inside (0,1), got {}",
                self.b_bar
            )));
        }
        if !(self.alpha < self.beta) {
            return Err(Error::Validation(format!(
                "thresholds must be ordered: alpha {} !< beta {}",
                self.alpha, self.beta
            )));
        }
        if !self.h1.is_finite() || !self.h_m1.is_finite() {
            return Err(Error::Validation("branch values must be finite".into()));
        }
        if self.phi.len() != self.n_cells {
            return Err(Error::GridMismatch(format!(
                "phi has {} samples on a {}-cell mesh",
                self.phi.len(),
                self.n_cells
            )));
        }
        if self.phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation("phi must be finite".into()));
        }
        // Consistency of the data with the initial configuration: the
        // switched region must sit above the re-arming level, the armed
        // region strictly below the switching threshold.
        let dx = self.dx();
        for (i, &p) in self.phi.iter().enumerate() {
            let x = (i as f64 + 0.5) * dx;
            if x <= self.b_bar && p <= self.alpha {
                return Err(Error::InconsistentInitialData(format!(
                    "phi({x}) = {p} ≤ alpha on the switched region"
                )));
            }
            if x > self.b_bar && p >= self.beta {
                return Err(Error::InconsistentInitialData(format!(
                    "phi({x}) = {p} ≥ beta on the armed region"
                )));
            }
        }
        // Transversality at the interface: if the data touches the
        // threshold at b̄ it must cross it downward at a resolvable slope.
        let phi_at = |x: f64| interp_cell_samples(&self.phi, dx, x);
        let phi_b = phi_at(self.b_bar);
        if phi_b > self.beta + 1e-12 {
            return Err(Error::InconsistentInitialData(format!(
                "phi(b̄) = {phi_b} exceeds beta"
            )));
        }
        if self.beta - phi_b <= 2.0 * dx {
            let slope = (phi_at(self.b_bar + dx) - phi_at(self.b_bar - dx)) / (2.0 * dx);
            if slope > -self.tol_slope {
                return Err(Error::TransversalityLost(format!(
                    "initial data touches the threshold at b̄ with slope {slope}"
                )));
            }
        }
        Ok(())
    }

    fn time_grid(&self) -> Vec<f64> {
        uniform_grid(self.t_end, self.n_steps)
    }
}

/// Cell-center abscissae of an `n`-cell mesh on `(0,1)`.
pub fn cell_centers(n_cells: usize) -> Vec<f64> {
    let dx = 1.0 / n_cells as f64;
    (0..n_cells).map(|i| (i as f64 + 0.5) * dx).collect()
}

/// Linear interpolation of cell-centered samples (constant beyond the
/// outermost centers).
fn interp_cell_samples(samples: &[f64], dx: f64, x: f64) -> f64 {
    let n = samples.len();
    let s = x / dx - 0.5;
    if s <= 0.0 {
        return samples[0];
    }
    if s >= (n - 1) as f64 {
        return samples[n - 1];
    }
    let i = s.floor() as usize;
    let w = s - i as f64;
    samples[i] * (1.0 - w) + samples[i + 1] * w
}

/// One interface curve on a time grid.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub times: Vec<f64>,
    /// Interface position per time; non-decreasing when produced by the
    /// running-max law.
    pub b: Vec<f64>,
    /// Threshold root per time where one exists (`None` while frozen).
    pub a: Vec<Option<f64>>,
}

impl BoundaryCurve {
    /// The constant curve `b ≡ b̄`.
    pub fn constant(times: Vec<f64>, b_bar: f64) -> Self {
        let n = times.len();
        BoundaryCurve { times, b: vec![b_bar; n], a: vec![None; n] }
    }

    /// Structural checks: matching lengths, strictly increasing times from
    /// zero, values inside `[0,1]`, start at `b̄`.
    pub fn validate(&self, b_bar: f64) -> Result<()> {
        if self.times.len() < 2 {
            return Err(Error::Validation("curve needs at least two times".into()));
        }
        if self.b.len() != self.times.len() || self.a.len() != self.times.len() {
            return Err(Error::GridMismatch(format!(
                "curve arrays disagree: {} times, {} values, {} roots",
                self.times.len(),
                self.b.len(),
                self.a.len()
            )));
        }
        if self.times[0] != 0.0 {
            return Err(Error::Validation(format!(
                "curve must start at t = 0 (got {})",
                self.times[0]
            )));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("curve times must increase strictly".into()));
        }
        if self.b.iter().any(|&b| !(0.0..=1.0).contains(&b)) {
            return Err(Error::Validation("curve values must lie in [0,1]".into()));
        }
        if (self.b[0] - b_bar).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "curve must start at b̄ = {b_bar} (got {})",
                self.b[0]
            )));
        }
        Ok(())
    }

    /// Sup-norm distance of the position curves (matched grids required).
    pub fn sup_distance(&self, other: &BoundaryCurve) -> Result<f64> {
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(s, o)| (s - o).abs() > 1e-12 * (1.0 + s.abs()))
        {
            return Err(Error::GridMismatch("curves live on different time grids".into()));
        }
        Ok(self
            .b
            .iter()
            .zip(&other.b)
            .map(|(s, o)| (s - o).abs())
            .fold(0.0, f64::max))
    }
}

/// Space-time solution field on the cell-centered mesh.
#[derive(Debug, Clone)]
pub struct UField {
    /// Cell centers.
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    /// One spatial profile per time, `u[k][i] = u(x_i, t_k)`.
    pub u: Vec<Vec<f64>>,
}

/// Forcing profile induced by an interface at `b_pos`: each cell carries
/// the exact volume-weighted mixture of the two branch values.
fn forcing_profile(n_cells: usize, b_pos: f64, h1: f64, h_m1: f64) -> Vec<f64> {
    let dx = 1.0 / n_cells as f64;
    (0..n_cells)
        .map(|i| {
            let lo = i as f64 * dx;
            let switched = ((b_pos - lo) / dx).clamp(0.0, 1.0);
            h_m1 * switched + h1 * (1.0 - switched)
        })
        .collect()
}

/// Solves the tridiagonal system in place: `diag` is destroyed, `rhs`
/// becomes the solution. Standard forward elimination / back substitution.
fn solve_tridiagonal(sub: f64, diag: &mut [f64], sup: f64, rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let m = sub / diag[i - 1];
        diag[i] -= m * sup;
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup * rhs[i + 1]) / diag[i];
    }
}

/// Zero-flux finite-volume Laplacian of cell-centered samples.
fn laplacian(u: &[f64], inv_dx2: f64, out: &mut [f64]) {
    let n = u.len();
    out[0] = (u[1] - u[0]) * inv_dx2;
    for i in 1..n - 1 {
        out[i] = (u[i - 1] + u[i + 1] - 2.0 * u[i]) * inv_dx2;
    }
    out[n - 1] = (u[n - 2] - u[n - 1]) * inv_dx2;
}

/// Crank–Nicolson solve of `u_t = u_xx + F` with the forcing determined by
/// the prescribed interface curve: `F = h₋₁` left of `b₀(t)`, `h₁` right.
///
/// The curve's time grid is the solver's time grid; it must start at 0 and
/// end at the problem horizon. Returns the full space-time field.
pub fn heat_solve_forced(problem: &TransverseProblem, b0: &BoundaryCurve) -> Result<UField> {
    problem.validate()?;
    b0.validate(problem.b_bar)?;
    let t_last = *b0.times.last().unwrap();
    if (t_last - problem.t_end).abs() > 1e-9 * (1.0 + problem.t_end) {
        return Err(Error::GridMismatch(format!(
            "curve ends at {t_last}, problem horizon is {}",
            problem.t_end
        )));
    }
    let n = problem.n_cells;
    let inv_dx2 = (n as f64) * (n as f64);
    let mut u = problem.phi.clone();
    let mut field = UField {
        x: cell_centers(n),
        times: b0.times.clone(),
        u: Vec::with_capacity(b0.times.len()),
    };
    field.u.push(u.clone());
    let mut lap = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut forcing_now = forcing_profile(n, b0.b[0], problem.h1, problem.h_m1);
    for k in 0..b0.times.len() - 1 {
        let dt = b0.times[k + 1] - b0.times[k];
        let forcing_next = forcing_profile(n, b0.b[k + 1], problem.h1, problem.h_m1);
        laplacian(&u, inv_dx2, &mut lap);
        let r = 0.5 * dt * inv_dx2;
        for i in 0..n {
            rhs[i] = u[i]
                + 0.5 * dt * lap[i]
                + 0.5 * dt * (forcing_now[i] + forcing_next[i]);
            diag[i] = if i == 0 || i == n - 1 { 1.0 + r } else { 1.0 + 2.0 * r };
        }
        solve_tridiagonal(-r, &mut diag, -r, &mut rhs);
        u.copy_from_slice(&rhs);
        field.u.push(u.clone());
        forcing_now = forcing_next;
    }
    Ok(field)
}

/// A threshold crossing between two adjacent cell centers.
#[derive(Debug, Clone, Copy)]
struct Crossing {
    /// Interpolated root abscissa.
    pos: f64,
    /// One-sided finite-difference slope across the bracketing pair.
    slope: f64,
}

/// All crossings of `u = beta` between adjacent centers, in the direction
/// requested: falling (`u` above on the left) or rising.
fn scan_crossings(x: &[f64], u: &[f64], beta: f64, falling: bool) -> Vec<Crossing> {
    let mut out = Vec::new();
    for i in 0..u.len() - 1 {
        let (a, b) = (u[i] - beta, u[i + 1] - beta);
        let hit = if falling { a >= 0.0 && b < 0.0 } else { a < 0.0 && b >= 0.0 };
        if hit {
            let dx = x[i + 1] - x[i];
            let pos = x[i] + a / (a - b) * dx;
            out.push(Crossing { pos, slope: (u[i + 1] - u[i]) / dx });
        }
    }
    out
}

fn nearest_crossing(crossings: &[Crossing], to: f64) -> Option<Crossing> {
    crossings
        .iter()
        .copied()
        .min_by(|p, q| {
            (p.pos - to)
                .abs()
                .partial_cmp(&(q.pos - to).abs())
                .expect("crossing positions are finite")
        })
}

/// Reads the tracked interface off a solution field: at each time the
/// threshold root nearest the current interface is located by bracketing
/// and interpolation, the interface is the running maximum of the roots,
/// and it freezes while the solution sits strictly below the threshold
/// near it.
///
/// Fails with [`Error::TransversalityLost`] when the root's slope falls
/// below the `tol_slope` floor or the root leaves `(0,1)` (the solution
/// reaches the threshold at the right wall).
pub fn boundary_from_solution(problem: &TransverseProblem, field: &UField) -> Result<BoundaryCurve> {
    problem.validate()?;
    if field.x.len() != problem.n_cells || field.u.iter().any(|u| u.len() != problem.n_cells) {
        return Err(Error::GridMismatch("field does not match the problem mesh".into()));
    }
    if field.times.is_empty() || field.u.len() != field.times.len() {
        return Err(Error::GridMismatch("field times and profiles disagree".into()));
    }
    let beta = problem.beta;
    let dx = problem.dx();
    let mut current = problem.b_bar;
    let mut curve = BoundaryCurve {
        times: field.times.clone(),
        b: Vec::with_capacity(field.times.len()),
        a: Vec::with_capacity(field.times.len()),
    };
    for (k, u) in field.u.iter().enumerate() {
        let t = field.times[k];
        if *u.last().unwrap() >= beta {
            return Err(Error::TransversalityLost(format!(
                "threshold reached at the right wall at t = {t}: the root left (0,1)"
            )));
        }
        let crossings = scan_crossings(&field.x, u, beta, true);
        match nearest_crossing(&crossings, current) {
            Some(root) => {
                if root.slope > -problem.tol_slope {
                    return Err(Error::TransversalityLost(format!(
                        "slope {} at the root x = {} at t = {t} is above the floor {}",
                        root.slope, root.pos, -problem.tol_slope
                    )));
                }
                current = current.max(root.pos);
                curve.a.push(Some(root.pos));
            }
            None => {
                // No falling crossing anywhere. Either the solution sits
                // below the threshold near the interface (frozen phase) or
                // it has swallowed the armed region entirely.
                let near = u
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (field.x[*i] - current).abs() <= 3.0 * dx)
                    .map(|(_, &v)| v)
                    .fold(f64::NEG_INFINITY, f64::max);
                if near >= beta {
                    return Err(Error::TransversalityLost(format!(
                        "threshold contact without a transverse root at t = {t}"
                    )));
                }
                curve.a.push(None);
            }
        }
        curve.b.push(current);
    }
    Ok(curve)
}

/// One application of the fixed-point map: solve the heat problem forced
/// by `b0`, then read the induced interface back off the solution.
pub fn r_map(problem: &TransverseProblem, b0: &BoundaryCurve) -> Result<BoundaryCurve> {
    boundary_from_solution(problem, &heat_solve_forced(problem, b0)?)
}

/// Per-iteration solution-magnitude probe recorded by the fixed-point
/// solver: sup-norms of the field and its spatial gradient over space-time.
#[derive(Debug, Clone, Copy)]
pub struct RegularityProbe {
    pub sup_u: f64,
    pub sup_ux: f64,
}

fn probe_field(field: &UField) -> RegularityProbe {
    let mut sup_u = 0.0f64;
    let mut sup_ux = 0.0f64;
    for u in &field.u {
        for i in 0..u.len() {
            sup_u = sup_u.max(u[i].abs());
            if i + 1 < u.len() {
                sup_ux = sup_ux.max((u[i + 1] - u[i]).abs() / (field.x[i + 1] - field.x[i]));
            }
        }
    }
    RegularityProbe { sup_u, sup_ux }
}

/// Converged output of [`fixed_point_solve`].
#[derive(Debug, Clone)]
pub struct TransverseSolution {
    /// Heat solution at the converged interface.
    pub u: UField,
    /// Converged interface curve.
    pub boundary: BoundaryCurve,
    /// Fixed-point map evaluations spent (across all horizon halvings).
    pub iterations: usize,
    /// Final sup-norm residual `‖R(b) − b‖`.
    pub residual: f64,
    /// Final damping factor of the iteration.
    pub lambda: f64,
    /// Horizon actually solved (the requested one, possibly halved).
    pub t_end: f64,
    /// One probe per map evaluation, in order.
    pub regularity: Vec<RegularityProbe>,
}

/// Damped Picard iteration on the boundary map: `b ← (1−λ)b + λR(b)`,
/// starting from the constant guess `b ≡ b̄` with `λ = 1`. The underlying
/// existence argument is topological, not contractive, so convergence is
/// monitored rather than assumed: on stalls the damping is halved, and
/// when damping is exhausted the horizon is halved (existence is only
/// guaranteed for some small positive horizon) and the iteration restarts.
pub fn fixed_point_solve(
    problem: &TransverseProblem,
    tol_fp: f64,
    max_iter: usize,
) -> Result<TransverseSolution> {
    problem.validate()?;
    if !(tol_fp > 0.0) {
        return Err(Error::Validation("tol_fp must be positive".into()));
    }
    if max_iter == 0 {
        return Err(Error::Validation("max_iter must be at least 1".into()));
    }
    let mut evaluations = 0usize;
    let mut regularity = Vec::new();
    for halving in 0..=MAX_HORIZON_HALVINGS {
        let scale = 0.5f64.powi(halving as i32);
        let mut local = problem.clone();
        local.t_end = problem.t_end * scale;
        local.n_steps = ((problem.n_steps as f64 * scale).ceil() as usize).max(2);
        let times = local.time_grid();
        let mut b = BoundaryCurve::constant(times, local.b_bar);
        let mut lambda = 1.0f64;
        let mut best = f64::INFINITY;
        let mut stall = 0u32;
        for _ in 0..max_iter {
            let field = heat_solve_forced(&local, &b)?;
            regularity.push(probe_field(&field));
            let rb = boundary_from_solution(&local, &field)?;
            evaluations += 1;
            let residual = rb.sup_distance(&b)?;
            if residual <= tol_fp {
                let u = heat_solve_forced(&local, &rb)?;
                return Ok(TransverseSolution {
                    u,
                    boundary: rb,
                    iterations: evaluations,
                    residual,
                    lambda,
                    t_end: local.t_end,
                    regularity,
                });
            }
            if residual <= 0.98 * best {
                best = residual;
                stall = 0;
            } else {
                stall += 1;
            }
            if stall >= 4 {
                lambda *= 0.5;
                stall = 0;
                if lambda < 0.24 {
                    break; // damping exhausted: halve the horizon
                }
            }
            for i in 0..b.b.len() {
                b.b[i] = (1.0 - lambda) * b.b[i] + lambda * rb.b[i];
            }
            b.b[0] = local.b_bar;
            b.a = rb.a.clone();
        }
    }
    Err(Error::NoConvergence(format!(
        "no boundary fixed point within {max_iter} iterations per horizon across {} halvings",
        MAX_HORIZON_HALVINGS,
    )))
}

// ---------------------------------------------------------------------------
// Several interface points: independent tracking, merging, absorption.
// ---------------------------------------------------------------------------

/// Which side of an interface point is already switched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One interface point of a piecewise-constant configuration.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub position: f64,
    /// Side on which the forcing is `h₋₁`; adjacent points must alternate.
    pub switched: Side,
}

/// A topology change observed while tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyEvent {
    /// Two interface points collided: the armed island between them has
    /// been swallowed and both points are retired.
    Merge { time: f64, position: f64, points: (usize, usize) },
    /// An interface point reached a domain end and is retired.
    Absorb { time: f64, end: f64, point: usize },
}

/// Tracked interface curves over a solution field.
#[derive(Debug, Clone)]
pub struct TrackedBoundaries {
    pub times: Vec<f64>,
    /// One curve per initial point (`None` entries after retirement).
    pub curves: Vec<Vec<Option<f64>>>,
    pub events: Vec<TopologyEvent>,
    /// Points still active at the final time.
    pub active_at_end: usize,
}

struct Tracker {
    beta: f64,
    tol_slope: f64,
    dx: f64,
    positions: Vec<f64>,
    sides: Vec<Side>,
    active: Vec<bool>,
    events: Vec<TopologyEvent>,
}

impl Tracker {
    fn new(initial: &[BoundaryPoint], beta: f64, tol_slope: f64, dx: f64) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::Validation("need at least one interface point".into()));
        }
        for w in initial.windows(2) {
            if w[1].position <= w[0].position {
                return Err(Error::Validation("interface points must increase strictly".into()));
            }
            if w[1].switched == w[0].switched {
                return Err(Error::Validation(
                    "adjacent interface points must have alternating switched sides".into(),
                ));
            }
        }
        if initial
            .iter()
            .any(|p| !(p.position > 0.0 && p.position < 1.0))
        {
            return Err(Error::Validation("interface points must lie inside (0,1)".into()));
        }
        Ok(Tracker {
            beta,
            tol_slope,
            dx,
            positions: initial.iter().map(|p| p.position).collect(),
            sides: initial.iter().map(|p| p.switched).collect(),
            active: vec![true; initial.len()],
            events: Vec::new(),
        })
    }

    fn active_indices(&self) -> Vec<usize> {
        (0..self.positions.len()).filter(|&j| self.active[j]).collect()
    }

    /// Distance from point `j` to its nearest active neighbor or domain end.
    fn clearance(&self, order: &[usize], slot: usize) -> f64 {
        let j = order[slot];
        let left = if slot > 0 { self.positions[order[slot - 1]] } else { 0.0 };
        let right = if slot + 1 < order.len() { self.positions[order[slot + 1]] } else { 1.0 };
        (self.positions[j] - left).min(right - self.positions[j])
    }

    fn advance(&mut self, x: &[f64], u: &[f64], t: f64) -> Result<()> {
        let order = self.active_indices();
        // Move each point to its matching crossing within its corridor.
        for (slot, &j) in order.iter().enumerate() {
            let lo = if slot > 0 { self.positions[order[slot - 1]] } else { 0.0 };
            let hi = if slot + 1 < order.len() { self.positions[order[slot + 1]] } else { 1.0 };
            let falling = self.sides[j] == Side::Left;
            let crossings: Vec<Crossing> = scan_crossings(x, u, self.beta, falling)
                .into_iter()
                .filter(|c| c.pos > lo && c.pos < hi)
                .collect();
            match nearest_crossing(&crossings, self.positions[j]) {
                Some(root) => {
                    // The slope floor is suspended while a collapse or an
                    // absorption is imminent: the slope at a root vanishes
                    // by necessity as an island closes.
                    if root.slope.abs() < self.tol_slope
                        && self.clearance(&order, slot) > MERGE_ZONE_CELLS * self.dx
                    {
                        return Err(Error::TransversalityLost(format!(
                            "slope {} at interface {j} (x = {}) at t = {t}",
                            root.slope, root.pos
                        )));
                    }
                    self.positions[j] = if falling {
                        self.positions[j].max(root.pos)
                    } else {
                        self.positions[j].min(root.pos)
                    };
                }
                None => {
                    // Frozen while below threshold near the point; if the
                    // threshold has been reached all the way to the outer
                    // wall, the point runs off the domain end.
                    let outer = if falling { hi } else { lo };
                    let outer_reached = u
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| {
                            x[*i] > self.positions[j].min(outer) - 1e-12
                                && x[*i] < self.positions[j].max(outer) + 1e-12
                        })
                        .all(|(_, &v)| v >= self.beta);
                    let at_wall = if falling { hi >= 1.0 } else { lo <= 0.0 };
                    if outer_reached && at_wall {
                        self.positions[j] = if falling { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        // Absorption at the domain ends.
        for &j in &order {
            let pos = self.positions[j];
            let end = if self.sides[j] == Side::Left { 1.0 } else { 0.0 };
            if (pos - end).abs() < self.dx {
                self.active[j] = false;
                self.events.push(TopologyEvent::Absorb { time: t, end, point: j });
            }
        }
        // Merging: an armed island between a (switched-left, switched-right)
        // pair disappears when no cell inside it still sits below the
        // threshold.
        let order = self.active_indices();
        for w in order.windows(2) {
            let (j, k) = (w[0], w[1]);
            if self.sides[j] != Side::Left || self.sides[k] != Side::Right {
                continue;
            }
            let (pj, pk) = (self.positions[j], self.positions[k]);
            let island_submerged = !u
                .iter()
                .enumerate()
                .any(|(i, &v)| x[i] > pj && x[i] < pk && v < self.beta);
            if pj + 1e-12 >= pk || island_submerged {
                let position = 0.5 * (pj + pk);
                self.active[j] = false;
                self.active[k] = false;
                self.events.push(TopologyEvent::Merge { time: t, position, points: (j, k) });
            }
        }
        Ok(())
    }

    fn record_into(&self, curves: &mut [Vec<Option<f64>>]) {
        for (j, curve) in curves.iter_mut().enumerate() {
            curve.push(if self.active[j] { Some(self.positions[j]) } else { None });
        }
    }

    /// Switched volume fraction of the cell `[lo, hi]` under the current
    /// configuration.
    fn switched_fraction(&self, lo: f64, hi: f64) -> f64 {
        // Walk the active points left to right, accumulating the overlap of
        // the switched segments with the cell.
        let order = self.active_indices();
        if order.is_empty() {
            // Everything merged or absorbed: the surviving configuration is
            // uniformly switched (islands vanish into the switched phase;
            // an absorbed point leaves its switched side covering the end).
            return 1.0;
        }
        let mut total = 0.0;
        let mut seg_start = 0.0;
        // Segment left of the first point is switched iff that point's
        // switched side is Left; signs then alternate.
        let mut switched = self.sides[order[0]] == Side::Left;
        for &j in &order {
            let seg_end = self.positions[j];
            if switched {
                total += (hi.min(seg_end) - lo.max(seg_start)).max(0.0);
            }
            seg_start = seg_end;
            switched = !switched;
        }
        if switched {
            total += (hi.min(1.0) - lo.max(seg_start)).max(0.0);
        }
        total / (hi - lo)
    }
}

/// Tracks several interface points across a precomputed solution field.
///
/// Each point follows the threshold crossing of its own orientation inside
/// the corridor between its neighbors, advancing monotonically (running
/// max or min) and freezing while the solution is below the threshold.
/// Colliding pairs merge, points reaching a domain end are absorbed, and
/// tracking continues with the remaining points.
pub fn track_boundaries(
    field: &UField,
    initial: &[BoundaryPoint],
    beta: f64,
    tol_slope: f64,
) -> Result<TrackedBoundaries> {
    if field.times.is_empty() || field.u.len() != field.times.len() {
        return Err(Error::GridMismatch("field times and profiles disagree".into()));
    }
    let dx = field.x[1] - field.x[0];
    let mut tracker = Tracker::new(initial, beta, tol_slope, dx)?;
    let mut curves = vec![Vec::with_capacity(field.times.len()); initial.len()];
    for (k, u) in field.u.iter().enumerate() {
        tracker.advance(&field.x, u, field.times[k])?;
        tracker.record_into(&mut curves);
    }
    Ok(TrackedBoundaries {
        times: field.times.clone(),
        curves,
        active_at_end: tracker.active.iter().filter(|&&a| a).count(),
        events: tracker.events,
    })
}

/// Multi-interface problem statement for the tracking simulation.
#[derive(Debug, Clone)]
pub struct MultiTransverseProblem {
    pub n_cells: usize,
    pub phi: Vec<f64>,
    pub points: Vec<BoundaryPoint>,
    pub beta: f64,
    pub h1: f64,
    pub h_m1: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub tol_slope: f64,
}

impl MultiTransverseProblem {
    pub fn new(
        points: Vec<BoundaryPoint>,
        beta: f64,
        h1: f64,
        h_m1: f64,
        t_end: f64,
        profile: impl Fn(f64) -> f64,
    ) -> Self {
        let n_cells = DEFAULT_CELLS;
        let n_steps = ((t_end * n_cells as f64).ceil() as usize).max(16);
        let phi = cell_centers(n_cells).into_iter().map(profile).collect();
        MultiTransverseProblem {
            n_cells,
            phi,
            points,
            beta,
            h1,
            h_m1,
            t_end,
            n_steps,
            tol_slope: DEFAULT_TOL_SLOPE,
        }
    }
}

/// Forward simulation with interface tracking: each Crank–Nicolson step is
/// forced by the configuration read off the current profile (the coupling
/// between field and interfaces is explicit, first-order in time; the
/// fixed-point solver is the high-accuracy path for a single interface).
/// Merging and absorption happen on the fly and the simulation continues
/// with the surviving points.
pub fn simulate_tracked(problem: &MultiTransverseProblem) -> Result<(UField, TrackedBoundaries)> {
    if problem.n_cells < 16 || problem.n_steps < 2 {
        return Err(Error::Validation("mesh too coarse".into()));
    }
    if !(problem.t_end > 0.0) || !(problem.tol_slope > 0.0) {
        return Err(Error::Validation("horizon and tol_slope must be positive".into()));
    }
    if !problem.h1.is_finite() || !problem.h_m1.is_finite() {
        return Err(Error::Validation("branch values must be finite".into()));
    }
    if problem.phi.len() != problem.n_cells {
        return Err(Error::GridMismatch("phi does not match the mesh".into()));
    }
    let n = problem.n_cells;
    let dx = 1.0 / n as f64;
    let inv_dx2 = 1.0 / (dx * dx);
    let times = uniform_grid(problem.t_end, problem.n_steps);
    let mut tracker = Tracker::new(&problem.points, problem.beta, problem.tol_slope, dx)?;
    let mut curves = vec![Vec::with_capacity(times.len()); problem.points.len()];
    let x = cell_centers(n);
    let mut u = problem.phi.clone();
    let mut field =
        UField { x: x.clone(), times: times.clone(), u: Vec::with_capacity(times.len()) };
    tracker.advance(&x, &u, 0.0)?;
    tracker.record_into(&mut curves);
    field.u.push(u.clone());
    let mut lap = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        laplacian(&u, inv_dx2, &mut lap);
        let r = 0.5 * dt * inv_dx2;
        for i in 0..n {
            let switched = tracker.switched_fraction(i as f64 * dx, (i + 1) as f64 * dx);
            let forcing = problem.h_m1 * switched + problem.h1 * (1.0 - switched);
            rhs[i] = u[i] + 0.5 * dt * lap[i] + dt * forcing;
            diag[i] = if i == 0 || i == n - 1 { 1.0 + r } else { 1.0 + 2.0 * r };
        }
        solve_tridiagonal(-r, &mut diag, -r, &mut rhs);
        u.copy_from_slice(&rhs);
        tracker.advance(&x, &u, times[k + 1])?;
        tracker.record_into(&mut curves);
        field.u.push(u.clone());
    }
    Ok((
        field,
        TrackedBoundaries {
            times,
            curves,
            active_at_end: tracker.active.iter().filter(|&&a| a).count(),
            events: tracker.events,
        },
    ))
}
