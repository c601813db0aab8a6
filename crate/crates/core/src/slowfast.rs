//! Method-of-lines simulation of the slow-fast system
//!
//! ```text
//! u_t = u_xx + v,        δ·v_t = g(u, v),
//! ```
//!
//! with a bistable fast nonlinearity (default `g(u,v) = u + v − v³/3`,
//! whose stable nullcline branches are the parts with `|v| > 1`). No
//! hysteresis operator appears here — that is the point of the
//! comparison: the alternating plateau pattern emerges from the fast
//! dynamics alone as `δ → 0`.
//!
//! Discretization: finite-volume line Laplacian (zero-flux ends), time
//! stepping by operator splitting — one explicit RK4 diffusion step with
//! `dt ≤ 0.4·dx²`, then fast substeps of RK4 on `v̇ = g/δ` with
//! `dt_fast ≤ δ/10`.

use crate::engine::uniform_grid;
use crate::error::{Error, Result};

/// Fast nonlinearity signature.
pub type FastNonlinearity = fn(f64, f64) -> f64;

/// The default bistable nonlinearity `g(u,v) = u + v − v³/3`.
///
/// Its positive stable branch (`v ≥ 1`) solves `u = v³/3 − v` and covers
/// `u ∈ [−2/3, ∞)`: the branch terminates at a fold *below* the slow
/// field's starting level, so positive forcing drives `u` away from the
/// fold and a field started on this branch can only leave it by sinking.
pub fn cubic_nonlinearity(u: f64, v: f64) -> f64 {
    u + v - v * v * v / 3.0
}

/// The reflected cubic `g(u,v) = v − v³/3 − u` (the default with the slow
/// variable negated).
///
/// Roots and stability at `u = 0` are identical to the default, but the
/// positive stable branch now covers `u ∈ (−∞, 2/3]` and terminates at a
/// fold *above* the start: its own positive forcing pushes the slow field
/// toward the fold at `u = 2/3`, where the fast variable must jump to the
/// negative branch (value −2). Threshold touching therefore triggers
/// switching cascades, and this is the orientation that produces the
/// alternating plateau pattern.
pub fn reflected_cubic_nonlinearity(u: f64, v: f64) -> f64 {
    v - v * v * v / 3.0 - u
}

/// Upper stable root of `g(0, ·) = 0` for the default nonlinearity.
pub fn upper_rest_state() -> f64 {
    3.0f64.sqrt()
}

/// Full parameter set for one slow-fast run.
#[derive(Debug, Clone)]
pub struct SlowFastConfig {
    /// Fast time-scale separation (small and positive).
    pub delta: f64,
    /// Curvature of the initial parabola `u(x,0) = −c·x²`.
    pub c: f64,
    /// Domain half-length; the grid is symmetric about `x = 0`.
    pub l: f64,
    /// Grid spacing (the half-length is rounded to a whole number of
    /// cells).
    pub dx: f64,
    pub t_end: f64,
    /// Fast nonlinearity; `v(x,0)` must be one of its stable roots at
    /// `u = 0`.
    pub g: FastNonlinearity,
    /// Initial value of the fast variable (a stable root of `g(0,·)`).
    pub v0: f64,
    /// Amplitude of an `o(x²)` perturbation of the initial parabola
    /// (added as `perturb·x⁴`); zero by default.
    pub perturb: f64,
    /// Diffusion step; derived as `0.4·dx²` when absent. Explicit values
    /// above that bound are a [`Error::StabilityViolation`].
    pub dt: Option<f64>,
    /// Fast substep; derived as `δ/10` when absent, same rule.
    pub dt_fast: Option<f64>,
    /// Times at which to record snapshots (uniform 100-segment grid when
    /// absent).
    pub snapshot_times: Option<Vec<f64>>,
}

impl SlowFastConfig {
    pub fn new(delta: f64, c: f64, l: f64, dx: f64, t_end: f64) -> Self {
        SlowFastConfig {
            delta,
            c,
            l,
            dx,
            t_end,
            g: cubic_nonlinearity,
            v0: upper_rest_state(),
            perturb: 0.0,
            dt: None,
            dt_fast: None,
            snapshot_times: None,
        }
    }

    fn half_cells(&self) -> usize {
        (self.l / self.dx).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta", self.delta),
            ("c", self.c),
            ("l", self.l),
            ("dx", self.dx),
            ("t_end", self.t_end),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be positive (got {v})")));
            }
        }
        if self.half_cells() < 5 {
            return Err(Error::Validation(format!(
                "domain too coarse: only {} cells per side",
                self.half_cells()
            )));
        }
        if !self.perturb.is_finite() || !self.v0.is_finite() {
            return Err(Error::Validation("perturb and v0 must be finite".into()));
        }
        let dt_cap = 0.4 * self.dx * self.dx;
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || dt > dt_cap * (1.0 + 1e-12) {
                return Err(Error::StabilityViolation(format!(
                    "diffusion step {dt} exceeds the explicit bound 0.4·dx² = {dt_cap}"
                )));
            }
        }
        let fast_cap = self.delta / 10.0;
        if let Some(dtf) = self.dt_fast {
            if !(dtf > 0.0) || dtf > fast_cap * (1.0 + 1e-12) {
                return Err(Error::StabilityViolation(format!(
                    "fast substep {dtf} exceeds the layer-resolving bound δ/10 = {fast_cap}"
                )));
            }
        }
        if let Some(times) = &self.snapshot_times {
            let ok = times.windows(2).all(|w| w[0] < w[1])
                && times.iter().all(|t| t.is_finite() && (0.0..=self.t_end).contains(t));
            if !ok {
                return Err(Error::Validation(
                    "snapshot times must be finite, strictly increasing, within [0, T]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Completed slow-fast run: both fields at every requested time.
#[derive(Debug, Clone)]
pub struct SlowFastRun {
    /// Node positions.
    pub x: Vec<f64>,
    /// Snapshot times.
    pub times: Vec<f64>,
    /// Slow field per snapshot.
    pub u: Vec<Vec<f64>>,
    /// Fast field per snapshot.
    pub v: Vec<Vec<f64>>,
    /// First time the fast field crossed zero anywhere — the onset of
    /// branch jumping (`None` if it never did).
    pub first_jump: Option<f64>,
}

struct Stepper {
    inv_dx2: f64,
    scratch: Vec<Vec<f64>>,
}

impl Stepper {
    fn new(n: usize, dx: f64) -> Self {
        Stepper { inv_dx2: 1.0 / (dx * dx), scratch: vec![vec![0.0; n]; 5] }
    }

    /// One RK4 step of `u̇ = u_xx + v` with `v` frozen.
    fn diffusion_step(&mut self, u: &mut [f64], v: &[f64], dt: f64) {
        let n = u.len();
        let inv = self.inv_dx2;
        let [k1, k2, k3, k4, tmp] = &mut self.scratch[..] else { unreachable!() };
        let lap_raw = |field: &[f64], out: &mut [f64]| {
            let n = field.len();
            out[0] = (field[1] - field[0]) * inv;
            for i in 1..n - 1 {
                out[i] = (field[i - 1] + field[i + 1] - 2.0 * field[i]) * inv;
            }
            out[n - 1] = (field[n - 2] - field[n - 1]) * inv;
        };
        lap_raw(u, k1);
        for i in 0..n {
            k1[i] += v[i];
            tmp[i] = u[i] + 0.5 * dt * k1[i];
        }
        lap_raw(tmp, k2);
        for i in 0..n {
            k2[i] += v[i];
            tmp[i] = u[i] + 0.5 * dt * k2[i];
        }
        lap_raw(tmp, k3);
        for i in 0..n {
            k3[i] += v[i];
            tmp[i] = u[i] + dt * k3[i];
        }
        lap_raw(tmp, k4);
        for i in 0..n {
            k4[i] += v[i];
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// One RK4 substep of `v̇ = g(u, v)/δ` at a single node.
fn fast_substep(g: FastNonlinearity, delta: f64, u: f64, v: f64, h: f64) -> f64 {
    let f = |v: f64| g(u, v) / delta;
    let k1 = f(v);
    let k2 = f(v + 0.5 * h * k1);
    let k3 = f(v + 0.5 * h * k2);
    let k4 = f(v + h * k3);
    v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn initial_fields(config: &SlowFastConfig) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let half = config.half_cells();
    let x: Vec<f64> = (0..=2 * half)
        .map(|i| (i as f64 - half as f64) * config.dx)
        .collect();
    let u: Vec<f64> = x
        .iter()
        .map(|&x| -config.c * x * x + config.perturb * x * x * x * x)
        .collect();
    let v = vec![config.v0; x.len()];
    (x, u, v)
}

fn run(config: &SlowFastConfig, with_fast: bool) -> Result<SlowFastRun> {
    config.validate()?;
    let (x, mut u, mut v) = initial_fields(config);
    let n = x.len();
    let dt_cap = 0.4 * config.dx * config.dx;
    let dt = config.dt.unwrap_or(dt_cap);
    let dt_fast_cap = config.delta / 10.0;
    let dt_fast = config.dt_fast.unwrap_or(dt_fast_cap);
    let default_snaps;
    let snapshot_times: &[f64] = match &config.snapshot_times {
        Some(times) => times,
        None => {
            default_snaps = uniform_grid(config.t_end, 100);
            &default_snaps
        }
    };
    let mut stepper = Stepper::new(n, config.dx);

    let u0_max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut v_abs_max = v.iter().map(|w| w.abs()).fold(0.0f64, f64::max);
    let mut first_jump = None;

    let mut out = SlowFastRun {
        x,
        times: Vec::with_capacity(snapshot_times.len()),
        u: Vec::with_capacity(snapshot_times.len()),
        v: Vec::with_capacity(snapshot_times.len()),
        first_jump: None,
    };
    let mut cursor = 0;
    let record_up_to = |t: f64, u: &[f64], v: &[f64], cursor: &mut usize, out: &mut SlowFastRun| {
        while *cursor < snapshot_times.len() && snapshot_times[*cursor] <= t * (1.0 + 1e-14) {
            out.times.push(snapshot_times[*cursor]);
            out.u.push(u.to_vec());
            out.v.push(v.to_vec());
            *cursor += 1;
        }
    };
    record_up_to(0.0, &u, &v, &mut cursor, &mut out);

    let steps = (config.t_end / dt).ceil() as u64;
    let dt = config.t_end / steps as f64;
    for step in 1..=steps {
        let t = step as f64 * dt;
        stepper.diffusion_step(&mut u, &v, dt);
        if with_fast {
            let m = (dt / dt_fast).ceil().max(1.0) as u32;
            let h = dt / m as f64;
            for i in 0..n {
                let ui = u[i];
                let mut vi = v[i];
                for _ in 0..m {
                    vi = fast_substep(config.g, config.delta, ui, vi, h);
                }
                v[i] = vi;
            }
        }
        // Tripwires: finiteness, the a-priori slow-field bound, and a
        // generous cap on the fast field.
        let mut u_max = f64::NEG_INFINITY;
        let mut v_min = f64::INFINITY;
        for i in 0..n {
            if !u[i].is_finite() || !v[i].is_finite() {
                return Err(Error::BlowUp(format!("non-finite state at node {i}, t = {t}")));
            }
            u_max = u_max.max(u[i]);
            v_min = v_min.min(v[i]);
            v_abs_max = v_abs_max.max(v[i].abs());
        }
        if u_max > u0_max.max(0.0) + t * v_abs_max + 1.0 {
            return Err(Error::BlowUp(format!(
                "slow field exceeded its a-priori bound at t = {t} (max u = {u_max})"
            )));
        }
        if v_abs_max > 1e3 {
            return Err(Error::BlowUp(format!(
                "fast field left the physical range at t = {t} (|v| = {v_abs_max})"
            )));
        }
        if first_jump.is_none() && v_min < 0.0 && config.v0 > 0.0 {
            first_jump = Some(t);
        }
        record_up_to(t, &u, &v, &mut cursor, &mut out);
    }
    record_up_to(config.t_end, &u, &v, &mut cursor, &mut out);
    out.first_jump = first_jump;
    Ok(out)
}

/// Simulate the full slow-fast system.
pub fn simulate_slowfast(config: &SlowFastConfig) -> Result<SlowFastRun> {
    run(config, true)
}

/// The `δ → ∞` surrogate: skip every fast substep so `v` stays frozen at
/// its initial profile and `u` solves the forced heat equation. Used to
/// cross-check the diffusion stepper against the event engine.
pub fn simulate_frozen_v(config: &SlowFastConfig) -> Result<SlowFastRun> {
    run(config, false)
}

/// Branch label of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Nearest stable root is non-negative.
    Upper,
    /// Nearest stable root is negative.
    Lower,
    /// No stable root exists for this node's slow value (fold region).
    Fold,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Upper => write!(f, "upper"),
            Branch::Lower => write!(f, "lower"),
            Branch::Fold => write!(f, "fold"),
        }
    }
}

/// Classification of a snapshot against the stable branches of `g`.
#[derive(Debug, Clone)]
pub struct BranchReport {
    pub labels: Vec<Branch>,
    /// Defect `|g(u_i, v_i)|` per node.
    pub defect: Vec<f64>,
    /// Nearest stable root per node (`NaN` in fold regions).
    pub nearest_root: Vec<f64>,
    /// Fraction of nodes with defect within the tolerance.
    pub classified_fraction: f64,
    /// Lengths (in nodes) of maximal same-label runs, left to right.
    pub run_lengths: Vec<usize>,
    pub defect_tol: f64,
}

impl BranchReport {
    /// Median run length in nodes (mean of the two middle values for an
    /// even count).
    pub fn median_run(&self) -> f64 {
        let mut runs = self.run_lengths.clone();
        runs.sort_unstable();
        let m = runs.len();
        if m == 0 {
            return 0.0;
        }
        if m % 2 == 1 {
            runs[m / 2] as f64
        } else {
            (runs[m / 2 - 1] + runs[m / 2]) as f64 / 2.0
        }
    }
}

/// Stable roots of `v ↦ g(u, v)`, scanned over a window wide enough for
/// cubic-type nonlinearities at any slow value, refined by bisection.
fn stable_roots(g: FastNonlinearity, u: f64) -> Vec<f64> {
    let reach = 3.0 + 1.5 * (3.0 * u.abs()).cbrt();
    let samples = 512;
    let mut roots = Vec::new();
    let mut prev_v = -reach;
    let mut prev_g = g(u, prev_v);
    for k in 1..=samples {
        let v = -reach + 2.0 * reach * k as f64 / samples as f64;
        let gv = g(u, v);
        if prev_g == 0.0 || prev_g * gv < 0.0 {
            let (mut lo, mut hi) = (prev_v, v);
            for _ in 0..70 {
                let mid = 0.5 * (lo + hi);
                if g(u, lo) * g(u, mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            let h = 1e-6 * (1.0 + root.abs());
            let slope = (g(u, root + h) - g(u, root - h)) / (2.0 * h);
            if slope < 0.0 {
                roots.push(root);
            }
        }
        prev_v = v;
        prev_g = gv;
    }
    roots
}

/// Label every node of a snapshot by the nearest stable root of its fast
/// dynamics and the defect `|g(u, v)|`; summarize the on-branch fraction
/// (defect within `defect_tol`) and the run-length structure of the
/// label sequence.
///
/// Nodes whose slow value admits no stable root are labeled
/// [`Branch::Fold`]; if that happens at every node the nonlinearity is
/// not bistable anywhere and the call fails with
/// [`Error::NoStableRoot`].
pub fn branch_classify(
    g: FastNonlinearity,
    u: &[f64],
    v: &[f64],
    defect_tol: f64,
) -> Result<BranchReport> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::GridMismatch(format!(
            "field lengths differ or are empty ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    if !(defect_tol > 0.0) {
        return Err(Error::Validation(format!(
            "defect tolerance must be positive (got {defect_tol})"
        )));
    }
    let n = u.len();
    let mut labels = Vec::with_capacity(n);
    let mut defect = Vec::with_capacity(n);
    let mut nearest = Vec::with_capacity(n);
    let mut classified = 0usize;
    let mut any_stable = false;
    for i in 0..n {
        let roots = stable_roots(g, u[i]);
        defect.push(g(u[i], v[i]).abs());
        if roots.is_empty() {
            labels.push(Branch::Fold);
            nearest.push(f64::NAN);
            continue;
        }
        any_stable = true;
        let root = roots
            .iter()
            .copied()
            .min_by(|a, b| {
                (a - v[i]).abs().partial_cmp(&(b - v[i]).abs()).unwrap()
            })
            .unwrap();
        nearest.push(root);
        labels.push(if root >= 0.0 { Branch::Upper } else { Branch::Lower });
        if defect[i] <= defect_tol {
            classified += 1;
        }
    }
    if !any_stable {
        return Err(Error::NoStableRoot(
            "no node's slow value admits a stable fast equilibrium".into(),
        ));
    }
    let mut run_lengths = Vec::new();
    let mut run = 1usize;
    for i in 1..n {
        if labels[i] == labels[i - 1] {
            run += 1;
        } else {
            run_lengths.push(run);
            run = 1;
        }
    }
    run_lengths.push(run);
    Ok(BranchReport {
        labels,
        defect,
        nearest_root: nearest,
        classified_fraction: classified as f64 / n as f64,
        run_lengths,
        defect_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{self, LatticeTopology, RelayLatticeProblem};

    #[test]
    fn rest_state_is_a_stable_root_of_the_default_nonlinearity() {
        let v0 = upper_rest_state();
        assert!(cubic_nonlinearity(0.0, v0).abs() < 1e-14);
        let h = 1e-6;
        let slope =
            (cubic_nonlinearity(0.0, v0 + h) - cubic_nonlinearity(0.0, v0 - h)) / (2.0 * h);
        assert!((slope + 2.0).abs() < 1e-5, "slope = {slope}");
        // The three roots of g(0,·) are −√3, 0, √3; only |v| > 1 is stable.
        let roots = stable_roots(cubic_nonlinearity, 0.0);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + v0).abs() < 1e-12 && (roots[1] - v0).abs() < 1e-12);
        // Outside the bistable band exactly one stable root survives.
        assert_eq!(stable_roots(cubic_nonlinearity, -2.0).len(), 1);
        assert_eq!(stable_roots(cubic_nonlinearity, 2.0).len(), 1);
    }

    #[test]
    fn frozen_fast_field_matches_the_event_engine_heat_solution() {
        let mut config = SlowFastConfig::new(1e-2, 0.5, 1.0, 0.1, 0.5);
        // Tight explicit step so the fixed-step integrator's own error
        // stays far below the comparison tolerance.
        config.dt = Some(0.01 * config.dx * config.dx);
        config.snapshot_times = Some(vec![0.1, 0.25, 0.5]);
        let run = simulate_frozen_v(&config).unwrap();

        // Same semi-discrete system in the event engine: line graph with
        // 1/dx² weights, all nodes permanently switched (no events), the
        // frozen v as the per-node source.
        let n = run.x.len();
        let w = 1.0 / (config.dx * config.dx);
        let lists: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                let mut row = Vec::new();
                if i > 0 {
                    row.push((i - 1, w));
                }
                if i + 1 < n {
                    row.push((i + 1, w));
                }
                row
            })
            .collect();
        let topology = LatticeTopology::from_weighted(&lists).unwrap();
        let phi = vec![0.0; n];
        let source: Vec<f64> = vec![config.v0; n];
        let v0: Vec<f64> = run.x.iter().map(|&x| -config.c * x * x).collect();
        let xi0 = vec![-1i8; n];
        let problem = RelayLatticeProblem {
            topology: &topology,
            phi: &phi,
            rho: 0.0,
            source_armed: &source,
            source_switched: &source,
            xi0: &xi0,
            v0: Some(&v0),
            t_end: 0.5,
            tol_event: 1e-9,
            tol_touch: 1e-15,
            state_cap: None,
            boundary_guard: None,
            snapshot_times: &[0.1, 0.25, 0.5],
            report_nodes: &(0..n).collect::<Vec<_>>(),
            rtol: 1e-12,
            atol: 1e-14,
            h_max: f64::INFINITY,
        };
        let oracle = engine::run(&problem).unwrap();
        for (snap, reference) in run.u.iter().zip(&oracle.snapshots) {
            let worst = snap
                .iter()
                .zip(&reference.u)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-6, "max deviation {worst}");
        }
    }

    #[test]
    fn no_fold_crossing_pins_the_fast_field_to_its_branch() {
        // Steep parabola on a narrow domain over a short horizon: the slow
        // field never reaches the positive branch's fold under either
        // cubic orientation (u stays above −2/3 for the default, below
        // +2/3 for the reflection), so v stays on its initial branch
        // everywhere. The zero-flux walls heat the outermost cells (the
        // parabola's edge gradient reflects back in), which lifts u above
        // zero near the ends; pinning is about fold distance, not sign.
        for g in [
            cubic_nonlinearity as FastNonlinearity,
            reflected_cubic_nonlinearity as FastNonlinearity,
        ] {
            let mut config = SlowFastConfig::new(1e-2, 1.0, 0.7, 0.02, 0.1);
            config.g = g;
            let run = simulate_slowfast(&config).unwrap();
            assert!(run.first_jump.is_none());
            for (u, v) in run.u.iter().zip(&run.v) {
                assert!(u.iter().all(|&u| u > -2.0 / 3.0 && u < 2.0 / 3.0));
                assert!(v.iter().all(|&v| v > 1.0));
            }
            let last_u = run.u.last().unwrap();
            let last_v = run.v.last().unwrap();
            // Wall-heated cells chase a moving branch value with an
            // O(δ·u̇) lag; on this narrow domain the heating layer covers
            // most cells, so the defect tolerance is set to the lag scale
            // rather than to the sharp post-cascade value.
            let report = branch_classify(config.g, last_u, last_v, 0.1).unwrap();
            assert!(report.labels.iter().all(|&l| l == Branch::Upper));
            assert_eq!(report.run_lengths, vec![last_u.len()]);
            assert!(report.classified_fraction > 0.999);
        }
    }

    #[test]
    fn fields_stay_even_in_x_to_the_last_bit() {
        let config = SlowFastConfig::new(1e-2, 0.5, 2.0, 0.05, 0.4);
        let run = simulate_slowfast(&config).unwrap();
        let n = run.x.len();
        for (u, v) in run.u.iter().zip(&run.v) {
            for i in 0..n {
                assert_eq!(u[i].to_bits(), u[n - 1 - i].to_bits());
                assert_eq!(v[i].to_bits(), v[n - 1 - i].to_bits());
            }
        }
    }

    #[test]
    fn alternating_pattern_emerges_and_sharpens_with_smaller_delta() {
        // Reflected cubic so that the initially occupied positive branch
        // dies at u = 2/3 under its own forcing: the parabola's crest
        // touches the fold first and a switching cascade spreads outward,
        // leaving plateaus of the two branch values on alternating
        // intervals. The domain half-length 4 keeps the zero-flux walls
        // outside the diffusive range 4·√T of the patterned region.
        let mut medians = Vec::new();
        for delta in [1e-2, 1e-3] {
            let mut config = SlowFastConfig::new(delta, 0.1, 4.0, 0.005, 0.8);
            config.g = reflected_cubic_nonlinearity;
            config.snapshot_times = Some(vec![0.6, 0.7, 0.8]);
            let run = simulate_slowfast(&config).unwrap();
            let jump = run.first_jump.expect("the crest must reach the fold");
            assert!(jump > 0.4 && jump < 0.75, "delta {delta}: jump at {jump}");
            let last_u = run.u.last().unwrap();
            let last_v = run.v.last().unwrap();
            let report = branch_classify(config.g, last_u, last_v, 1e-2).unwrap();
            let has_upper = report.labels.contains(&Branch::Upper);
            let has_lower = report.labels.contains(&Branch::Lower);
            assert!(has_upper && has_lower, "delta {delta}: no branch mixture");
            assert!(report.run_lengths.len() >= 3, "delta {delta}");
            // The label field inherits the even symmetry of the data.
            let n = report.labels.len();
            for i in 0..n {
                assert_eq!(report.labels[i], report.labels[n - 1 - i]);
            }
            if delta <= 1e-3 {
                // Sharp layers: every post-touch snapshot sits on-branch.
                for (k, &t) in run.times.iter().enumerate() {
                    let snap = branch_classify(config.g, &run.u[k], &run.v[k], 1e-2).unwrap();
                    assert!(
                        snap.classified_fraction >= 0.95,
                        "t={t}: fraction {}",
                        snap.classified_fraction
                    );
                }
                assert!(report.run_lengths.len() >= 7, "expected a layered flank");
            }
            medians.push(report.median_run());
        }
        assert!(
            2.0 * medians[1] <= medians[0],
            "interval medians did not shrink: {medians:?}"
        );
    }

    #[test]
    fn broken_step_constraints_and_runaway_dynamics_are_reported() {
        let mut config = SlowFastConfig::new(1e-2, 0.5, 1.0, 0.1, 0.2);
        config.dt = Some(0.05);
        assert!(matches!(config.validate(), Err(Error::StabilityViolation(_))));
        let mut config = SlowFastConfig::new(1e-2, 0.5, 1.0, 0.1, 0.2);
        config.dt_fast = Some(1e-2);
        assert!(matches!(config.validate(), Err(Error::StabilityViolation(_))));

        // A nonlinearity with no damping: v grows exponentially on the
        // fast scale and trips the blow-up guard.
        fn runaway(u: f64, v: f64) -> f64 {
            u + v
        }
        let mut config = SlowFastConfig::new(1e-2, 0.5, 1.0, 0.1, 0.5);
        config.g = runaway;
        config.v0 = 1.0;
        assert!(matches!(simulate_slowfast(&config), Err(Error::BlowUp(_))));
    }
}
