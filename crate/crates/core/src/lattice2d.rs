//! Rattling on two-dimensional lattices — square and triangular — with
//! radially quadratic initial data `u_i(0) = −c‖pos_i‖²` and the origin
//! pre-switched. The dynamics per node are the 1-D law with the plain
//! graph Laplacian: `du_i/dt = Σ_{j~i}(u_j − u_i) + H(u_i)`.
//!
//! Runs reduce to a fundamental domain of the lattice point group (D4 for
//! square, D6 for triangular) and unfold afterwards, so the reported
//! fields are equivariant to the last bit by construction. The same event
//! engine, deviation formulation, and boundary-contamination monitor as
//! the 1-D line are used.

use std::collections::{BTreeMap, HashMap};

use crate::engine::{self, BoundaryGuard, LatticeTopology, RelayLatticeProblem};
use crate::error::{Error, Result};
use crate::lattice1d::PaddingPolicy;
use crate::svg::PolygonMap;

/// Which planar lattice to simulate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    /// Integer grid, 4 neighbors, point group of order 8.
    Square,
    /// Triangular lattice in axial coordinates, 6 neighbors, point group
    /// of order 12. Embedded with unit spacing: `pos = (q + r/2, r·√3/2)`.
    Triangular,
}

impl LatticeKind {
    /// Interior neighbor count.
    pub fn degree(self) -> usize {
        match self {
            LatticeKind::Square => 4,
            LatticeKind::Triangular => 6,
        }
    }

    fn steps(self) -> &'static [(i32, i32)] {
        match self {
            LatticeKind::Square => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            LatticeKind::Triangular => {
                &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]
            }
        }
    }

    /// Graph distance from the origin.
    fn graph_dist(self, (a, b): (i32, i32)) -> u32 {
        match self {
            LatticeKind::Square => a.unsigned_abs() + b.unsigned_abs(),
            LatticeKind::Triangular => a
                .unsigned_abs()
                .max(b.unsigned_abs())
                .max((a + b).unsigned_abs()),
        }
    }

    /// Squared Euclidean norm of the embedded position (exact integer).
    fn norm2(self, (a, b): (i32, i32)) -> i64 {
        let (a, b) = (a as i64, b as i64);
        match self {
            LatticeKind::Square => a * a + b * b,
            LatticeKind::Triangular => a * a + a * b + b * b,
        }
    }

    /// Embedded position.
    fn position(self, (a, b): (i32, i32)) -> (f64, f64) {
        match self {
            LatticeKind::Square => (a as f64, b as f64),
            LatticeKind::Triangular => {
                (a as f64 + b as f64 * 0.5, b as f64 * (3.0f64.sqrt() / 2.0))
            }
        }
    }

    /// The full point-group orbit of a coordinate (with repeats on
    /// symmetry axes).
    fn orbit(self, p: (i32, i32)) -> Vec<(i32, i32)> {
        match self {
            LatticeKind::Square => {
                let (x, y) = p;
                let mut out = Vec::with_capacity(8);
                for (a, b) in [(x, y), (y, x)] {
                    for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        out.push((sa * a, sb * b));
                    }
                }
                out
            }
            LatticeKind::Triangular => {
                let rot = |(q, r): (i32, i32)| (-r, q + r);
                let mirror = |(q, r): (i32, i32)| (q + r, -r);
                let mut out = Vec::with_capacity(12);
                let mut cur = p;
                for _ in 0..6 {
                    out.push(cur);
                    out.push(mirror(cur));
                    cur = rot(cur);
                }
                out
            }
        }
    }

    /// Canonical representative: the lexicographically largest orbit
    /// member. Graph distance and norm are orbit invariants.
    fn canonical(self, p: (i32, i32)) -> (i32, i32) {
        self.orbit(p).into_iter().max().unwrap()
    }
}

impl std::fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LatticeKind::Square => write!(f, "square"),
            LatticeKind::Triangular => write!(f, "triangular"),
        }
    }
}

/// Full parameter set for a 2-D run.
#[derive(Debug, Clone)]
pub struct Lattice2dConfig {
    /// Curvature of the initial paraboloid.
    pub c: f64,
    /// Relay output before switching.
    pub h1: f64,
    /// Relay output after switching (`≤ 0`).
    pub h_m1: f64,
    pub kind: LatticeKind,
    /// Graph-ball radius of the reported node set.
    pub radius: u32,
    pub t_end: f64,
    /// Multiplier on every Laplacian edge weight (default 1).
    pub laplacian_scale: f64,
    pub padding: PaddingPolicy,
    pub tol_event: f64,
    pub tol_state: f64,
    pub boundary_margin: f64,
}

impl Lattice2dConfig {
    pub fn new(c: f64, h1: f64, h_m1: f64, kind: LatticeKind, radius: u32, t_end: f64) -> Self {
        Lattice2dConfig {
            c,
            h1,
            h_m1,
            kind,
            radius,
            t_end,
            laplacian_scale: 1.0,
            padding: PaddingPolicy::Auto,
            tol_event: 1e-9,
            tol_state: 1e-6,
            boundary_margin: (1e-4 * c * (radius as f64).powi(2)).max(1e-6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::Validation(format!("c must be positive (got {})", self.c)));
        }
        if !self.h1.is_finite() || !self.h_m1.is_finite() || self.h1 < 0.0 || self.h_m1 > 0.0 {
            return Err(Error::Validation(format!(
                "need h_m1 <= 0 <= h1 (got h1 = {}, h_m1 = {})",
                self.h1, self.h_m1
            )));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Validation(format!(
                "horizon must be positive (got {})",
                self.t_end
            )));
        }
        if !(self.laplacian_scale > 0.0) || !self.laplacian_scale.is_finite() {
            return Err(Error::Validation(format!(
                "laplacian scale must be positive (got {})",
                self.laplacian_scale
            )));
        }
        for (name, v) in [
            ("tol_event", self.tol_event),
            ("tol_state", self.tol_state),
            ("boundary_margin", self.boundary_margin),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be positive (got {v})")));
            }
        }
        Ok(())
    }
}

/// A completed 2-D run: the reported graph ball with per-node state.
///
/// Nodes are sorted by (graph distance, coordinate) — a deterministic
/// order shared by CSV and SVG output.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub lattice_kind: LatticeKind,
    pub radius: u32,
    /// Integer lattice coordinates per node (axial for triangular).
    pub coords: Vec<(i32, i32)>,
    /// Embedded positions per node.
    pub positions: Vec<(f64, f64)>,
    /// Neighbor lists within the reported ball.
    pub adjacency: Vec<Vec<usize>>,
    /// Value per node at the end of the run.
    pub u: Vec<f64>,
    /// Relay configuration per node at the end of the run.
    pub xi: Vec<i8>,
    /// First switching time per node (`∞` if the node never switched;
    /// `0` at the pre-switched origin).
    pub switch_time: Vec<f64>,
    pub t_final: f64,
}

impl Grid2D {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    /// Graph distance of node `i` from the origin.
    pub fn ring(&self, i: usize) -> u32 {
        self.lattice_kind.graph_dist(self.coords[i])
    }

    /// Largest graph distance reached by any switched node.
    pub fn switched_ring_span(&self) -> u32 {
        (0..self.n_nodes())
            .filter(|&i| self.switch_time[i].is_finite())
            .map(|i| self.ring(i))
            .max()
            .unwrap_or(0)
    }

    /// Coordinate-to-index lookup.
    pub fn index_map(&self) -> HashMap<(i32, i32), usize> {
        self.coords.iter().enumerate().map(|(i, &c)| (c, i)).collect()
    }
}

fn ball_coords(kind: LatticeKind, radius: u32) -> Vec<(i32, i32)> {
    let r = radius as i32;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            if kind.graph_dist((a, b)) <= radius {
                out.push((a, b));
            }
        }
    }
    out.sort_by_key(|&c| (kind.graph_dist(c), c));
    out
}

/// Simulate on the graph ball of the given radius. The reported ball is
/// embedded in a padded build region (under [`PaddingPolicy::Auto`]) so
/// the zero-flux truncation cannot influence reported nodes; the same
/// edge monitor as the 1-D line reports [`Error::BoundaryContamination`]
/// otherwise.
pub fn simulate2d_with(config: &Lattice2dConfig) -> Result<Grid2D> {
    config.validate()?;
    let kind = config.kind;
    let pad = match config.padding {
        PaddingPolicy::Auto => {
            (6.0 * (config.laplacian_scale * config.t_end).sqrt()).ceil() as u32 + 50
        }
        PaddingPolicy::Off => 0,
    };
    let r_build = config.radius + pad;

    // Fundamental domain: canonical representatives of the build ball.
    let mut reps: Vec<(i32, i32)> = Vec::new();
    let mut rep_index: HashMap<(i32, i32), usize> = HashMap::new();
    for &coord in &ball_coords(kind, r_build) {
        if kind.canonical(coord) == coord {
            rep_index.insert(coord, reps.len());
            reps.push(coord);
        }
    }
    let n = reps.len();

    // Reduced Laplacian: each representative keeps its full-lattice
    // stencil, with neighbors folded onto their representatives
    // (multiplicities accumulate as edge weights).
    let mut lists: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for &p in &reps {
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        for &(da, db) in kind.steps() {
            let q = (p.0 + da, p.1 + db);
            if kind.graph_dist(q) > r_build {
                continue;
            }
            let j = rep_index[&kind.canonical(q)];
            *row.entry(j).or_insert(0.0) += config.laplacian_scale;
        }
        lists.push(row.into_iter().filter(|&(j, _)| j != rep_index[&p]).collect());
    }
    let topology = LatticeTopology::from_weighted(&lists)?;

    let phi: Vec<f64> = reps.iter().map(|&p| -config.c * kind.norm2(p) as f64).collect();
    let rho = config.h1 - config.c * kind.degree() as f64 * config.laplacian_scale;
    let source_armed = vec![0.0; n];
    let source_switched = vec![config.h_m1 - config.h1; n];
    let mut xi0 = vec![1i8; n];
    let origin = rep_index[&(0, 0)];
    xi0[origin] = -1;

    let mut bands: Vec<Vec<usize>> = Vec::new();
    for shell in r_build.saturating_sub(4)..=r_build {
        let band: Vec<usize> = (0..n)
            .filter(|&i| kind.graph_dist(reps[i]) == shell)
            .collect();
        if !band.is_empty() {
            bands.push(band);
        }
    }
    let guard = BoundaryGuard { bands, margin: config.boundary_margin };

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
        snapshot_times: &[],
        report_nodes: &[],
        rtol: 1e-10,
        atol: 1e-12,
        h_max: f64::INFINITY,
    };
    let out = engine::run(&problem)?;

    // Unfold onto the reported ball.
    let coords = ball_coords(kind, config.radius);
    let report_index: HashMap<(i32, i32), usize> =
        coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut positions = Vec::with_capacity(coords.len());
    let mut adjacency = Vec::with_capacity(coords.len());
    let mut u = Vec::with_capacity(coords.len());
    let mut xi = Vec::with_capacity(coords.len());
    let mut switch_time = Vec::with_capacity(coords.len());
    for &coord in &coords {
        let rep = rep_index[&kind.canonical(coord)];
        positions.push(kind.position(coord));
        let mut nbrs: Vec<usize> = kind
            .steps()
            .iter()
            .filter_map(|&(da, db)| report_index.get(&(coord.0 + da, coord.1 + db)).copied())
            .collect();
        nbrs.sort_unstable();
        adjacency.push(nbrs);
        u.push(phi[rep] + rho * out.t_final + out.v_final[rep]);
        xi.push(out.xi_final[rep]);
        switch_time.push(if rep == origin { 0.0 } else { out.switch_times[rep] });
    }

    Ok(Grid2D {
        lattice_kind: kind,
        radius: config.radius,
        coords,
        positions,
        adjacency,
        u,
        xi,
        switch_time,
        t_final: out.t_final,
    })
}

/// [`simulate2d_with`] under default tolerances and automatic padding.
pub fn simulate2d(
    c: f64,
    h1: f64,
    h_m1: f64,
    kind: LatticeKind,
    radius: u32,
    t_end: f64,
) -> Result<Grid2D> {
    simulate2d_with(&Lattice2dConfig::new(c, h1, h_m1, kind, radius, t_end))
}

/// Fill used for nodes that have switched by the rendering time.
pub const SWITCHED_FILL: &str = "#9aa0a6";
/// Fill used for nodes that have not switched yet.
pub const UNSWITCHED_FILL: &str = "#141414";

/// Render the switched-by-`t` map: one polygon per node (unit squares, or
/// unit-tiling hexagons for the triangular lattice), two-tone fill,
/// deterministic layout and order.
pub fn render_switch_map(grid: &Grid2D, t: f64) -> String {
    let mut map = PolygonMap::new(&format!(
        "{} lattice, radius {}, switched set at t = {}",
        grid.lattice_kind,
        grid.radius,
        crate::svg::fmt_label(t)
    ));
    for i in 0..grid.n_nodes() {
        let (x, y) = grid.positions[i];
        let pts: Vec<(f64, f64)> = match grid.lattice_kind {
            LatticeKind::Square => vec![
                (x - 0.5, y - 0.5),
                (x + 0.5, y - 0.5),
                (x + 0.5, y + 0.5),
                (x - 0.5, y + 0.5),
            ],
            LatticeKind::Triangular => {
                let rad = 1.0 / 3.0f64.sqrt();
                (0..6)
                    .map(|k| {
                        let th = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / 6.0;
                        (x + rad * th.cos(), y + rad * th.sin())
                    })
                    .collect()
            }
        };
        let fill = if grid.switch_time[i] <= t { SWITCHED_FILL } else { UNSWITCHED_FILL };
        map.polygon(&pts, fill);
    }
    map.render()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_representatives_are_orbit_invariants() {
        for kind in [LatticeKind::Square, LatticeKind::Triangular] {
            let order = if kind == LatticeKind::Square { 8 } else { 12 };
            for p in [(0, 0), (3, 0), (2, 2), (5, -3), (-4, 1), (0, -6)] {
                let canon = kind.canonical(p);
                let orbit = kind.orbit(p);
                assert_eq!(orbit.len(), order);
                for &q in &orbit {
                    assert_eq!(kind.canonical(q), canon, "{kind} {p:?} vs {q:?}");
                    assert_eq!(kind.norm2(q), kind.norm2(p));
                    assert_eq!(kind.graph_dist(q), kind.graph_dist(p));
                }
                // On the square lattice a unit step always flips the
                // coordinate-sum parity, so it never stays in one orbit.
                if kind == LatticeKind::Square {
                    for &(da, db) in kind.steps() {
                        assert_ne!(kind.canonical((p.0 + da, p.1 + db)), canon);
                    }
                }
            }
        }
        // The triangular lattice does have same-orbit neighbors — the
        // reduced stencil must drop these edges (their contribution to
        // the Laplacian of a symmetric field is exactly zero).
        let tri = LatticeKind::Triangular;
        assert_eq!(tri.canonical((5, -3)), tri.canonical((5, -2)));
    }

    #[test]
    fn interior_nodes_have_full_degree_and_states_stay_capped() {
        for (kind, h1) in [(LatticeKind::Square, 2.6), (LatticeKind::Triangular, 3.6)] {
            let grid = simulate2d(0.5, h1, -h1, kind, 6, 8.0).unwrap();
            assert_eq!(grid.switch_time[0], 0.0, "origin is pre-switched");
            assert_eq!(grid.coords[0], (0, 0));
            for i in 0..grid.n_nodes() {
                if grid.ring(i) < grid.radius {
                    assert_eq!(grid.adjacency[i].len(), kind.degree(), "node {i}");
                } else {
                    assert!(grid.adjacency[i].len() < kind.degree());
                }
                assert!(grid.u[i] <= 1e-6, "u[{i}] = {}", grid.u[i]);
                assert_eq!(grid.xi[i] == -1, grid.switch_time[i].is_finite());
            }
        }
    }

    #[test]
    fn no_switches_at_or_below_the_degree_threshold() {
        // The empirical switching threshold in h1 sits at c·degree (the
        // drive that balances the Laplacian of the paraboloid): at or
        // below it only the pre-switched origin appears, just above it
        // the first ring goes.
        for (kind, at, above) in [
            (LatticeKind::Square, 2.0, 2.4),
            (LatticeKind::Triangular, 3.0, 3.6),
        ] {
            let grid = simulate2d(0.5, at, 0.0, kind, 8, 40.0).unwrap();
            let switched = grid.switch_time.iter().filter(|t| t.is_finite()).count();
            assert_eq!(switched, 1, "{kind} at threshold");
            let grid = simulate2d(0.5, above, 0.0, kind, 8, 40.0).unwrap();
            assert!(grid.switched_ring_span() >= 1, "{kind} above threshold");
        }
    }

    #[test]
    fn switch_maps_are_exactly_equivariant_and_alternate() {
        for (kind, h1, radius, t_end) in [
            (LatticeKind::Square, 2.5, 8, 30.0),
            (LatticeKind::Triangular, 3.5, 7, 25.0),
        ] {
            let grid = simulate2d(0.5, h1, -h1, kind, radius, t_end).unwrap();
            let lookup = grid.index_map();
            for i in 0..grid.n_nodes() {
                for image in kind.orbit(grid.coords[i]) {
                    let j = lookup[&image];
                    assert_eq!(grid.u[i].to_bits(), grid.u[j].to_bits());
                    assert_eq!(
                        grid.switch_time[i].to_bits(),
                        grid.switch_time[j].to_bits()
                    );
                    assert_eq!(grid.xi[i], grid.xi[j]);
                }
            }
            // Oscillatory sources leave holes behind the front: some node
            // closer in than the furthest switched one stays unswitched.
            let span = grid.switched_ring_span();
            assert!(span >= 3, "{kind}: span = {span}");
            let hole = (0..grid.n_nodes())
                .any(|i| !grid.switch_time[i].is_finite() && grid.ring(i) < span);
            assert!(hole, "{kind}: switched set is a filled ball");
        }
    }

    #[test]
    fn switch_map_rendering_is_two_tone_and_total() {
        let grid = simulate2d(0.5, 2.5, 0.0, LatticeKind::Square, 0, 1.0).unwrap();
        assert_eq!(grid.n_nodes(), 1);
        let svg = render_switch_map(&grid, 1.0);
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches(SWITCHED_FILL).count(), 1);

        let grid = simulate2d(0.5, 3.5, -3.5, LatticeKind::Triangular, 4, 10.0).unwrap();
        let svg = render_switch_map(&grid, grid.t_final);
        assert_eq!(svg.matches("<polygon").count(), grid.n_nodes());
        assert_eq!(svg, render_switch_map(&grid, grid.t_final));
        // Before anything switches the map is uniformly unswitched except
        // the origin.
        let early = render_switch_map(&grid, 0.0);
        assert_eq!(early.matches(SWITCHED_FILL).count(), 1);
        assert_eq!(early.matches(UNSWITCHED_FILL).count(), grid.n_nodes() - 1);
    }
}
