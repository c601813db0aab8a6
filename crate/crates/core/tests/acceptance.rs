//! Acceptance suite: thirteen numbered end-to-end checks.
//!
//! Covered: mass conservation of the source response (01), the √t
//! scaling-profile asymptotics as a trend test (02), the profile value
//! at the origin (03), the no-switching threshold of the lattice drive
//! (04), the quadratic switching-time law against the balance-equation
//! coefficient (05), the superposition oracle (06), asymptotic
//! switch-density ratios (07), rational block patterns (08), scale
//! invariance of the coefficient (09), the transverse free-boundary
//! fixed point (10), relay conformance including the divergence
//! scenario between the two relay completions (11), planar lattice
//! equivariance and switch maps (12), and slow-fast layering (13).
//!
//! Run with `cargo test -p rattling --test acceptance -- --nocapture`
//! to see one `criterion NN PASS/FAIL: …` line per check. Tolerances
//! and runtime budgets are pinned in the individual tests; expensive
//! lattice runs are shared between criteria through `OnceLock`.

use std::sync::OnceLock;
use std::time::Instant;

use rattling::analysis::{block_pattern, fit_quadratic_law, residual_exponent, switch_ratio};
use rattling::coeff::solve_a;
use rattling::engine::uniform_grid;
use rattling::green::{f_profile, green_asymptotic, green_table};
use rattling::lattice1d::{simulate, superpose_solution, LatticeConfig, SwitchRecord, Trajectory};
use rattling::lattice2d::{
    render_switch_map, simulate2d, Grid2D, LatticeKind, SWITCHED_FILL, UNSWITCHED_FILL,
};
use rattling::relay::{
    alt_relay_trace, completed_relay_admissible, relay_init, relay_trace, RelayParams,
};
use rattling::slowfast::{
    branch_classify, reflected_cubic_nonlinearity, simulate_slowfast, SlowFastConfig,
};
use rattling::transverse::{
    cell_centers, fixed_point_solve, r_map, BoundaryCurve, TransverseProblem,
};
use rattling::Signal;

/// Print the one-line verdict for a criterion, then enforce it.
fn report(id: u32, ok: bool, detail: &str) {
    println!("criterion {id:02} {}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id:02} failed: {detail}");
}

type Run = (Trajectory, Vec<SwitchRecord>);

/// Shared run for criteria 05 and 06: `c = 1/2`, `h₁ = 2`, `h₋₁ = 0`,
/// half-width 120, horizon covering the switches of nodes `|n| ≤ 60`,
/// with snapshots on a uniform grid reaching just past `t₂₀ = a·20²`.
fn quadratic_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let t20 = solve_a(0.5, 2.0).unwrap().a * 400.0;
        let mut config = LatticeConfig::new(0.5, 2.0, 0.0, 120, 6000.0);
        config.snapshot_times =
            Some((0..=89).map(|k| 1.05 * t20 * k as f64 / 89.0).collect());
        simulate(&config).unwrap()
    })
}

/// Shared run for criteria 07 and 08: `h₋₁ = −1` (density ratio 1/2),
/// half-width 200, horizon past the switch of node 200.
fn half_ratio_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| simulate(&LatticeConfig::new(0.5, 2.0, -1.0, 200, 70000.0)).unwrap())
}

/// Second run for criterion 07: `h₋₁ = −2` (density ratio 1).
fn unit_ratio_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| simulate(&LatticeConfig::new(0.5, 2.0, -2.0, 200, 70000.0)).unwrap())
}

#[test]
fn criterion_01_source_response_mass_law() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &t in &[1.0f64, 10.0, 100.0] {
        let window = (4.0 * t.sqrt() + 50.0).ceil() as usize;
        let row = &green_table(window, &[t]).unwrap().values[0];
        let total = row[0] + 2.0 * row[1..].iter().sum::<f64>();
        worst = worst.max((total - t).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-8 && elapsed < 10.0;
    report(
        1,
        ok,
        &format!(
            "max |Σₙ yₙ(t) − t| = {worst:.2e} ≤ 1e-8 over t ∈ {{1, 10, 100}} \
             with window 4√t+50 ({elapsed:.2} s < 10 s)"
        ),
    );
}

#[test]
fn criterion_02_profile_asymptotics_trend() {
    // The √t-normalized sup error of the scaling-profile approximation
    // must stay bounded and must not grow as the horizon increases.
    const BOUND: f64 = 0.5;
    let start = Instant::now();
    let mut sups = Vec::new();
    for &t in &[1e2f64, 1e3, 1e4] {
        let n_max = t.sqrt().floor() as usize;
        let row = &green_table(n_max, &[t]).unwrap().values[0];
        let mut sup = 0.0f64;
        for (n, &y) in row.iter().enumerate() {
            sup = sup.max((y - green_asymptotic(n as i64, t).unwrap()).abs() * t.sqrt());
        }
        sups.push(sup);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let bounded = sups.iter().all(|s| s.is_finite() && *s <= BOUND);
    let monotone = sups.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let ok = bounded && monotone && elapsed < 60.0;
    report(
        2,
        ok,
        &format!(
            "√t·max_(|n|≤√t) |yₙ(t) − √t·f(n/√t)| = [{:.6}, {:.6}, {:.6}] over \
             t ∈ {{1e2, 1e3, 1e4}}: bounded by {BOUND} and non-increasing \
             ({elapsed:.2} s < 60 s)",
            sups[0], sups[1], sups[2]
        ),
    );
}

#[test]
fn criterion_03_profile_origin_value() {
    let expected = 0.564_189_583_547_756_3; // 1/√π
    let got = f_profile(1e-6).unwrap();
    let dev = (got - expected).abs();
    report(
        3,
        dev <= 1e-4,
        &format!("f(1e-6) = {got:.10} vs 1/√π = {expected:.10}, |Δ| = {dev:.2e} ≤ 1e-4"),
    );
}

#[test]
fn criterion_04_critical_drive_never_spreads() {
    // At h₁ = 2c the origin switches at t = 0 by its initial
    // configuration and nothing else ever reaches the threshold.
    let start = Instant::now();
    let mut detail = String::new();
    let mut ok = true;
    for h_m1 in [0.0f64, -1.0] {
        let (_, records) = simulate(&LatticeConfig::new(0.5, 1.0, h_m1, 80, 50.0)).unwrap();
        let origin_at_zero = records.iter().any(|r| r.n == 0 && r.t_switch == 0.0);
        let others = records.iter().filter(|r| r.n != 0 && r.t_switch.is_finite()).count();
        ok &= origin_at_zero && others == 0;
        detail.push_str(&format!("h₋₁ = {h_m1}: {others} switches besides node 0; "));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 30.0;
    report(
        4,
        ok,
        &format!("c = 1/2, h₁ = 1, N = 80, T = 50 ⇒ {detail}({elapsed:.2} s < 30 s)"),
    );
}

#[test]
fn criterion_05_quadratic_switching_law() {
    let start = Instant::now();
    let (_, records) = quadratic_run();
    let a_ref = solve_a(0.5, 2.0).unwrap().a;
    let fit = fit_quadratic_law(records, None).unwrap();
    let rel = (fit.a_fit - a_ref).abs() / a_ref;
    // The fitted margin bounds every tail residual by construction.
    let margin_ok = fit.e_min.is_finite()
        && fit
            .q
            .iter()
            .all(|&(n, q)| q.abs() <= fit.e_min * (n.unsigned_abs() as f64).sqrt() * (1.0 + 1e-12));
    let slope = residual_exponent(&fit.q, 10).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = rel <= 0.05 && margin_ok && slope <= 0.6 && elapsed < 300.0;
    report(
        5,
        ok,
        &format!(
            "a_fit = {:.6} vs solved a = {a_ref:.6} (rel. dev. {rel:.2e} ≤ 5%), \
             E_min = {:.3} bounds all {} tail residuals by E_min·√n, \
             residual exponent {slope:.3} ≤ 0.6 ({elapsed:.2} s < 5 min)",
            fit.a_fit, fit.e_min, fit.n_used
        ),
    );
}

#[test]
fn criterion_06_superposition_oracle_equivalence() {
    let (trajectory, records) = quadratic_run();
    let t20 = solve_a(0.5, 2.0).unwrap().a * 400.0;
    let mut sup = 0.0f64;
    let mut samples = 0usize;
    for state in &trajectory.states {
        if state.t > t20 {
            continue;
        }
        for n in -20i64..=20 {
            let idx = trajectory.index_of(n).unwrap();
            let oracle = superpose_solution(0.5, 2.0, records, n, state.t).unwrap();
            sup = sup.max((state.u[idx] - oracle).abs());
            samples += 1;
        }
    }
    let ok = samples > 0 && sup <= 1e-5;
    report(
        6,
        ok,
        &format!(
            "sup |simulated − superposed| = {sup:.2e} ≤ 1e-5 over {samples} samples \
             with |n| ≤ 20, t ≤ t₂₀"
        ),
    );
}

#[test]
fn criterion_07_switch_density_ratios() {
    // Non-switching/switching node ratio over 20 ≤ |n| ≤ 200 (the inner
    // 10% is the guard band where the pattern has not settled).
    let start = Instant::now();
    let (_, unit_records) = unit_ratio_run();
    let (_, half_records) = half_ratio_run();
    let r_unit = switch_ratio(unit_records, 20, 200).unwrap();
    let r_half = switch_ratio(half_records, 20, 200).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (0.8..=1.25).contains(&r_unit)
        && (0.4..=0.625).contains(&r_half)
        && elapsed < 600.0;
    report(
        7,
        ok,
        &format!(
            "h₋₁ = −2 ⇒ ratio {r_unit:.4} ∈ [0.8, 1.25]; h₋₁ = −1 ⇒ ratio \
             {r_half:.4} ∈ [0.4, 0.625] ({elapsed:.1} s < 10 min)"
        ),
    );
}

#[test]
fn criterion_08_rational_block_pattern() {
    // With sources 2 and −1 the settled pattern repeats in 3-blocks of
    // exactly 2 switching nodes and 1 skipped node.
    let (_, records) = half_ratio_run();
    let tally = block_pattern(records, 2, 1, 20, 200, 2.0, -1.0).unwrap();
    let ok = tally.blocks > 0 && tally.fraction >= 0.9;
    report(
        8,
        ok,
        &format!(
            "{} of {} tail 3-blocks carry exactly 2 switching nodes \
             (fraction {:.3} ≥ 0.9)",
            tally.exact, tally.blocks, tally.fraction
        ),
    );
}

#[test]
fn criterion_09_coefficient_scale_invariance() {
    // The balance equation is homogeneous in (c, h₁): the coefficient
    // depends on h₁/c only.
    let base = solve_a(0.5, 2.0).unwrap().a;
    let mut worst = 0.0f64;
    for lambda in [0.5f64, 3.0] {
        let scaled = solve_a(lambda * 0.5, lambda * 2.0).unwrap().a;
        worst = worst.max((scaled - base).abs());
    }
    report(
        9,
        worst <= 1e-8,
        &format!("max |a(λc, λh₁) − a(c, h₁)| = {worst:.2e} ≤ 1e-8 for λ ∈ {{0.5, 3}}"),
    );
}

#[test]
fn criterion_10_transverse_fixed_point() {
    // Threshold-touching profile with slope −0.2 at b̄ = 0.5, heated on
    // the armed side only; the horizon is short enough for the boundary
    // map to contract without halving.
    let problem =
        TransverseProblem::new(0.5, -1.0, 0.0, 1.0, 0.0, 0.025, |x| 0.2 * (0.5 - x));
    let tol_fp = 1e-6;
    let solution = fixed_point_solve(&problem, tol_fp, 60).unwrap();
    let full_horizon = solution.t_end == problem.t_end;

    // Second guess: a linear ramp, iterated plainly to the same residual.
    let times = uniform_grid(problem.t_end, problem.n_steps);
    let mut b = BoundaryCurve::constant(times.clone(), problem.b_bar);
    for (k, t) in times.iter().enumerate() {
        b.b[k] = (problem.b_bar + 2.0 * t).min(1.0);
    }
    let mut gap = f64::INFINITY;
    for _ in 0..60 {
        let rb = r_map(&problem, &b).unwrap();
        if rb.sup_distance(&b).unwrap() <= tol_fp {
            gap = rb.sup_distance(&solution.boundary).unwrap();
            break;
        }
        b = rb;
    }

    // Continuity probe of the boundary map: least-squares exponent of
    // ‖R(b̄ + δ·ramp) − R(b̄)‖ against δ must reach at least 1/4.
    let mut probe = problem.clone();
    probe.n_cells = 500;
    probe.n_steps = 50;
    probe.t_end = 0.03;
    probe.phi = cell_centers(500).into_iter().map(|x| 0.2 * (0.5 - x)).collect();
    let times = uniform_grid(probe.t_end, probe.n_steps);
    let r_base = r_map(&probe, &BoundaryCurve::constant(times.clone(), probe.b_bar)).unwrap();
    let epsilons = [1e-2f64, 1e-3, 1e-4];
    let mut dists = Vec::new();
    for &eps in &epsilons {
        let mut b = BoundaryCurve::constant(times.clone(), probe.b_bar);
        for (k, t) in times.iter().enumerate() {
            b.b[k] = probe.b_bar + eps * t / probe.t_end;
        }
        dists.push(r_map(&probe, &b).unwrap().sup_distance(&r_base).unwrap());
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = dists.iter().map(|d| d.max(1e-300).ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();

    let ok = full_horizon && solution.residual <= tol_fp && gap <= 1e-5 && slope >= 0.25;
    report(
        10,
        ok,
        &format!(
            "‖R(b) − b‖ = {:.2e} ≤ 1e-6 in {} map evaluations at the full horizon, \
             two initial guesses agree to {gap:.2e} ≤ 1e-5, continuity exponent \
             {slope:.3} ≥ 1/4",
            solution.residual, solution.iterations
        ),
    );
}

#[test]
fn criterion_11_relay_conformance_divergence_scenario() {
    let p = RelayParams::standard(Some(-1.0), 1.0).unwrap();

    // Divergence scenario: the input rises to a local maximum exactly at
    // the upper threshold, dwells there, then retreats. The alternative
    // relay ramps through intermediate outputs and jumps to the lower
    // branch on departure; the completed relay accepts a constant
    // intermediate continuation for the very same input.
    let times = vec![0.0, 1.0, 2.0, 3.0, 4.0];
    let input = Signal::new(times.clone(), vec![0.0, 1.0, 1.0, 0.5, 0.0]).unwrap();
    let alt = alt_relay_trace(&p, 1, &input).unwrap();
    let va = alt.values();
    let alt_jumps =
        va[1] == 1.0 && (va[2] - 0.0).abs() < 1e-12 && va[3] == -1.0 && va[4] == -1.0;
    let constant = Signal::new(times, vec![0.2; 5]).unwrap();
    let constant_admissible = completed_relay_admissible(&p, 0.2, &input, &constant).unwrap();
    let alt_admissible = completed_relay_admissible(&p, 1.0, &input, &alt).unwrap();

    // Away from threshold dwells the two completions coincide.
    let ramp = Signal::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.9, 1.8, 2.7]).unwrap();
    let state0 = relay_init(&p, 1, 0.0).unwrap();
    let (relay_out, _) = relay_trace(&p, &state0, &ramp).unwrap();
    let alt_out = alt_relay_trace(&p, 1, &ramp).unwrap();
    let strict_agree =
        relay_out.times() == alt_out.times() && relay_out.values() == alt_out.values();

    let ok = alt_jumps && constant_admissible && alt_admissible && strict_agree;
    report(
        11,
        ok,
        &format!(
            "at a threshold local-max dwell the alternative relay passes through \
             {} and jumps to {}, while the completed relay admits a constant 0.2 \
             continuation ({constant_admissible}) and the jump output \
             ({alt_admissible}); both completions agree on a strict crossing \
             ({strict_agree})",
            va[2], va[3]
        ),
    );
}

#[test]
fn criterion_12_planar_equivariance_and_switch_maps() {
    fn rotation_defects(grid: &Grid2D) -> usize {
        let lookup = grid.index_map();
        let mut defects = 0;
        for i in 0..grid.n_nodes() {
            let (a, b) = grid.coords[i];
            let image = match grid.lattice_kind {
                LatticeKind::Square => (-b, a),       // quarter turn
                LatticeKind::Triangular => (-b, a + b), // sixth turn
            };
            let j = lookup[&image];
            if grid.switch_time[i].to_bits() != grid.switch_time[j].to_bits()
                || grid.u[i].to_bits() != grid.u[j].to_bits()
                || grid.xi[i] != grid.xi[j]
            {
                defects += 1;
            }
        }
        defects
    }

    let mut ok = true;
    let mut detail = String::new();
    for (kind, h1, t_end, fold) in [
        (LatticeKind::Square, 3.0, 350.0, 4),
        (LatticeKind::Triangular, 4.0, 550.0, 6),
    ] {
        let grid = match simulate2d(0.5, h1, -h1, kind, 60, t_end) {
            Ok(grid) => grid,
            Err(e) => {
                report(12, false, &format!("{kind:?} run failed: {e}"));
                return;
            }
        };
        let defects = rotation_defects(&grid);
        let span = grid.switched_ring_span();
        let svg = render_switch_map(&grid, grid.t_final);
        let polygons = svg.matches("<polygon").count();
        let two_tone = svg.contains(SWITCHED_FILL) && svg.contains(UNSWITCHED_FILL);
        ok &= defects == 0 && span >= 20 && polygons == grid.n_nodes() && two_tone;
        detail.push_str(&format!(
            "{:?}: {defects} defects under the 1/{fold} turn across {} nodes, \
             pattern spans {span} rings ≥ 20, map renders {polygons} two-tone \
             polygons; ",
            kind,
            grid.n_nodes()
        ));
    }
    report(12, ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_13_slow_fast_layering() {
    // Bistable fast dynamics whose initially occupied branch dies at the
    // fold: after the crest touches it, plateaus of the two stable
    // branches alternate, and the intervals shrink as δ decreases.
    let mut medians = Vec::new();
    let mut min_fraction = f64::INFINITY;
    let mut post_touch = 0usize;
    for delta in [1e-2f64, 1e-3] {
        let mut config = SlowFastConfig::new(delta, 0.1, 4.0, 0.005, 0.8);
        config.g = reflected_cubic_nonlinearity;
        config.snapshot_times = Some(vec![0.6, 0.7, 0.8]);
        let run = simulate_slowfast(&config).unwrap();
        let jump = run.first_jump.expect("the crest must reach the fold");
        if delta <= 1e-3 {
            for (k, &t) in run.times.iter().enumerate() {
                if t < jump {
                    continue;
                }
                let snap = branch_classify(config.g, &run.u[k], &run.v[k], 1e-2).unwrap();
                min_fraction = min_fraction.min(snap.classified_fraction);
                post_touch += 1;
            }
        }
        let report =
            branch_classify(config.g, run.u.last().unwrap(), run.v.last().unwrap(), 1e-2)
                .unwrap();
        medians.push(report.median_run());
    }
    let ok = post_touch > 0 && min_fraction >= 0.95 && medians[1] < medians[0];
    report(
        13,
        ok,
        &format!(
            "δ = 1e-3: {post_touch} post-touch snapshots classify ≥ \
             {min_fraction:.4} of nodes within defect 1e-2 of a stable branch \
             (≥ 0.95); median alternating-interval length {} < {} nodes as δ \
             falls from 1e-2 to 1e-3",
            medians[1], medians[0]
        ),
    );
}
