//! Command execution: each resolved command runs its core-library
//! computation and emits deterministic artifacts into the output directory.
//!
//! Input files (signals, switch-time tables, initial profiles) are plain
//! text: blank lines and `#` comments are skipped, and a leading
//! non-numeric line is treated as a header. All numeric output goes through
//! [`output::fnum`] so repeated runs with the same configuration are
//! byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use rattling::analysis::{
    block_pattern, fit_quadratic_law_with_tail, rational_block_shape, residual_exponent,
    switch_ratio,
};
use rattling::coeff::{solve_a, verify_hypothesis, SOLVE_A_RESIDUAL_TOL};
use rattling::green::{green_table, TOL_GREEN};
use rattling::lattice1d::{simulate, LatticeConfig, SwitchRecord, Trajectory};
use rattling::lattice2d::{render_switch_map, simulate2d, Grid2D};
use rattling::relay::{alt_relay_trace, relay_init, relay_trace_events, RelayParams};
use rattling::slowfast::{
    branch_classify, cubic_nonlinearity, reflected_cubic_nonlinearity, simulate_slowfast,
    SlowFastConfig,
};
use rattling::transverse::{fixed_point_solve, TransverseProblem};
use rattling::Signal;

use crate::config::{
    kind_name, CommandConfig, Nonlinearity, RelayVariant, RunConfig,
};
use crate::figures;
use crate::output::{fnum, write_atomic, Csv};
use crate::CliError;

/// Execute a resolved run: create the output directory and dispatch.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&config.output_dir).map_err(|e| {
        CliError::Io(format!(
            "cannot create output directory {}: {e}",
            config.output_dir.display()
        ))
    })?;
    let dir = &config.output_dir;
    match &config.command {
        CommandConfig::SolveA { c, h1 } => solve_a_cmd(dir, *c, *h1),
        CommandConfig::Green { t, n_max } => green_cmd(dir, t, *n_max),
        CommandConfig::Verify {
            c,
            h1,
            h_m1,
            n0,
            e_bound,
            n,
            t_end,
        } => verify_cmd(dir, *c, *h1, *h_m1, *n0, *e_bound, *n, *t_end),
        CommandConfig::Simulate1d {
            c,
            h1,
            h_m1,
            n,
            t_end,
            snapshots,
        } => simulate1d_cmd(dir, *c, *h1, *h_m1, *n, *t_end, *snapshots),
        CommandConfig::Simulate2d {
            c,
            h1,
            h_m1,
            kind,
            radius,
            t_end,
            map_time,
        } => simulate2d_cmd(dir, *c, *h1, *h_m1, *kind, *radius, *t_end, *map_time),
        CommandConfig::Slowfast {
            delta,
            c,
            l,
            dx,
            t_end,
            nonlinearity,
            v0,
            perturb,
            snapshots,
            defect_tol,
        } => slowfast_cmd(
            dir,
            *delta,
            *c,
            *l,
            *dx,
            *t_end,
            *nonlinearity,
            *v0,
            *perturb,
            snapshots.clone(),
            *defect_tol,
        ),
        CommandConfig::Transverse {
            phi,
            bbar,
            alpha,
            beta,
            h1,
            h_m1,
            t_end,
            cells,
            steps,
            tol_fp,
            max_iter,
        } => transverse_cmd(
            dir, phi, *bbar, *alpha, *beta, *h1, *h_m1, *t_end, *cells, *steps, *tol_fp,
            *max_iter,
        ),
        CommandConfig::Relay {
            input,
            beta,
            alpha,
            xi0,
            variant,
        } => relay_cmd(dir, input, *beta, *alpha, *xi0, *variant),
        CommandConfig::Analyze {
            records,
            h1,
            h_m1,
            tail_start,
            j_min,
            j_max,
            a_hint,
        } => analyze_cmd(dir, records, *h1, *h_m1, *tail_start, *j_min, *j_max, *a_hint),
        CommandConfig::Reproduce { figure } => figures::reproduce(dir, *figure),
    }
}

// ---------------------------------------------------------------------
// input parsing

/// Data lines of a text input: blank lines and `#` comments skipped, a
/// leading non-numeric line treated as a header. Returns `(line_no, text)`.
fn data_lines(path: &Path) -> Result<Vec<(usize, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines: Vec<(usize, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((i + 1, trimmed.to_string()));
    }
    if let Some((_, first)) = lines.first() {
        let leading = first.split(',').next().unwrap_or("").trim();
        if leading.parse::<f64>().is_err() {
            lines.remove(0);
        }
    }
    Ok(lines)
}

fn parse_num<T: std::str::FromStr>(
    field: &str,
    what: &str,
    path: &Path,
    line_no: usize,
) -> Result<T, CliError> {
    field.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "{}:{line_no}: cannot parse `{}` as {what}",
            path.display(),
            field.trim()
        ))
    })
}

/// Read a two-column `t,u` signal file.
fn read_signal(path: &Path) -> Result<Signal, CliError> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line_no, line) in data_lines(path)? {
        let mut fields = line.split(',');
        let (Some(t), Some(u), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CliError::Usage(format!(
                "{}:{line_no}: expected two comma-separated fields t,u",
                path.display()
            )));
        };
        times.push(parse_num(t, "a time", path, line_no)?);
        values.push(parse_num(u, "a value", path, line_no)?);
    }
    if times.is_empty() {
        return Err(CliError::Usage(format!(
            "input signal {} has no data rows",
            path.display()
        )));
    }
    Ok(Signal::new(times, values)?)
}

/// Read a two-column `n,t_switch` switch-time table (as written by
/// `simulate1d`); `inf` marks nodes that never switched.
fn read_records(path: &Path) -> Result<Vec<SwitchRecord>, CliError> {
    let mut records = Vec::new();
    for (line_no, line) in data_lines(path)? {
        let mut fields = line.split(',');
        let (Some(n), Some(t), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CliError::Usage(format!(
                "{}:{line_no}: expected two comma-separated fields n,t_switch",
                path.display()
            )));
        };
        records.push(SwitchRecord {
            n: parse_num(n, "a node index", path, line_no)?,
            t_switch: parse_num(t, "a switch time", path, line_no)?,
        });
    }
    if records.is_empty() {
        return Err(CliError::Usage(format!(
            "switch-time table {} has no data rows",
            path.display()
        )));
    }
    Ok(records)
}

/// Read an initial profile: one value per line, exactly `cells` of them.
fn read_profile(path: &Path, cells: usize) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    for (line_no, line) in data_lines(path)? {
        values.push(parse_num::<f64>(&line, "a profile value", path, line_no)?);
    }
    if values.len() != cells {
        return Err(CliError::Usage(format!(
            "profile {} has {} values but the mesh has {cells} cells; \
             supply one value per cell center",
            path.display(),
            values.len()
        )));
    }
    Ok(values)
}

// ---------------------------------------------------------------------
// commands

fn solve_a_cmd(dir: &Path, c: f64, h1: f64) -> Result<(), CliError> {
    let root = solve_a(c, h1)?;
    let mut txt = Csv::new("solve-a");
    txt.meta_f("c", c)
        .meta_f("h1", h1)
        .meta_f("residual-tol", SOLVE_A_RESIDUAL_TOL);
    txt.line(&format!("a = {}", fnum(root.a)))
        .line(&format!("residual = {}", fnum(root.residual)))
        .line(&format!("bracket-lo = {}", fnum(root.bracket.0)))
        .line(&format!("bracket-hi = {}", fnum(root.bracket.1)));
    let path = write_atomic(dir, "solve_a.txt", &txt.into_string())?;
    println!("a = {} (residual {:.3e})", fnum(root.a), root.residual);
    println!("wrote {}", path.display());
    Ok(())
}

fn green_cmd(dir: &Path, t: &[f64], n_max: usize) -> Result<(), CliError> {
    let table = green_table(n_max, t)?;
    let mut csv = Csv::new("green");
    csv.meta("n-max", n_max.to_string())
        .meta("t", join_f(t))
        .meta_f("tol-green", TOL_GREEN);
    csv.header("t,n,y");
    for (i, &ti) in table.times.iter().enumerate() {
        for (n, &y) in table.values[i].iter().enumerate() {
            csv.row(&[fnum(ti), n.to_string(), fnum(y)]);
        }
    }
    let path = write_atomic(dir, "green.csv", &csv.into_string())?;
    println!(
        "tabulated y_n(t) for 0 <= n <= {n_max} at {} times",
        table.times.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn verify_cmd(
    dir: &Path,
    c: f64,
    h1: f64,
    h_m1: f64,
    n0: usize,
    e_bound: f64,
    n: Option<usize>,
    t_end: Option<f64>,
) -> Result<(), CliError> {
    let root = solve_a(c, h1)?;
    let n = n.unwrap_or((n0 + 5).max(10));
    let t_end = t_end.unwrap_or(1.05 * root.a * (n0 * n0) as f64);
    let config = LatticeConfig::new(c, h1, h_m1, n, t_end);
    let (_, records) = simulate(&config)?;
    let report = verify_hypothesis(c, h1, root.a, e_bound, n0, &records)?;

    let mut txt = Csv::new("verify");
    txt.meta_f("c", c)
        .meta_f("h1", h1)
        .meta_f("h-m1", h_m1)
        .meta("n0", n0.to_string())
        .meta_f("e-bound", e_bound)
        .meta("n", n.to_string())
        .meta_f("t-end", t_end)
        .meta_f("boundary-margin", config.boundary_margin);
    txt.line(&format!("a = {}", fnum(root.a)))
        .line(&format!("e-min = {}", fnum(report.max_normalized_residual)))
        .line(&format!("verdict = {}", report.verdict));
    let txt_path = write_atomic(dir, "verify.txt", &txt.into_string())?;

    let mut csv = Csv::new("verify");
    csv.meta_f("a", root.a).meta_f("e-bound", e_bound);
    csv.header("n,t_switch,q,normalized");
    for (i, &t_n) in report.switch_times.iter().enumerate() {
        let node = (i + 1) as f64;
        let q = t_n - root.a * node * node;
        csv.row(&[
            (i + 1).to_string(),
            fnum(t_n),
            fnum(q),
            fnum(q.abs() / node.sqrt()),
        ]);
    }
    let csv_path = write_atomic(dir, "verify.csv", &csv.into_string())?;

    println!(
        "law |t_n - a n^2| <= E sqrt(n) on 1..={n0}: {} (E_min = {}, bound {})",
        if report.verdict { "holds" } else { "exceeded" },
        fnum(report.max_normalized_residual),
        fnum(e_bound)
    );
    println!("wrote {}", txt_path.display());
    println!("wrote {}", csv_path.display());
    Ok(())
}

/// Shared switch-time emission for `simulate1d` and the figure recipes.
pub fn write_switch_times(
    dir: &Path,
    name: &str,
    config: &LatticeConfig,
    records: &[SwitchRecord],
) -> Result<PathBuf, CliError> {
    let mut csv = Csv::new("simulate1d");
    csv.meta_f("c", config.c)
        .meta_f("h1", config.h1)
        .meta_f("h-m1", config.h_m1)
        .meta("n", config.n.to_string())
        .meta_f("t-end", config.t_end)
        .meta_f("tol-event", config.tol_event)
        .meta_f("tol-state", config.tol_state)
        .meta_f("boundary-margin", config.boundary_margin);
    csv.header("n,t_switch");
    let mut sorted: Vec<&SwitchRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.n);
    for record in sorted {
        csv.row(&[record.n.to_string(), fnum(record.t_switch)]);
    }
    write_atomic(dir, name, &csv.into_string())
}

/// Shared snapshot emission for `simulate1d` and the figure recipes.
pub fn write_snapshots(
    dir: &Path,
    name: &str,
    config: &LatticeConfig,
    trajectory: &Trajectory,
) -> Result<PathBuf, CliError> {
    let mut csv = Csv::new("simulate1d");
    csv.meta_f("c", config.c)
        .meta_f("h1", config.h1)
        .meta_f("h-m1", config.h_m1)
        .meta("n", config.n.to_string())
        .meta_f("t-end", config.t_end);
    csv.header("t,n,u,xi");
    let half = trajectory.n as i64;
    for state in &trajectory.states {
        for idx in 0..state.u.len() {
            let node = idx as i64 - half;
            csv.row(&[
                fnum(state.t),
                node.to_string(),
                fnum(state.u[idx]),
                state.xi[idx].to_string(),
            ]);
        }
    }
    write_atomic(dir, name, &csv.into_string())
}

fn simulate1d_cmd(
    dir: &Path,
    c: f64,
    h1: f64,
    h_m1: f64,
    n: usize,
    t_end: f64,
    snapshots: Option<usize>,
) -> Result<(), CliError> {
    let mut config = LatticeConfig::new(c, h1, h_m1, n, t_end);
    if let Some(k) = snapshots.filter(|&k| k > 0) {
        config.snapshot_times =
            Some((1..=k).map(|i| t_end * i as f64 / k as f64).collect());
    }
    let (trajectory, records) = simulate(&config)?;

    let switch_path = write_switch_times(dir, "switch_times.csv", &config, &records)?;
    let switched = records.iter().filter(|r| r.t_switch.is_finite()).count();
    println!(
        "{switched} of {} reported nodes switched within t = {}",
        records.len(),
        fnum(t_end)
    );
    println!("wrote {}", switch_path.display());

    if snapshots.filter(|&k| k > 0).is_some() {
        let snap_path = write_snapshots(dir, "snapshots.csv", &config, &trajectory)?;
        println!("wrote {}", snap_path.display());
    }
    Ok(())
}

/// Shared lattice-table emission for `simulate2d` and the figure recipes.
pub fn write_grid_csv(
    dir: &Path,
    name: &str,
    grid: &Grid2D,
    params: &[(&str, f64)],
) -> Result<PathBuf, CliError> {
    let mut csv = Csv::new("simulate2d");
    for (key, value) in params {
        csv.meta_f(key, *value);
    }
    csv.meta("kind", kind_name(grid.lattice_kind))
        .meta("radius", grid.radius.to_string())
        .meta_f("t-end", grid.t_final);
    csv.header("a,b,ring,x,y,t_switch,xi,u");
    for i in 0..grid.n_nodes() {
        let (a, b) = grid.coords[i];
        let (x, y) = grid.positions[i];
        csv.row(&[
            a.to_string(),
            b.to_string(),
            grid.ring(i).to_string(),
            fnum(x),
            fnum(y),
            fnum(grid.switch_time[i]),
            grid.xi[i].to_string(),
            fnum(grid.u[i]),
        ]);
    }
    write_atomic(dir, name, &csv.into_string())
}

#[allow(clippy::too_many_arguments)]
fn simulate2d_cmd(
    dir: &Path,
    c: f64,
    h1: f64,
    h_m1: f64,
    kind: rattling::lattice2d::LatticeKind,
    radius: u32,
    t_end: f64,
    map_time: Option<f64>,
) -> Result<(), CliError> {
    let grid = simulate2d(c, h1, h_m1, kind, radius, t_end)?;
    let csv_path = write_grid_csv(
        dir,
        "lattice2d.csv",
        &grid,
        &[("c", c), ("h1", h1), ("h-m1", h_m1)],
    )?;
    let t_map = map_time.unwrap_or(grid.t_final);
    let svg_path = write_atomic(dir, "switch_map.svg", &render_switch_map(&grid, t_map))?;

    let switched = grid.switch_time.iter().filter(|t| t.is_finite()).count();
    println!(
        "{} lattice: {switched} of {} nodes switched, ring span {} of {}",
        kind_name(grid.lattice_kind),
        grid.n_nodes(),
        grid.switched_ring_span(),
        grid.radius
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn slowfast_cmd(
    dir: &Path,
    delta: f64,
    c: f64,
    l: f64,
    dx: f64,
    t_end: f64,
    nonlinearity: Nonlinearity,
    v0: Option<f64>,
    perturb: Option<f64>,
    snapshots: Option<Vec<f64>>,
    defect_tol: f64,
) -> Result<(), CliError> {
    let mut config = SlowFastConfig::new(delta, c, l, dx, t_end);
    config.g = match nonlinearity {
        Nonlinearity::Cubic => cubic_nonlinearity,
        Nonlinearity::ReflectedCubic => reflected_cubic_nonlinearity,
    };
    if let Some(v0) = v0 {
        config.v0 = v0;
    }
    if let Some(perturb) = perturb {
        config.perturb = perturb;
    }
    if let Some(snapshots) = snapshots {
        config.snapshot_times = Some(snapshots);
    }
    let run = simulate_slowfast(&config)?;
    let first_jump = match run.first_jump {
        Some(t) => fnum(t),
        None => "none".to_string(),
    };

    let mut csv = Csv::new("slowfast");
    csv.meta_f("delta", delta)
        .meta_f("c", c)
        .meta_f("l", l)
        .meta_f("dx", dx)
        .meta_f("t-end", t_end)
        .meta("nonlinearity", nonlinearity.name())
        .meta_f("v0", config.v0)
        .meta_f("perturb", config.perturb)
        .meta("first-jump", &first_jump);
    csv.header("t,x,u,v");
    for (k, &t) in run.times.iter().enumerate() {
        for (i, &x) in run.x.iter().enumerate() {
            csv.row(&[fnum(t), fnum(x), fnum(run.u[k][i]), fnum(run.v[k][i])]);
        }
    }
    let state_path = write_atomic(dir, "slowfast.csv", &csv.into_string())?;

    let last = run.times.len() - 1;
    let report = branch_classify(config.g, &run.u[last], &run.v[last], defect_tol)?;
    let mut branches = Csv::new("slowfast");
    branches
        .meta_f("snapshot-time", run.times[last])
        .meta_f("defect-tol", defect_tol)
        .meta_f("classified-fraction", report.classified_fraction)
        .meta_f("median-run", report.median_run())
        .meta("first-jump", &first_jump);
    branches.header("x,branch,defect,nearest");
    for i in 0..run.x.len() {
        branches.row(&[
            fnum(run.x[i]),
            report.labels[i].to_string(),
            fnum(report.defect[i]),
            fnum(report.nearest_root[i]),
        ]);
    }
    let branch_path = write_atomic(dir, "branches.csv", &branches.into_string())?;

    println!(
        "first jump at {first_jump}; final snapshot: {:.1}% on-branch, median run {} nodes",
        100.0 * report.classified_fraction,
        report.median_run()
    );
    println!("wrote {}", state_path.display());
    println!("wrote {}", branch_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn transverse_cmd(
    dir: &Path,
    phi_path: &Path,
    bbar: f64,
    alpha: f64,
    beta: f64,
    h1: f64,
    h_m1: f64,
    t_end: f64,
    cells: usize,
    steps: Option<usize>,
    tol_fp: f64,
    max_iter: usize,
) -> Result<(), CliError> {
    let phi = read_profile(phi_path, cells)?;
    let mut problem = TransverseProblem::new(bbar, alpha, beta, h1, h_m1, t_end, |_| 0.0);
    problem.n_cells = cells;
    problem.n_steps = steps.unwrap_or(((t_end * cells as f64).ceil() as usize).max(16));
    problem.phi = phi;
    let solution = fixed_point_solve(&problem, tol_fp, max_iter)?;

    let mut boundary = Csv::new("transverse");
    boundary
        .meta_f("bbar", bbar)
        .meta_f("alpha", alpha)
        .meta_f("beta", beta)
        .meta_f("h1", h1)
        .meta_f("h-m1", h_m1)
        .meta_f("t-end-requested", t_end)
        .meta("cells", cells.to_string())
        .meta("steps", problem.n_steps.to_string())
        .meta_f("tol-fp", tol_fp)
        .meta("max-iter", max_iter.to_string())
        .meta_f("t-end-solved", solution.t_end)
        .meta_f("residual", solution.residual)
        .meta_f("lambda", solution.lambda)
        .meta("iterations", solution.iterations.to_string());
    boundary.header("t,b,root");
    for k in 0..solution.boundary.times.len() {
        let root = match solution.boundary.a[k] {
            Some(a) => fnum(a),
            None => "nan".to_string(),
        };
        boundary.row(&[
            fnum(solution.boundary.times[k]),
            fnum(solution.boundary.b[k]),
            root,
        ]);
    }
    let boundary_path = write_atomic(dir, "boundary.csv", &boundary.into_string())?;

    let mut field = Csv::new("transverse");
    field
        .meta_f("t-end-solved", solution.t_end)
        .meta("cells", cells.to_string());
    field.header("t,x,u");
    let n_times = solution.u.times.len();
    let level_indices: Vec<usize> = if n_times <= 11 {
        (0..n_times).collect()
    } else {
        let mut picked: Vec<usize> = (0..=10).map(|j| j * (n_times - 1) / 10).collect();
        picked.dedup();
        picked
    };
    for &k in &level_indices {
        for (i, &x) in solution.u.x.iter().enumerate() {
            field.row(&[fnum(solution.u.times[k]), fnum(x), fnum(solution.u.u[k][i])]);
        }
    }
    let field_path = write_atomic(dir, "field.csv", &field.into_string())?;

    let mut log = Csv::new("transverse");
    log.meta_f("tol-fp", tol_fp)
        .meta("max-iter", max_iter.to_string());
    log.header("evaluation,sup_u,sup_ux");
    for (k, probe) in solution.regularity.iter().enumerate() {
        log.row(&[(k + 1).to_string(), fnum(probe.sup_u), fnum(probe.sup_ux)]);
    }
    let log_path = write_atomic(dir, "iterations.csv", &log.into_string())?;

    let halved = if solution.t_end < t_end {
        format!(" (horizon halved from {})", fnum(t_end))
    } else {
        String::new()
    };
    println!(
        "converged to residual {} in {} map evaluations on [0, {}]{halved}",
        fnum(solution.residual),
        solution.iterations,
        fnum(solution.t_end)
    );
    println!("wrote {}", boundary_path.display());
    println!("wrote {}", field_path.display());
    println!("wrote {}", log_path.display());
    Ok(())
}

fn relay_cmd(
    dir: &Path,
    input_path: &Path,
    beta: f64,
    alpha: Option<f64>,
    xi0: i8,
    variant: RelayVariant,
) -> Result<(), CliError> {
    let input = read_signal(input_path)?;
    let params = RelayParams::standard(alpha, beta)?;
    let alpha_text = match alpha {
        Some(a) => fnum(a),
        None => "none".to_string(),
    };

    let mut csv = Csv::new("relay");
    csv.meta_f("beta", beta)
        .meta("alpha", &alpha_text)
        .meta("xi0", xi0.to_string())
        .meta("variant", variant.name());

    let (output, summary) = match variant {
        RelayVariant::Relay => {
            let state0 = relay_init(&params, xi0, input.values()[0])?;
            let trace = relay_trace_events(&params, &state0, &input)?;
            csv.meta("events", trace.switches.len().to_string())
                .meta("final-xi", trace.state.xi.to_string());
            let summary = format!(
                "{} switch events, final state xi = {}",
                trace.switches.len(),
                trace.state.xi
            );
            (trace.output, summary)
        }
        RelayVariant::Alt => {
            let output = alt_relay_trace(&params, xi0, &input)?;
            let final_value = *output.values().last().unwrap();
            let summary = format!("final output y = {}", fnum(final_value));
            (output, summary)
        }
    };

    csv.header("t,y");
    for (t, y) in output.times().iter().zip(output.values()) {
        csv.row(&[fnum(*t), fnum(*y)]);
    }
    let path = write_atomic(dir, "response.csv", &csv.into_string())?;
    println!("{summary}");
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn analyze_cmd(
    dir: &Path,
    records_path: &Path,
    h1: f64,
    h_m1: f64,
    tail_start: i64,
    j_min: Option<usize>,
    j_max: Option<usize>,
    a_hint: Option<f64>,
) -> Result<(), CliError> {
    let records = read_records(records_path)?;
    let fit = fit_quadratic_law_with_tail(&records, a_hint, tail_start)?;
    let exponent = residual_exponent(&fit.q, tail_start)?;

    let max_abs_n = records
        .iter()
        .map(|r| r.n.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let j_max = j_max.unwrap_or(max_abs_n);
    let j_min = j_min.unwrap_or((j_max / 10).max(1));
    let ratio = switch_ratio(&records, j_min, j_max)?;
    let expected_ratio = h_m1.abs() / h1;

    let shape = rational_block_shape(h1, h_m1).filter(|&(_, p_ns)| p_ns > 0);
    let block = match shape {
        Some((p_s, p_ns)) => Some(block_pattern(&records, p_s, p_ns, j_min, j_max, h1, h_m1)?),
        None => None,
    };

    let mut txt = Csv::new("analyze");
    txt.meta("records", records_path.display().to_string())
        .meta_f("h1", h1)
        .meta_f("h-m1", h_m1)
        .meta("tail-start", tail_start.to_string())
        .meta("j-min", j_min.to_string())
        .meta("j-max", j_max.to_string());
    if let Some(a) = a_hint {
        txt.meta_f("a-hint", a);
    }
    txt.line(&format!("a-fit = {}", fnum(fit.a_fit)))
        .line(&format!("e-min = {}", fnum(fit.e_min)))
        .line(&format!("n-used = {}", fit.n_used))
        .line(&format!("residual-exponent = {}", fnum(exponent)))
        .line(&format!("switch-ratio = {}", fnum(ratio)))
        .line(&format!("expected-ratio = {}", fnum(expected_ratio)));
    match (&shape, &block) {
        (Some((p_s, p_ns)), Some(tally)) => {
            txt.line(&format!("block-shape = {p_s}+{p_ns}"))
                .line(&format!("block-fraction = {}", fnum(tally.fraction)))
                .line(&format!(
                    "block-exact = {} of {}",
                    tally.exact, tally.blocks
                ))
                .line(&format!("block-verdict = {}", tally.verdict));
        }
        _ => {
            txt.line("block-shape = none");
        }
    }
    let txt_path = write_atomic(dir, "analysis.txt", &txt.into_string())?;

    let mut csv = Csv::new("analyze");
    csv.meta_f("a-fit", fit.a_fit);
    csv.header("n,q");
    for &(n, q) in &fit.q {
        csv.row(&[n.to_string(), fnum(q)]);
    }
    let csv_path = write_atomic(dir, "residuals.csv", &csv.into_string())?;

    println!(
        "a_fit = {} (E_min = {}), residual exponent {:.3}, ratio {} vs expected {}",
        fnum(fit.a_fit),
        fnum(fit.e_min),
        exponent,
        fnum(ratio),
        fnum(expected_ratio)
    );
    println!("wrote {}", txt_path.display());
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn join_f(values: &[f64]) -> String {
    values.iter().map(|&v| fnum(v)).collect::<Vec<_>>().join(";")
}
