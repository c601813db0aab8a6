//! Explicit adaptive Runge–Kutta integration (Dormand–Prince 5(4)) with
//! continuous dense output.
//!
//! The integrator drives the event-based lattice simulations: after every
//! accepted step a caller-supplied inspector receives a [`DenseStep`] —
//! a quartic interpolant valid on the step — and can let integration
//! continue, stop exactly at an interior time (event localization), or
//! halt at the step end. The pair uses the first-same-as-last property,
//! so one right-hand-side evaluation per accepted step is reused.

use crate::error::{Error, Result};

// Butcher tableau of the Dormand–Prince 5(4) pair.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// Fifth-order weights (also the seventh stage row: FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output coefficients for the fifth interpolation polynomial term.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// What the step inspector tells the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Keep integrating.
    Continue,
    /// Truncate the step just accepted at the given interior time (the
    /// state is reset to the dense-output value there) and return.
    StopAt(f64),
    /// Return with the step end as the final state.
    Halt,
}

/// Continuous output over one accepted step: a quartic polynomial in the
/// normalized time `θ = (t - t0)/h`, exact at both step ends.
pub struct DenseStep<'a> {
    t0: f64,
    h: f64,
    r1: &'a [f64],
    r2: &'a [f64],
    r3: &'a [f64],
    r4: &'a [f64],
    r5: &'a [f64],
    k_start: &'a [f64],
    k_end: &'a [f64],
    y_end: &'a [f64],
}

impl<'a> DenseStep<'a> {
    /// Start time of the step.
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    /// End time of the step.
    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    /// State at the end of the step (exact, not interpolated).
    pub fn y_end(&self) -> &[f64] {
        self.y_end
    }

    /// Time derivative of component `i` at the step start.
    pub fn deriv_start(&self, i: usize) -> f64 {
        self.k_start[i]
    }

    /// Time derivative of component `i` at the step end.
    pub fn deriv_end(&self, i: usize) -> f64 {
        self.k_end[i]
    }

    /// Interpolated value of component `i` at time `t ∈ [t_start, t_end]`.
    pub fn eval_one(&self, t: f64, i: usize) -> f64 {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        self.r1[i]
            + theta
                * (self.r2[i] + theta1 * (self.r3[i] + theta * (self.r4[i] + theta1 * self.r5[i])))
    }

    /// Interpolated time derivative of component `i` at time `t`.
    pub fn deriv_one(&self, t: f64, i: usize) -> f64 {
        let th = (t - self.t0) / self.h;
        let d2 = self.r2[i];
        let d3 = self.r3[i];
        let d4 = self.r4[i];
        let d5 = self.r5[i];
        // d/dθ of r2·θ + r3·θ(1-θ) + r4·θ²(1-θ) + r5·θ²(1-θ)².
        let dtheta = d2
            + d3 * (1.0 - 2.0 * th)
            + d4 * th * (2.0 - 3.0 * th)
            + d5 * 2.0 * th * (1.0 - th) * (1.0 - 2.0 * th);
        dtheta / self.h
    }

    /// Interpolated full state at time `t`, written into `out`.
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = self.eval_one(t, i);
        }
    }
}

/// Integration statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Result of one `integrate` call.
#[derive(Debug, Clone)]
pub struct Integration {
    /// Final time (equals `t_end` unless the inspector stopped early).
    pub t: f64,
    /// State at `t`.
    pub y: Vec<f64>,
    /// True if the inspector ended integration before `t_end`.
    pub halted: bool,
    /// Last accepted step size (warm-restart hint).
    pub h_last: f64,
    pub stats: OdeStats,
}

/// Adaptive Dormand–Prince 5(4) integrator settings.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 20_000_000,
        }
    }
}

struct Workspace {
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_next: Vec<f64>,
    r: [Vec<f64>; 5],
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            k: std::array::from_fn(|_| vec![0.0; n]),
            y_stage: vec![0.0; n],
            y_next: vec![0.0; n],
            r: std::array::from_fn(|_| vec![0.0; n]),
        }
    }
}

impl Dopri5 {
    /// Integrate `dy/dt = f(t, y)` from `(t0, y0)` to `t_end`, invoking
    /// `inspect` after every accepted step.
    ///
    /// `f` writes the derivative of `y` into its third argument.
    pub fn integrate<F, C>(
        &self,
        mut f: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        mut inspect: C,
    ) -> Result<Integration>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        C: FnMut(&DenseStep<'_>) -> StepControl,
    {
        if !(t_end >= t0) {
            return Err(Error::Validation(format!(
                "integration must run forward: t0={t0}, t_end={t_end}"
            )));
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp("non-finite initial state".into()));
        }
        let n = y0.len();
        let mut stats = OdeStats::default();
        let mut y = y0.to_vec();
        let mut t = t0;
        if t_end == t0 {
            return Ok(Integration { t, y, halted: false, h_last: 0.0, stats });
        }

        let mut ws = Workspace::new(n);
        f(t, &y, &mut ws.k[0]);
        stats.rhs_evals += 1;

        let mut h = match self.h_init {
            Some(h) => h.min(t_end - t0).min(self.h_max),
            None => self.initial_step(&mut f, t, &y, t_end, &ws.k[0], &mut stats),
        };
        let mut facmax = 10.0;

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::NoConvergence(format!(
                    "step budget {} exhausted at t={t} (t_end={t_end})",
                    self.max_steps
                )));
            }
            let mut last = false;
            if t + h >= t_end {
                h = t_end - t;
                last = true;
            }
            if h <= t.abs().max(1.0) * 1e-14 {
                if last {
                    // The remaining sliver is below time resolution; the
                    // state change over it is ignored.
                    t = t_end;
                    return Ok(Integration { t, y, halted: false, h_last: h, stats });
                }
                return Err(Error::BlowUp(format!(
                    "step size underflow at t={t} (h={h:e})"
                )));
            }

            let err = self.try_step(&mut f, t, &y, h, &mut ws, &mut stats);

            if !(err <= 1.0) {
                // Rejected (or non-finite, mapped to a huge err).
                stats.rejected += 1;
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.2)
                } else {
                    0.25
                };
                h *= factor;
                facmax = 1.0;
                continue;
            }

            // Accepted: build dense output and hand it to the inspector.
            stats.accepted += 1;
            self.build_dense(&mut ws, &y, h);
            let step = DenseStep {
                t0: t,
                h,
                r1: &ws.r[0],
                r2: &ws.r[1],
                r3: &ws.r[2],
                r4: &ws.r[3],
                r5: &ws.r[4],
                k_start: &ws.k[0],
                k_end: &ws.k[6],
                y_end: &ws.y_next,
            };
            match inspect(&step) {
                StepControl::Continue => {}
                StepControl::StopAt(t_stop) => {
                    let t_stop = t_stop.clamp(t, t + h);
                    for i in 0..n {
                        y[i] = step.eval_one(t_stop, i);
                    }
                    return Ok(Integration { t: t_stop, y, halted: true, h_last: h, stats });
                }
                StepControl::Halt => {
                    y.copy_from_slice(&ws.y_next);
                    return Ok(Integration { t: t + h, y, halted: true, h_last: h, stats });
                }
            }

            t += h;
            y.copy_from_slice(&ws.y_next);
            ws.k.swap(0, 6); // FSAL: k7 becomes next step's k1.
            if last || t >= t_end {
                return Ok(Integration { t: t_end, y, halted: false, h_last: h, stats });
            }
            let factor = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, facmax);
            h = (h * factor).min(self.h_max);
            facmax = 10.0;
        }
    }

    /// Plain integration to `t_end` with no step inspection.
    pub fn integrate_to<F>(&self, f: F, t0: f64, y0: &[f64], t_end: f64) -> Result<Integration>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        self.integrate(f, t0, y0, t_end, |_| StepControl::Continue)
    }

    /// One trial step. Returns the scaled error norm (≤ 1 means accept);
    /// on success the workspace holds the stages and the end state.
    fn try_step<F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64],
        h: f64,
        ws: &mut Workspace,
        stats: &mut OdeStats,
    ) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        macro_rules! stage {
            ($idx:expr, $($coef:expr => $kj:expr),+) => {{
                for i in 0..n {
                    let mut acc = 0.0;
                    $(acc += $coef * ws.k[$kj][i];)+
                    ws.y_stage[i] = y[i] + h * acc;
                }
                f(t + C[$idx] * h, &ws.y_stage, &mut ws.k[$idx]);
                stats.rhs_evals += 1;
            }};
        }
        stage!(1, A21 => 0);
        stage!(2, A31 => 0, A32 => 1);
        stage!(3, A41 => 0, A42 => 1, A43 => 2);
        stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
        stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
        // Sixth stage lands on t + h with the 5th-order weights: y_next.
        for i in 0..n {
            let acc = B1 * ws.k[0][i]
                + B3 * ws.k[2][i]
                + B4 * ws.k[3][i]
                + B5 * ws.k[4][i]
                + B6 * ws.k[5][i];
            ws.y_next[i] = y[i] + h * acc;
        }
        f(t + h, &ws.y_next, &mut ws.k[6]);
        stats.rhs_evals += 1;

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = E1 * ws.k[0][i]
                + E3 * ws.k[2][i]
                + E4 * ws.k[3][i]
                + E5 * ws.k[4][i]
                + E6 * ws.k[5][i]
                + E7 * ws.k[6][i];
            let sc = self.atol + self.rtol * ws.y_next[i].abs().max(y[i].abs());
            let r = h * e / sc;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt();
        if !err.is_finite() || ws.y_next.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        err
    }

    /// Assemble the dense-output polynomial for the step in the workspace.
    fn build_dense(&self, ws: &mut Workspace, y0: &[f64], h: f64) {
        let n = ws.y_next.len();
        for i in 0..n {
            let ydiff = ws.y_next[i] - y0[i];
            let bspl = h * ws.k[0][i] - ydiff;
            ws.r[0][i] = y0[i];
            ws.r[1][i] = ydiff;
            ws.r[2][i] = bspl;
            ws.r[3][i] = ydiff - h * ws.k[6][i] - bspl;
            ws.r[4][i] = h
                * (D1 * ws.k[0][i]
                    + D3 * ws.k[2][i]
                    + D4 * ws.k[3][i]
                    + D5 * ws.k[4][i]
                    + D6 * ws.k[5][i]
                    + D7 * ws.k[6][i]);
        }
    }

    /// Standard automatic initial-step heuristic.
    fn initial_step<F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64],
        t_end: f64,
        k1: &[f64],
        stats: &mut OdeStats,
    ) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        let sc = |yi: f64| self.atol + self.rtol * yi.abs();
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..n {
            let s = sc(y[i]);
            d0 += (y[i] / s).powi(2);
            d1 += (k1[i] / s).powi(2);
        }
        d0 = (d0 / n as f64).sqrt();
        d1 = (d1 / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(t_end - t);
        let mut y1 = vec![0.0; n];
        let mut f1 = vec![0.0; n];
        for i in 0..n {
            y1[i] = y[i] + h0 * k1[i];
        }
        f(t + h0, &y1, &mut f1);
        stats.rhs_evals += 1;
        let mut d2 = 0.0;
        for i in 0..n {
            let s = sc(y[i]);
            d2 += ((f1[i] - k1[i]) / s).powi(2);
        }
        d2 = (d2 / n as f64).sqrt() / h0;
        let d_max = d1.max(d2);
        let h1 = if d_max <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d_max).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.h_max).min(t_end - t)
    }
}
