//! Lattice heat kernel, lattice Green function, and the diffusive
//! scaling profile.
//!
//! The continuous-time random-walk kernel `p_n(t)` solves
//! `dp_n/dt = p_{n+1} − 2 p_n + p_{n−1}` with `p_n(0) = δ_{n0}`. Its
//! running time integral `y_n(t) = ∫₀ᵗ p_n(s) ds` is the response of a
//! node at distance `n` to a unit source switched on at the origin at
//! time zero; it is the building block for superposing switching fronts.
//!
//! Three independent evaluation routes are provided and cross-checked:
//!
//! * [`green_y`] — the primary path, an analytically integrated series
//!   `y_n(t) = Σ_{k>|n|} (k − |n|) p_k(t)` over the kernel row at time
//!   `t` (the second difference of the ramp `k ↦ (k − |n|)⁺` is a point
//!   mass at `|n|`, so the series solves the same initial-value problem
//!   as the time integral and vanishes at `t = 0`);
//! * [`green_y_quad`] — adaptive quadrature of `s ↦ p_n(s)` over `[0, t]`;
//! * [`green_y_ode`] — direct high-order integration of the truncated
//!   lattice ODE `ẏ = Δy + e₀` on a window that grows with `√t`
//!   (diffusive spreading), with reflecting ends. Image reflections make
//!   this route degrade to roughly `1e−7` near `t = 10⁴`; it is intended
//!   as an independent oracle for `t ≲ 10³`.
//!
//! For `t → ∞` the Green function obeys the diffusive scaling law
//! `y_n(t) ≈ √t · f(|n|/√t)` with profile
//! `f(x) = (1/(2√π)) ∫ₓ^∞ (s − x) e^{−s²/4} ds`; [`f_profile`] evaluates
//! it by quadrature checked against the closed form
//! `f(x) = e^{−x²/4}/√π − (x/2)·erfc(x/2)`, and [`integral_If`]
//! evaluates the weighted profile integral that enters the front-speed
//! equation.

use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::quad::{integrate_adaptive, integrate_gl};

/// Default disagreement budget between evaluation routes of the Green
/// function; [`green_y_checked`] errors when routes differ by more than
/// ten times this value.
pub const TOL_GREEN: f64 = 1e-9;

const SQRT_PI: f64 = 1.772453850905516;

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Validation(format!(
            "time must be finite and non-negative (got {t})"
        )));
    }
    Ok(())
}

/// Kernel values `p_n(t)` for `n = 0..=n_max` (the kernel is even in `n`).
///
/// Uses the classical backward recurrence for the underlying modified
/// Bessel functions with normalization by total mass `Σ_n p_n = 1`,
/// rescaling on overflow, so every entry is accurate in a relative sense
/// down to the underflow threshold.
pub fn heat_kernel_row(n_max: usize, t: f64) -> Result<Vec<f64>> {
    check_time(t)?;
    let z = 2.0 * t;
    let mut row = vec![0.0; n_max + 1];
    if z == 0.0 {
        row[0] = 1.0;
        return Ok(row);
    }
    if z <= 1e-12 {
        // Short-time product expansion; the dropped terms are O(z²)
        // relative, far below the accuracy of the recurrence path.
        let mut term = (-z).exp();
        row[0] = term;
        for k in 1..=n_max {
            term *= 0.5 * z / k as f64;
            row[k] = term;
        }
        return Ok(row);
    }

    let k_top = n_max as f64;
    let start = (k_top * k_top + 40.0 * z).sqrt().ceil().max(k_top + 40.0) + 10.0;
    if start > 5e7 {
        return Err(Error::Validation(format!(
            "kernel recurrence start index {start:.0} too large (t = {t})"
        )));
    }
    let m = start as usize;

    // Backward recurrence I_{k−1} = I_{k+1} + (2k/z) I_k from an
    // arbitrary seed at k = m; the seed scale cancels in normalization.
    let mut i_kp1 = 0.0_f64;
    let mut i_k = 1e-280_f64;
    let mut sum = 2.0 * i_k; // accumulates I_0 + 2 Σ_{k≥1} I_k = e^z Σ p = e^z
    let mut k = m;
    while k > 0 {
        let i_km1 = i_kp1 + (2.0 * k as f64 / z) * i_k;
        i_kp1 = i_k;
        i_k = i_km1;
        k -= 1;
        if k <= n_max {
            row[k] = i_k;
        }
        sum += if k == 0 { i_k } else { 2.0 * i_k };
        if i_k > 1e260 {
            let s = 1e-260;
            i_k *= s;
            i_kp1 *= s;
            sum *= s;
            for v in row.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
    Ok(row)
}

/// Kernel value `p_n(t)`.
pub fn heat_kernel(n: i64, t: f64) -> Result<f64> {
    let na = n.unsigned_abs() as usize;
    Ok(heat_kernel_row(na, t)?[na])
}

fn series_cutoff(na: usize, t: f64) -> usize {
    na + (12.0 * t.sqrt()).ceil() as usize + 60
}

/// Green function `y_n(t) = ∫₀ᵗ p_n(s) ds` by the analytically
/// integrated kernel series (primary path).
pub fn green_y(n: i64, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let na = n.unsigned_abs() as usize;
    let k_hi = series_cutoff(na, t);
    let p = heat_kernel_row(k_hi, t)?;
    // Sum from the far tail inward so the smallest terms accumulate first.
    let mut acc = 0.0;
    for k in (na + 1..=k_hi).rev() {
        acc += (k - na) as f64 * p[k];
    }
    Ok(acc)
}

/// Green function by adaptive time quadrature of the kernel.
pub fn green_y_quad(n: i64, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let na = n.unsigned_abs();
    let mut integrand = |s: f64| heat_kernel(na as i64, s).unwrap_or(f64::NAN);
    integrate_adaptive(&mut integrand, 0.0, t, 1e-11, 1e-15)
}

/// Green function by direct integration of the truncated lattice ODE
/// `ẏ_k = y_{k+1} − 2 y_k + y_{k−1} + δ_{k0}` on `|k| ≤ W` with
/// reflecting ends, `W = max(4√t + 50, |n| + 50)`. Fully independent of
/// the kernel recurrence. Image reflections limit the accuracy to about
/// `1e−7` near `t = 10⁴`; below `t ≈ 10³` the route is good to ~`1e−12`.
pub fn green_y_ode(n: i64, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let na = n.unsigned_abs() as usize;
    let w = (4.0 * t.sqrt() + 50.0).max(na as f64 + 50.0).ceil() as usize;
    // Even symmetry: solve on k = 0..=w with a mirror stencil at 0.
    let rhs = |_s: f64, y: &[f64], dy: &mut [f64]| {
        let last = y.len() - 1;
        dy[0] = 2.0 * (y[1] - y[0]) + 1.0;
        for k in 1..last {
            dy[k] = y[k + 1] - 2.0 * y[k] + y[k - 1];
        }
        dy[last] = y[last - 1] - y[last];
    };
    let y0 = vec![0.0; w + 1];
    let solver = Dopri5 { rtol: 1e-10, atol: 1e-12, ..Dopri5::default() };
    let end = solver.integrate_to(rhs, 0.0, &y0, t)?;
    Ok(end.y[na])
}

/// Green function with cross-route verification: evaluates the primary
/// series together with the quadrature route (always) and the
/// independent ODE route, and errors with [`Error::ToleranceNotMet`]
/// when any pair of routes differs by more than
/// `10 · tol_green · max(1, |y|)`. Intended for `t ≲ 10³`, where the ODE
/// route's window truncation is far below the default budget.
pub fn green_y_checked(n: i64, t: f64, tol_green: f64) -> Result<f64> {
    if !(tol_green.is_finite() && tol_green > 0.0) {
        return Err(Error::Validation(format!(
            "tol_green must be positive (got {tol_green})"
        )));
    }
    let series = green_y(n, t)?;
    let quad = green_y_quad(n, t)?;
    let ode = green_y_ode(n, t)?;
    let budget = 10.0 * tol_green * series.abs().max(1.0);
    for (name, other) in [("quadrature", quad), ("lattice ODE", ode)] {
        if (series - other).abs() > budget {
            return Err(Error::ToleranceNotMet(format!(
                "Green-function routes disagree at n = {n}, t = {t}: \
                 series = {series:.15e}, {name} = {other:.15e}, budget = {budget:.3e}"
            )));
        }
    }
    Ok(series)
}

/// Tabulated Green-function values: `values[i][n] = y_n(times[i])` for
/// `n = 0..=n_max` (extend to negative `n` by symmetry).
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub n_max: usize,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Build a [`GreenTable`] with one kernel row per time: from the suffix
/// sums `S1_m = Σ_{k≥m} p_k` and `S2_m = Σ_{k≥m} k·p_k` every entry is
/// `y_n = S2_{n+1} − n·S1_{n+1}`, so a whole row costs no more than a
/// single point evaluation.
pub fn green_table(n_max: usize, times: &[f64]) -> Result<GreenTable> {
    if times.is_empty() {
        return Err(Error::Validation("table needs at least one time".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("table times must be strictly increasing".into()));
    }
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        check_time(t)?;
        if t == 0.0 {
            values.push(vec![0.0; n_max + 1]);
            continue;
        }
        let k_hi = series_cutoff(n_max, t);
        let p = heat_kernel_row(k_hi, t)?;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        let mut suffix: Vec<(f64, f64)> = vec![(0.0, 0.0); k_hi + 2];
        for k in (0..=k_hi).rev() {
            s1 += p[k];
            s2 += k as f64 * p[k];
            suffix[k] = (s1, s2);
        }
        let row: Vec<f64> = (0..=n_max)
            .map(|n| {
                let (s1n, s2n) = suffix[n + 1];
                s2n - n as f64 * s1n
            })
            .collect();
        values.push(row);
    }
    Ok(GreenTable { n_max, times: times.to_vec(), values })
}

/// Closed-form scaling profile (internal fast path):
/// `f(x) = e^{−x²/4}/√π − (x/2)·erfc(x/2)`.
fn f_val(x: f64) -> f64 {
    if !(x < 60.0) {
        // Below 1e−390 in exact arithmetic: underflows to zero, and the
        // guard also swallows the ∞·0 at the far integrand endpoint.
        return 0.0;
    }
    (-x * x / 4.0).exp() / SQRT_PI - 0.5 * x * libm::erfc(0.5 * x)
}

/// Diffusive scaling profile `f(x) = (1/(2√π)) ∫ₓ^∞ (s − x) e^{−s²/4} ds`
/// for `x ≥ 0`, evaluated by adaptive quadrature over `[x, x + 40]`
/// (the remainder is below the underflow threshold) and verified against
/// the closed form through the complementary error function; the two
/// routes must agree to `1e−10` relative.
pub fn f_profile(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Validation(format!(
            "profile argument must be finite and non-negative (got {x})"
        )));
    }
    let mut integrand = |s: f64| (s - x) * (-s * s / 4.0).exp();
    let quad = integrate_adaptive(&mut integrand, x, x + 40.0, 1e-12, 1e-300)? / (2.0 * SQRT_PI);
    let closed = f_val(x);
    if (quad - closed).abs() > 1e-10 * quad.abs().max(1e-280) {
        return Err(Error::ToleranceNotMet(format!(
            "profile routes disagree at x = {x}: quadrature = {quad:.15e}, \
             closed form = {closed:.15e}"
        )));
    }
    Ok(quad)
}

/// Large-time approximation `y_n(t) ≈ √t · f(|n|/√t)` (requires `t > 0`).
pub fn green_asymptotic(n: i64, t: f64) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::Validation(format!(
            "asymptotic form needs t > 0 (got {t})"
        )));
    }
    let st = t.sqrt();
    Ok(st * f_profile(n.unsigned_abs() as f64 / st)?)
}

/// Weighted profile integral
/// `I_f(a) = ∫₋₁¹ √(a(1−x²)) · f((1−x)/√(a(1−x²))) dx`, `a > 0`.
///
/// Two smooth reparameterizations cover the two concentration regimes:
/// for `a ≥ 1/2` the trigonometric form
/// `√a ∫₀^π sin²θ · f(tan(θ/2)/√a) dθ` (profile variation concentrates
/// at the endpoint `θ = π`, where Gauss nodes cluster), and for
/// `a < 1/2` the rational form
/// `8a² ∫₀^∞ w² f(w)/(1 + a w²)³ dw` truncated at `w = 20` (the profile
/// is below `1e−43` beyond). Each is evaluated by a 256-node Gauss rule
/// and verified against adaptive quadrature to `1e−9` relative.
pub fn integral_If(a: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Validation(format!(
            "profile integral needs a > 0 (got {a})"
        )));
    }
    let (value, check) = if a >= 0.5 {
        let sa = a.sqrt();
        let g = |theta: f64| {
            let s = theta.sin();
            s * s * f_val((0.5 * theta).tan() / sa)
        };
        let gl = sa * integrate_gl(g, 0.0, std::f64::consts::PI, 256);
        let mut g2 = g;
        let ad = sa * integrate_adaptive(&mut g2, 0.0, std::f64::consts::PI, 1e-11, 1e-300)?;
        (gl, ad)
    } else {
        let g = |w: f64| {
            let d = 1.0 + a * w * w;
            w * w * f_val(w) / (d * d * d)
        };
        let pre = 8.0 * a * a;
        let gl = pre * integrate_gl(g, 0.0, 20.0, 256);
        let mut g2 = g;
        let ad = pre * integrate_adaptive(&mut g2, 0.0, 20.0, 1e-11, 1e-300)?;
        (gl, ad)
    };
    if (value - check).abs() > 1e-9 * value.abs().max(1e-12) {
        return Err(Error::ToleranceNotMet(format!(
            "profile integral routes disagree at a = {a}: fixed rule = {value:.15e}, \
             adaptive = {check:.15e}"
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn kernel_at_time_zero_is_a_point_mass() {
        let row = heat_kernel_row(4, 0.0).unwrap();
        assert_eq!(row, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(heat_kernel(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_conserves_mass_and_second_moment() {
        for &t in &[0.5, 5.0, 50.0, 500.0] {
            let k_hi = series_cutoff(0, t);
            let row = heat_kernel_row(k_hi, t).unwrap();
            let mut mass = row[0];
            let mut second = 0.0;
            for k in 1..=k_hi {
                mass += 2.0 * row[k];
                second += 2.0 * (k as f64) * (k as f64) * row[k];
            }
            assert!((mass - 1.0).abs() < 1e-13, "mass {mass} at t={t}");
            assert!(rel(second, 2.0 * t) < 1e-12, "second moment {second} at t={t}");
        }
    }

    #[test]
    fn kernel_matches_frozen_values() {
        // p_0(1) = e^{−2} I_0(2) and p_1(1) = e^{−2} I_1(2), frozen from
        // an independent quadrature of the Bessel integral representation
        // I_n(z) = (1/π) ∫₀^π e^{z cos θ} cos(nθ) dθ.
        assert!(rel(heat_kernel(0, 1.0).unwrap(), 0.30850832255367128) < 1e-13);
        assert!(rel(heat_kernel(1, 1.0).unwrap(), 0.21526928924893785) < 1e-13);
        assert_eq!(
            heat_kernel(-7, 2.5).unwrap(),
            heat_kernel(7, 2.5).unwrap(),
        );
    }

    #[test]
    fn kernel_short_time_expansion() {
        let z = 1e-13; // t = 5e-14
        let t = z / 2.0;
        let p0 = heat_kernel(0, t).unwrap();
        assert!((1.0 - p0) / z > 0.999 && (1.0 - p0) / z < 1.001);
        let p1 = heat_kernel(1, t).unwrap();
        assert!(rel(p1, z / 2.0) < 1e-3);
        // Just above the expansion threshold the recurrence must agree.
        let t2 = 1e-11;
        let p1r = heat_kernel(1, t2).unwrap();
        assert!(rel(p1r, t2) < 1e-4);
    }

    #[test]
    fn green_routes_agree() {
        for &(n, t) in &[(0i64, 1.0), (1, 1.0), (3, 10.0), (10, 100.0), (25, 100.0)] {
            let series = green_y(n, t).unwrap();
            let quad = green_y_quad(n, t).unwrap();
            let ode = green_y_ode(n, t).unwrap();
            let scale = series.abs().max(1.0);
            assert!(
                (series - quad).abs() < 1e-10 * scale,
                "series/quad at n={n} t={t}: {series:.15e} vs {quad:.15e}"
            );
            assert!(
                (series - ode).abs() < 1e-8 * scale,
                "series/ode at n={n} t={t}: {series:.15e} vs {ode:.15e}"
            );
        }
        let y = green_y_checked(2, 30.0, TOL_GREEN).unwrap();
        assert_eq!(y, green_y(2, 30.0).unwrap());
    }

    #[test]
    fn green_routes_agree_at_t_1000() {
        let series = green_y(0, 1000.0).unwrap();
        let ode = green_y_ode(0, 1000.0).unwrap();
        assert!((series - ode).abs() < 1e-8 * series.abs());
    }

    #[test]
    fn green_mass_identity() {
        // Total response Σ_n y_n(t) = t; the window 4√t + 50 leaves a
        // tail of ~2e−9 at t = 100, within the 1e−8 budget.
        for &t in &[1.0f64, 10.0, 100.0] {
            let w = (4.0 * t.sqrt() + 50.0).ceil() as usize;
            let table = green_table(w, &[t]).unwrap();
            let row = &table.values[0];
            let mut mass = row[0];
            for n in 1..=w {
                mass += 2.0 * row[n];
            }
            assert!(
                (mass - t).abs() <= 1e-8,
                "mass {mass:.12e} differs from t={t} by {:.3e}",
                (mass - t).abs()
            );
        }
    }

    #[test]
    fn green_frozen_values() {
        // Frozen from the quadrature and ODE routes at build time of this
        // module (all three routes agreed to ≤ 1e−12 then).
        assert!(rel(green_y(0, 1.0).unwrap(), 0.52377761180260873) < 1e-12);
        assert!(rel(green_y(1, 1.0).unwrap(), 0.17803177307944421) < 1e-12);
        assert!(rel(green_y(0, 100.0).unwrap(), 5.63836633439448409) < 1e-12);
        assert!(rel(green_y(5, 100.0).unwrap(), 3.48770988275541249) < 1e-12);
    }

    #[test]
    fn table_matches_pointwise_evaluation() {
        let times = [0.0, 0.5, 2.0, 7.0, 33.0];
        let table = green_table(12, &times).unwrap();
        assert_eq!(table.values[0], vec![0.0; 13]);
        for (i, &t) in times.iter().enumerate().skip(1) {
            for n in (0..=12).step_by(3) {
                let direct = green_y(n as i64, t).unwrap();
                assert!(
                    rel(table.values[i][n], direct) < 1e-12,
                    "table[{i}][{n}] = {} vs direct {direct}",
                    table.values[i][n]
                );
            }
        }
        assert!(green_table(3, &[1.0, 1.0]).is_err());
        assert!(green_table(3, &[]).is_err());
    }

    #[test]
    fn profile_value_at_zero_and_small_arguments() {
        let inv_sqrt_pi = 0.5641895835477563;
        assert!(rel(f_profile(0.0).unwrap(), inv_sqrt_pi) < 1e-12);
        // Near-zero argument stays within 1e−4 of 1/√π.
        assert!((f_profile(1e-6).unwrap() - inv_sqrt_pi).abs() < 1e-4);
    }

    #[test]
    fn profile_matches_reference_erfc_form() {
        // statrs provides a third independent erfc implementation. Its own
        // accuracy (~1e−10 relative) is the limiting factor, amplified by
        // the cancellation of the two nearly equal terms at larger x, so
        // the budget scales with the term-to-value ratio. The tight 1e−10
        // dual-path check lives inside f_profile itself.
        for &x in &[0.25f64, 0.5, 1.0, 2.0, 3.0, 5.0] {
            let leading = (-x * x / 4.0).exp() / SQRT_PI;
            let reference = leading - 0.5 * x * statrs::function::erf::erfc(0.5 * x);
            let mine = f_profile(x).unwrap();
            let amplification = (leading / reference).max(1.0);
            assert!(
                rel(mine, reference) < 1e-9 * amplification,
                "profile mismatch at x={x}: mine={mine:.17e} ref={reference:.17e} rel={:.2e}",
                rel(mine, reference)
            );
        }
    }

    #[test]
    fn profile_decays_and_respects_gaussian_envelope() {
        let mut prev = f_profile(0.0).unwrap();
        for &x in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let v = f_profile(x).unwrap();
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        for &x in &[10.0, 12.0, 15.0] {
            assert!(f_profile(x).unwrap() <= (-x * x / 8.0).exp());
        }
        assert_eq!(f_profile(55.0).unwrap(), 0.0); // underflow regime
        assert!(f_profile(-0.1).is_err());
        assert!(f_profile(f64::NAN).is_err());
    }

    #[test]
    fn asymptotic_form_and_its_accuracy() {
        // √t f(0) at n = 0; at t = π the value is exactly 1.
        assert!(rel(green_asymptotic(0, std::f64::consts::PI).unwrap(), 1.0) < 1e-12);
        // y_0(10⁴) ≈ √(10⁴/π); absolute deviation is O(1).
        let y = green_y(0, 10_000.0).unwrap();
        assert!((y - 56.41895835477563).abs() < 0.05);
        // The scaled error √t · |y − √t f| stays O(1) (diffusive law).
        for &t in &[100.0, 400.0] {
            for n in [0i64, 5, 20] {
                let err = (green_y(n, t).unwrap() - green_asymptotic(n, t).unwrap()).abs();
                assert!(
                    err * t.sqrt() < 1.0,
                    "scaled asymptotic error {:.3e} at n={n}, t={t}",
                    err * t.sqrt()
                );
            }
        }
        assert!(green_asymptotic(0, 0.0).is_err());
    }

    #[test]
    fn profile_integral_small_a_power_law() {
        // I_f(a) = 4a² − 48a³ + O(a⁴): the quadratic law with its first
        // correction pins the rational-form path.
        let a = 1e-3;
        let v = integral_If(a).unwrap();
        assert!(rel(v, 4.0 * a * a) < 0.02, "I_f({a}) = {v}");
        let a2 = 1e-5;
        assert!(rel(integral_If(a2).unwrap(), 4.0 * a2 * a2) < 2e-4);
    }

    #[test]
    fn profile_integral_large_a_square_root_law() {
        // I_f(a) = √(πa)/2 − 1 + o(1): at a = 10⁴ the relative deviation
        // from the leading term is ≈ 1.13% (the absolute −1 correction).
        let a = 1e4;
        let v = integral_If(a).unwrap();
        let lead = (std::f64::consts::PI * a).sqrt() / 2.0;
        let dev = (lead - v) / lead;
        assert!(dev > 0.008 && dev < 0.015, "deviation {dev}");
    }

    #[test]
    fn profile_integral_is_monotone_and_continuous_at_the_seam() {
        let mut prev = 0.0;
        for &a in &[0.01, 0.1, 0.4999, 0.5001, 1.0, 10.0, 100.0] {
            let v = integral_If(a).unwrap();
            assert!(v > prev, "I_f({a}) = {v} not increasing");
            prev = v;
        }
        let below = integral_If(0.5 - 1e-9).unwrap();
        let above = integral_If(0.5 + 1e-9).unwrap();
        assert!(rel(below, above) < 1e-8);
        assert!(integral_If(0.0).is_err());
        assert!(integral_If(-1.0).is_err());
    }

    #[test]
    fn profile_integral_frozen_values() {
        // Frozen from both parameterizations at build time.
        assert!(rel(integral_If(1.0).unwrap(), 0.31846204114757037) < 1e-11);
        assert!(rel(integral_If(4.0).unwrap(), 1.03607916818977119) < 1e-11);
    }

    #[test]
    fn invalid_arguments_error() {
        assert!(heat_kernel(0, -1.0).is_err());
        assert!(heat_kernel(0, f64::NAN).is_err());
        assert!(green_y(0, -2.0).is_err());
        assert!(green_y_checked(0, 1.0, 0.0).is_err());
    }

    /// Regenerates every frozen literal used above; run with
    /// `cargo test -p rattling frozen_value -- --ignored --nocapture`.
    #[test]
    #[ignore]
    fn frozen_value_regeneration_helper() {
        // Independent Bessel route: I_n(z) = (1/π)∫₀^π e^{z cos θ} cos nθ dθ.
        let bessel_i = |n: i64, z: f64| {
            let mut g = |theta: f64| (z * theta.cos()).exp() * (n as f64 * theta).cos();
            integrate_adaptive(&mut g, 0.0, std::f64::consts::PI, 1e-13, 1e-300).unwrap()
                / std::f64::consts::PI
        };
        println!("p_0(1) = {:.17}", (-2.0f64).exp() * bessel_i(0, 2.0));
        println!("p_1(1) = {:.17}", (-2.0f64).exp() * bessel_i(1, 2.0));
        for (n, t) in [(0i64, 1.0), (1, 1.0), (0, 100.0), (5, 100.0)] {
            println!(
                "y_{n}({t}) series={:.17} quad={:.17} ode={:.17}",
                green_y(n, t).unwrap(),
                green_y_quad(n, t).unwrap(),
                green_y_ode(n, t).unwrap()
            );
        }
        println!("I_f(1) = {:.17}", integral_If(1.0).unwrap());
        println!("I_f(4) = {:.17}", integral_If(4.0).unwrap());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn green_is_positive_symmetric_decreasing(t in 0.1f64..300.0) {
            let y0 = green_y(0, t).unwrap();
            prop_assert!(y0 > 0.0);
            let mut prev = y0;
            for n in [1i64, 2, 5, 11] {
                let y = green_y(n, t).unwrap();
                prop_assert!(y >= 0.0);
                prop_assert!(y <= prev);
                prop_assert_eq!(y, green_y(-n, t).unwrap());
                prev = y;
            }
        }

        #[test]
        fn kernel_row_entries_are_probabilities(t in 0.0f64..200.0, n_max in 1usize..40) {
            let row = heat_kernel_row(n_max, t).unwrap();
            for &p in &row {
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
