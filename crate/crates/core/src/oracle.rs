//! Independent verification path: direct initial-value integration of
//! `φ'' = -μφ - (σ+1)νφ^(2σ+1)`.
//!
//! Everything else in the crate reconstructs solutions from the energy
//! integral; this module instead integrates the equation with an adaptive
//! Dormand–Prince 5(4) scheme at tolerance `1e-12`, keeps the accepted
//! steps with their stage derivatives, and answers queries (values, zeros,
//! extrema, level crossings) from cubic Hermite dense output. Events are
//! located by bisection on the dense output to `1e-12` in `x`.
//!
//! Periods measured here are the oracle against which the quadrature
//! wavelength is verified, so this module must not call into
//! [`crate::quadrature`]; the integration windows below come from the
//! elementary sandwich bounds on the period, not from the quadrature.

use serde::Serialize;

use crate::model::{ModelParams, ParamPoint};
use crate::{Error, Result};

/// State of the equivalent first-order system.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IvpState {
    pub x: f64,
    pub phi: f64,
    pub dphi: f64,
}

/// Tolerances and safety limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    /// |φ| beyond this signals leaving the bounded-solution family.
    pub max_abs_phi: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            max_abs_phi: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    x0: f64,
    x1: f64,
    y0: [f64; 2],
    f0: [f64; 2],
    y1: [f64; 2],
    f1: [f64; 2],
}

impl Step {
    /// Cubic Hermite interpolation of each component.
    fn eval(&self, x: f64) -> [f64; 2] {
        let dt = self.x1 - self.x0;
        let s = (x - self.x0) / dt;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] =
                h00 * self.y0[i] + h10 * dt * self.f0[i] + h01 * self.y1[i] + h11 * dt * self.f1[i];
        }
        out
    }
}

/// Dense-output trajectory of one integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    steps: Vec<Step>,
}

impl Trajectory {
    pub fn x_start(&self) -> f64 {
        self.steps.first().map(|s| s.x0).unwrap_or(0.0)
    }

    pub fn x_end(&self) -> f64 {
        self.steps.last().map(|s| s.x1).unwrap_or(0.0)
    }

    fn step_containing(&self, x: f64) -> &Step {
        let idx = self
            .steps
            .partition_point(|s| s.x1 < x)
            .min(self.steps.len() - 1);
        &self.steps[idx]
    }

    /// `(φ, φ')` at `x`, which must lie inside the integrated range.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        assert!(
            x >= self.x_start() - 1e-12 && x <= self.x_end() + 1e-12,
            "x = {x} outside trajectory range [{}, {}]",
            self.x_start(),
            self.x_end()
        );
        let v = self.step_containing(x).eval(x);
        (v[0], v[1])
    }

    /// Roots of `component` strictly inside `(a, b)`, bisected to `1e-12`.
    fn roots_of(&self, component: usize, a: f64, b: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
        for step in &self.steps {
            if step.x1 <= a || step.x0 >= b {
                continue;
            }
            let lo = step.x0.max(a);
            let hi = step.x1.min(b);
            let flo = step.eval(lo)[component];
            let fhi = step.eval(hi)[component];
            if flo == 0.0 {
                roots.push(lo);
                continue;
            }
            if flo * fhi < 0.0 {
                let mut lo = lo;
                let mut hi = hi;
                let mut flo = flo;
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    let fm = step.eval(mid)[component];
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if flo * fm < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        roots.dedup_by(|x, y| (*x - *y).abs() < 10.0 * tol);
        roots.retain(|&r| r > a + tol && r < b - tol);
        roots
    }

    /// Zeros of φ strictly inside `(a, b)`.
    pub fn zeros_in(&self, a: f64, b: f64) -> Vec<f64> {
        self.roots_of(0, a, b)
    }

    /// Extrema of φ (zeros of φ') strictly inside `(a, b)`.
    pub fn extrema_in(&self, a: f64, b: f64) -> Vec<f64> {
        self.roots_of(1, a, b)
    }

    /// First `x > after` with `φ(x) = level`, if any.
    pub fn first_crossing(&self, level: f64, after: f64) -> Option<f64> {
        let tol = 1e-12 * (1.0 + self.x_end().abs());
        for step in &self.steps {
            if step.x1 <= after {
                continue;
            }
            let lo = step.x0.max(after);
            let hi = step.x1;
            let flo = step.eval(lo)[0] - level;
            let fhi = step.eval(hi)[0] - level;
            if flo == 0.0 {
                return Some(lo);
            }
            if flo * fhi < 0.0 {
                let (mut lo, mut hi, mut flo) = (lo, hi, flo);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    let fm = step.eval(mid)[0] - level;
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
        }
        None
    }

    /// Sign changes of φ over an `n`-point uniform grid on `[a, b]`.
    pub fn count_sign_changes_on_grid(&self, a: f64, b: f64, n: usize) -> usize {
        let mut count = 0;
        let mut prev = self.eval(a).0;
        for k in 1..n {
            let x = a + (b - a) * k as f64 / (n - 1) as f64;
            let cur = self.eval(x).0;
            if prev * cur < 0.0 {
                count += 1;
            }
            prev = cur;
        }
        count
    }
}

// Dormand–Prince 5(4) tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate from `initial` to `x_end` (forward only) and return the
/// dense-output trajectory.
pub fn integrate(
    initial: &IvpState,
    params: &ModelParams,
    mu: f64,
    x_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let power = 2 * params.sigma() as i32 + 1;
    let coef = (params.sigma() as f64 + 1.0) * params.nu();
    let rhs = |y: [f64; 2]| [y[1], -mu * y[0] - coef * y[0].powi(power)];

    let span = x_end - initial.x;
    assert!(span > 0.0, "x_end must exceed the initial x");
    let mut x = initial.x;
    let mut y = [initial.phi, initial.dphi];
    let mut f = rhs(y);
    let mut h = (span / 100.0).min(1e-2);
    let mut steps = Vec::new();

    for _ in 0..opts.max_steps {
        if x >= x_end {
            return Ok(Trajectory { steps });
        }
        h = h.min(x_end - x);
        let k1 = f;
        let k2 = rhs(add(y, scale(h, k1, A21)));
        let k3 = rhs(add(y, comb2(h, k1, A31, k2, A32)));
        let k4 = rhs(add(y, comb3(h, k1, A41, k2, A42, k3, A43)));
        let k5 = rhs(add(y, comb4(h, k1, A51, k2, A52, k3, A53, k4, A54)));
        let k6 = rhs(add(
            y,
            comb5(h, k1, A61, k2, A62, k3, A63, k4, A64, k5, A65),
        ));
        let mut y1 = y;
        for i in 0..2 {
            y1[i] += h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = rhs(y1);
        let mut err = 0.0f64;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / 2.0).sqrt();

        if err <= 1.0 {
            steps.push(Step {
                x0: x,
                x1: x + h,
                y0: y,
                f0: k1,
                y1,
                f1: k7,
            });
            x += h;
            y = y1;
            f = k7;
            if y[0].abs() > opts.max_abs_phi {
                return Err(Error::BlowUp { x, phi: y[0] });
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Err(Error::ContinuationStalled {
        mu,
        reason: format!("integration exceeded {} steps at x = {x}", opts.max_steps),
    })
}

/// Energy `(φ')² + μφ² + νφ^(2(σ+1))` of a state.
pub fn energy(state: &IvpState, params: &ModelParams, mu: f64) -> f64 {
    state.dphi * state.dphi + params.potential(mu, state.phi)
}

/// Elementary upper bound for the period, used to size integration windows.
///
/// From `S(w) ∈ [1, σ+1]`: for ν > 0, `λ ≤ 2π (μ + να^(2σ))^(-1/2)`; for
/// ν < 0, `λ ≤ 2π (μ - μ_c)^(-1/2)`.
fn period_upper_bound(point: &ParamPoint, params: &ModelParams) -> f64 {
    let na = params.nu_alpha_2sigma(point.alpha);
    let g_min = if params.nu() > 0.0 {
        point.mu + na
    } else {
        point.mu - params.mu_crit(point.alpha)
    };
    2.0 * std::f64::consts::PI / g_min.sqrt()
}

/// Initial state at a zero with positive velocity: `(0, 0, √h)`.
pub fn zero_start(point: &ParamPoint, params: &ModelParams) -> Result<IvpState> {
    point.require_valid()?;
    let h = params.potential(point.mu, point.alpha);
    Ok(IvpState {
        x: 0.0,
        phi: 0.0,
        dphi: h.sqrt(),
    })
}

/// Measure the period by time of flight: integrate from a zero with
/// positive velocity and return the `x` of the second zero (the first is
/// the half-period).
pub fn measure_period(point: &ParamPoint, params: &ModelParams) -> Result<f64> {
    let start = zero_start(point, params)?;
    let window = 1.05 * period_upper_bound(point, params);
    let opts = IntegrateOptions {
        max_abs_phi: 1e3 * point.alpha,
        ..Default::default()
    };
    let traj = integrate(&start, params, point.mu, window, &opts)?;
    let zeros = traj.zeros_in(1e-9 * window, window);
    if zeros.len() < 2 {
        return Err(Error::ContinuationStalled {
            mu: point.mu,
            reason: format!(
                "expected two zeros in the period window, found {}",
                zeros.len()
            ),
        });
    }
    Ok(zeros[1])
}

/// First passage time from the zero start to `φ = phi_target ∈ (0, α)`.
pub fn first_passage(point: &ParamPoint, params: &ModelParams, phi_target: f64) -> Result<f64> {
    let start = zero_start(point, params)?;
    let window = 0.3 * period_upper_bound(point, params);
    let opts = IntegrateOptions {
        max_abs_phi: 1e3 * point.alpha,
        ..Default::default()
    };
    let traj = integrate(&start, params, point.mu, window, &opts)?;
    traj.first_crossing(phi_target, 0.0)
        .ok_or(Error::PhiOutOfRange {
            phi: phi_target,
            alpha: point.alpha,
        })
}

/// Amplitude measured as |φ| at the first extremum after the zero start.
pub fn measure_turning_value(point: &ParamPoint, params: &ModelParams) -> Result<f64> {
    let start = zero_start(point, params)?;
    let window = 0.6 * period_upper_bound(point, params);
    let opts = IntegrateOptions {
        max_abs_phi: 1e3 * point.alpha,
        ..Default::default()
    };
    let traj = integrate(&start, params, point.mu, window, &opts)?;
    let ext = traj.extrema_in(1e-12, window);
    ext.first()
        .map(|&x| traj.eval(x).0.abs())
        .ok_or(Error::ContinuationStalled {
            mu: point.mu,
            reason: "no extremum found in the turning-value window".into(),
        })
}

fn add(y: [f64; 2], d: [f64; 2]) -> [f64; 2] {
    [y[0] + d[0], y[1] + d[1]]
}

fn scale(h: f64, k: [f64; 2], a: f64) -> [f64; 2] {
    [h * a * k[0], h * a * k[1]]
}

fn comb2(h: f64, k1: [f64; 2], a1: f64, k2: [f64; 2], a2: f64) -> [f64; 2] {
    [h * (a1 * k1[0] + a2 * k2[0]), h * (a1 * k1[1] + a2 * k2[1])]
}

fn comb3(h: f64, k1: [f64; 2], a1: f64, k2: [f64; 2], a2: f64, k3: [f64; 2], a3: f64) -> [f64; 2] {
    [
        h * (a1 * k1[0] + a2 * k2[0] + a3 * k3[0]),
        h * (a1 * k1[1] + a2 * k2[1] + a3 * k3[1]),
    ]
}

#[allow(clippy::too_many_arguments)]
fn comb4(
    h: f64,
    k1: [f64; 2],
    a1: f64,
    k2: [f64; 2],
    a2: f64,
    k3: [f64; 2],
    a3: f64,
    k4: [f64; 2],
    a4: f64,
) -> [f64; 2] {
    [
        h * (a1 * k1[0] + a2 * k2[0] + a3 * k3[0] + a4 * k4[0]),
        h * (a1 * k1[1] + a2 * k2[1] + a3 * k3[1] + a4 * k4[1]),
    ]
}

#[allow(clippy::too_many_arguments)]
fn comb5(
    h: f64,
    k1: [f64; 2],
    a1: f64,
    k2: [f64; 2],
    a2: f64,
    k3: [f64; 2],
    a3: f64,
    k4: [f64; 2],
    a4: f64,
    k5: [f64; 2],
    a5: f64,
) -> [f64; 2] {
    [
        h * (a1 * k1[0] + a2 * k2[0] + a3 * k3[0] + a4 * k4[0] + a5 * k5[0]),
        h * (a1 * k1[1] + a2 * k2[1] + a3 * k3[1] + a4 * k4[1] + a5 * k5[1]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{constants_c, wavelength};
    use std::f64::consts::PI;

    fn params(sigma: u32, nu: f64) -> ModelParams {
        ModelParams::new(sigma, nu).unwrap()
    }

    fn point(mu: f64, alpha: f64, p: &ModelParams) -> ParamPoint {
        ParamPoint::new(mu, alpha, p).unwrap()
    }

    #[test]
    fn near_linear_period_is_pi() {
        let p = params(1, 1.0);
        let period = measure_period(&point(4.0, 1e-4, &p), &p).unwrap();
        assert!((period - PI).abs() < 1e-7, "period = {period}");
    }

    #[test]
    fn period_matches_quadrature_anchor() {
        // λ(μ=1, α=1, ν=1, σ=1) frozen from the independent 30-digit oracle.
        let p = params(1, 1.0);
        let period = measure_period(&point(1.0, 1.0, &p), &p).unwrap();
        assert!(
            (period - 4.004_309_521_824_425).abs() < 1e-8,
            "period = {period}"
        );
    }

    #[test]
    fn mu_zero_surrogate_matches_closed_form() {
        let p = params(1, 1.0);
        let c1 = constants_c(&p).c1;
        let period = measure_period(&point(1e-12, 1.0, &p), &p).unwrap();
        assert!(
            (period - 4.0 * c1).abs() / (4.0 * c1) < 1e-8,
            "period = {period}, 4c1 = {}",
            4.0 * c1
        );
    }

    #[test]
    fn energy_drift_over_ten_periods() {
        for (sigma, nu, mu, alpha) in [(1u32, 1.0, 1.0, 1.0), (2, -0.5, 2.0, 0.6)] {
            let p = params(sigma, nu);
            let pt = point(mu, alpha, &p);
            let period = measure_period(&pt, &p).unwrap();
            let start = zero_start(&pt, &p).unwrap();
            let h0 = energy(&start, &p, mu);
            let traj =
                integrate(&start, &p, mu, 10.0 * period, &IntegrateOptions::default()).unwrap();
            let mut worst = 0.0f64;
            for k in 0..=1000 {
                let x = 10.0 * period * k as f64 / 1000.0;
                let (phi, dphi) = traj.eval(x);
                let h = energy(&IvpState { x, phi, dphi }, &p, mu);
                worst = worst.max(((h - h0) / h0).abs());
            }
            assert!(worst < 1e-8, "drift = {worst} for sigma={sigma} nu={nu}");
        }
    }

    #[test]
    fn stays_bounded_from_turning_point_start() {
        let p = params(1, 1.0);
        let alpha = 1.3;
        let start = IvpState {
            x: 0.0,
            phi: alpha,
            dphi: 0.0,
        };
        let traj = integrate(&start, &p, 0.7, 20.0, &IntegrateOptions::default()).unwrap();
        for k in 0..=2000 {
            let (phi, _) = traj.eval(20.0 * k as f64 / 2000.0);
            assert!(phi.abs() <= alpha * (1.0 + 1e-9));
        }
    }

    #[test]
    fn turning_value_matches_sigma1_formula() {
        // For σ = 1 the turning values solve νβ⁴ + μβ² - h = 0:
        // β² = -(1/2ν)[μ - √(μ² + 4hν)] picks the oscillation amplitude.
        for (nu, mu, alpha) in [(1.0, 1.0, 1.2), (-1.0, 2.0, 0.4)] {
            let p = params(1, nu);
            let pt = point(mu, alpha, &p);
            let h = p.potential(mu, alpha);
            let beta_sq = -0.5 / nu * (mu - (mu * mu + 4.0 * h * nu).sqrt());
            let beta = beta_sq.sqrt();
            assert!((beta - alpha).abs() < 1e-12); // formula consistency
            let measured = measure_turning_value(&pt, &p).unwrap();
            assert!(
                (measured - beta).abs() < 1e-8,
                "measured {measured} vs {beta}"
            );
        }
    }

    #[test]
    fn long_period_near_divergence() {
        // μ = -1, ν = 1, α slightly above α₀ = 1: the period is large and
        // still agrees with the quadrature.
        let p = params(1, 1.0);
        let pt = point(-1.0, 1.001, &p);
        let period = measure_period(&pt, &p).unwrap();
        assert!(period > 15.0, "period = {period}");
        let lam = wavelength(&pt, &p).unwrap().lambda;
        assert!(
            ((period - lam) / lam).abs() < 1e-6,
            "period {period} vs quadrature {lam}"
        );
    }

    #[test]
    fn blow_up_is_detected() {
        // ν < 0 with h > h_c leaves the bounded family.
        let p = params(1, -1.0);
        let start = IvpState {
            x: 0.0,
            phi: 0.0,
            dphi: 1.0, // h = 1 > h_c = 0.25 for μ = 1
        };
        let opts = IntegrateOptions {
            max_abs_phi: 1e3,
            ..Default::default()
        };
        match integrate(&start, &p, 1.0, 50.0, &opts) {
            Err(Error::BlowUp { .. }) => {}
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn zeros_and_crossings() {
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        let period = measure_period(&pt, &p).unwrap();
        let start = zero_start(&pt, &p).unwrap();
        let traj = integrate(
            &start,
            &p,
            pt.mu,
            3.0 * period,
            &IntegrateOptions::default(),
        )
        .unwrap();
        // zeros at multiples of λ/2: five of them strictly inside (0, 3λ).
        let zeros = traj.zeros_in(1e-9, 3.0 * period * (1.0 - 1e-9));
        assert_eq!(zeros.len(), 5);
        for (k, z) in zeros.iter().enumerate() {
            let expect = (k + 1) as f64 * period / 2.0;
            assert!(
                (z - expect).abs() < 1e-8,
                "zero {k} at {z}, expect {expect}"
            );
        }
        assert_eq!(
            traj.count_sign_changes_on_grid(1e-9, 2.99 * period, 10_000),
            5
        );

        // first passage to φ = 0.5 happens before the quarter period.
        let x = first_passage(&pt, &p, 0.5).unwrap();
        assert!(x > 0.0 && x < period / 4.0);
        assert!((traj.eval(x).0 - 0.5).abs() < 1e-9);
    }
}
