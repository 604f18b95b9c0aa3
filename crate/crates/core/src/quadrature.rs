//! Wavelength of the oscillating solution and its partial derivatives.
//!
//! The period of the solution with parameters `(μ, α)` is
//!
//! ```text
//! λ = 4 ∫₀¹ [μ(1-w²) + να^(2σ)(1-w^(2(σ+1)))]^(-1/2) dw
//!   = 4 ∫₀¹ G(w)^(-1/2) (1-w²)^(-1/2) dw,      G(w) = μ + να^(2σ) S(w),
//! ```
//!
//! where `S(w) = Σ_{j=0}^σ w^(2j)` factors the endpoint singularity out
//! exactly. Substituting `w = sin t` maps the remaining `(1-w²)^(-1/2)` to a
//! smooth integrand on `[0, π/2]`, which Gauss–Legendre then resolves with
//! spectral accuracy. Orders double until successive values stabilize; the
//! error estimate is the last doubling difference.
//!
//! `G` stays strictly positive on the admissible regions but its minimum
//! tends to zero at the region boundaries `μ → μ₀` (ν > 0) and `μ → μ_c`
//! (ν < 0), where λ diverges. Inside a relative distance of `1e-12` from a
//! boundary the evaluation refuses with [`Error::WavelengthDiverges`] rather
//! than returning an inaccurate huge number. Between the guard and roughly
//! `1e-4` relative distance the integrand develops a boundary layer; there
//! the interval is subdivided into panels graded geometrically toward the
//! near-singular end before applying the same doubling rule per panel.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use serde::Serialize;

use crate::model::{ModelParams, ParamPoint};
use crate::{Error, Result};

/// Relative distance from the region boundary below which evaluation refuses.
pub const DIVERGENCE_GUARD: f64 = 1e-12;

const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-10;

/// Wavelength with gradient and quadrature error estimate.
///
/// On all admissible points `d_mu < 0`; `d_alpha` carries the sign of `-ν`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WavelengthResult {
    pub lambda: f64,
    pub d_mu: f64,
    pub d_alpha: f64,
    pub est_error: f64,
}

/// Closed-form wavelength data at μ = 0 (requires ν > 0).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MuZeroWavelength {
    pub lambda: f64,
    pub d_alpha: f64,
    pub d_mu: f64,
}

/// The constants `c₁ = ∫₀¹(1-w^(2(σ+1)))^(-1/2) dw`,
/// `c₂ = ∫₀¹(1-w^(2(σ+1)))^(-3/2)(1-w²) dw`, and `c₃ = c₂/c₁`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

// ---------------------------------------------------------------------------
// Gauss–Legendre tables
// ---------------------------------------------------------------------------

const BASE_ORDER: usize = 16;
const NUM_LEVELS: usize = 10; // orders 16, 32, ..., 8192

static TABLES: [OnceLock<(Vec<f64>, Vec<f64>)>; NUM_LEVELS] =
    [const { OnceLock::new() }; NUM_LEVELS];

/// Legendre polynomial `P_n` and its derivative at `z` by three-term
/// recurrence.
fn legendre_p_dp(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let pk = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Nodes and weights of the `n`-point rule on `[-1, 1]`.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p_dp(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_p_dp(n, z);
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn gl_table(level: usize) -> &'static (Vec<f64>, Vec<f64>) {
    TABLES[level].get_or_init(|| legendre_nodes(BASE_ORDER << level))
}

fn gl_apply<const M: usize>(
    f: &impl Fn(f64) -> [f64; M],
    a: f64,
    b: f64,
    level: usize,
) -> [f64; M] {
    let (nodes, weights) = gl_table(level);
    let c = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = [0.0; M];
    for (&x, &w) in nodes.iter().zip(weights) {
        let v = f(mid + c * x);
        for i in 0..M {
            acc[i] += w * v[i];
        }
    }
    for item in &mut acc {
        *item *= c;
    }
    acc
}

/// Order-doubling Gauss–Legendre on `[a, b]` for `M` integrands sharing
/// nodes. Returns (values, last doubling difference of component 0,
/// converged flag).
fn gl_adaptive<const M: usize>(
    f: &impl Fn(f64) -> [f64; M],
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> ([f64; M], f64, bool) {
    let mut prev: Option<[f64; M]> = None;
    let mut last_diff = f64::INFINITY;
    for level in 0..NUM_LEVELS {
        let cur = gl_apply(f, a, b, level);
        if let Some(p) = prev {
            let mut ok = true;
            for i in 0..M {
                let d = (cur[i] - p[i]).abs();
                if d > abs_tol.max(rel_tol * cur[i].abs()) {
                    ok = false;
                }
            }
            last_diff = (cur[0] - p[0]).abs();
            if ok {
                return (cur, last_diff, true);
            }
        }
        prev = Some(cur);
    }
    (prev.unwrap(), last_diff, false)
}

/// Composite rule with panels graded geometrically (factor 4) toward
/// `singular_end` (which must be `a` or `b`). `ratio` is the relative size
/// of the integrand's boundary layer; panel grading continues until the
/// innermost panel is inside the layer.
fn gl_graded<const M: usize>(
    f: &impl Fn(f64) -> [f64; M],
    a: f64,
    b: f64,
    singular_at_a: bool,
    ratio: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> ([f64; M], f64, bool) {
    let span = b - a;
    let k = (((1.0 / ratio).ln() / (2.0 * 4.0f64.ln())).ceil() as usize + 2).clamp(2, 30);
    let mut breaks = Vec::with_capacity(k + 1);
    // distances from the singular end: span, span/4, ..., span/4^(k-1), 0
    for j in 0..k {
        breaks.push(span / 4.0f64.powi(j as i32));
    }
    breaks.push(0.0);
    let mut total = [0.0; M];
    let mut err = 0.0;
    let mut all_ok = true;
    for pair in breaks.windows(2) {
        let (d_far, d_near) = (pair[0], pair[1]);
        let (pa, pb) = if singular_at_a {
            (a + d_near, a + d_far)
        } else {
            (b - d_far, b - d_near)
        };
        let (vals, e, ok) = gl_adaptive(f, pa, pb, abs_tol * 0.1, rel_tol * 0.1);
        for i in 0..M {
            total[i] += vals[i];
        }
        err += e;
        all_ok &= ok;
    }
    (total, err, all_ok)
}

// ---------------------------------------------------------------------------
// Wavelength kernel
// ---------------------------------------------------------------------------

/// Integrand family for a fixed `(μ, α)`: everything is driven by
/// `G(w) = μ + να^(2σ) S(w)` evaluated at `w = sin t`.
///
/// `G` is evaluated in the boundary-stable split `G = ε + (positive)`,
/// where `ε` is the distance of μ to the divergent region boundary: the
/// direct form cancels catastrophically when the boundary is close, which
/// is exactly where the integral needs `G` most accurately.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    mu: f64,
    alpha: f64,
    na: f64, // ν α^(2σ)
    g_min: f64,
    params: ModelParams,
}

impl Kernel {
    pub(crate) fn new(point: &ParamPoint, params: &ModelParams) -> Result<Self> {
        point.require_valid()?;
        let na = params.nu_alpha_2sigma(point.alpha);
        // distance to the diverging boundary: μ - μ₀ (ν > 0), μ - μ_c (ν < 0)
        let g_min = if params.nu() > 0.0 {
            point.mu + na
        } else {
            point.mu + (params.sigma() as f64 + 1.0) * na
        };
        let kernel = Self {
            mu: point.mu,
            alpha: point.alpha,
            na,
            g_min,
            params: *params,
        };
        kernel.check_guard()?;
        Ok(kernel)
    }

    /// `G(sin t)` in the stable split. For ν > 0 the minimum sits at t = 0
    /// and `G = ε + να^(2σ)(S(w) - 1)`; for ν < 0 it sits at t = π/2 and
    /// `G = ε + |ν|α^(2σ) cos²t · ((σ+1) - S(w))/(1 - w²)`.
    pub(crate) fn g_at_t(&self, t: f64) -> f64 {
        let w = t.sin();
        if self.params.nu() > 0.0 {
            self.g_min + self.na * self.params.power_sum_tail(w)
        } else {
            let c = t.cos();
            self.g_min - self.na * c * c * self.params.power_sum_complement(w)
        }
    }

    /// Minimum of `G` over `[0, 1]` and a magnitude scale for it.
    fn g_min_scale(&self) -> (f64, f64) {
        let sigma1 = self.params.sigma() as f64 + 1.0;
        let scale = self.mu.abs() + sigma1 * self.na.abs();
        (self.g_min, scale)
    }

    fn check_guard(&self) -> Result<()> {
        if self.params.nu() > 0.0 {
            let mu0 = self.params.mu_floor(self.alpha);
            if (self.mu - mu0) / mu0.abs() < DIVERGENCE_GUARD {
                return Err(Error::WavelengthDiverges {
                    mu: self.mu,
                    boundary: mu0,
                });
            }
        } else {
            let mu_c = self.params.mu_crit(self.alpha);
            if (self.mu - mu_c) / mu_c < DIVERGENCE_GUARD {
                return Err(Error::WavelengthDiverges {
                    mu: self.mu,
                    boundary: mu_c,
                });
            }
        }
        Ok(())
    }

    fn integrate<const M: usize>(
        &self,
        f: &impl Fn(f64) -> [f64; M],
        t_end: f64,
    ) -> ([f64; M], f64) {
        let (g_min, scale) = self.g_min_scale();
        let ratio = g_min / scale;
        let singular_at_a = self.params.nu() > 0.0; // G minimal at w = 0, i.e. t = 0
        let needs_grading = ratio < 1e-4 && (singular_at_a || t_end >= FRAC_PI_2 - 1e-9);
        let (vals, err, _) = if needs_grading {
            gl_graded(f, 0.0, t_end, singular_at_a, ratio, ABS_TOL, REL_TOL)
        } else {
            gl_adaptive(f, 0.0, t_end, ABS_TOL, REL_TOL)
        };
        (vals, err)
    }

    /// `∫₀^{t_end} G(sin t)^(-1/2) dt` — the quarter-period map in the
    /// angular variable. `t_end = π/2` gives λ/4.
    pub(crate) fn partial_quarter(&self, t_end: f64) -> (f64, f64) {
        let f = |t: f64| [self.g_at_t(t).powf(-0.5)];
        let (vals, err) = self.integrate(&f, t_end);
        (vals[0], err)
    }

    /// `G(sin t)^(-1/2)` — derivative of the quarter-period map in `t`.
    pub(crate) fn integrand_at(&self, t: f64) -> f64 {
        self.g_at_t(t).powf(-0.5)
    }

    /// Quarter-period value plus the two differentiated quarter integrals.
    fn quarter_with_gradients(&self) -> ([f64; 3], f64) {
        let dalpha_coef = -(self.params.sigma() as f64)
            * self.params.nu()
            * self.alpha.powi(2 * self.params.sigma() as i32 - 1);
        let f = |t: f64| {
            let s = self.params.power_sum(t.sin());
            let g = self.g_at_t(t);
            let g12 = g.powf(-0.5);
            let g32 = g12 / g;
            [g12, -0.5 * g32, dalpha_coef * s * g32]
        };
        self.integrate(&f, FRAC_PI_2)
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Wavelength `λ(μ, α)` with partial derivatives.
///
/// Rejects points outside the admissible regions and points within the
/// divergence guard of a region boundary. Relative accuracy is `1e-10`
/// away from region boundaries; near them `est_error` reports the achieved
/// doubling difference honestly.
pub fn wavelength(point: &ParamPoint, params: &ModelParams) -> Result<WavelengthResult> {
    let kernel = Kernel::new(point, params)?;
    let (vals, err) = kernel.quarter_with_gradients();
    Ok(WavelengthResult {
        lambda: 4.0 * vals[0],
        d_mu: 4.0 * vals[1],
        d_alpha: 4.0 * vals[2],
        est_error: 4.0 * err,
    })
}

/// `(∂λ/∂μ, ∂λ/∂α)` by quadrature of the differentiated integrands.
pub fn wavelength_gradient(point: &ParamPoint, params: &ModelParams) -> Result<(f64, f64)> {
    let r = wavelength(point, params)?;
    Ok((r.d_mu, r.d_alpha))
}

/// Closed forms at μ = 0: `λ = 4c₁ν^(-1/2)α^(-σ)`,
/// `∂λ/∂α = -4σc₁ν^(-1/2)α^(-(σ+1))`, `∂λ/∂μ = -2c₂ν^(-3/2)α^(-3σ)`.
///
/// μ = 0 with ν < 0 lies outside the admissible regions and is rejected.
pub fn mu_zero_wavelength(alpha: f64, params: &ModelParams) -> Result<MuZeroWavelength> {
    if params.nu() <= 0.0 {
        return Err(Error::OutsideRegion { mu: 0.0, alpha });
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let c = constants_c(params);
    let sigma = params.sigma() as f64;
    let sqrt_nu = params.nu().sqrt();
    let lambda = 4.0 * c.c1 / sqrt_nu * alpha.powf(-sigma);
    let d_alpha = -4.0 * sigma * c.c1 / sqrt_nu * alpha.powf(-(sigma + 1.0));
    let d_mu = -2.0 * c.c2 / (sqrt_nu * params.nu()) * alpha.powf(-3.0 * sigma);
    Ok(MuZeroWavelength {
        lambda,
        d_alpha,
        d_mu,
    })
}

/// The μ = 0 integration constants, to `1e-12` absolute.
pub fn constants_c(params: &ModelParams) -> CConstants {
    // With w = sin t: c₁ = ∫₀^{π/2} S(sin t)^(-1/2) dt,
    //                 c₂ = ∫₀^{π/2} S(sin t)^(-3/2) dt.
    let f = |t: f64| {
        let s = params.power_sum(t.sin());
        let s12 = s.powf(-0.5);
        [s12, s12 / s]
    };
    let (vals, _, _) = gl_adaptive(&f, 0.0, FRAC_PI_2, 1e-13, 1e-13);
    CConstants {
        c1: vals[0],
        c2: vals[1],
        c3: vals[1] / vals[0],
    }
}
