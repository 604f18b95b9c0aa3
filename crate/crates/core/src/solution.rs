//! Oscillating solutions reconstructed from the energy integral.
//!
//! A solution is represented by phase bookkeeping `(ζ, x₀, λ)` only: `x₀`
//! is a zero with slope sign ζ, and evaluation reduces `x - x₀` modulo the
//! period, identifies the quarter-wave segment, and inverts the strictly
//! monotone quarter-period map
//!
//! ```text
//! T(t) = ∫₀ᵗ G(sin s)^(-1/2) ds,     φ = ± α sin t,
//! ```
//!
//! by safeguarded Newton iteration. The derivative comes from the energy
//! relation `φ' = ζ √(h - μφ² - νφ^(2(σ+1)))` with the segment sign.
//!
//! Zeros live exactly on the lattice `x₀ + kλ/2` and are counted
//! analytically, never by sampling; a zero landing on an interval endpoint
//! (within `1e-9` of a lattice point, in half-period units) is excluded.
//! On star graphs this pairs with the convention that a zero at the central
//! vertex is counted by the graph-level count, not by any edge.

use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

use crate::model::{BoundaryCondition, ModelParams, ParamPoint, Sign};
use crate::quadrature::{wavelength, Kernel};
use crate::{Error, Result};

/// Tolerance, in half-period lattice units, for treating a point as lying
/// exactly on the zero lattice. Must absorb the wavelength's attainable
/// accuracy (ulp-limited near region boundaries, where level-set solves
/// bottom out around `1e-8` relative) while staying far below the half
/// lattice unit that separates genuine interior zeros from endpoints.
const LATTICE_SNAP: f64 = 1e-7;

/// Relative tolerance for flagging `ξ = l/λ` as a quarter-integer.
const QUARTER_LOCK_TOL: f64 = 1e-9;

/// Inversion tolerance in `w = φ/α`.
const INVERT_TOL_W: f64 = 1e-12;

/// A line solution pinned by `φ(x₀) = 0` with `sign(φ'(x₀)) = ζ`.
#[derive(Debug, Clone, Copy)]
pub struct LineSolution {
    point: ParamPoint,
    params: ModelParams,
    zeta: Sign,
    offset: f64,
    lambda: f64,
    kernel: Kernel,
}

impl LineSolution {
    pub fn new(point: ParamPoint, params: ModelParams, zeta: Sign, offset: f64) -> Result<Self> {
        let kernel = Kernel::new(&point, &params)?;
        let lambda = wavelength(&point, &params)?.lambda;
        Ok(Self {
            point,
            params,
            zeta,
            offset,
            lambda,
            kernel,
        })
    }

    pub fn point(&self) -> ParamPoint {
        self.point
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn zeta(&self) -> Sign {
        self.zeta
    }

    /// Conserved energy `h = μα² + να^(2(σ+1))`.
    pub fn energy(&self) -> f64 {
        self.params.potential(self.point.mu, self.point.alpha)
    }

    /// `(φ(x), φ'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let alpha = self.point.alpha;
        let quarter = 0.25 * self.lambda;
        let y = (x - self.offset).rem_euclid(self.lambda);
        // Segment bookkeeping for the ζ = +1 solution (0 ↗ α ↘ 0 ↘ -α ↗ 0):
        let (target, sign_phi, sign_dphi) = if y <= quarter {
            (y, 1.0, 1.0)
        } else if y <= 2.0 * quarter {
            (2.0 * quarter - y, 1.0, -1.0)
        } else if y <= 3.0 * quarter {
            (y - 2.0 * quarter, -1.0, -1.0)
        } else {
            (4.0 * quarter - y, -1.0, 1.0)
        };
        let t = self.invert_quarter(target, quarter);
        let w = t.sin();
        let z = self.zeta.as_f64();
        let phi = z * sign_phi * alpha * w;
        let dphi = z * sign_dphi * alpha * t.cos() * self.kernel.g_at_t(t).sqrt();
        (phi, dphi)
    }

    /// Solve `T(t) = target` on `[0, π/2]` by Newton with a bisection
    /// safeguard; `T' = G(sin t)^(-1/2)` is bounded away from zero.
    fn invert_quarter(&self, target: f64, quarter: f64) -> f64 {
        let target = target.clamp(0.0, quarter);
        if target == 0.0 {
            return 0.0;
        }
        if target == quarter {
            return FRAC_PI_2;
        }
        let (mut lo, mut hi) = (0.0f64, FRAC_PI_2);
        let mut t = FRAC_PI_2 * target / quarter;
        for _ in 0..100 {
            let (value, _) = self.kernel.partial_quarter(t);
            let residual = value - target;
            if residual > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = residual * self.kernel.integrand_at(t).recip();
            let mut t_next = t - step;
            if !(t_next > lo && t_next < hi) {
                t_next = 0.5 * (lo + hi);
            }
            if (t_next.sin() - t.sin()).abs() <= INVERT_TOL_W {
                // One polish step: quadratic convergence turns the met
                // tolerance into an essentially machine-accurate landing,
                // which downstream difference quotients rely on.
                let (value, _) = self.kernel.partial_quarter(t_next);
                let polish = (value - target) * self.kernel.integrand_at(t_next).recip();
                return (t_next - polish).clamp(0.0, FRAC_PI_2);
            }
            t = t_next;
        }
        t
    }

    /// Whether `x` lies on the zero lattice `x₀ + kλ/2` (within the same
    /// snap tolerance used by [`Self::count_zeros_in`]).
    pub fn on_zero_lattice(&self, x: f64) -> bool {
        let u = (x - self.offset) / (0.5 * self.lambda);
        (u - u.round()).abs() < LATTICE_SNAP
    }

    /// Number of zeros strictly inside `(a, b)`, counted on the lattice
    /// `x₀ + kλ/2`. Endpoint zeros are excluded.
    pub fn count_zeros_in(&self, a: f64, b: f64) -> usize {
        assert!(a < b, "empty interval");
        let half = 0.5 * self.lambda;
        let snap = |u: f64| {
            if (u - u.round()).abs() < LATTICE_SNAP {
                u.round()
            } else {
                u
            }
        };
        let lo = snap((a - self.offset) / half);
        let hi = snap((b - self.offset) / half);
        let kmin = lo.floor() as i64 + 1;
        let kmax = hi.ceil() as i64 - 1;
        (kmax - kmin + 1).max(0) as usize
    }
}

/// `x̂(0, φ̂) = ∫₀^φ̂ [h - μw² - νw^(2(σ+1))]^(-1/2) dw`: the distance from a
/// zero to the first point where the solution reaches `φ̂ ∈ [0, α]`.
///
/// Monotone increasing in `φ̂` with `x̂(0, α) = λ/4`.
pub fn quarter_inverse(phi_hat: f64, point: &ParamPoint, params: &ModelParams) -> Result<f64> {
    if !(0.0..=point.alpha).contains(&phi_hat) || !phi_hat.is_finite() {
        return Err(Error::PhiOutOfRange {
            phi: phi_hat,
            alpha: point.alpha,
        });
    }
    let kernel = Kernel::new(point, params)?;
    let t_end = (phi_hat / point.alpha).min(1.0).asin();
    Ok(kernel.partial_quarter(t_end).0)
}

/// One edge of a star graph: the branch of ray solutions pinned at the
/// boundary vertex `x = l` by its boundary condition and branch sign ζ.
///
/// Dirichlet: `φ(l) = 0` with `sign(φ'(l)) = ζ`. Neumann: `φ'(l) = 0` with
/// `sign(φ(l)) = ζ`. Fixing the sign at the boundary vertex makes the map
/// `(μ, α) ↦ solution` one-to-one on the branch, which is what lets a
/// continuation follow a single family without switching.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeBranch {
    pub point: ParamPoint,
    pub bc: BoundaryCondition,
    pub zeta: Sign,
    pub edge_length: f64,
}

/// Central-vertex data of one edge solution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeTrace {
    /// φ at the central vertex `x = 0`.
    pub phi: f64,
    /// φ' at the central vertex.
    pub dphi: f64,
    /// `ξ = l/λ`, the edge length in wavelength units.
    pub xi: f64,
    /// `round(4ξ)` when ξ is within `1e-9` (relative) of a quarter-integer:
    /// the central vertex carries a zero or an extremum.
    pub quarter_lock: Option<u32>,
}

/// The line solution realizing an edge branch (coordinate `x ∈ [0, l]`,
/// central vertex at 0).
pub fn edge_solution(branch: &EdgeBranch, params: &ModelParams) -> Result<LineSolution> {
    let lambda = wavelength(&branch.point, params)?.lambda;
    let offset = match branch.bc {
        // zero at the boundary vertex, slope sign ζ there
        BoundaryCondition::Dirichlet => branch.edge_length,
        // extremum ζ·α at the boundary vertex: the nearest zero below is a
        // quarter period away, rising into the extremum
        BoundaryCondition::Neumann => branch.edge_length - 0.25 * lambda,
    };
    LineSolution::new(branch.point, *params, branch.zeta, offset)
}

/// Evaluate the branch solution at the central vertex and report the phase
/// ratio `ξ = l/λ`.
pub fn edge_trace(branch: &EdgeBranch, params: &ModelParams) -> Result<EdgeTrace> {
    let sol = edge_solution(branch, params)?;
    let (phi, dphi) = sol.eval(0.0);
    let xi = branch.edge_length / sol.lambda();
    let q = 4.0 * xi;
    let quarter_lock = if (q - q.round()).abs() <= QUARTER_LOCK_TOL * q.round().max(1.0) {
        Some(q.round() as u32)
    } else {
        None
    };
    Ok(EdgeTrace {
        phi,
        dphi,
        xi,
        quarter_lock,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};

    fn params(sigma: u32, nu: f64) -> ModelParams {
        ModelParams::new(sigma, nu).unwrap()
    }

    fn point(mu: f64, alpha: f64, p: &ModelParams) -> ParamPoint {
        ParamPoint::new(mu, alpha, p).unwrap()
    }

    fn sol_1111() -> (LineSolution, ModelParams) {
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        (LineSolution::new(pt, p, Sign::Plus, 0.0).unwrap(), p)
    }

    #[test]
    fn quarter_inverse_endpoints() {
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        assert_eq!(quarter_inverse(0.0, &pt, &p).unwrap(), 0.0);
        let lam = wavelength(&pt, &p).unwrap().lambda;
        let q = quarter_inverse(1.0, &pt, &p).unwrap();
        assert!(((q - lam / 4.0) / (lam / 4.0)).abs() < 1e-10);
        assert!(quarter_inverse(1.5, &pt, &p).is_err());
        assert!(quarter_inverse(-0.1, &pt, &p).is_err());
    }

    #[test]
    fn quarter_inverse_matches_frozen_oracle_and_ivp() {
        // ∫₀^0.5 (2 - w² - w⁴)^(-1/2) dw, frozen from 30-digit quadrature.
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        let x = quarter_inverse(0.5, &pt, &p).unwrap();
        assert!((x - 0.3626596412192531).abs() < 1e-12, "x = {x}");
        // event-detecting integration gives the same first-passage time
        let x_ivp = oracle::first_passage(&pt, &p, 0.5).unwrap();
        assert!((x - x_ivp).abs() < 1e-6 * x, "{x} vs {x_ivp}");
    }

    #[test]
    fn quarter_inverse_is_monotone() {
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        let mut prev = -1.0;
        for k in 0..=20 {
            let x = quarter_inverse(k as f64 / 20.0, &pt, &p).unwrap();
            assert!(x > prev);
            prev = x;
        }
    }

    #[test]
    fn eval_special_points() {
        let (sol, p) = sol_1111();
        let alpha = 1.0;
        let slope = alpha * (1.0 + p.nu_alpha_2sigma(alpha)).sqrt(); // α√(μ+να^2σ) = √2
        let (phi, dphi) = sol.eval(0.0);
        assert!(phi.abs() < 1e-12);
        assert!((dphi - slope).abs() < 1e-9);

        let (phi, dphi) = sol.eval(sol.lambda() / 4.0);
        assert!((phi - alpha).abs() < 1e-9);
        assert!(dphi.abs() < 1e-9);

        let (phi, dphi) = sol.eval(sol.lambda() / 2.0);
        assert!(phi.abs() < 1e-9);
        assert!((dphi + slope).abs() < 1e-9);
    }

    #[test]
    fn eval_is_periodic_and_bounded() {
        let (sol, _) = sol_1111();
        let lam = sol.lambda();
        let mut max_abs = 0.0f64;
        for k in 0..200 {
            let x = -1.7 + 3.0 * lam * k as f64 / 200.0;
            let (a, da) = sol.eval(x);
            let (b, db) = sol.eval(x + lam);
            assert!((a - b).abs() < 1e-9, "phi not periodic at x = {x}");
            assert!((da - db).abs() < 1e-8, "dphi not periodic at x = {x}");
            max_abs = max_abs.max(a.abs());
        }
        assert!(max_abs <= 1.0 + 1e-9);
        assert!(max_abs > 1.0 - 1e-3); // the sup is attained
    }

    #[test]
    fn energy_is_conserved_along_eval() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (sigma, nu, mu, alpha) in [
            (1u32, 1.0, 1.0, 1.0),
            (1, -1.0, 1.0, 0.5),
            (2, 1.5, -0.4, 1.1),
        ] {
            let p = params(sigma, nu);
            let pt = point(mu, alpha, &p);
            let sol = LineSolution::new(pt, p, Sign::Plus, 0.3).unwrap();
            let h = sol.energy();
            for _ in 0..1000 {
                let x: f64 = rng.gen_range(-10.0..10.0);
                let (phi, dphi) = sol.eval(x);
                let h_x = dphi * dphi + p.potential(mu, phi);
                assert!(
                    ((h_x - h) / h).abs() < 1e-8,
                    "energy drift at x = {x}: {h_x} vs {h}"
                );
            }
        }
    }

    #[test]
    fn sign_flip_symmetry() {
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        let plus = LineSolution::new(pt, p, Sign::Plus, 0.0).unwrap();
        let minus = LineSolution::new(pt, p, Sign::Minus, 0.0).unwrap();
        for k in 0..100 {
            let x = -2.0 + 0.1 * k as f64;
            let (a, da) = plus.eval(x);
            let (b, db) = minus.eval(x);
            assert!((a + b).abs() < 1e-10);
            assert!((da + db).abs() < 1e-9);
        }
    }

    #[test]
    fn ode_residual_by_second_differences() {
        let (sol, p) = sol_1111();
        let mu = 1.0;
        let delta = 1e-4;
        let scale = mu * 1.0; // μα
        for k in 1..50 {
            let x = sol.lambda() * k as f64 / 50.0;
            let (phi, _) = sol.eval(x);
            let (phi_p, _) = sol.eval(x + delta);
            let (phi_m, _) = sol.eval(x - delta);
            let second = (phi_p - 2.0 * phi + phi_m) / (delta * delta);
            let rhs = -mu * phi - 2.0 * p.nu() * phi.powi(3);
            assert!(
                ((second - rhs) / scale).abs() < 1e-5,
                "residual at x = {x}: {second} vs {rhs}"
            );
        }
    }

    #[test]
    fn eval_matches_ivp_oracle_over_one_period() {
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        let sol = LineSolution::new(pt, p, Sign::Plus, 0.0).unwrap();
        let start = oracle::zero_start(&pt, &p).unwrap();
        let traj = oracle::integrate(
            &start,
            &p,
            pt.mu,
            sol.lambda(),
            &oracle::IntegrateOptions::default(),
        )
        .unwrap();
        for k in 0..=400 {
            let x = sol.lambda() * k as f64 / 400.0;
            let (phi, _) = sol.eval(x);
            let (phi_ivp, _) = traj.eval(x.min(traj.x_end()));
            assert!(
                (phi - phi_ivp).abs() < 1e-6,
                "mismatch at x = {x}: {phi} vs {phi_ivp}"
            );
        }
    }

    #[test]
    fn zero_counting_on_the_lattice() {
        let (sol, _) = sol_1111();
        let lam = sol.lambda();
        // one period starting at the offset zero: only the half-period zero
        assert_eq!(sol.count_zeros_in(0.0, lam), 1);
        for n in 1..10 {
            assert_eq!(sol.count_zeros_in(0.0, n as f64 * lam / 2.0), n - 1);
        }
        // generic window
        assert_eq!(sol.count_zeros_in(0.1 * lam, 0.9 * lam), 1);
        assert_eq!(sol.count_zeros_in(-0.1 * lam, 1.1 * lam), 3);
    }

    #[test]
    fn zero_counting_matches_ivp_sign_changes() {
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        let sol = LineSolution::new(pt, p, Sign::Plus, 0.0).unwrap();
        let lam = sol.lambda();
        let start = oracle::zero_start(&pt, &p).unwrap();
        let traj = oracle::integrate(
            &start,
            &p,
            pt.mu,
            4.0 * lam,
            &oracle::IntegrateOptions::default(),
        )
        .unwrap();
        let (a, b) = (0.13 * lam, 3.7 * lam);
        let grid_count = traj.count_sign_changes_on_grid(a, b, 10_000);
        assert_eq!(sol.count_zeros_in(a, b), grid_count);
    }

    #[test]
    fn edge_trace_dirichlet_half_periods() {
        // l = nλ/2 pins a zero at the center; the slope sign alternates with
        // the parity of n.
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        let lam = wavelength(&pt, &p).unwrap().lambda;
        let slope = pt.alpha * (pt.mu + p.nu_alpha_2sigma(pt.alpha)).sqrt();
        for n in 1..=4u32 {
            let branch = EdgeBranch {
                point: pt,
                bc: BoundaryCondition::Dirichlet,
                zeta: Sign::Plus,
                edge_length: n as f64 * lam / 2.0,
            };
            let trace = edge_trace(&branch, &p).unwrap();
            assert!(trace.phi.abs() < 1e-9, "phi(0) = {} at n = {n}", trace.phi);
            let expect = if n % 2 == 0 { slope } else { -slope };
            assert!(
                (trace.dphi - expect).abs() < 1e-8,
                "slope parity broken at n = {n}: {} vs {expect}",
                trace.dphi
            );
            assert_eq!(trace.quarter_lock, Some(2 * n));
        }
    }

    #[test]
    fn edge_trace_neumann_quarter_period() {
        let p = params(1, 1.0);
        let pt = point(1.0, 1.0, &p);
        let lam = wavelength(&pt, &p).unwrap().lambda;
        let branch = EdgeBranch {
            point: pt,
            bc: BoundaryCondition::Neumann,
            zeta: Sign::Plus,
            edge_length: lam / 4.0,
        };
        let trace = edge_trace(&branch, &p).unwrap();
        assert!(trace.phi.abs() < 1e-9);
        assert_eq!(trace.quarter_lock, Some(1));
        // boundary value is the extremum ζα
        let sol = edge_solution(&branch, &p).unwrap();
        let (phi_l, dphi_l) = sol.eval(branch.edge_length);
        assert!((phi_l - 1.0).abs() < 1e-9);
        assert!(dphi_l.abs() < 1e-9);
    }

    #[test]
    fn edge_trace_generic_energy_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let p = params(1, 1.0);
        for _ in 0..20 {
            let mu = rng.gen_range(0.2..2.0);
            let alpha = rng.gen_range(0.3..2.0);
            let pt = point(mu, alpha, &p);
            let branch = EdgeBranch {
                point: pt,
                bc: if rng.gen_bool(0.5) {
                    BoundaryCondition::Dirichlet
                } else {
                    BoundaryCondition::Neumann
                },
                zeta: if rng.gen_bool(0.5) {
                    Sign::Plus
                } else {
                    Sign::Minus
                },
                edge_length: rng.gen_range(0.5..3.0),
            };
            let trace = edge_trace(&branch, &p).unwrap();
            let h = p.potential(mu, alpha);
            let h0 = trace.dphi * trace.dphi + p.potential(mu, trace.phi);
            assert!(((h0 - h) / h).abs() < 1e-8, "energy identity broken");
        }
    }
}
