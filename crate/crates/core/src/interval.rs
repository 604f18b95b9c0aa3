//! Spectral curves of the interval problem.
//!
//! For fixed α the map `f_α: μ ↦ λ(μ, α)` is strictly decreasing and spans
//! every admissible wavelength, so the `n`-th curve is the level set
//! `λ(μ, α) = λ_n` and each α determines a unique `μ_n(α)`. Solutions on
//! the `n`-th curve have exactly `n - 1` interior zeros, and as `α → 0`
//! the curve ends at the `n`-th eigenvalue of the linear problem.

use serde::Serialize;

use crate::model::{target_wavelength, BoundaryCondition, IntervalProblem, ParamPoint, Sign};
use crate::quadrature::{wavelength, WavelengthResult, DIVERGENCE_GUARD};
use crate::solution::LineSolution;
use crate::{Error, Result};

/// Relative tolerance on the wavelength match at a solved μ.
const LEVEL_TOL: f64 = 1e-10;

/// One point of a spectral curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveSample {
    pub n: u32,
    pub alpha: f64,
    pub mu: f64,
    pub nodal_count: usize,
}

/// `n`-th eigenvalue of the linear problem, `(2π/λ_n)²`.
///
/// For Neumann–Neumann the first eigenvalue (constant eigenfunction) is not
/// the limit of any spectral curve and `n = 1` is rejected.
pub fn linear_eigenvalue(n: u32, problem: &IntervalProblem) -> Result<f64> {
    let lambda_n = target_wavelength(n, problem).ok_or(Error::NoSuchCurve { n })?;
    let k = 2.0 * std::f64::consts::PI / lambda_n;
    Ok(k * k)
}

/// The unique μ with `λ(μ, α) = λ_n`, by safeguarded Newton on the strictly
/// decreasing map `f_α`, bracketed from the sandwich bounds
/// `2π(μ + (σ+1)να^(2σ))^(-1/2) ≤ λ ≤ 2π(μ + να^(2σ))^(-1/2)` (ν > 0, with
/// the reversed roles for ν < 0).
pub fn mu_of_alpha(n: u32, alpha: f64, problem: &IntervalProblem) -> Result<f64> {
    solve_mu(n, alpha, problem).map(|(mu, _)| mu)
}

fn solve_mu(n: u32, alpha: f64, problem: &IntervalProblem) -> Result<(f64, WavelengthResult)> {
    let params = &problem.params;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let lambda_n = target_wavelength(n, problem).ok_or(Error::NoSuchCurve { n })?;
    let base = {
        let k = 2.0 * std::f64::consts::PI / lambda_n;
        k * k
    };
    let na = params.nu_alpha_2sigma(alpha);
    let sigma1 = params.sigma() as f64 + 1.0;

    let eval = |mu: f64| -> Result<WavelengthResult> {
        wavelength(&ParamPoint::new(mu, alpha, params)?, params)
    };

    // Bracket [lo, hi] with λ(lo) ≥ λ_n ≥ λ(hi).
    let (lo, hi) = if params.nu() > 0.0 {
        let mu0 = params.mu_floor(alpha);
        let hi = base - na;
        let near = |eps: f64| mu0 + f64::max(eps, eps * mu0.abs());
        let mut lo = f64::max(near(1e-9), base - sigma1 * na);
        if eval(lo)?.lambda < lambda_n {
            // λ_n exceeds what the sandwich lower endpoint reaches; approach
            // the divergent boundary geometrically, staying above the guard.
            let mut found = false;
            for eps in [1e-10, 1e-11] {
                lo = near(eps);
                if eval(lo)?.lambda >= lambda_n {
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::UnattainableWavelength {
                    target: lambda_n,
                    alpha,
                });
            }
        }
        (lo, hi)
    } else {
        let mu_c = params.mu_crit(alpha);
        let hi = mu_c + base;
        let lo_sandwich = base + params.nu().abs() * alpha.powi(2 * params.sigma() as i32);
        let mut lo = if lo_sandwich > mu_c * (1.0 + 1e-6) {
            lo_sandwich
        } else {
            mu_c * (1.0 + 1e-6)
        };
        if eval(lo)?.lambda < lambda_n {
            let mut found = false;
            for eps in [1e-9, 1e-11] {
                lo = mu_c * (1.0 + eps);
                if eps <= 10.0 * DIVERGENCE_GUARD {
                    break;
                }
                if eval(lo)?.lambda >= lambda_n {
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::UnattainableWavelength {
                    target: lambda_n,
                    alpha,
                });
            }
        }
        (lo, hi)
    };

    let (mut lo, mut hi) = (lo, hi.max(lo * (1.0 + 1e-15) + 1e-300));
    let mut mu = 0.5 * (lo + hi);
    let mut result = eval(mu)?;
    for _ in 0..200 {
        let f = result.lambda - lambda_n;
        if f.abs() <= LEVEL_TOL * lambda_n {
            return Ok((mu, result));
        }
        if f > 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        // Deep inside the boundary layer |∂λ/∂μ| can exceed tol·λ_n per ulp
        // of μ; once the bracket collapses to machine precision the root is
        // isolated as tightly as f64 permits and the residual is whatever
        // the conditioning allows.
        if hi - lo <= 8.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            return Ok((mu, result));
        }
        let mut next = mu - f / result.d_mu;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        mu = next;
        result = eval(mu)?;
    }
    Err(Error::NewtonStalled {
        iters: 200,
        residual: (result.lambda - lambda_n).abs() / lambda_n,
    })
}

/// The interval solution at `(μ, α)`: pinned by a zero at the left endpoint
/// for a Dirichlet condition there, by an extremum for Neumann.
pub fn interval_solution(mu: f64, alpha: f64, problem: &IntervalProblem) -> Result<LineSolution> {
    let params = &problem.params;
    let point = ParamPoint::new(mu, alpha, params)?;
    let lambda = wavelength(&point, params)?.lambda;
    let offset = match problem.bc_left {
        BoundaryCondition::Dirichlet => 0.0,
        BoundaryCondition::Neumann => -0.25 * lambda,
    };
    LineSolution::new(point, *params, Sign::Plus, offset)
}

/// Trace the `n`-th spectral curve over a strictly increasing α grid.
///
/// Each sample solves the level-set equation and counts interior zeros of
/// the assembled interval solution. Consecutive μ values are checked
/// against the continuity bound `10 |Δα| |∂_αλ/∂_μλ|` evaluated at the
/// previous sample, which catches root-finder jumps across regions.
pub fn trace_curve(
    n: u32,
    alpha_grid: &[f64],
    problem: &IntervalProblem,
) -> Result<Vec<CurveSample>> {
    trace_curve_bounded(n, alpha_grid, problem, None)
}

/// [`trace_curve`] with an explicit bound on |Δμ| between consecutive
/// samples; `None` applies the default slope-based rule.
pub fn trace_curve_bounded(
    n: u32,
    alpha_grid: &[f64],
    problem: &IntervalProblem,
    max_jump: Option<f64>,
) -> Result<Vec<CurveSample>> {
    if alpha_grid.windows(2).any(|w| w[0] >= w[1]) || alpha_grid.is_empty() {
        return Err(Error::InvalidConfig(
            "alpha grid must be non-empty and strictly increasing".into(),
        ));
    }
    let mut samples = Vec::with_capacity(alpha_grid.len());
    let mut prev: Option<(f64, f64, WavelengthResult)> = None;
    for &alpha in alpha_grid {
        let (mu, result) = solve_mu(n, alpha, problem)?;
        if let Some((mu_prev, alpha_prev, grad_prev)) = prev {
            let d_alpha = alpha - alpha_prev;
            let bound = max_jump.unwrap_or_else(|| {
                10.0 * d_alpha.abs() * (grad_prev.d_alpha / grad_prev.d_mu).abs()
                    + 1e-9 * (1.0 + mu.abs())
            });
            let jump = (mu - mu_prev).abs();
            if jump > bound {
                return Err(Error::ContinuityJump { alpha, jump, bound });
            }
        }
        let sol = interval_solution(mu, alpha, problem)?;
        let nodal_count = sol.count_zeros_in(0.0, problem.length);
        samples.push(CurveSample {
            n,
            alpha,
            mu,
            nodal_count,
        });
        prev = Some((mu, alpha, result));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use std::f64::consts::PI;
    use BoundaryCondition::{Dirichlet, Neumann};

    fn problem(l: f64, a: BoundaryCondition, b: BoundaryCondition, nu: f64) -> IntervalProblem {
        IntervalProblem::new(l, a, b, ModelParams::new(1, nu).unwrap()).unwrap()
    }

    #[test]
    fn linear_eigenvalues() {
        let dd = problem(PI, Dirichlet, Dirichlet, 1.0);
        assert!((linear_eigenvalue(1, &dd).unwrap() - 1.0).abs() < 1e-14);
        assert!((linear_eigenvalue(2, &dd).unwrap() - 4.0).abs() < 1e-14);
        let dn = problem(1.0, Dirichlet, Neumann, 1.0);
        assert!((linear_eigenvalue(1, &dn).unwrap() - (PI / 2.0) * (PI / 2.0)).abs() < 1e-12);
        let nn = problem(PI, Neumann, Neumann, 1.0);
        assert!(linear_eigenvalue(1, &nn).is_err());
        assert!((linear_eigenvalue(2, &nn).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn small_alpha_approaches_linear_eigenvalues() {
        for nu in [1.0, -1.0] {
            let dd = problem(PI, Dirichlet, Dirichlet, nu);
            for n in 1..=2u32 {
                let mu = mu_of_alpha(n, 1e-4, &dd).unwrap();
                let lin = (n * n) as f64;
                assert!(
                    (mu - lin).abs() < 1e-2 * lin,
                    "nu = {nu}, n = {n}: mu = {mu}"
                );
            }
        }
    }

    #[test]
    fn level_set_property() {
        let dd = problem(PI, Dirichlet, Dirichlet, 1.0);
        for n in [1u32, 3] {
            for alpha in [0.3, 1.0, 2.5] {
                let mu = mu_of_alpha(n, alpha, &dd).unwrap();
                let pt = ParamPoint::new(mu, alpha, &dd.params).unwrap();
                let lam = wavelength(&pt, &dd.params).unwrap().lambda;
                let lam_n = target_wavelength(n, &dd).unwrap();
                assert!(((lam - lam_n) / lam_n).abs() <= LEVEL_TOL);
            }
        }
    }

    #[test]
    fn mu_ordering_in_n() {
        for nu in [1.0, -1.0] {
            let dd = problem(PI, Dirichlet, Dirichlet, nu);
            let alpha = 0.7;
            let mut prev = f64::NEG_INFINITY;
            for n in 1..=5 {
                let mu = mu_of_alpha(n, alpha, &dd).unwrap();
                assert!(mu > prev, "nu = {nu}: mu_{n} = {mu} <= {prev}");
                prev = mu;
            }
        }
    }

    #[test]
    fn nodal_counts_on_curves() {
        let grid: Vec<f64> = (0..8).map(|k| 0.2 + 0.3 * k as f64).collect();
        for (bl, br) in [
            (Dirichlet, Dirichlet),
            (Dirichlet, Neumann),
            (Neumann, Neumann),
        ] {
            let prob = problem(2.0, bl, br, 1.0);
            for n in 1..=4u32 {
                if target_wavelength(n, &prob).is_none() {
                    continue;
                }
                let samples = trace_curve(n, &grid, &prob).unwrap();
                for s in &samples {
                    assert_eq!(
                        s.nodal_count,
                        (n - 1) as usize,
                        "{bl:?}-{br:?} n = {n} alpha = {}",
                        s.alpha
                    );
                }
            }
        }
    }

    #[test]
    fn monotone_mu_along_curves() {
        let grid: Vec<f64> = (0..10).map(|k| 0.1 * (k + 1) as f64).collect();
        // ν > 0: level curves run toward smaller μ as α grows.
        let dd = problem(PI, Dirichlet, Dirichlet, 1.0);
        let samples = trace_curve(2, &grid, &dd).unwrap();
        for w in samples.windows(2) {
            assert!(w[1].mu < w[0].mu);
        }
        // ν < 0: the opposite.
        let dd = problem(PI, Dirichlet, Dirichlet, -1.0);
        let samples = trace_curve(2, &grid, &dd).unwrap();
        for w in samples.windows(2) {
            assert!(w[1].mu > w[0].mu);
        }
    }

    #[test]
    fn unattainable_wavelength_reported() {
        // ν < 0 with a huge target wavelength: the guarded domain cannot
        // reach it.
        let prob = problem(100.0, Dirichlet, Dirichlet, -1.0);
        match mu_of_alpha(1, 10.0, &prob) {
            Err(Error::UnattainableWavelength { .. }) => {}
            other => panic!("expected unattainable, got {other:?}"),
        }
    }

    #[test]
    fn nn_first_curve_missing() {
        let nn = problem(1.0, Neumann, Neumann, 1.0);
        assert!(matches!(
            mu_of_alpha(1, 0.5, &nn),
            Err(Error::NoSuchCurve { n: 1 })
        ));
    }

    #[test]
    fn rejects_bad_grid() {
        let dd = problem(1.0, Dirichlet, Dirichlet, 1.0);
        assert!(trace_curve(1, &[0.5, 0.5], &dd).is_err());
        assert!(trace_curve(1, &[], &dd).is_err());
    }
}
