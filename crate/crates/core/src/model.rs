//! Domain types: PDE coefficients, parameter regions, boundary conditions,
//! and the wavelength bookkeeping shared by every solver in the crate.
//!
//! A bounded oscillating solution is classified by where `(μ, α)` falls:
//!
//! - `P⁺₊` (ν > 0, μ > 0): every amplitude oscillates,
//! - `P⁺₋` (ν > 0, μ ≤ 0): oscillation requires `α > α₀ = |μ/ν|^(1/2σ)`,
//! - `P⁻`  (ν < 0, μ > 0): oscillation requires `α < α_c = |μ/((σ+1)ν)|^(1/2σ)`.
//!
//! Points on the region boundaries classify as [`Region::Outside`]: the sets
//! use strict inequalities and the wavelength integral diverges there, so a
//! boundary point is never a valid input to the quadrature.

use serde::Serialize;

use crate::{Error, Result};

/// Coefficients of the equation `μφ = -φ'' - (σ+1)νφ^(2σ+1)`.
///
/// `μ` is carried separately ([`ParamPoint`]) because it varies along
/// spectral curves while `σ, ν` stay fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    sigma: u32,
    nu: f64,
}

impl ModelParams {
    pub fn new(sigma: u32, nu: f64) -> Result<Self> {
        if sigma < 1 {
            return Err(Error::InvalidSigma(sigma));
        }
        if nu == 0.0 || !nu.is_finite() {
            return Err(Error::InvalidNu(nu));
        }
        Ok(Self { sigma, nu })
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `ν α^(2σ)`, the coefficient scale that region boundaries live on.
    pub fn nu_alpha_2sigma(&self, alpha: f64) -> f64 {
        self.nu * alpha.powi(2 * self.sigma as i32)
    }

    /// `α₀ = |μ/ν|^(1/2σ)`, lower amplitude bound of `P⁺₋`.
    pub fn alpha0(&self, mu: f64) -> f64 {
        (mu / self.nu).abs().powf(1.0 / (2.0 * self.sigma as f64))
    }

    /// `α_c = |μ/((σ+1)ν)|^(1/2σ)`, upper amplitude bound of `P⁻`.
    pub fn alpha_crit(&self, mu: f64) -> f64 {
        (mu / ((self.sigma as f64 + 1.0) * self.nu))
            .abs()
            .powf(1.0 / (2.0 * self.sigma as f64))
    }

    /// `μ₀ = -|ν|α^(2σ)`: for ν > 0 the wavelength diverges as μ ↘ μ₀.
    pub fn mu_floor(&self, alpha: f64) -> f64 {
        -self.nu.abs() * alpha.powi(2 * self.sigma as i32)
    }

    /// `μ_c = (σ+1)|ν|α^(2σ)`: for ν < 0 the wavelength diverges as μ ↘ μ_c.
    pub fn mu_crit(&self, alpha: f64) -> f64 {
        (self.sigma as f64 + 1.0) * self.nu.abs() * alpha.powi(2 * self.sigma as i32)
    }

    /// Geometric power sum `S(w) = Σ_{j=0}^{σ} w^(2j)`, the non-singular
    /// factor of the wavelength integrand: `1 - w^(2(σ+1)) = (1 - w²) S(w)`.
    pub fn power_sum(&self, w: f64) -> f64 {
        let w2 = w * w;
        let mut sum = 1.0;
        let mut p = 1.0;
        for _ in 0..self.sigma {
            p *= w2;
            sum += p;
        }
        sum
    }

    /// `S(w) - 1 = Σ_{j=1}^{σ} w^(2j)`, exact near `w = 0`.
    pub fn power_sum_tail(&self, w: f64) -> f64 {
        let w2 = w * w;
        let mut sum = 0.0;
        let mut p = 1.0;
        for _ in 0..self.sigma {
            p *= w2;
            sum += p;
        }
        sum
    }

    /// `((σ+1) - S(w)) / (1 - w²) = Σ_{j=1}^{σ} Σ_{i=0}^{j-1} w^(2i)`:
    /// factoring out `1 - w² = cos²t` keeps the ν < 0 integrand exact near
    /// `w = 1`, where the direct difference would cancel.
    pub fn power_sum_complement(&self, w: f64) -> f64 {
        let w2 = w * w;
        let mut p = 1.0; // w^(2j)
        let mut prefix = 1.0; // Σ_{i<j} w^(2i)
        let mut total = 1.0; // j = 1 term
        for _ in 1..self.sigma {
            p *= w2;
            prefix += p;
            total += prefix;
        }
        total
    }

    /// Effective potential `V(w) = μw² + νw^(2(σ+1))`.
    pub fn potential(&self, mu: f64, w: f64) -> f64 {
        mu * w * w + self.nu * w.powi(2 * (self.sigma as i32 + 1))
    }
}

/// Parameter regions supporting periodic zero-attaining solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// ν > 0, μ > 0, α > 0.
    PPlusPlus,
    /// ν > 0, μ ≤ 0, α > α₀.
    PPlusMinus,
    /// ν < 0, μ > 0, 0 < α < α_c.
    PMinus,
    /// None of the above (includes the boundaries α = α₀, α = α_c).
    Outside,
}

impl Region {
    pub fn is_valid(&self) -> bool {
        !matches!(self, Region::Outside)
    }
}

/// Classify `(μ, α)` into its parameter region.
///
/// The three regions partition the admissible set: exactly one tag matches,
/// with `Outside` covering everything else. Comparisons are exact — callers
/// needing guard bands around the boundaries apply them explicitly.
pub fn classify_region(mu: f64, alpha: f64, params: &ModelParams) -> Result<Region> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let region = if params.nu > 0.0 {
        if mu > 0.0 {
            Region::PPlusPlus
        } else if alpha > params.alpha0(mu) {
            Region::PPlusMinus
        } else {
            Region::Outside
        }
    } else if mu > 0.0 && alpha < params.alpha_crit(mu) {
        Region::PMinus
    } else {
        Region::Outside
    };
    Ok(region)
}

/// A point `(μ, α)` of the parameter half-plane with its region tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamPoint {
    pub mu: f64,
    pub alpha: f64,
    pub region: Region,
}

impl ParamPoint {
    /// Build a point, classifying it on the way. `alpha` must be positive.
    pub fn new(mu: f64, alpha: f64, params: &ModelParams) -> Result<Self> {
        let region = classify_region(mu, alpha, params)?;
        Ok(Self { mu, alpha, region })
    }

    pub fn require_valid(&self) -> Result<()> {
        if self.region.is_valid() {
            Ok(())
        } else {
            Err(Error::OutsideRegion {
                mu: self.mu,
                alpha: self.alpha,
            })
        }
    }
}

/// Effective particle total energy of a solution with amplitude α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLevel {
    pub h: f64,
}

/// `h = μα² + να^(2(σ+1))`, the conserved energy `(φ')² + μφ² + νφ^(2(σ+1))`.
///
/// Rejects points outside the admissible regions.
pub fn energy_of(point: &ParamPoint, params: &ModelParams) -> Result<EnergyLevel> {
    point.require_valid()?;
    Ok(EnergyLevel {
        h: params.potential(point.mu, point.alpha),
    })
}

/// Boundary condition at an interval endpoint or a boundary vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryCondition {
    /// φ = 0 at the endpoint.
    Dirichlet,
    /// φ' = 0 at the endpoint.
    Neumann,
}

/// Sign ζ ∈ {−1, +1} used for branch selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(&self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(&self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Sign of a nonzero float.
    pub fn of(x: f64) -> Sign {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `self * (-1)^k`.
    pub fn flip_if_odd(&self, k: u32) -> Sign {
        if k.is_multiple_of(2) {
            *self
        } else {
            self.flip()
        }
    }
}

/// An interval `[0, l]` with a boundary condition at each end.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntervalProblem {
    pub length: f64,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub params: ModelParams,
}

impl IntervalProblem {
    pub fn new(
        length: f64,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
        params: ModelParams,
    ) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::NonPositiveLength(length));
        }
        Ok(Self {
            length,
            bc_left,
            bc_right,
            params,
        })
    }
}

/// A star graph: `d ≥ 3` edges `[0, l_j]` joined at `x = 0` (central vertex,
/// continuity + Kirchhoff) with a Dirichlet or Neumann condition at each
/// boundary vertex `x = l_j`.
#[derive(Debug, Clone, Serialize)]
pub struct StarGraph {
    pub edge_lengths: Vec<f64>,
    pub boundary_bcs: Vec<BoundaryCondition>,
    pub params: ModelParams,
}

impl StarGraph {
    pub fn new(
        edge_lengths: Vec<f64>,
        boundary_bcs: Vec<BoundaryCondition>,
        params: ModelParams,
    ) -> Result<Self> {
        if edge_lengths.len() < 3 {
            return Err(Error::TooFewEdges(edge_lengths.len()));
        }
        if boundary_bcs.len() != edge_lengths.len() {
            return Err(Error::MismatchedEdgeData(format!(
                "{} lengths vs {} boundary conditions",
                edge_lengths.len(),
                boundary_bcs.len()
            )));
        }
        for &l in &edge_lengths {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::NonPositiveLength(l));
            }
        }
        Ok(Self {
            edge_lengths,
            boundary_bcs,
            params,
        })
    }

    pub fn degree(&self) -> usize {
        self.edge_lengths.len()
    }
}

/// Wavelength `λ_n` a solution must have so that the interval problem is
/// satisfied with `n - 1` interior zeros.
///
/// Mixed Dirichlet/Neumann ends: `4l/(2n-1)`. Dirichlet at both ends:
/// `2l/n`. Neumann at both ends the first curve is missing (a solution with
/// no zeros would be required), so `n = 1` returns `None` and the `n`-th
/// curve carries wavelength `2l/(n-1)`.
pub fn target_wavelength(n: u32, problem: &IntervalProblem) -> Option<f64> {
    use BoundaryCondition::*;
    assert!(n >= 1, "curve index must be positive");
    let l = problem.length;
    match (problem.bc_left, problem.bc_right) {
        (Dirichlet, Neumann) | (Neumann, Dirichlet) => Some(4.0 * l / (2.0 * n as f64 - 1.0)),
        (Dirichlet, Dirichlet) => Some(2.0 * l / n as f64),
        (Neumann, Neumann) => {
            if n == 1 {
                None
            } else {
                Some(2.0 * l / (n as f64 - 1.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(sigma: u32, nu: f64) -> ModelParams {
        ModelParams::new(sigma, nu).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0, 1.0).is_err());
        assert!(ModelParams::new(1, 0.0).is_err());
        assert!(ModelParams::new(1, f64::NAN).is_err());
        assert!(ModelParams::new(3, -2.5).is_ok());
    }

    #[test]
    fn classify_examples() {
        let p = params(1, 1.0);
        assert_eq!(classify_region(1.0, 1.0, &p).unwrap(), Region::PPlusPlus);
        // alpha0 = 1 < 2
        assert_eq!(classify_region(-1.0, 2.0, &p).unwrap(), Region::PPlusMinus);
        let m = params(1, -1.0);
        // alpha_c = (1/2)^(1/2) ≈ 0.7071 > 0.5
        assert!((m.alpha_crit(1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(classify_region(1.0, 0.5, &m).unwrap(), Region::PMinus);
    }

    #[test]
    fn classify_rejects_bad_alpha() {
        let p = params(1, 1.0);
        assert!(classify_region(1.0, 0.0, &p).is_err());
        assert!(classify_region(1.0, -1.0, &p).is_err());
        assert!(classify_region(1.0, f64::NAN, &p).is_err());
    }

    #[test]
    fn region_boundaries_are_outside() {
        let p = params(1, 1.0);
        // alpha exactly alpha0 for mu = -1 is alpha = 1
        assert_eq!(classify_region(-1.0, 1.0, &p).unwrap(), Region::Outside);
        let m = params(1, -1.0);
        let ac = m.alpha_crit(1.0);
        assert_eq!(classify_region(1.0, ac, &m).unwrap(), Region::Outside);
        // mu = 0 with nu < 0 is outside
        assert_eq!(classify_region(0.0, 0.5, &m).unwrap(), Region::Outside);
    }

    #[test]
    fn energy_examples() {
        let p = params(1, 1.0);
        let h0 = energy_of(&ParamPoint::new(0.0, 1.0, &p).unwrap(), &p).unwrap();
        assert_eq!(h0.h, 1.0);
        let h1 = energy_of(&ParamPoint::new(1.0, 1.0, &p).unwrap(), &p).unwrap();
        assert_eq!(h1.h, 2.0);

        let m = params(1, -1.0);
        let pt = ParamPoint::new(1.0, 0.5, &m).unwrap();
        let h = energy_of(&pt, &m).unwrap().h;
        assert!((h - 0.1875).abs() < 1e-15);
        // 0 < h < h_c = mu^2/(4|nu|) evaluated at the critical amplitude
        let ac = m.alpha_crit(1.0);
        let hc = m.potential(1.0, ac);
        assert!((hc - 0.25).abs() < 1e-15);
        assert!(h > 0.0 && h < hc);
    }

    #[test]
    fn energy_rejects_outside() {
        let m = params(1, -1.0);
        let outside = ParamPoint::new(-1.0, 0.5, &m).unwrap();
        assert!(energy_of(&outside, &m).is_err());
    }

    #[test]
    fn target_wavelength_examples() {
        let p = params(1, 1.0);
        use BoundaryCondition::*;
        let dd = IntervalProblem::new(std::f64::consts::PI, Dirichlet, Dirichlet, p).unwrap();
        assert!((target_wavelength(1, &dd).unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        let dn = IntervalProblem::new(1.0, Dirichlet, Neumann, p).unwrap();
        assert!((target_wavelength(2, &dn).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let nn = IntervalProblem::new(1.0, Neumann, Neumann, p).unwrap();
        assert!(target_wavelength(1, &nn).is_none());
        assert!((target_wavelength(2, &nn).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn target_wavelength_decreasing_in_n() {
        let p = params(1, 1.0);
        use BoundaryCondition::*;
        for (a, b) in [
            (Dirichlet, Dirichlet),
            (Dirichlet, Neumann),
            (Neumann, Neumann),
        ] {
            let prob = IntervalProblem::new(2.7, a, b, p).unwrap();
            let mut prev = f64::INFINITY;
            for n in 1..=10 {
                if let Some(lam) = target_wavelength(n, &prob) {
                    assert!(lam < prev, "{a:?}-{b:?} not decreasing at n = {n}");
                    prev = lam;
                }
            }
        }
    }

    #[test]
    fn power_sum_matches_factorization() {
        // (1 - w^(2(sigma+1))) = (1 - w^2) * S(w)
        for sigma in 1..=4u32 {
            let p = params(sigma, 1.0);
            for k in 0..50 {
                let w = 0.02 * k as f64;
                let lhs = 1.0 - w.powi(2 * (sigma as i32 + 1));
                let rhs = (1.0 - w * w) * p.power_sum(w);
                assert!((lhs - rhs).abs() < 1e-12, "sigma={sigma} w={w}");
            }
        }
    }

    #[test]
    fn power_sum_variants_are_consistent() {
        for sigma in 1..=5u32 {
            let p = params(sigma, 1.0);
            for k in 0..=40 {
                let w = 0.025 * k as f64;
                let s = p.power_sum(w);
                assert!((p.power_sum_tail(w) - (s - 1.0)).abs() < 1e-12);
                let complement = (1.0 - w * w) * p.power_sum_complement(w);
                assert!(
                    (complement - (sigma as f64 + 1.0 - s)).abs() < 1e-10,
                    "sigma={sigma} w={w}"
                );
            }
        }
    }

    proptest! {
        // classify_region is a partition: the returned tag is the unique one
        // whose defining predicate holds.
        #[test]
        fn classification_is_a_partition(
            mu in -10.0f64..10.0,
            alpha in 1e-6f64..10.0,
            nu in prop_oneof![-5.0f64..-1e-3, 1e-3f64..5.0],
            sigma in 1u32..4,
        ) {
            let p = params(sigma, nu);
            let by_def = |mu: f64, alpha: f64| -> Vec<Region> {
                let mut hits = vec![];
                if nu > 0.0 && mu > 0.0 && alpha > 0.0 {
                    hits.push(Region::PPlusPlus);
                }
                if nu > 0.0 && mu <= 0.0 && alpha > p.alpha0(mu) {
                    hits.push(Region::PPlusMinus);
                }
                if nu < 0.0 && mu > 0.0 && alpha > 0.0 && alpha < p.alpha_crit(mu) {
                    hits.push(Region::PMinus);
                }
                hits
            };
            let hits = by_def(mu, alpha);
            prop_assert!(hits.len() <= 1);
            let got = classify_region(mu, alpha, &p).unwrap();
            match hits.first() {
                Some(&r) => prop_assert_eq!(got, r),
                None => prop_assert_eq!(got, Region::Outside),
            }
        }

        // h > 0 on P^+_- samples; 0 < h < h_c on P^- samples.
        #[test]
        fn energy_bounds_hold(
            mu in -5.0f64..5.0,
            alpha in 1e-3f64..5.0,
            nu in prop_oneof![-3.0f64..-1e-2, 1e-2f64..3.0],
            sigma in 1u32..4,
        ) {
            let p = params(sigma, nu);
            let region = classify_region(mu, alpha, &p).unwrap();
            if region == Region::PPlusMinus {
                let h = p.potential(mu, alpha);
                prop_assert!(h > 0.0);
            }
            if region == Region::PMinus {
                let h = p.potential(mu, alpha);
                let hc = p.potential(mu, p.alpha_crit(mu));
                prop_assert!(h > 0.0 && h < hc);
            }
        }
    }
}
