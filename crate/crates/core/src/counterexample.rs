//! Constructions that break the oscillation property on star graphs.
//!
//! At μ = 0 the wavelength has the closed form `λ = 4c₁ν^(-1/2)α^(-σ)`, so
//! edge lengths can be chosen to pin a zero at the central vertex with
//! prescribed slope signs ζ_j: take `α_j = (2c₁ν^(-1/2) m_j/l_j)^(1/σ)`
//! where `m_j = n_j` for a Dirichlet edge and `n_j - 1/2` for a Neumann
//! edge. The Kirchhoff sum then vanishes exactly when
//!
//! ```text
//! Σ_j ζ_j (m_j/l_j)^(1 + 1/σ) = 0,
//! ```
//!
//! and if additionally `Σ_j ζ_j (m_j/l_j)^(-1 + 1/σ) ≠ 0` the central value
//! moves monotonically through zero along the continuation in μ, changing
//! the interior nodal count by `|Σ_j ζ_j|` between the two sides. Rational
//! rate choices (σ = 1: Pythagorean-type integer tuples) make the first
//! condition exact.

use serde::Serialize;

use crate::model::{BoundaryCondition, ModelParams, Sign, StarGraph};
use crate::quadrature::constants_c;
use crate::star::{
    central_slope_signs, continue_curve, count_star_nodes, residual, scaled_residual_norm,
    ContinuationRun, StarPoint,
};
use crate::{Error, Result};

/// Relative tolerance for the (knife-edge) zero-sum condition.
const PART3_TOL: f64 = 1e-12;

/// Relative scale below which the transversality sum counts as degenerate.
const PART4_TOL: f64 = 1e-9;

/// A star-graph configuration for the central-zero construction at μ = 0.
///
/// `zetas` are the prescribed slope signs at the central vertex; `ns` count
/// half-periods per edge (`m_j = n_j` Dirichlet, `n_j - 1/2` Neumann).
#[derive(Debug, Clone, Serialize)]
pub struct StarConfig {
    pub d: usize,
    pub sigma: u32,
    pub nu: f64,
    pub zetas: Vec<Sign>,
    pub ns: Vec<u32>,
    pub lengths: Vec<f64>,
    pub bcs: Vec<BoundaryCondition>,
}

impl StarConfig {
    pub fn new(
        sigma: u32,
        nu: f64,
        zetas: Vec<Sign>,
        ns: Vec<u32>,
        lengths: Vec<f64>,
        bcs: Vec<BoundaryCondition>,
    ) -> Result<Self> {
        let config = Self {
            d: zetas.len(),
            sigma,
            nu,
            zetas,
            ns,
            lengths,
            bcs,
        };
        config.validate()?;
        Ok(config)
    }

    /// Build from integer rates `r_j = m_j/l_j` (so `l_j = m_j/r_j`). For
    /// σ = 1 the zero-sum condition `Σ ζ_j r_j² = 0` is verified in exact
    /// integer arithmetic before any floats are produced.
    pub fn from_rates(
        sigma: u32,
        nu: f64,
        zetas: Vec<Sign>,
        ns: Vec<u32>,
        rates: &[u32],
        bcs: Vec<BoundaryCondition>,
    ) -> Result<Self> {
        if rates.len() != zetas.len() {
            return Err(Error::MismatchedEdgeData(format!(
                "{} rates vs {} zetas",
                rates.len(),
                zetas.len()
            )));
        }
        if sigma == 1 {
            let sum: i128 = zetas
                .iter()
                .zip(rates)
                .map(|(z, &r)| z.as_i8() as i128 * (r as i128) * (r as i128))
                .sum();
            if sum != 0 {
                return Err(Error::InvalidConfig(format!(
                    "rate condition sum(zeta_j r_j^2) = {sum} != 0"
                )));
            }
        }
        let lengths = ns
            .iter()
            .zip(bcs.iter())
            .zip(rates)
            .map(|((&n, bc), &r)| half_periods(n, *bc) / r as f64)
            .collect();
        Self::new(sigma, nu, zetas, ns, lengths, bcs)
    }

    /// `m_j`: half-periods between the boundary pin and the central zero.
    pub fn m(&self, j: usize) -> f64 {
        half_periods(self.ns[j], self.bcs[j])
    }

    /// `Σ ζ_j (m_j/l_j)^(1 + 1/σ)` and the scale of its terms.
    pub fn part3_sum(&self) -> (f64, f64) {
        self.signed_power_sum(1.0 + 1.0 / self.sigma as f64)
    }

    /// `Σ ζ_j (m_j/l_j)^(-1 + 1/σ)` and the scale of its terms.
    pub fn part4_sum(&self) -> (f64, f64) {
        self.signed_power_sum(-1.0 + 1.0 / self.sigma as f64)
    }

    fn signed_power_sum(&self, exponent: f64) -> (f64, f64) {
        let mut sum = 0.0;
        let mut scale = 0.0;
        for j in 0..self.d {
            let term = (self.m(j) / self.lengths[j]).powf(exponent);
            sum += self.zetas[j].as_f64() * term;
            scale += term.abs();
        }
        (sum, scale)
    }

    fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return Err(Error::TooFewEdges(self.d));
        }
        if self.sigma < 1 {
            return Err(Error::InvalidSigma(self.sigma));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "the construction requires nu > 0, got {}",
                self.nu
            )));
        }
        if self.ns.len() != self.d || self.lengths.len() != self.d || self.bcs.len() != self.d {
            return Err(Error::MismatchedEdgeData(
                "zetas, ns, lengths, bcs must all have length d".into(),
            ));
        }
        if self.ns.iter().any(|&n| n < 1) {
            return Err(Error::InvalidConfig("all n_j must be >= 1".into()));
        }
        for &l in &self.lengths {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::NonPositiveLength(l));
            }
        }
        let (p3, scale3) = self.part3_sum();
        if p3.abs() > PART3_TOL * scale3 {
            return Err(Error::InvalidConfig(format!(
                "zero-sum condition violated: sum = {p3:.3e} (scale {scale3:.3e})"
            )));
        }
        let (p4, scale4) = self.part4_sum();
        if p4.abs() <= PART4_TOL * scale4 {
            return Err(Error::InvalidConfig(format!(
                "transversality sum degenerate: sum = {p4:.3e} (scale {scale4:.3e})"
            )));
        }
        Ok(())
    }
}

fn half_periods(n: u32, bc: BoundaryCondition) -> f64 {
    match bc {
        BoundaryCondition::Dirichlet => n as f64,
        BoundaryCondition::Neumann => n as f64 - 0.5,
    }
}

/// Assemble the μ = 0 central-zero solution of a configuration.
///
/// Amplitudes follow the closed form `α_j = (2c₁ν^(-1/2) m_j/l_j)^(1/σ)`;
/// the returned point solves the matching conditions to `1e-9`.
pub fn build_qstar(config: &StarConfig) -> Result<(StarPoint, StarGraph)> {
    config.validate()?;
    let params = ModelParams::new(config.sigma, config.nu)?;
    let c1 = constants_c(&params).c1;
    let inv_sigma = 1.0 / config.sigma as f64;
    let alphas: Vec<f64> = (0..config.d)
        .map(|j| (2.0 * c1 / config.nu.sqrt() * config.m(j) / config.lengths[j]).powf(inv_sigma))
        .collect();
    // The branch sign lives at the boundary vertex; walking n half-periods
    // (Dirichlet) or n-1 plus a quarter (Neumann) back to the center flips
    // the slope sign once per half-period.
    let branch_zetas: Vec<Sign> = (0..config.d)
        .map(|j| match config.bcs[j] {
            BoundaryCondition::Dirichlet => config.zetas[j].flip_if_odd(config.ns[j]),
            BoundaryCondition::Neumann => config.zetas[j].flip_if_odd(config.ns[j] - 1),
        })
        .collect();
    let graph = StarGraph::new(config.lengths.clone(), config.bcs.clone(), params)?;
    let q = StarPoint::new(0.0, alphas, branch_zetas)?;
    let r = residual(&q, &graph)?;
    let norm = scaled_residual_norm(&r, &q, &graph);
    if norm > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "assembled point misses the matching conditions (residual {norm:.3e})"
        )));
    }
    Ok((q, graph))
}

/// Search for an all-Dirichlet configuration with `n_j = 1`: sign patterns
/// with the minus block trailing, integer rates up to `search_bound`,
/// zero-sum condition exact for σ = 1 and solved for the last rate
/// numerically for σ ≥ 2. Returns the first hit in deterministic order.
pub fn find_config(sigma: u32, d: usize, search_bound: u32) -> Option<StarConfig> {
    if d < 3 || sigma < 1 || search_bound < 1 {
        return None;
    }
    for minus_count in 1..d {
        let plus_count = d - minus_count;
        let zetas: Vec<Sign> = (0..d)
            .map(|j| {
                if j < plus_count {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            })
            .collect();
        if sigma == 1 {
            // exact search: sum of plus squares equals sum of minus squares
            let mut rates = vec![1u32; d];
            loop {
                let sorted = rates[..plus_count].windows(2).all(|w| w[0] <= w[1])
                    && rates[plus_count..].windows(2).all(|w| w[0] <= w[1]);
                if sorted {
                    let balance: i128 = rates
                        .iter()
                        .zip(&zetas)
                        .map(|(&r, z)| z.as_i8() as i128 * (r as i128) * (r as i128))
                        .sum();
                    if balance == 0 {
                        if let Ok(config) = StarConfig::from_rates(
                            sigma,
                            1.0,
                            zetas.clone(),
                            vec![1; d],
                            &rates,
                            vec![BoundaryCondition::Dirichlet; d],
                        ) {
                            return Some(config);
                        }
                    }
                }
                if !next_tuple(&mut rates, search_bound) {
                    break;
                }
            }
        } else {
            // solve the last rate numerically from the leading d-1 rates
            let exponent = 1.0 + 1.0 / sigma as f64;
            let mut rates = vec![1u32; d - 1];
            loop {
                let sorted = rates[..plus_count.min(d - 1)]
                    .windows(2)
                    .all(|w| w[0] <= w[1])
                    && rates[plus_count.min(d - 1)..]
                        .windows(2)
                        .all(|w| w[0] <= w[1]);
                if sorted {
                    let partial: f64 = rates
                        .iter()
                        .zip(&zetas)
                        .map(|(&r, z)| z.as_f64() * (r as f64).powf(exponent))
                        .sum();
                    // need zeta_d * r_d^e = -partial with r_d > 0
                    if partial * zetas[d - 1].as_f64() < 0.0 {
                        let r_last = partial.abs().powf(1.0 / exponent);
                        let mut lengths: Vec<f64> = rates.iter().map(|&r| 1.0 / r as f64).collect();
                        lengths.push(1.0 / r_last);
                        if let Ok(config) = StarConfig::new(
                            sigma,
                            1.0,
                            zetas.clone(),
                            vec![1; d],
                            lengths,
                            vec![BoundaryCondition::Dirichlet; d],
                        ) {
                            return Some(config);
                        }
                    }
                }
                if !next_tuple(&mut rates, search_bound) {
                    break;
                }
            }
        }
    }
    None
}

/// Lexicographic odometer over `[1, bound]^k`.
fn next_tuple(r: &mut [u32], bound: u32) -> bool {
    for i in (0..r.len()).rev() {
        if r[i] < bound {
            r[i] += 1;
            for v in &mut r[i + 1..] {
                *v = 1;
            }
            return true;
        }
    }
    false
}

/// Outcome of driving a configuration through its central zero.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationReport {
    pub sigma: u32,
    pub nu: f64,
    pub d: usize,
    pub zetas: Vec<i8>,
    pub ns: Vec<u32>,
    pub lengths: Vec<f64>,
    pub bcs: Vec<BoundaryCondition>,
    pub alphas: Vec<f64>,
    pub delta_mu: f64,
    pub residual_star: f64,
    pub z_star: usize,
    pub z_plus: usize,
    pub z_minus: usize,
    pub measured_change: u64,
    pub predicted_change: u64,
    pub central_plus: f64,
    pub central_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

fn continue_with_retry(
    q: &StarPoint,
    graph: &StarGraph,
    mut delta: f64,
    steps: u32,
) -> Result<(ContinuationRun, f64)> {
    for _ in 0..5 {
        let run = continue_curve(q, graph, q.mu + delta, steps)?;
        if run.completed {
            return Ok((run, delta));
        }
        delta *= 0.5;
    }
    Err(Error::ContinuationStalled {
        mu: q.mu,
        reason: "corrector kept failing after halving the continuation target".into(),
    })
}

/// Build the μ = 0 solution, continue to μ = ±δ, and compare the measured
/// nodal-count change against `|Σ ζ_j|`.
///
/// `delta_mu` defaults to `1e-3 · min_j να_j^(2σ)`; it is halved
/// automatically when the first corrector fails. A mismatch between the
/// measured and predicted change is an error, not a report.
pub fn demonstrate_violation(
    config: &StarConfig,
    delta_mu: Option<f64>,
) -> Result<ViolationReport> {
    let (q_star, graph) = build_qstar(config)?;
    let params = &graph.params;
    let delta = match delta_mu {
        Some(d) if d > 0.0 && d.is_finite() => d,
        Some(d) => {
            return Err(Error::InvalidConfig(format!(
                "delta_mu must be > 0, got {d}"
            )))
        }
        None => {
            1e-3 * q_star
                .alphas
                .iter()
                .map(|&a| params.nu_alpha_2sigma(a))
                .fold(f64::INFINITY, f64::min)
        }
    };
    let r = residual(&q_star, &graph)?;
    let residual_star = scaled_residual_norm(&r, &q_star, &graph);
    let z_star = count_star_nodes(&q_star, &graph)?;

    let (run_plus, delta_plus) = continue_with_retry(&q_star, &graph, delta, 8)?;
    let (run_minus, _) = continue_with_retry(&q_star, &graph, -delta_plus, 8)?;
    let plus = run_plus.last();
    let minus = run_minus.last();

    let zetas_ctr = central_slope_signs(&q_star, &graph)?;
    let predicted = zetas_ctr
        .iter()
        .map(|z| z.as_i8() as i64)
        .sum::<i64>()
        .unsigned_abs();
    if plus.central_value * minus.central_value >= 0.0 {
        // The central value fails to cross zero transversally. This happens
        // identically at σ = 2, where the first-order coefficient carries
        // the factor 1 - (1 + 1/σ)c₃ and c₃ = σ/(σ+1) exactly; the central
        // value then moves only at second order, with the same sign on both
        // sides, and no first-order nodal change exists to demonstrate.
        return Err(Error::InvalidConfig(format!(
            "central value does not flip sign across mu = 0 ({:.3e} vs {:.3e}): \
             the transversality of this configuration is degenerate",
            minus.central_value, plus.central_value
        )));
    }
    let measured = (plus.nodal_count as i64 - minus.nodal_count as i64).unsigned_abs();
    if measured != predicted {
        return Err(Error::InvalidConfig(format!(
            "nodal count change mismatch: measured {measured}, predicted {predicted}"
        )));
    }

    Ok(ViolationReport {
        sigma: config.sigma,
        nu: config.nu,
        d: config.d,
        zetas: config.zetas.iter().map(|z| z.as_i8()).collect(),
        ns: config.ns.clone(),
        lengths: config.lengths.clone(),
        bcs: config.bcs.clone(),
        alphas: q_star.alphas.clone(),
        delta_mu: delta_plus,
        residual_star,
        z_star,
        z_plus: plus.nodal_count,
        z_minus: minus.nodal_count,
        measured_change: measured,
        predicted_change: predicted,
        central_plus: plus.central_value,
        central_minus: minus.central_value,
        mu_plus: plus.q.mu,
        mu_minus: minus.q.mu,
    })
}
