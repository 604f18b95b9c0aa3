//! Matching-condition solver on star graphs.
//!
//! A candidate solution is `q = (μ, α₁, …, α_d)` together with one branch
//! sign per edge. The constraint vector is
//!
//! ```text
//! N₁(q) = Σ_j ∂ₓφ_j(0)          (Kirchhoff flux sum)
//! N_j(q) = φ_j(0) - φ₁(0)       (continuity, j = 2..d)
//! ```
//!
//! and `N(q) = 0` exactly when the edge solutions glue to a star solution.
//! The Jacobian `∂N/∂(α₁…α_d)` has an arrow structure (each edge only sees
//! its own amplitude); at points whose central vertex carries a zero the
//! entries have closed forms in terms of `∂λ/∂μ`, `∂λ/∂α` and the phase
//! ratio `ξ = l/λ`, and the determinant reduces through the Schur
//! complement to the single sum `S = Σ t_j/(ξ_j α_j ∂_αλ_j)` with
//! `t_j = (μ + (σ+1)να_j^(2σ))/(μ + να_j^(2σ)) > 0`. Away from such points
//! the Jacobian falls back to central finite differences.
//!
//! Continuation steps μ (the curve parameter — folds in μ are out of scope
//! and stop the run), predicts with the previous amplitudes, corrects with
//! damped Newton, and never switches branch signs.

use serde::Serialize;

use crate::model::{ModelParams, ParamPoint, Sign, StarGraph};
use crate::quadrature::{wavelength, DIVERGENCE_GUARD};
use crate::solution::{edge_solution, edge_trace, EdgeBranch, EdgeTrace};
use crate::{Error, Result};

/// Scaled max-norm below which the matching conditions count as solved.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Relative step for the finite-difference Jacobian.
const FD_STEP: f64 = 1e-6;

/// Condition-number estimate above which the Jacobian is rejected.
const COND_LIMIT: f64 = 1e12;

/// A point of the star parameter space with its branch bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct StarPoint {
    pub mu: f64,
    pub alphas: Vec<f64>,
    /// Branch signs ζ_j fixing each edge's boundary-vertex data.
    pub zetas: Vec<Sign>,
}

impl StarPoint {
    pub fn new(mu: f64, alphas: Vec<f64>, zetas: Vec<Sign>) -> Result<Self> {
        if alphas.len() != zetas.len() {
            return Err(Error::MismatchedEdgeData(format!(
                "{} alphas vs {} zetas",
                alphas.len(),
                zetas.len()
            )));
        }
        Ok(Self { mu, alphas, zetas })
    }

    pub fn degree(&self) -> usize {
        self.alphas.len()
    }
}

/// The constraint vector split into its flux and continuity parts.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualVector {
    /// Kirchhoff sum Σ ∂ₓφ_j(0).
    pub n1: f64,
    /// Continuity gaps φ_j(0) - φ₁(0), j = 2..d.
    pub nj: Vec<f64>,
}

impl ResidualVector {
    fn as_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.nj.len() + 1);
        v.push(self.n1);
        v.extend_from_slice(&self.nj);
        v
    }
}

/// One accepted point of a continuation run.
#[derive(Debug, Clone, Serialize)]
pub struct LocalCurvePoint {
    pub q: StarPoint,
    /// φ at the central vertex.
    pub central_value: f64,
    /// Interior nodal count (central vertex included when it is a zero).
    pub nodal_count: usize,
    pub residual_norm: f64,
}

/// Result of a continuation: accepted points plus how far the run got.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuationRun {
    pub points: Vec<LocalCurvePoint>,
    pub completed: bool,
    pub failure: Option<String>,
}

impl ContinuationRun {
    pub fn last(&self) -> &LocalCurvePoint {
        self.points.last().expect("continuation run is never empty")
    }
}

/// Per-edge branches of a star point.
pub fn edge_branches(q: &StarPoint, graph: &StarGraph) -> Result<Vec<EdgeBranch>> {
    if q.degree() != graph.degree() {
        return Err(Error::MismatchedEdgeData(format!(
            "point degree {} vs graph degree {}",
            q.degree(),
            graph.degree()
        )));
    }
    (0..graph.degree())
        .map(|j| {
            Ok(EdgeBranch {
                point: ParamPoint::new(q.mu, q.alphas[j], &graph.params)?,
                bc: graph.boundary_bcs[j],
                zeta: q.zetas[j],
                edge_length: graph.edge_lengths[j],
            })
        })
        .collect()
}

/// Central-vertex traces of all edges.
pub fn edge_traces(q: &StarPoint, graph: &StarGraph) -> Result<Vec<EdgeTrace>> {
    edge_branches(q, graph)?
        .iter()
        .map(|b| edge_trace(b, &graph.params))
        .collect()
}

/// Assemble the constraint vector `N(q)`.
pub fn residual(q: &StarPoint, graph: &StarGraph) -> Result<ResidualVector> {
    let traces = edge_traces(q, graph)?;
    Ok(residual_from_traces(&traces))
}

fn residual_from_traces(traces: &[EdgeTrace]) -> ResidualVector {
    let n1 = traces.iter().map(|t| t.dphi).sum();
    let nj = traces[1..].iter().map(|t| t.phi - traces[0].phi).collect();
    ResidualVector { n1, nj }
}

/// Max-norm of the residual with each component scaled by its natural
/// magnitude (slope scale for the flux sum, amplitude scale for the gaps).
pub fn scaled_residual_norm(r: &ResidualVector, q: &StarPoint, graph: &StarGraph) -> f64 {
    let params = &graph.params;
    let slope_scale = q
        .alphas
        .iter()
        .map(|&a| a * (q.mu + params.nu_alpha_2sigma(a)).abs().sqrt())
        .fold(f64::MIN_POSITIVE, f64::max);
    let mut norm = (r.n1 / slope_scale).abs();
    for (j, gap) in r.nj.iter().enumerate() {
        let scale = q.alphas[0].max(q.alphas[j + 1]).max(f64::MIN_POSITIVE);
        norm = norm.max((gap / scale).abs());
    }
    norm
}

/// φ at the central vertex (edge 1's trace; all edges agree at a solution).
pub fn central_value(q: &StarPoint, graph: &StarGraph) -> Result<f64> {
    Ok(edge_traces(q, graph)?[0].phi)
}

// ---------------------------------------------------------------------------
// Small dense linear algebra (the systems are d×d with d of order 10)
// ---------------------------------------------------------------------------

/// Row-major square matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SquareMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn lu(&self) -> Option<Lu> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].abs());
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let m = a[i * n + k] / pivot;
                a[i * n + k] = m;
                for j in k + 1..n {
                    a[i * n + j] -= m * a[k * n + j];
                }
            }
        }
        Some(Lu { n, a, piv, sign })
    }

    pub fn det(&self) -> f64 {
        match self.lu() {
            Some(lu) => lu.det(),
            None => 0.0,
        }
    }

    /// Solve `A x = b`; `None` when exactly singular.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        self.lu().map(|lu| lu.solve(b))
    }

    /// 1-norm condition estimate `‖A‖₁ ‖A⁻¹‖₁` (infinite when singular).
    pub fn cond1(&self) -> f64 {
        let lu = match self.lu() {
            Some(lu) => lu,
            None => return f64::INFINITY,
        };
        let mut inv_norm: f64 = 0.0;
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e[j] = 1.0;
            let col = lu.solve(&e);
            e[j] = 0.0;
            inv_norm = inv_norm.max(col.iter().map(|v| v.abs()).sum());
        }
        self.norm1() * inv_norm
    }
}

struct Lu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn det(&self) -> f64 {
        (0..self.n).fold(self.sign, |acc, k| acc * self.a[k * self.n + k])
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.a[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.a[i * n + j] * x[j];
            }
            x[i] /= self.a[i * n + i];
        }
        x
    }
}

// ---------------------------------------------------------------------------
// Jacobian
// ---------------------------------------------------------------------------

/// The Jacobian `∂N/∂(α₁…α_d)` at fixed μ, with the diagnostics the
/// central-zero closed forms expose.
#[derive(Debug, Clone, Serialize)]
pub struct JacobianInfo {
    pub matrix: SquareMatrix,
    /// True when the closed-form entries were used (central vertex zero).
    pub analytic: bool,
    pub det: f64,
    pub cond: f64,
    /// `det D · (A - B D⁻¹ C)` — equals `det` in the analytic case.
    pub schur_det: Option<f64>,
    /// `S = Σ t_j/(ξ_j α_j ∂_αλ_j)` — `det J = 0` iff `S = 0`.
    pub s_sum: Option<f64>,
    /// `t_j = (μ + (σ+1)να_j^(2σ))/(μ + να_j^(2σ))`.
    pub t_values: Vec<f64>,
}

/// `t_j` at a parameter point; strictly positive on all admissible regions
/// (and > 2 on P⁺₋).
pub fn t_value(mu: f64, alpha: f64, params: &ModelParams) -> f64 {
    let na = params.nu_alpha_2sigma(alpha);
    (mu + (params.sigma() as f64 + 1.0) * na) / (mu + na)
}

/// Whether the central vertex carries a zero: every edge phase-locked on a
/// quarter-integer with a vanishing central value.
fn central_zero(traces: &[EdgeTrace], alphas: &[f64]) -> bool {
    traces
        .iter()
        .zip(alphas)
        .all(|(t, &a)| t.quarter_lock.is_some() && t.phi.abs() <= 1e-9 * a)
}

/// Compute the Jacobian at `q`. Closed forms apply at central-zero points;
/// otherwise central finite differences with step `1e-6·max(1, α_j)`.
pub fn jacobian(q: &StarPoint, graph: &StarGraph) -> Result<JacobianInfo> {
    let d = graph.degree();
    let params = &graph.params;
    let traces = edge_traces(q, graph)?;
    let t_values: Vec<f64> = q.alphas.iter().map(|&a| t_value(q.mu, a, params)).collect();

    let analytic = central_zero(&traces, &q.alphas);
    let mut matrix = SquareMatrix::zeros(d);
    let (mut schur_det, mut s_sum) = (None, None);

    if analytic {
        // Closed-form entries: the zero pinned at the center moves with the
        // wavelength, so for each edge
        //   ∂_α φ(0)   = ζ ξ α √(μ + να^(2σ)) ∂_αλ     (D_j)
        //   ∂_α ∂ₓφ(0) = ζ (μ + (σ+1)να^(2σ)) / √(μ + να^(2σ))   (B_j)
        // with ζ the slope sign at the central zero.
        let mut d_diag = Vec::with_capacity(d);
        let mut b_row = Vec::with_capacity(d);
        for j in 0..d {
            let alpha = q.alphas[j];
            let point = ParamPoint::new(q.mu, alpha, params)?;
            let grad = wavelength(&point, params)?;
            let root = (q.mu + params.nu_alpha_2sigma(alpha)).sqrt();
            let zeta_ctr = traces[j].dphi.signum();
            let dj = zeta_ctr * traces[j].xi * alpha * root * grad.d_alpha;
            let bj = zeta_ctr
                * (q.mu + (params.sigma() as f64 + 1.0) * params.nu_alpha_2sigma(alpha))
                / root;
            d_diag.push(dj);
            b_row.push(bj);
        }
        for j in 0..d {
            matrix.set(0, j, b_row[j]);
        }
        for i in 1..d {
            matrix.set(i, 0, -d_diag[0]);
            matrix.set(i, i, d_diag[i]);
        }
        let mut s = b_row[0] / d_diag[0];
        let mut det_d = 1.0;
        for j in 1..d {
            s += b_row[j] / d_diag[j];
            det_d *= d_diag[j];
        }
        s_sum = Some(s);
        schur_det = Some(det_d * d_diag[0] * s);
    } else {
        for k in 0..d {
            let h = FD_STEP * q.alphas[k].max(1.0);
            let shifted = |delta: f64| -> Result<Vec<f64>> {
                let mut qk = q.clone();
                qk.alphas[k] += delta;
                Ok(residual(&qk, graph)?.as_vec())
            };
            let plus = shifted(h)?;
            let minus = shifted(-h)?;
            for i in 0..d {
                matrix.set(i, k, (plus[i] - minus[i]) / (2.0 * h));
            }
        }
    }

    let cond = matrix.cond1();
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::IllConditionedJacobian { cond });
    }
    let det = matrix.det();
    Ok(JacobianInfo {
        matrix,
        analytic,
        det,
        cond,
        schur_det,
        s_sum,
        t_values,
    })
}

// ---------------------------------------------------------------------------
// Newton and continuation
// ---------------------------------------------------------------------------

/// Whether `(μ, α)` is admissible and clear of the divergence guard.
fn point_admissible(mu: f64, alpha: f64, params: &ModelParams) -> bool {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return false;
    }
    match crate::model::classify_region(mu, alpha, params) {
        Ok(region) if region.is_valid() => {}
        _ => return false,
    }
    let margin = 10.0 * DIVERGENCE_GUARD;
    if params.nu() > 0.0 {
        let mu0 = params.mu_floor(alpha);
        (mu - mu0) / mu0.abs() >= margin
    } else {
        let mu_c = params.mu_crit(alpha);
        (mu - mu_c) / mu_c >= margin
    }
}

/// Solve `N(q) = 0` at fixed μ by damped Newton steps in the amplitudes.
///
/// Steps halve (up to 10 times) until the scaled residual norm decreases
/// and every `(μ, α_j)` stays inside the admissible regions; branch signs
/// are never touched.
pub fn newton_solve(q0: &StarPoint, graph: &StarGraph, fixed_mu: f64) -> Result<StarPoint> {
    let mut q = q0.clone();
    q.mu = fixed_mu;
    let mut r = residual(&q, graph)?;
    let mut norm = scaled_residual_norm(&r, &q, graph);
    for _ in 0..50 {
        if norm <= RESIDUAL_TOL {
            return Ok(q);
        }
        let jac = jacobian(&q, graph)?;
        let rhs: Vec<f64> = r.as_vec().iter().map(|v| -v).collect();
        let delta = jac
            .matrix
            .solve(&rhs)
            .ok_or(Error::IllConditionedJacobian {
                cond: f64::INFINITY,
            })?;
        let mut accepted = false;
        for halving in 0..=10 {
            let scale = 0.5f64.powi(halving);
            let candidate_alphas: Vec<f64> = q
                .alphas
                .iter()
                .zip(&delta)
                .map(|(&a, &d)| a + scale * d)
                .collect();
            if !candidate_alphas
                .iter()
                .all(|&a| point_admissible(fixed_mu, a, &graph.params))
            {
                continue;
            }
            let mut q_new = q.clone();
            q_new.alphas = candidate_alphas;
            let r_new = residual(&q_new, graph)?;
            let norm_new = scaled_residual_norm(&r_new, &q_new, graph);
            if norm_new < norm {
                q = q_new;
                r = r_new;
                norm = norm_new;
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::NewtonStalled {
                iters: 10,
                residual: norm,
            });
        }
    }
    if norm <= RESIDUAL_TOL {
        Ok(q)
    } else {
        Err(Error::NewtonStalled {
            iters: 50,
            residual: norm,
        })
    }
}

/// Interior nodal count: per-edge zeros strictly inside each edge plus one
/// for the central vertex when it carries a zero. Boundary-vertex zeros
/// (Dirichlet pins) are never counted.
pub fn count_star_nodes(q: &StarPoint, graph: &StarGraph) -> Result<usize> {
    let branches = edge_branches(q, graph)?;
    let mut count = 0;
    let mut center_zero = true;
    for (branch, &length) in branches.iter().zip(&graph.edge_lengths) {
        let sol = edge_solution(branch, &graph.params)?;
        count += sol.count_zeros_in(0.0, length);
        center_zero &= sol.on_zero_lattice(0.0);
    }
    if center_zero {
        count += 1;
    }
    Ok(count)
}

fn curve_point(q: &StarPoint, graph: &StarGraph) -> Result<LocalCurvePoint> {
    let traces = edge_traces(q, graph)?;
    let r = residual_from_traces(&traces);
    Ok(LocalCurvePoint {
        q: q.clone(),
        central_value: traces[0].phi,
        nodal_count: count_star_nodes(q, graph)?,
        residual_norm: scaled_residual_norm(&r, q, graph),
    })
}

/// Continue the solution family from `q_start` (which must solve the
/// matching conditions) to `mu_end` in `steps` μ-increments.
///
/// Predictor: previous amplitudes. Corrector: [`newton_solve`]. On
/// corrector failure the μ step halves, down to `(mu_end - mu_start)/
/// (2¹⁰ steps)`; a run that cannot proceed reports the last good point
/// rather than erroring.
pub fn continue_curve(
    q_start: &StarPoint,
    graph: &StarGraph,
    mu_end: f64,
    steps: u32,
) -> Result<ContinuationRun> {
    assert!(steps >= 1);
    let start_point = curve_point(q_start, graph)?;
    if start_point.residual_norm > 10.0 * RESIDUAL_TOL {
        return Err(Error::InvalidConfig(format!(
            "continuation start does not solve the matching conditions (residual {:.3e})",
            start_point.residual_norm
        )));
    }
    let mut points = vec![start_point];
    let span = mu_end - q_start.mu;
    if span == 0.0 {
        return Ok(ContinuationRun {
            points,
            completed: true,
            failure: None,
        });
    }
    let base_step = span / steps as f64;
    let min_step = base_step.abs() / 1024.0;
    let mut q = q_start.clone();
    let mut step = base_step;
    let mut guard = 0usize;
    while (mu_end - q.mu) * span.signum() > 1e-15 * span.abs() {
        guard += 1;
        if guard > 100_000 {
            return Ok(ContinuationRun {
                points,
                completed: false,
                failure: Some("iteration limit reached".into()),
            });
        }
        let remaining = mu_end - q.mu;
        let this_step = if step.abs() > remaining.abs() {
            remaining
        } else {
            step
        };
        match newton_solve(&q, graph, q.mu + this_step) {
            Ok(q_next) => {
                q = q_next;
                points.push(curve_point(&q, graph)?);
                step = base_step;
            }
            Err(e) => {
                step *= 0.5;
                if step.abs() < min_step {
                    return Ok(ContinuationRun {
                        points,
                        completed: false,
                        failure: Some(format!("corrector failed at mu = {}: {e}", q.mu)),
                    });
                }
            }
        }
    }
    Ok(ContinuationRun {
        points,
        completed: true,
        failure: None,
    })
}

/// Predicted nodal-count change `Z(q) - Z(q_star)` across a central zero:
///
/// ```text
/// sgn²(φ_q(0)) [ -1 + d/2 - sgn(φ_q(0))/2 · Σ_j sgn(∂ₓφ_{q*,j}(0)) ]
/// ```
///
/// `q_star` must carry a central-vertex zero.
pub fn predict_nodal_change(q: &StarPoint, q_star: &StarPoint, graph: &StarGraph) -> Result<i64> {
    let traces_star = edge_traces(q_star, graph)?;
    if !central_zero(&traces_star, &q_star.alphas) {
        return Err(Error::InvalidConfig(
            "predict_nodal_change requires a central-vertex zero at q_star".into(),
        ));
    }
    let branches = edge_branches(q, graph)?;
    let mut on_lattice = true;
    for branch in &branches {
        let sol = edge_solution(branch, &graph.params)?;
        on_lattice &= sol.on_zero_lattice(0.0);
    }
    if on_lattice {
        return Ok(0); // the central value stays zero
    }
    let s = if central_value(q, graph)? > 0.0 {
        1i64
    } else {
        -1i64
    };
    let d = graph.degree() as i64;
    let slope_sum: i64 = traces_star
        .iter()
        .map(|t| if t.dphi > 0.0 { 1i64 } else { -1i64 })
        .sum();
    debug_assert_eq!((d - s * slope_sum) % 2, 0);
    Ok(-1 + (d - s * slope_sum) / 2)
}

/// Central slope signs `ζ_j = sgn(∂ₓφ_j(0))` at a central-zero point.
pub fn central_slope_signs(q_star: &StarPoint, graph: &StarGraph) -> Result<Vec<Sign>> {
    Ok(edge_traces(q_star, graph)?
        .iter()
        .map(|t| Sign::of(t.dphi))
        .collect())
}
