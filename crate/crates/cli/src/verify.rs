//! Numerical invariant suites behind `nlsg verify`.
//!
//! Each check recomputes an identity or bound from scratch and reports one
//! PASS/FAIL line; the process exits nonzero when anything fails.

use anyhow::{bail, Result};

use nlsg_core::counterexample::{build_qstar, demonstrate_violation, find_config, StarConfig};
use nlsg_core::interval::{linear_eigenvalue, mu_of_alpha, trace_curve};
use nlsg_core::model::{
    target_wavelength, BoundaryCondition, IntervalProblem, ModelParams, ParamPoint, Sign,
};
use nlsg_core::oracle;
use nlsg_core::quadrature::{constants_c, mu_zero_wavelength, wavelength};
use nlsg_core::solution::{edge_trace, EdgeBranch};
use nlsg_core::star::{
    continue_curve, count_star_nodes, jacobian, newton_solve, predict_nodal_change, residual,
    scaled_residual_norm, t_value,
};
use BoundaryCondition::{Dirichlet, Neumann};

pub struct CheckResult {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

type Check = (&'static str, fn() -> std::result::Result<String, String>);

pub fn run_suite(suite: &str) -> Result<Vec<CheckResult>> {
    let quadrature: &[Check] = &[
        ("quadrature/constants", check_constants),
        ("quadrature/anchors", check_wavelength_anchors),
        ("quadrature/gradient-fd", check_gradient_fd),
        ("quadrature/small-alpha-limit", check_small_alpha_limit),
        ("quadrature/divergence", check_divergence),
        ("quadrature/mu-zero", check_mu_zero),
    ];
    let oracle: &[Check] = &[
        ("oracle/period-equivalence", check_period_equivalence),
        ("oracle/energy-drift", check_energy_drift),
        ("oracle/turning-values", check_turning_values),
    ];
    let interval: &[Check] = &[
        ("interval/linear-limit", check_linear_limit),
        ("interval/oscillation", check_oscillation),
        ("interval/level-set", check_level_set),
        ("interval/exclusions", check_exclusions),
    ];
    let star: &[Check] = &[
        ("star/ray-variation", check_ray_variation),
        ("star/jacobian-structure", check_jacobian_structure),
        ("star/newton-basin", check_newton_basin),
        ("star/nodal-prediction", check_nodal_prediction),
    ];
    let counterexample: &[Check] = &[
        ("counterexample/pythagorean", check_pythagorean),
        ("counterexample/five-edges", check_five_edges),
        ("counterexample/neumann-remark", check_neumann_remark),
    ];

    let selected: Vec<&[Check]> = match suite {
        "quadrature" => vec![quadrature],
        "oracle" => vec![oracle],
        "interval" => vec![interval],
        "star" => vec![star],
        "counterexample" => vec![counterexample],
        "all" => vec![quadrature, oracle, interval, star, counterexample],
        other => bail!(
            "unknown suite `{other}` (use all, quadrature, oracle, interval, star, counterexample)"
        ),
    };

    let mut results = Vec::new();
    for group in selected {
        for (name, check) in group {
            let (ok, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            results.push(CheckResult {
                name: name.to_string(),
                ok,
                detail,
            });
        }
    }
    Ok(results)
}

fn params(sigma: u32, nu: f64) -> ModelParams {
    ModelParams::new(sigma, nu).expect("valid params")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn check_constants() -> std::result::Result<String, String> {
    let c = constants_c(&params(1, 1.0));
    let frozen = [
        (c.c1, 1.3110287771460599, "c1(1)"),
        (c.c2, 0.955049447256928, "c2(1)"),
    ];
    for (got, want, label) in frozen {
        if (got - want).abs() > 1e-10 {
            return Err(format!("{label} = {got}, expected {want}"));
        }
    }
    let c2 = constants_c(&params(2, 1.0));
    if (c2.c3 - 2.0 / 3.0).abs() > 1e-10 {
        return Err(format!("c3(2) = {}, expected 2/3", c2.c3));
    }
    Ok("c1, c2 match the frozen high-precision values; c3(sigma=2) = 2/3".into())
}

fn check_wavelength_anchors() -> std::result::Result<String, String> {
    let anchors = [
        (1u32, 1.0, 1.0, 1.0, 4.004309521824425),
        (1, -1.0, 1.0, 0.5, 8.00861904364885),
        (1, 1.0, -1.0, 2.0, 2.902524740909197),
        (2, 0.7, 1.0, 1.3, 2.983915053698628),
    ];
    for (sigma, nu, mu, alpha, want) in anchors {
        let p = params(sigma, nu);
        let pt = ParamPoint::new(mu, alpha, &p).map_err(|e| e.to_string())?;
        let lam = wavelength(&pt, &p).map_err(|e| e.to_string())?.lambda;
        if rel(lam, want) > 1e-10 {
            return Err(format!(
                "lambda({mu}, {alpha}; nu={nu}, sigma={sigma}) = {lam}, expected {want}"
            ));
        }
    }
    Ok("4 frozen wavelength anchors reproduced to 1e-10".into())
}

fn check_gradient_fd() -> std::result::Result<String, String> {
    let cases = [
        (1u32, 1.0, 1.0, 1.0),
        (1, 1.0, -0.5, 1.4),
        (1, -1.0, 1.0, 0.5),
        (2, 0.7, 1.0, 1.3),
        (3, 1.2, 0.5, 0.9),
    ];
    for (sigma, nu, mu, alpha) in cases {
        let p = params(sigma, nu);
        let lam = |m: f64, a: f64| -> std::result::Result<f64, String> {
            let pt = ParamPoint::new(m, a, &p).map_err(|e| e.to_string())?;
            Ok(wavelength(&pt, &p).map_err(|e| e.to_string())?.lambda)
        };
        let pt = ParamPoint::new(mu, alpha, &p).map_err(|e| e.to_string())?;
        let r = wavelength(&pt, &p).map_err(|e| e.to_string())?;
        let h = 1e-6;
        let fd_mu = (lam(mu + h, alpha)? - lam(mu - h, alpha)?) / (2.0 * h);
        let fd_al = (lam(mu, alpha + h)? - lam(mu, alpha - h)?) / (2.0 * h);
        if rel(r.d_mu, fd_mu) > 1e-5 || rel(r.d_alpha, fd_al) > 1e-5 {
            return Err(format!(
                "gradient mismatch at sigma={sigma} nu={nu} mu={mu} alpha={alpha}"
            ));
        }
        if r.d_mu >= 0.0 || r.d_alpha * nu >= 0.0 {
            return Err(format!(
                "gradient sign violation at sigma={sigma} nu={nu} mu={mu} alpha={alpha}"
            ));
        }
    }
    Ok("closed-form gradients match finite differences to 1e-5 on 5 points".into())
}

fn check_small_alpha_limit() -> std::result::Result<String, String> {
    for nu in [1.0, -1.0] {
        let p = params(1, nu);
        let target = 2.0 * std::f64::consts::PI / 2.0f64.sqrt();
        let mut prev = f64::INFINITY;
        for alpha in [1e-2, 1e-3, 1e-4] {
            let pt = ParamPoint::new(2.0, alpha, &p).map_err(|e| e.to_string())?;
            let lam = wavelength(&pt, &p).map_err(|e| e.to_string())?.lambda;
            let err = (lam - target).abs();
            if err >= prev {
                return Err(format!(
                    "limit error not decreasing at nu={nu} alpha={alpha}"
                ));
            }
            prev = err;
        }
    }
    Ok("lambda -> 2 pi mu^(-1/2) monotonically as alpha -> 0, both signs of nu".into())
}

fn check_divergence() -> std::result::Result<String, String> {
    let p = params(1, 1.0);
    let alpha = 1e-2;
    let mu0 = p.mu_floor(alpha);
    let mut prev = 0.0;
    for k in 3..=11 {
        let mu = mu0 + 10f64.powi(-k) * mu0.abs();
        let pt = ParamPoint::new(mu, alpha, &p).map_err(|e| e.to_string())?;
        let lam = wavelength(&pt, &p).map_err(|e| e.to_string())?.lambda;
        if lam <= prev {
            return Err(format!("growth not monotone at eps = 1e-{k}"));
        }
        prev = lam;
    }
    if prev <= 1e3 {
        return Err(format!("lambda reached only {prev} approaching mu0"));
    }
    // guard refusal
    let pt = ParamPoint::new(mu0 + 1e-13 * mu0.abs(), alpha, &p).map_err(|e| e.to_string())?;
    if wavelength(&pt, &p).is_ok() {
        return Err("guard did not refuse a boundary-adjacent point".into());
    }
    Ok(format!(
        "monotone growth past 1e3 (reached {prev:.3e}); guard refuses inside 1e-12"
    ))
}

fn check_mu_zero() -> std::result::Result<String, String> {
    for (sigma, nu) in [(1u32, 1.0), (2, 1.3)] {
        let p = params(sigma, nu);
        for alpha in [0.7, 1.0, 1.8] {
            let closed = mu_zero_wavelength(alpha, &p).map_err(|e| e.to_string())?;
            let pt = ParamPoint::new(1e-12, alpha, &p).map_err(|e| e.to_string())?;
            let r = wavelength(&pt, &p).map_err(|e| e.to_string())?;
            if rel(r.lambda, closed.lambda) > 1e-8
                || rel(r.d_alpha, closed.d_alpha) > 1e-8
                || rel(r.d_mu, closed.d_mu) > 1e-8
            {
                return Err(format!(
                    "closed-form mismatch at sigma={sigma} alpha={alpha}"
                ));
            }
        }
    }
    Ok("mu = 0 closed forms match the quadrature to 1e-8".into())
}

fn oracle_points() -> Vec<(u32, f64, f64, f64)> {
    vec![
        (1, 1.0, 1.0, 1.0),
        (1, 1.0, 4.0, 0.3),
        (1, 1.0, 0.2, 2.0),
        (2, 1.0, 1.0, 1.1),
        (3, 1.0, 2.0, 0.9),
        (1, 1.0, -0.5, 1.2),
        (1, 1.0, -1.0, 1.4),
        (2, 1.0, -0.5, 1.05),
        (1, 1.0, 0.0, 0.8),
        (1, -1.0, 1.0, 0.5),
        (1, -1.0, 2.0, 0.6),
        (2, -1.0, 2.0, 0.55),
        (3, -1.0, 1.5, 0.6),
    ]
}

fn check_period_equivalence() -> std::result::Result<String, String> {
    let points = oracle_points();
    let count = points.len();
    for (sigma, nu, mu, alpha) in points {
        let p = params(sigma, nu);
        let pt = ParamPoint::new(mu, alpha, &p).map_err(|e| e.to_string())?;
        let lam = wavelength(&pt, &p).map_err(|e| e.to_string())?.lambda;
        let period = oracle::measure_period(&pt, &p).map_err(|e| e.to_string())?;
        if rel(lam, period) > 1e-6 {
            return Err(format!(
                "quadrature {lam} vs period {period} at sigma={sigma} nu={nu} mu={mu} alpha={alpha}"
            ));
        }
    }
    Ok(format!(
        "quadrature equals time-of-flight period to 1e-6 on {count} points"
    ))
}

fn check_energy_drift() -> std::result::Result<String, String> {
    for (sigma, nu, mu, alpha) in [(1u32, 1.0, 1.0, 1.0), (2, -0.5, 2.0, 0.6)] {
        let p = params(sigma, nu);
        let pt = ParamPoint::new(mu, alpha, &p).map_err(|e| e.to_string())?;
        let period = oracle::measure_period(&pt, &p).map_err(|e| e.to_string())?;
        let start = oracle::zero_start(&pt, &p).map_err(|e| e.to_string())?;
        let h0 = oracle::energy(&start, &p, mu);
        let traj = oracle::integrate(
            &start,
            &p,
            mu,
            10.0 * period,
            &oracle::IntegrateOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        for k in 0..=500 {
            let x = 10.0 * period * k as f64 / 500.0;
            let (phi, dphi) = traj.eval(x);
            let h = oracle::energy(&oracle::IvpState { x, phi, dphi }, &p, mu);
            if ((h - h0) / h0).abs() > 1e-8 {
                return Err(format!("energy drift {} at x = {x}", ((h - h0) / h0).abs()));
            }
        }
    }
    Ok("energy drift over 10 periods below 1e-8".into())
}

fn check_turning_values() -> std::result::Result<String, String> {
    for (nu, mu, alpha) in [(1.0, 1.0, 1.2), (-1.0, 2.0, 0.4)] {
        let p = params(1, nu);
        let pt = ParamPoint::new(mu, alpha, &p).map_err(|e| e.to_string())?;
        let h = p.potential(mu, alpha);
        let beta = (-0.5 / nu * (mu - (mu * mu + 4.0 * h * nu).sqrt())).sqrt();
        let measured = oracle::measure_turning_value(&pt, &p).map_err(|e| e.to_string())?;
        if (measured - beta).abs() > 1e-8 {
            return Err(format!("turning value {measured} vs formula {beta}"));
        }
    }
    Ok("turning values match the sigma = 1 closed form to 1e-8".into())
}

fn check_linear_limit() -> std::result::Result<String, String> {
    for nu in [1.0, -1.0] {
        let problem =
            IntervalProblem::new(std::f64::consts::PI, Dirichlet, Dirichlet, params(1, nu))
                .map_err(|e| e.to_string())?;
        for n in 1..=5u32 {
            let mu = mu_of_alpha(n, 1e-4, &problem).map_err(|e| e.to_string())?;
            let lin = (n * n) as f64;
            if (mu - lin).abs() > 1e-2 * lin {
                return Err(format!("nu={nu} n={n}: mu = {mu}"));
            }
        }
    }
    Ok("mu_n(1e-4) within 1% of n^2 for n = 1..5, both signs of nu".into())
}

fn check_oscillation() -> std::result::Result<String, String> {
    let grid: Vec<f64> = (0..15).map(|k| 0.02 * 1.45f64.powi(k)).collect();
    let mut checked = 0usize;
    for (bl, br) in [
        (Dirichlet, Dirichlet),
        (Dirichlet, Neumann),
        (Neumann, Neumann),
    ] {
        let problem = IntervalProblem::new(std::f64::consts::PI, bl, br, params(1, 1.0))
            .map_err(|e| e.to_string())?;
        let mut prev: Option<Vec<f64>> = None;
        for n in 1..=5u32 {
            if target_wavelength(n, &problem).is_none() {
                continue;
            }
            let samples = trace_curve(n, &grid, &problem).map_err(|e| e.to_string())?;
            for s in &samples {
                if s.nodal_count != (n - 1) as usize {
                    return Err(format!(
                        "{bl:?}-{br:?} n={n} alpha={}: {} zeros",
                        s.alpha, s.nodal_count
                    ));
                }
            }
            let mus: Vec<f64> = samples.iter().map(|s| s.mu).collect();
            if let Some(prev) = &prev {
                if prev.iter().zip(&mus).any(|(lo, hi)| hi <= lo) {
                    return Err(format!("{bl:?}-{br:?}: ordering broken entering n = {n}"));
                }
            }
            prev = Some(mus);
            checked += samples.len();
        }
    }
    Ok(format!(
        "nodal count n-1 and mu ordering on {checked} samples"
    ))
}

fn check_level_set() -> std::result::Result<String, String> {
    let problem =
        IntervalProblem::new(2.0, Dirichlet, Neumann, params(1, 1.0)).map_err(|e| e.to_string())?;
    for n in [1u32, 4] {
        for alpha in [0.3, 1.1] {
            let mu = mu_of_alpha(n, alpha, &problem).map_err(|e| e.to_string())?;
            let pt = ParamPoint::new(mu, alpha, &problem.params).map_err(|e| e.to_string())?;
            let lam = wavelength(&pt, &problem.params)
                .map_err(|e| e.to_string())?
                .lambda;
            let lam_n = target_wavelength(n, &problem).unwrap();
            if rel(lam, lam_n) > 1e-10 {
                return Err(format!("level-set residual {} at n={n}", rel(lam, lam_n)));
            }
        }
    }
    Ok("wavelength at solved mu matches the target to 1e-10".into())
}

fn check_exclusions() -> std::result::Result<String, String> {
    let nn =
        IntervalProblem::new(1.0, Neumann, Neumann, params(1, 1.0)).map_err(|e| e.to_string())?;
    if mu_of_alpha(1, 0.5, &nn).is_ok() {
        return Err("N-N n = 1 was not excluded".into());
    }
    if linear_eigenvalue(1, &nn).is_ok() {
        return Err("N-N first linear eigenvalue was not excluded".into());
    }
    let long = IntervalProblem::new(100.0, Dirichlet, Dirichlet, params(1, -1.0))
        .map_err(|e| e.to_string())?;
    match mu_of_alpha(1, 10.0, &long) {
        Err(nlsg_core::Error::UnattainableWavelength { .. }) => {}
        other => return Err(format!("expected unattainable report, got {other:?}")),
    }
    Ok("N-N n = 1 exclusion and unattainable-wavelength reporting in place".into())
}

fn check_ray_variation() -> std::result::Result<String, String> {
    let configs: [(u32, f64, f64, f64, BoundaryCondition, u32); 6] = [
        (1, 1.0, 1.0, 1.0, Dirichlet, 2),
        (1, 1.0, -0.5, 1.2, Dirichlet, 4),
        (1, -1.0, 1.0, 0.5, Dirichlet, 2),
        (2, 1.0, 1.0, 0.9, Dirichlet, 2),
        (1, 1.0, 1.0, 1.0, Neumann, 1),
        (1, -1.0, 1.5, 0.55, Neumann, 3),
    ];
    for (sigma, nu, mu, alpha, bc, lock) in configs {
        let p = params(sigma, nu);
        let pt = ParamPoint::new(mu, alpha, &p).map_err(|e| e.to_string())?;
        let lam = wavelength(&pt, &p).map_err(|e| e.to_string())?;
        let xi = lock as f64 / 4.0;
        let length = xi * lam.lambda;
        let trace_at = |mu_x: f64, alpha_x: f64| -> std::result::Result<_, String> {
            let pt_x = ParamPoint::new(mu_x, alpha_x, &p).map_err(|e| e.to_string())?;
            edge_trace(
                &EdgeBranch {
                    point: pt_x,
                    bc,
                    zeta: Sign::Plus,
                    edge_length: length,
                },
                &p,
            )
            .map_err(|e| e.to_string())
        };
        let base = trace_at(mu, alpha)?;
        let zeta_ctr = base.dphi.signum();
        let na = p.nu_alpha_2sigma(alpha);
        let root = (mu + na).sqrt();
        let analytic = [
            zeta_ctr * xi * alpha * root * lam.d_mu,
            0.5 * zeta_ctr * alpha / root,
            zeta_ctr * xi * alpha * root * lam.d_alpha,
            zeta_ctr * (mu + (sigma as f64 + 1.0) * na) / root,
        ];
        let h_mu = 1e-6 * mu.abs().max(1.0);
        let (tp, tm) = (trace_at(mu + h_mu, alpha)?, trace_at(mu - h_mu, alpha)?);
        let h_al = 1e-6 * alpha.max(1.0);
        let (sp, sm) = (trace_at(mu, alpha + h_al)?, trace_at(mu, alpha - h_al)?);
        let fd = [
            (tp.phi - tm.phi) / (2.0 * h_mu),
            (tp.dphi - tm.dphi) / (2.0 * h_mu),
            (sp.phi - sm.phi) / (2.0 * h_al),
            (sp.dphi - sm.dphi) / (2.0 * h_al),
        ];
        for (a, f) in analytic.iter().zip(&fd) {
            if rel(*a, *f) > 1e-5 {
                return Err(format!(
                    "variation mismatch at sigma={sigma} nu={nu} mu={mu} alpha={alpha} {bc:?}"
                ));
            }
        }
    }
    Ok("all four pinned-edge variation formulas match finite differences".into())
}

fn pythagorean_config() -> std::result::Result<StarConfig, String> {
    StarConfig::from_rates(
        1,
        1.0,
        vec![Sign::Plus, Sign::Plus, Sign::Minus],
        vec![1, 1, 1],
        &[3, 4, 5],
        vec![Dirichlet; 3],
    )
    .map_err(|e| e.to_string())
}

fn check_jacobian_structure() -> std::result::Result<String, String> {
    let config = pythagorean_config()?;
    let (q, graph) = build_qstar(&config).map_err(|e| e.to_string())?;
    let info = jacobian(&q, &graph).map_err(|e| e.to_string())?;
    if !info.analytic {
        return Err("central-zero point not recognized as analytic".into());
    }
    let schur = info.schur_det.ok_or("missing Schur determinant")?;
    if rel(info.det, schur) > 1e-8 {
        return Err(format!("Schur identity: det {} vs {}", info.det, schur));
    }
    if info.det == 0.0 || info.cond > 1e12 {
        return Err("singular Jacobian at the constructed point".into());
    }
    for &t in &info.t_values {
        if t <= 0.0 {
            return Err(format!("nonpositive t value {t}"));
        }
    }
    // pointwise t samples, including P^+_- where t > 2
    let p = params(1, 1.0);
    for (mu, alpha) in [(-0.5, 1.0), (-1.0, 1.5)] {
        let t = t_value(mu, alpha, &p);
        if t <= 2.0 {
            return Err(format!("t = {t} not above 2 on P+-"));
        }
    }
    Ok("det J nonzero, Schur identity to 1e-8, t values positive (> 2 on P+-)".into())
}

fn check_newton_basin() -> std::result::Result<String, String> {
    let config = pythagorean_config()?;
    let (q_star, graph) = build_qstar(&config).map_err(|e| e.to_string())?;
    // exact start: zero Newton step
    let back = newton_solve(&q_star, &graph, 0.0).map_err(|e| e.to_string())?;
    for (a, b) in q_star.alphas.iter().zip(&back.alphas) {
        if (a - b).abs() > 1e-9 * a {
            return Err("Newton moved an exact solution".into());
        }
    }
    // perturbed start reconverges
    let mut q0 = q_star.clone();
    for a in &mut q0.alphas {
        *a *= 1.0 + 1e-3;
    }
    let solved = newton_solve(&q0, &graph, 0.0).map_err(|e| e.to_string())?;
    for (a, b) in q_star.alphas.iter().zip(&solved.alphas) {
        if ((a - b) / a).abs() > 1e-9 {
            return Err(format!("reconvergence missed: {a} vs {b}"));
        }
    }
    let r = residual(&solved, &graph).map_err(|e| e.to_string())?;
    let norm = scaled_residual_norm(&r, &solved, &graph);
    if norm > 1e-10 {
        return Err(format!("residual {norm} above tolerance"));
    }
    Ok("Newton fixes exact solutions and reconverges from 1e-3 perturbations".into())
}

fn check_nodal_prediction() -> std::result::Result<String, String> {
    let config = pythagorean_config()?;
    let (q_star, graph) = build_qstar(&config).map_err(|e| e.to_string())?;
    let z_star = count_star_nodes(&q_star, &graph).map_err(|e| e.to_string())?;
    let delta = 1e-3
        * q_star
            .alphas
            .iter()
            .map(|&a| graph.params.nu_alpha_2sigma(a))
            .fold(f64::INFINITY, f64::min);
    for sign in [1.0, -1.0] {
        let run = continue_curve(&q_star, &graph, sign * delta, 4).map_err(|e| e.to_string())?;
        if !run.completed {
            return Err(format!("continuation stalled on side {sign}"));
        }
        let q_side = &run.last().q;
        let measured =
            count_star_nodes(q_side, &graph).map_err(|e| e.to_string())? as i64 - z_star as i64;
        let predicted = predict_nodal_change(q_side, &q_star, &graph).map_err(|e| e.to_string())?;
        if predicted != measured {
            return Err(format!(
                "side {sign}: predicted {predicted} vs measured {measured}"
            ));
        }
    }
    Ok("nodal-change formula matches direct counts on both continuation sides".into())
}

fn check_pythagorean() -> std::result::Result<String, String> {
    let config = pythagorean_config()?;
    let report = demonstrate_violation(&config, None).map_err(|e| e.to_string())?;
    if report.z_star != 1 || report.measured_change != 1 {
        return Err(format!(
            "Z* = {}, |dZ| = {} (expected 1 and 1)",
            report.z_star, report.measured_change
        ));
    }
    if report.central_plus * report.central_minus >= 0.0 {
        return Err("central value did not flip sign".into());
    }
    Ok(format!(
        "rates (3,4,5): Z* = 1, |dZ| = 1, central value flips {:.3e} -> {:.3e}",
        report.central_minus, report.central_plus
    ))
}

fn check_five_edges() -> std::result::Result<String, String> {
    let config = find_config(1, 5, 12).ok_or("no 5-edge configuration found")?;
    let report = demonstrate_violation(&config, None).map_err(|e| e.to_string())?;
    if report.measured_change != 3 {
        return Err(format!("|dZ| = {} (expected 3)", report.measured_change));
    }
    Ok("5-edge configuration changes the nodal count by 3".into())
}

fn check_neumann_remark() -> std::result::Result<String, String> {
    let config = StarConfig::from_rates(
        1,
        1.0,
        vec![Sign::Plus, Sign::Plus, Sign::Minus],
        vec![1, 1, 2],
        &[3, 4, 5],
        vec![Dirichlet, Dirichlet, Neumann],
    )
    .map_err(|e| e.to_string())?;
    let (q, graph) = build_qstar(&config).map_err(|e| e.to_string())?;
    let z = count_star_nodes(&q, &graph).map_err(|e| e.to_string())?;
    if z != 2 {
        return Err(format!("Neumann-edge nodal count {z} (expected 2)"));
    }
    let report = demonstrate_violation(&config, None).map_err(|e| e.to_string())?;
    if report.measured_change != report.predicted_change {
        return Err("measured and predicted changes disagree".into());
    }
    Ok(format!(
        "half-integer Neumann construction verified (|dZ| = {})",
        report.measured_change
    ))
}
