//! Flag-value parsers: grids, ranges, per-edge lists.

use anyhow::{bail, Context, Result};
use nlsg_core::model::{BoundaryCondition, Sign};

/// `3` or `1..5` (inclusive on both ends).
pub fn index_range(spec: &str) -> Result<Vec<u32>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u32 = lo.trim().parse().context("range start")?;
        let hi: u32 = hi.trim().parse().context("range end")?;
        if lo < 1 || hi < lo {
            bail!("invalid index range `{spec}`");
        }
        Ok((lo..=hi).collect())
    } else {
        let n: u32 = spec.trim().parse().context("curve index")?;
        if n < 1 {
            bail!("curve index must be >= 1");
        }
        Ok(vec![n])
    }
}

/// `log:lo:hi:count`, `lin:lo:hi:count`, or a comma-separated list.
pub fn grid(spec: &str) -> Result<Vec<f64>> {
    if let Some(rest) = spec.strip_prefix("log:") {
        let (lo, hi, count) = grid_triple(rest)?;
        if lo <= 0.0 || hi <= lo {
            bail!("log grid needs 0 < lo < hi");
        }
        let (llo, lhi) = (lo.log10(), hi.log10());
        Ok((0..count)
            .map(|k| 10f64.powf(llo + (lhi - llo) * k as f64 / (count - 1) as f64))
            .collect())
    } else if let Some(rest) = spec.strip_prefix("lin:") {
        let (lo, hi, count) = grid_triple(rest)?;
        if hi <= lo {
            bail!("linear grid needs lo < hi");
        }
        Ok((0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect())
    } else {
        f64_list(spec)
    }
}

fn grid_triple(rest: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        bail!("grid spec needs lo:hi:count");
    }
    let lo: f64 = parts[0].parse().context("grid lo")?;
    let hi: f64 = parts[1].parse().context("grid hi")?;
    let count: usize = parts[2].parse().context("grid count")?;
    if count < 2 {
        bail!("grid needs at least 2 points");
    }
    Ok((lo, hi, count))
}

pub fn f64_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("number `{s}`"))
        })
        .collect()
}

pub fn u32_list(spec: &str) -> Result<Vec<u32>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .with_context(|| format!("integer `{s}`"))
        })
        .collect()
}

/// `d`/`n` (or `dirichlet`/`neumann`), comma-separated.
pub fn bc_list(spec: &str) -> Result<Vec<BoundaryCondition>> {
    spec.split(',').map(|s| bc_one(s.trim())).collect()
}

fn bc_one(s: &str) -> Result<BoundaryCondition> {
    match s.to_ascii_lowercase().as_str() {
        "d" | "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        "n" | "neumann" => Ok(BoundaryCondition::Neumann),
        other => bail!("unknown boundary condition `{other}` (use d or n)"),
    }
}

/// Two-letter pair for the interval: `dd`, `dn`, `nd`, `nn`.
pub fn bc_pair(spec: &str) -> Result<(BoundaryCondition, BoundaryCondition)> {
    let s = spec.to_ascii_lowercase();
    if s.len() != 2 {
        bail!("boundary pair must be two letters, e.g. `dd` or `dn`");
    }
    Ok((bc_one(&s[0..1])?, bc_one(&s[1..2])?))
}

/// `+,-,+` or `+1,-1,+1`.
pub fn sign_list(spec: &str) -> Result<Vec<Sign>> {
    spec.split(',')
        .map(|s| match s.trim() {
            "+" | "+1" | "1" => Ok(Sign::Plus),
            "-" | "-1" => Ok(Sign::Minus),
            other => bail!("unknown sign `{other}` (use + or -)"),
        })
        .collect()
}
