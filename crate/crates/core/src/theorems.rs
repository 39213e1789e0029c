//! Stationary mismatch and the wall limit of the tangential material
//! derivative.
//!
//! The closed forms are generic over [`Scalar`], so they can be evaluated
//! exactly in [`BigRational`]. The wall limit is cross-checked three ways:
//! extrapolation of floating-point samples, an exact rational evaluation
//! close to the wall followed by exact polynomial extrapolation, and the
//! hand-derived series coefficient.

use std::fmt;
use std::io::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdops::{fd_advection, richardson, ExtrapolationResult, StencilOrder, StencilSpec};
use crate::field::{
    advection, analytic_laplacian, laminar_field, profile_h, stationary_gradp_field, AdvectionVariant,
    LaminarParams,
};
use crate::geometry::ArcBoundary;
use crate::scalar::{exact, ratio, Scalar};
use crate::tracing::{default_eps_list, eta_ratio, TraceConfig};

/// Relative tolerance for matching the extrapolated limit to a closed form.
pub const AGREEMENT_TOLERANCE: f64 = 1e-4;

/// Near-wall radii of the exact oracle.
pub fn oracle_radii() -> [BigRational; 3] {
    [ratio(1, 10_000), ratio(1, 20_000), ratio(1, 40_000)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchRow<T> {
    pub r: T,
    pub lhs: T,
    pub rhs: T,
    pub mismatch: T,
}

fn check_inside<T: Scalar>(p: &LaminarParams<T>, r: &T) -> Result<()> {
    if !(*r > T::zero()) {
        return Err(Error::DomainError(format!("r must be > 0, got {}", r.approx_f64())));
    }
    if let Some(bl) = p.boundary_layer_thickness() {
        if *r >= bl {
            return Err(Error::DomainError(format!(
                "r = {} is not below the boundary layer thickness {}",
                r.approx_f64(),
                bl.approx_f64()
            )));
        }
    }
    Ok(())
}

/// Both sides of the stationary pressure-gradient identity and the gap
/// `M = h / (delta + r)^2 + 2 alpha2 r / (r + delta)` they leave.
///
/// `lhs` is the wall value carried up the level set,
/// `|alpha1 / delta - alpha2| delta / (delta + r)`; `rhs` is the magnitude of
/// the tangential Laplacian.
pub fn theorem1_mismatch<T: Scalar>(p: &LaminarParams<T>, delta: T, r: T) -> Result<MismatchRow<T>> {
    check_inside(p, &r)?;
    let rad = r.clone() + delta.clone();
    let lhs = ((p.alpha1() / delta.clone() - p.alpha2()) * delta / rad.clone()).abs();
    let rhs = analytic_laplacian(p, rad.clone() - r.clone(), r.clone()).tangential.abs();
    let mismatch = mismatch(p, rad, r.clone());
    Ok(MismatchRow { r, lhs, rhs, mismatch })
}

fn mismatch<T: Scalar>(p: &LaminarParams<T>, rad: T, r: T) -> T {
    let h = profile_h(p, r.clone());
    h / (rad.clone() * rad.clone()) + T::two() * p.alpha2() * r / rad
}

/// `(P(r) - g_w delta / (delta + r)) / h(r)` with `g_w = nu (alpha1 / delta - alpha2)`.
pub fn theorem2_ratio<T: Scalar>(p: &LaminarParams<T>, delta: T, r: T) -> Result<T> {
    check_inside(p, &r)?;
    let h = profile_h(p, r.clone());
    if !(h > T::zero()) {
        return Err(Error::DomainError(format!("h(r) <= 0 at r = {}", r.approx_f64())));
    }
    let rad = r.clone() + delta.clone();
    let tangential = p.nu() * analytic_laplacian(p, delta.clone(), r).tangential;
    let wall = p.nu() * (p.alpha1() / delta.clone() - p.alpha2()) * delta / rad;
    Ok((tangential - wall) / h)
}

/// The limit as printed alongside the theorem: `-nu alpha2 / (delta alpha1) - nu / delta^2`.
pub fn paper_limit<T: Scalar>(p: &LaminarParams<T>, delta: T) -> T {
    -(p.nu() * p.alpha2() / (delta.clone() * p.alpha1())) - p.nu() / (delta.clone() * delta)
}

/// Leading term of the expansion of [`theorem2_ratio`] in `r`:
/// `-nu (2 alpha2 / (delta alpha1) + 1 / delta^2)`.
pub fn series_limit<T: Scalar>(p: &LaminarParams<T>, delta: T) -> T {
    -(p.nu() * (T::two() * p.alpha2() / (delta.clone() * p.alpha1()) + T::one() / (delta.clone() * delta)))
}

/// Value at zero of the interpolating polynomial through `(x_i, y_i)`.
fn neville_at_zero(points: &[(BigRational, BigRational)]) -> BigRational {
    let mut p: Vec<BigRational> = points.iter().map(|(_, y)| y.clone()).collect();
    let x: Vec<&BigRational> = points.iter().map(|(x, _)| x).collect();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            // P_{i..i+k}(0) from P_{i..i+k-1} and P_{i+1..i+k}
            p[i] = (x[i + k] * &p[i] - x[i] * &p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p.swap_remove(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOracle {
    /// `(r, ratio)` evaluated exactly and rounded for display.
    pub samples: Vec<(f64, f64)>,
    /// Exact extrapolation to `r = 0`, rounded.
    pub value: f64,
    /// Exact extrapolation as a reduced fraction.
    pub fraction: String,
}

/// Evaluates the ratio in exact rational arithmetic at [`oracle_radii`]
/// and extrapolates the interpolating quadratic to `r = 0`.
pub fn exact_oracle(p: &LaminarParams<f64>, delta: f64) -> Result<ExactOracle> {
    let q = p.map(|v| exact(*v));
    let d = exact(delta);
    let points = oracle_radii()
        .into_iter()
        .map(|r| theorem2_ratio(&q, d.clone(), r.clone()).map(|v| (r, v)))
        .collect::<Result<Vec<_>>>()?;
    let samples = points.iter().map(|(r, v)| (r.approx_f64(), v.approx_f64())).collect();
    let limit = neville_at_zero(&points);
    Ok(ExactOracle {
        samples,
        value: limit.approx_f64(),
        fraction: limit.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Paper,
    Oracle,
    Neither,
}

impl fmt::Display for Agreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agreement::Paper => "paper",
            Agreement::Oracle => "oracle",
            Agreement::Neither => "neither",
        })
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREEMENT_TOLERANCE * b.abs().max(f64::MIN_POSITIVE)
}

/// Geometric grid of `n` radii starting at `0.1 min(bl, delta)`, halving.
pub fn default_r_grid(p: &LaminarParams<f64>, delta: f64) -> Vec<f64> {
    let bl = p.boundary_layer_thickness().unwrap_or(f64::INFINITY);
    let r0 = 0.1 * bl.min(delta);
    (0..12).map(|k| r0 * 0.5f64.powi(k)).collect()
}

fn check_grid(p: &LaminarParams<f64>, r_grid: &[f64], upper_fraction: f64) -> Result<()> {
    if r_grid.is_empty() {
        return Err(Error::DomainError("r_grid is empty".into()));
    }
    let bl = p.boundary_layer_thickness().unwrap_or(f64::INFINITY);
    if let Some(r) = r_grid.iter().find(|&&r| !(r > 0.0 && r < upper_fraction * bl)) {
        return Err(Error::DomainError(format!(
            "r = {r} outside (0, {upper_fraction} bl) with bl = {bl}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricCrosscheck {
    pub r: f64,
    pub eta_ratio: f64,
    /// `nu |alpha1 / delta - alpha2| delta / (delta + r)` divided by `eta_ratio`.
    pub traced_gradp: f64,
    pub ansatz_gradp: f64,
    pub factor: f64,
    /// `lhs / rhs`, the factor the closed forms predict.
    pub expected_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub delta: f64,
    pub variant: AdvectionVariant,
    pub rows: Vec<MismatchRow<f64>>,
    pub min_mismatch: f64,
    pub geometric_crosscheck: Option<Vec<GeometricCrosscheck>>,
}

pub fn theorem1_verify(p: &LaminarParams<f64>, delta: f64, r_grid: &[f64], use_tracing: bool) -> Result<Theorem1Report> {
    theorem1_verify_with(p, delta, r_grid, use_tracing, AdvectionVariant::Paper)
}

/// [`theorem1_verify`] with the advection variant used for the ansatz
/// field of the tracing cross-check.
pub fn theorem1_verify_with(
    p: &LaminarParams<f64>,
    delta: f64,
    r_grid: &[f64],
    use_tracing: bool,
    variant: AdvectionVariant,
) -> Result<Theorem1Report> {
    p.require_curved_profile()?;
    check_grid(p, r_grid, 0.5)?;
    let rows = r_grid
        .iter()
        .map(|&r| theorem1_mismatch(p, delta, r))
        .collect::<Result<Vec<_>>>()?;
    let min_mismatch = rows.iter().map(|m| m.mismatch).fold(f64::INFINITY, f64::min);
    let geometric_crosscheck = if use_tracing {
        let arc = ArcBoundary::centered(delta, [-0.5 * delta, 0.5 * delta])?;
        let g = stationary_gradp_field(&arc, p, variant);
        let cfg = TraceConfig::default_for(&arc, p);
        let eps = default_eps_list(delta);
        let wall = p.nu() * (p.alpha1() / delta - p.alpha2()).abs();
        // Level-set traces need eps well below r; smaller radii are skipped.
        let r_min = 5.0 * eps.iter().cloned().fold(0.0, f64::max);
        let checks = rows
            .iter()
            .filter(|row| row.r >= r_min)
            .map(|row| {
                let eta = eta_ratio(&g, &arc, 0.0, row.r, &eps, &cfg)?.extrapolated.value;
                let a = crate::field::stationary_gradp_ansatz(p, delta, row.r, variant);
                let ansatz = a.tangential.hypot(a.normal);
                let traced = wall * delta / (delta + row.r) / eta;
                Ok(GeometricCrosscheck {
                    r: row.r,
                    eta_ratio: eta,
                    traced_gradp: traced,
                    ansatz_gradp: ansatz,
                    factor: traced / ansatz,
                    expected_factor: row.lhs / row.rhs,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(checks)
    } else {
        None
    };
    Ok(Theorem1Report {
        delta,
        variant,
        rows,
        min_mismatch,
        geometric_crosscheck,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub delta: f64,
    /// `(r, ratio)`.
    pub samples: Vec<(f64, f64)>,
    pub limit_extrapolated: ExtrapolationResult<f64>,
    pub paper_value: f64,
    pub oracle_value: f64,
    /// Closed form of the expansion's leading term.
    pub series_value: f64,
    pub oracle: ExactOracle,
    pub agrees_with: Agreement,
}

pub fn theorem2_limit(p: &LaminarParams<f64>, delta: f64) -> Result<Theorem2Report> {
    theorem2_limit_on(p, delta, &default_r_grid(p, delta))
}

/// [`theorem2_limit`] on an explicit grid (geometric, decreasing).
pub fn theorem2_limit_on(p: &LaminarParams<f64>, delta: f64, r_grid: &[f64]) -> Result<Theorem2Report> {
    p.require_curved_profile()?;
    check_grid(p, r_grid, 1.0)?;
    let samples = r_grid
        .iter()
        .map(|&r| theorem2_ratio(p, delta, r).map(|v| (r, v)))
        .collect::<Result<Vec<_>>>()?;
    let limit_extrapolated = richardson(&samples, 1.0)?;
    let oracle = exact_oracle(p, delta)?;
    let paper_value = paper_limit(p, delta);
    let oracle_value = oracle.value;
    let v = limit_extrapolated.value;
    let agrees_with = if close(v, oracle_value) {
        Agreement::Oracle
    } else if close(v, paper_value) {
        Agreement::Paper
    } else {
        Agreement::Neither
    };
    Ok(Theorem2Report {
        delta,
        samples,
        limit_extrapolated,
        paper_value,
        oracle_value,
        series_value: series_limit(p, delta),
        oracle,
        agrees_with,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvectionSample {
    pub r: f64,
    pub fd_tangential: f64,
    pub fd_normal: f64,
    pub paper: f64,
    pub corrected: f64,
    pub paper_rel_error: f64,
    pub corrected_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvectionAdjudication {
    pub samples: Vec<AdvectionSample>,
    /// Largest `|tangential| / |normal|` over the samples.
    pub max_scaled_tangential: f64,
    /// The variant matching every sample to `tolerance`, if exactly one does.
    pub matching: Option<AdvectionVariant>,
    pub tolerance: f64,
}

/// Compares fourth-order finite-difference `(u . grad) u` on the laminar
/// field with both closed forms of its normal component.
pub fn adjudicate_advection(p: &LaminarParams<f64>, delta: f64, radii: &[f64], tolerance: f64) -> Result<AdvectionAdjudication> {
    let arc = ArcBoundary::centered(delta, [-0.5 * delta, 0.5 * delta])?;
    let u = laminar_field(&arc, p);
    let bl = p.boundary_layer_thickness().unwrap_or(1.0);
    let spec = StencilSpec::default_for(delta, bl, StencilOrder::Fourth);
    let samples = radii
        .iter()
        .map(|&r| {
            let a = fd_advection(&u, arc.at(0.0, r), &spec)?;
            let (t, n) = (arc.tangent(0.0), arc.normal(0.0));
            let fd_normal = a.dot(n);
            let paper = advection(p, delta, r, AdvectionVariant::Paper).normal;
            let corrected = advection(p, delta, r, AdvectionVariant::Corrected).normal;
            Ok(AdvectionSample {
                r,
                fd_tangential: a.dot(t),
                fd_normal,
                paper,
                corrected,
                paper_rel_error: ((fd_normal - paper) / paper).abs(),
                corrected_rel_error: ((fd_normal - corrected) / corrected).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_scaled_tangential = samples
        .iter()
        .map(|s| s.fd_tangential.abs() / s.fd_normal.abs())
        .fold(0.0, f64::max);
    let paper_ok = samples.iter().all(|s| s.paper_rel_error <= tolerance);
    let corrected_ok = samples.iter().all(|s| s.corrected_rel_error <= tolerance);
    let matching = match (paper_ok, corrected_ok) {
        (true, false) => Some(AdvectionVariant::Paper),
        (false, true) => Some(AdvectionVariant::Corrected),
        _ => None,
    };
    Ok(AdvectionAdjudication {
        samples,
        max_scaled_tangential,
        matching,
        tolerance,
    })
}

/// Writes `r,lhs,rhs,M,ratio` rows for each radius.
pub fn write_theorem_csv<W: Write>(p: &LaminarParams<f64>, delta: f64, r_grid: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "lhs", "rhs", "M", "ratio"])?;
    for &r in r_grid {
        let m = theorem1_mismatch(p, delta, r)?;
        let q = theorem2_ratio(p, delta, r)?;
        w.write_record([r, m.lhs, m.rhs, m.mismatch, q].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
