//! Foot points and the `zeta` return map on non-stationary pressure fields.
//!
//! From a wall point `phi(s)` the level set of `p` is followed up to height
//! `r`, giving the foot point `F = Phi(s_hat, r)` at level-set length
//! `r_hat`. The pressure line from `F` is then followed until it meets the
//! level set through `phi(s + eps)`, at `zeta = Phi(s_hathat, r_hathat)`.

use serde::{Deserialize, Serialize};

use super::{director, march, pressure_line_to, Director, TraceConfig, Vanish, P};
use crate::error::{Error, Result};
use crate::fdops::{richardson, ExtrapolationResult};
use crate::field::{FieldHandle, LaminarParams, ScalarField};
use crate::geometry::ArcBoundary;
use crate::tracing::synthetic::wall_gradient;

type Arc = ArcBoundary<f64>;
type Field = FieldHandle<f64>;

/// Wall deviation from `g_w * tangent` accepted, relative to `|g_w|`.
pub const WALL_GRADIENT_TOLERANCE: f64 = 1e-6;

/// Resolutions of the piecewise-linear length sum.
pub const DISCRETE_LEVELS: [usize; 4] = [32, 64, 128, 256];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTolerances {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub epsilon_hat: f64,
}

impl BoundTolerances {
    pub fn new(c: f64, c1: f64, c2: f64, epsilon_hat: f64) -> Result<Self> {
        let t = BoundTolerances { c, c1, c2, epsilon_hat };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.c, self.c1, self.c2, self.epsilon_hat].iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter("bound tolerances must all be > 0".into()));
        }
        if !(self.epsilon_hat < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "epsilon_hat must be < 0.5, got {}",
                self.epsilon_hat
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootPoint {
    pub point: P,
    pub s_hat: f64,
    /// Level-set length from the wall to the foot point.
    pub r_hat: f64,
}

/// Level-set director at a wall point, oriented away from the wall.
fn upward<'a>(gradp: &'a Field, arc: &Arc, s: f64, cfg: &TraceConfig) -> Result<Director<'a>> {
    let x = arc.arc_point(s);
    let g = gradp.eval(x);
    if !(g.norm() >= cfg.stagnation_tol) {
        return Err(Error::CriticalPoint { x: x.x, y: x.y });
    }
    let sign = if g.perp().dot(arc.normal(s)) < 0.0 { -1.0 } else { 1.0 };
    Ok(director(gradp, cfg.stagnation_tol, sign, true, Vanish::Critical))
}

/// Follows the level set of `p` from `phi(s)` up to wall distance `r`.
pub fn foot_point(gradp: &Field, arc: &Arc, s: f64, r: f64, cfg: &TraceConfig) -> Result<FootPoint> {
    cfg.validate()?;
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be > 0, got {r}")));
    }
    let dir = upward(gradp, arc, s, cfg)?;
    let (c, target) = (arc.center(), arc.delta() + r);
    let height = |x: P| x.distance(c) - target;
    let h = cfg.step.min(r / 256.0);
    let max_len = 4.0 * r;
    let mut x = arc.arc_point(s);
    let mut gx = height(x);
    let mut len = 0.0;
    while len < max_len {
        let next = dir.step(x, h, cfg.integrator_order, len)?;
        let gn = height(next);
        if gn >= 0.0 {
            let (lambda, hit) = dir.refine(x, h, cfg.integrator_order, len, height, gx, gn)?;
            return Ok(FootPoint {
                point: hit,
                s_hat: arc.from_cartesian(hit)?.s,
                r_hat: len + lambda * h,
            });
        }
        x = next;
        gx = gn;
        len += h;
    }
    Err(Error::NoIntersection(format!(
        "level set from s = {s} did not reach height {r} within length {max_len:.3e}"
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HatInvariance {
    pub r: f64,
    /// `(s, s_hat - s, r_hat)` per wall point.
    pub samples: Vec<(f64, f64, f64)>,
    pub spread_s: f64,
    pub spread_r: f64,
    pub invariant: bool,
}

/// Checks that `s_hat - s` and `r_hat` do not depend on `s`, as for any
/// pressure field invariant under rotation about the center.
pub fn hat_invariance(gradp: &Field, arc: &Arc, s_list: &[f64], r: f64, cfg: &TraceConfig) -> Result<HatInvariance> {
    let samples = s_list
        .iter()
        .map(|&s| foot_point(gradp, arc, s, r, cfg).map(|f| (s, f.s_hat - s, f.r_hat)))
        .collect::<Result<Vec<_>>>()?;
    let spread = |k: fn(&(f64, f64, f64)) -> f64| {
        let (lo, hi) = samples
            .iter()
            .map(k)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        hi - lo
    };
    let spread_s = spread(|t| t.1);
    let spread_r = spread(|t| t.2);
    Ok(HatInvariance {
        r,
        invariant: spread_s.max(spread_r) <= 1e-6 * r,
        samples,
        spread_s,
        spread_r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSum {
    /// `(N, sum, |sum - traced|)`.
    pub levels: Vec<(usize, f64, f64)>,
    /// `N * |sum_2N - sum_N|` for consecutive levels.
    pub scaled_increments: Vec<f64>,
    /// Order from the two finest levels; `None` when already exact.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaSample {
    pub r: f64,
    pub eps: f64,
    pub s_hat: f64,
    pub r_hat: f64,
    pub s_hathat: f64,
    pub r_hathat: f64,
    pub zeta: P,
    pub zeta_length: f64,
    /// `zeta_length * delta / ((r + delta) eps)`.
    pub normalized_length: f64,
    pub discrete: DiscreteSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    /// Smallest `c` covering the foot-point shift and the length bounds.
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub epsilon_hat: f64,
    /// `max |s_hat - s| / r^2`.
    pub c_foot: f64,
    /// Smallest `c` for the length bounds alone; `None` if none exists.
    pub c_length: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChecks {
    pub foot_shift: bool,
    pub height: bool,
    pub far_shift: bool,
    pub length: bool,
}

impl BoundChecks {
    pub fn all(&self) -> bool {
        self.foot_shift && self.height && self.far_shift && self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaReport {
    pub s: f64,
    pub eps_over_r: f64,
    pub wall_gradient: f64,
    pub samples: Vec<ZetaSample>,
    pub fitted: FittedConstants,
    /// Bounds evaluated with the caller's tolerances.
    pub given: BoundTolerances,
    pub checks: BoundChecks,
    /// Normalized length extrapolated to `r -> 0` (first order).
    pub normalized_limit: ExtrapolationResult<f64>,
    /// Smallest observed order of the discrete sum over all samples.
    pub discrete_order: Option<f64>,
}

/// Builds `zeta(eps, s, r)` for each `r` in `r_list` (`eps = eps_over_r * r`),
/// fits the bound constants and evaluates the bounds with `tol`.
#[allow(clippy::too_many_arguments)]
pub fn zeta_check(
    p: &ScalarField<f64>,
    arc: &Arc,
    params: &LaminarParams<f64>,
    s: f64,
    r_list: &[f64],
    eps_over_r: f64,
    tol: &BoundTolerances,
    cfg: &TraceConfig,
) -> Result<ZetaReport> {
    cfg.validate()?;
    tol.validate()?;
    if r_list.len() < 2 || r_list.iter().any(|&r| !(r > 0.0)) || r_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "r_list must be positive and strictly decreasing (at least two)".into(),
        ));
    }
    if !(eps_over_r > 0.0) {
        return Err(Error::InvalidParameter(format!("eps_over_r must be > 0, got {eps_over_r}")));
    }
    let gw = wall_gradient(params, arc.delta());
    if gw == 0.0 {
        return Err(Error::InvalidParameter(
            "alpha1 / delta = alpha2 gives a vanishing wall pressure gradient".into(),
        ));
    }
    let gradp = p.gradient_field();
    let wall_points = std::iter::once(s).chain(r_list.iter().map(|r| s + eps_over_r * r));
    for sw in wall_points {
        let dev = gradp.eval(arc.arc_point(sw)).distance(arc.tangent(sw) * gw) / gw.abs();
        if dev > WALL_GRADIENT_TOLERANCE {
            return Err(Error::WallGradientMismatch { s: sw, deviation: dev });
        }
    }

    let samples = r_list
        .iter()
        .map(|&r| zeta_sample(&gradp, arc, s, r, eps_over_r * r, cfg))
        .collect::<Result<Vec<_>>>()?;

    let delta = arc.delta();
    let c_foot = samples.iter().map(|z| (z.s_hat - s).abs() / (z.r * z.r)).fold(0.0, f64::max);
    let epsilon_hat = samples.iter().map(|z| (z.r_hathat / z.r - 1.0).abs()).fold(0.0, f64::max);
    let c1 = samples
        .iter()
        .map(|z| (s + z.eps - z.s_hathat) / (z.r_hathat * z.r_hathat))
        .fold(0.0, f64::max);
    let c2 = samples
        .iter()
        .map(|z| (z.s_hathat - s - z.eps) / (z.r_hathat * z.r_hathat))
        .fold(0.0, f64::max);
    let c_length = fit_length_constant(&samples, delta, epsilon_hat);
    let c = c_length.map_or(f64::INFINITY, |cl| cl.max(c_foot).max(c1).max(c2));

    let checks = BoundChecks {
        foot_shift: samples.iter().all(|z| (z.s_hat - s).abs() <= tol.c * z.r * z.r),
        height: samples.iter().all(|z| (z.r_hathat / z.r - 1.0).abs() <= tol.epsilon_hat),
        far_shift: samples.iter().all(|z| {
            let rr = z.r_hathat * z.r_hathat;
            s + z.eps - tol.c1 * rr <= z.s_hathat && z.s_hathat <= s + z.eps + tol.c2 * rr
        }),
        length: length_bounds_hold(&samples, delta, tol.c, tol.epsilon_hat),
    };

    let pairs: Vec<(f64, f64)> = samples.iter().map(|z| (z.r, z.normalized_length)).collect();
    let normalized_limit = richardson(&pairs, 1.0)?;
    let discrete_order = samples
        .iter()
        .map(|z| z.discrete.observed_order)
        .fold(None, |acc: Option<f64>, o| match (acc, o) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        });

    Ok(ZetaReport {
        s,
        eps_over_r,
        wall_gradient: gw,
        samples,
        fitted: FittedConstants {
            c,
            c1,
            c2,
            epsilon_hat,
            c_foot,
            c_length,
        },
        given: *tol,
        checks,
        normalized_limit,
        discrete_order,
    })
}

fn zeta_sample(gradp: &Field, arc: &Arc, s: f64, r: f64, eps: f64, cfg: &TraceConfig) -> Result<ZetaSample> {
    let foot = foot_point(gradp, arc, s, r, cfg)?;
    let ell = arc.arc_segment_length(s, s + eps, r);

    let up = upward(gradp, arc, s + eps, cfg)?;
    let level = march(&up, arc.arc_point(s + eps), cfg, cfg.step.min(r / 256.0), 4.0 * r)?;

    let g = gradp.eval(foot.point);
    let sign = if g.dot(arc.tangent(foot.s_hat)) < 0.0 { -1.0 } else { 1.0 };
    let step = cfg.step.min(ell / 512.0);
    let (curve, _) = pressure_line_to(gradp, foot.point, sign, &level, cfg, step, 4.0 * ell)?;
    let zeta = curve.last();
    let zc = arc.from_cartesian(zeta)?;
    let zeta_length = curve.length();
    let discrete = discrete_sum(gradp, arc, foot.s_hat, r, zc.s, sign, zeta_length);
    Ok(ZetaSample {
        r,
        eps,
        s_hat: foot.s_hat,
        r_hat: foot.r_hat,
        s_hathat: zc.s,
        r_hathat: zc.r,
        zeta,
        zeta_length,
        normalized_length: zeta_length * arc.delta() / ((r + arc.delta()) * eps),
        discrete,
    })
}

/// Piecewise-linear length of the pressure line from `Phi(s0, r0)` to the
/// ray at `s1`: `N` chart steps of equal `ds`, each a straight segment
/// whose tilt `theta` against the local tangent is frozen at its start.
fn discrete_sum(gradp: &Field, arc: &Arc, s0: f64, r0: f64, s1: f64, sign: f64, traced: f64) -> DiscreteSum {
    let delta = arc.delta();
    let sum_at = |n: usize| {
        let ds = (s1 - s0) / n as f64;
        let (mut s, mut r, mut total) = (s0, r0, 0.0);
        for _ in 0..n {
            let g = gradp.eval(arc.at(s, r)) * sign;
            let tan = g.dot(arc.normal(s)) / g.dot(arc.tangent(s));
            let dl = (delta + r) / delta * ds;
            total += dl * tan.hypot(1.0);
            r += tan * dl;
            s += ds;
        }
        total
    };
    let levels: Vec<(usize, f64, f64)> = DISCRETE_LEVELS
        .iter()
        .map(|&n| {
            let v = sum_at(n);
            (n, v, (v - traced).abs())
        })
        .collect();
    let scaled_increments = levels.windows(2).map(|w| w[0].0 as f64 * (w[1].1 - w[0].1).abs()).collect();
    let (e1, e2) = (levels[levels.len() - 2].2, levels[levels.len() - 1].2);
    let observed_order = (e1 > 1e-11 * traced && e2 > 0.0).then(|| (e1 / e2).log2());
    DiscreteSum {
        levels,
        scaled_increments,
        observed_order,
    }
}

fn length_bounds_hold(samples: &[ZetaSample], delta: f64, c: f64, eh: f64) -> bool {
    samples.iter().all(|z| {
        let r = z.r;
        let scale = (r + delta) / delta;
        let slack = 2.0 * c * (1.0 + eh).powi(2) * r * r;
        let shrink = 1.0 - c * r * r;
        let lower = (1.0 - eh) * scale * (z.eps - slack);
        shrink > 0.0 && lower <= z.zeta_length && z.zeta_length <= (1.0 + eh) / shrink * scale * (z.eps + slack)
    })
}

/// Smallest `c` satisfying the length bounds, by bisection (they loosen
/// monotonically in `c` while `1 - c r^2 > 0`).
fn fit_length_constant(samples: &[ZetaSample], delta: f64, eh: f64) -> Option<f64> {
    if length_bounds_hold(samples, delta, 0.0, eh) {
        return Some(0.0);
    }
    let rmax = samples.iter().map(|z| z.r).fold(0.0, f64::max);
    let mut hi = (1.0 - 1e-9) / (rmax * rmax);
    if !length_bounds_hold(samples, delta, hi, eh) {
        return None;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if length_bounds_hold(samples, delta, mid, eh) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Some(hi)
}
