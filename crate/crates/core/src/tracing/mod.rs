//! Streamlines, pressure lines and the return maps built from them.
//!
//! All curves are integrated in arc length: the tracer follows the unit
//! direction `u / |u|` (or its rotation) with a fixed-step Runge-Kutta
//! scheme. Events (crossing a normal ray, reaching a wall distance) are
//! located by bisection on the fraction of the final step, then polished
//! with one secant step.

mod polyline;
pub mod synthetic;
pub mod zeta;

use serde::{Deserialize, Serialize};

pub use polyline::{Crossing, Polyline};
pub use zeta::{foot_point, hat_invariance, zeta_check, BoundTolerances, FootPoint, ZetaReport, ZetaSample};

use crate::error::{Error, Result};
use crate::fdops::{richardson, ExtrapolationResult};
use crate::field::{FieldHandle, LaminarParams};
use crate::geometry::ArcBoundary;
use crate::vec2::Vec2;

type P = Vec2<f64>;
type Field = FieldHandle<f64>;
type Arc = ArcBoundary<f64>;

/// `|L(r)/r - 1|` accepted as parallel.
pub const PARALLEL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorOrder {
    Rk2,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub step: f64,
    pub max_length: f64,
    pub stagnation_tol: f64,
    pub integrator_order: IntegratorOrder,
}

impl TraceConfig {
    pub fn new(step: f64, max_length: f64, stagnation_tol: f64, integrator_order: IntegratorOrder) -> Result<Self> {
        let cfg = TraceConfig {
            step,
            max_length,
            stagnation_tol,
            integrator_order,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.step > 0.0) {
            bad.push("step must be > 0");
        }
        if !(self.max_length > self.step) {
            bad.push("max_length must exceed step");
        }
        if !(self.stagnation_tol > 0.0) {
            bad.push("stagnation_tol must be > 0");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(bad.join("; ")))
        }
    }

    /// Step `1e-3 delta`, length `2 delta`, stagnation `1e-10 alpha1 delta`, RK4.
    pub fn default_for(arc: &Arc, params: &LaminarParams<f64>) -> Self {
        let delta = arc.delta();
        TraceConfig {
            step: 1e-3 * delta,
            max_length: 2.0 * delta,
            stagnation_tol: 1e-10 * params.alpha1() * delta,
            integrator_order: IntegratorOrder::Rk4,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_max_length(mut self, max_length: f64) -> Self {
        self.max_length = max_length;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Vanish {
    Stagnation,
    Critical,
}

/// Unit direction field derived from a vector field.
struct Director<'a> {
    field: &'a Field,
    tol: f64,
    sign: f64,
    perpendicular: bool,
    vanish: Vanish,
}

impl Director<'_> {
    fn at(&self, x: P, length: f64) -> Result<P> {
        if !self.field.admits(x) {
            return Err(Error::LeftDomain { x: x.x, y: x.y });
        }
        let u = self.field.eval(x);
        let n = u.norm();
        if !(n >= self.tol) {
            return Err(match self.vanish {
                Vanish::Stagnation => Error::StagnationEncountered { x: x.x, y: x.y, length },
                Vanish::Critical => Error::CriticalPoint { x: x.x, y: x.y },
            });
        }
        let d = u * (self.sign / n);
        Ok(if self.perpendicular { d.perp() } else { d })
    }

    fn step(&self, x: P, h: f64, order: IntegratorOrder, length: f64) -> Result<P> {
        match order {
            IntegratorOrder::Rk2 => {
                let k1 = self.at(x, length)?;
                let k2 = self.at(x + k1 * (0.5 * h), length)?;
                Ok(x + k2 * h)
            }
            IntegratorOrder::Rk4 => {
                let k1 = self.at(x, length)?;
                let k2 = self.at(x + k1 * (0.5 * h), length)?;
                let k3 = self.at(x + k2 * (0.5 * h), length)?;
                let k4 = self.at(x + k3 * h, length)?;
                Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
            }
        }
    }

    /// Partial step fraction `lambda` in `(0, 1]` at which `g` vanishes,
    /// given a sign change of `g` over the full step.
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        x0: P,
        h: f64,
        order: IntegratorOrder,
        length: f64,
        g: impl Fn(P) -> f64,
        g0: f64,
        g1: f64,
    ) -> Result<(f64, P)> {
        let (mut lo, mut hi) = (0.0, 1.0);
        let (mut glo, mut ghi) = (g0, g1);
        for _ in 0..80 {
            if (hi - lo) * h <= 1e-14 * (1.0 + h) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let gm = g(self.step(x0, mid * h, order, length)?);
            if gm == 0.0 {
                lo = mid;
                hi = mid;
                glo = 0.0;
                ghi = 0.0;
                break;
            }
            if (gm < 0.0) == (glo < 0.0) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        let lambda = if ghi != glo {
            (lo - glo * (hi - lo) / (ghi - glo)).clamp(lo, hi)
        } else {
            0.5 * (lo + hi)
        };
        Ok((lambda, self.step(x0, lambda * h, order, length)?))
    }
}

fn director(field: &Field, tol: f64, sign: f64, perpendicular: bool, vanish: Vanish) -> Director<'_> {
    Director {
        field,
        tol,
        sign,
        perpendicular,
        vanish,
    }
}

fn march(dir: &Director<'_>, start: P, cfg: &TraceConfig, step: f64, max_length: f64) -> Result<Polyline> {
    dir.at(start, 0.0)?;
    let mut pl = Polyline::new(start);
    let mut x = start;
    let mut len = 0.0;
    while len < max_length * (1.0 - 1e-14) {
        let h = step.min(max_length - len);
        x = dir.step(x, h, cfg.integrator_order, len)?;
        len += h;
        pl.push(x);
    }
    Ok(pl)
}

/// Normalized streamline from `start`, of length `cfg.max_length`.
pub fn trace_streamline(field: &Field, start: P, cfg: &TraceConfig) -> Result<Polyline> {
    cfg.validate()?;
    let dir = director(field, cfg.stagnation_tol, 1.0, false, Vanish::Stagnation);
    march(&dir, start, cfg, cfg.step, cfg.max_length)
}

/// Height `L(r)` at which the streamline from `Phi(s, r)` first meets the
/// normal ray above `phi(s1)`.
pub fn poincare_l(field: &Field, arc: &Arc, s: f64, s1: f64, r: f64, cfg: &TraceConfig) -> Result<f64> {
    cfg.validate()?;
    if s == s1 || !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need s != s1 and r > 0 (s = {s}, s1 = {s1}, r = {r})"
        )));
    }
    let foot = arc.arc_point(s1);
    let (t1, n1) = (arc.tangent(s1), arc.normal(s1));
    let g = |x: P| (x - foot).dot(t1);
    let dir = director(field, cfg.stagnation_tol, 1.0, false, Vanish::Stagnation);
    let mut x = arc.at(s, r);
    dir.at(x, 0.0)?;
    let mut gx = g(x);
    let mut len = 0.0;
    while len < cfg.max_length {
        let h = cfg.step.min(cfg.max_length - len);
        let next = dir.step(x, h, cfg.integrator_order, len)?;
        let gn = g(next);
        if (gx <= 0.0 && gn >= 0.0) || (gx >= 0.0 && gn <= 0.0) {
            let (_, hit) = dir.refine(x, h, cfg.integrator_order, len, g, gx, gn)?;
            let tau = (hit - foot).dot(n1);
            if tau > 0.0 {
                return Ok(tau);
            }
        }
        x = next;
        gx = gn;
        len += h;
    }
    Err(Error::NoCrossing {
        max_length: cfg.max_length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowKind {
    StrongDiverging,
    WeakDiverging,
    Parallel,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowClass {
    pub kind: FlowKind,
    pub c_threshold: f64,
    /// `(r, L(r)/r)` in the order the radii were given.
    pub evidence: Vec<(f64, f64)>,
}

/// Three-way laminar classification from sampled return-map ratios.
pub fn classify_flow(
    field: &Field,
    arc: &Arc,
    radii: &[f64],
    s: f64,
    s1: f64,
    c_threshold: f64,
    cfg: &TraceConfig,
) -> Result<FlowClass> {
    classify_flow_with_tolerance(field, arc, radii, s, s1, c_threshold, PARALLEL_TOLERANCE, cfg)
}

#[allow(clippy::too_many_arguments)]
pub fn classify_flow_with_tolerance(
    field: &Field,
    arc: &Arc,
    radii: &[f64],
    s: f64,
    s1: f64,
    c_threshold: f64,
    tol_par: f64,
    cfg: &TraceConfig,
) -> Result<FlowClass> {
    if radii.len() < 2 || radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "radii must be positive and strictly decreasing (at least two)".into(),
        ));
    }
    if !(c_threshold > 1.0) {
        return Err(Error::InvalidParameter(format!("C must be > 1, got {c_threshold}")));
    }
    let evidence = radii
        .iter()
        .map(|&r| poincare_l(field, arc, s, s1, r, cfg).map(|l| (r, l / r)))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = evidence.iter().map(|e| e.1).collect();
    let kind = if ratios.iter().all(|q| (q - 1.0).abs() <= tol_par) {
        FlowKind::Parallel
    } else if ratios.iter().all(|&q| q > c_threshold) {
        FlowKind::StrongDiverging
    } else if ratios.iter().all(|&q| q >= 1.0 - tol_par) && trends_to_one(&evidence, tol_par) {
        FlowKind::WeakDiverging
    } else {
        FlowKind::Unclassified
    };
    Ok(FlowClass {
        kind,
        c_threshold,
        evidence,
    })
}

/// Deviations from 1 shrink along the radii and a linear extrapolation of
/// the two smallest radii lands near 1.
fn trends_to_one(evidence: &[(f64, f64)], tol: f64) -> bool {
    let dev: Vec<f64> = evidence.iter().map(|e| (e.1 - 1.0).abs()).collect();
    if dev.windows(2).any(|w| w[1] >= w[0]) {
        return false;
    }
    let n = evidence.len();
    let (r0, q0) = evidence[n - 2];
    let (r1, q1) = evidence[n - 1];
    let at_zero = q1 - r1 * (q0 - q1) / (r0 - r1);
    (at_zero - 1.0).abs() <= 0.1 * dev[0] + tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PressureDirection {
    /// Along `grad p / |grad p|`.
    Along,
    /// Along its counter-clockwise perpendicular (a level set of `p`).
    Perpendicular,
}

/// Normalized pressure line (or level-set curve) from `start`.
pub fn trace_pressure_line(gradp: &Field, start: P, cfg: &TraceConfig, direction: PressureDirection) -> Result<Polyline> {
    cfg.validate()?;
    let perp = direction == PressureDirection::Perpendicular;
    let dir = director(gradp, cfg.stagnation_tol, 1.0, perp, Vanish::Critical);
    march(&dir, start, cfg, cfg.step, cfg.max_length)
}

/// Level-set curve through `x`, traced `len` in both directions and joined.
fn level_curve(gradp: &Field, x: P, cfg: &TraceConfig, step: f64, len: f64) -> Result<Polyline> {
    let up = director(gradp, cfg.stagnation_tol, 1.0, true, Vanish::Critical);
    let down = director(gradp, cfg.stagnation_tol, -1.0, true, Vanish::Critical);
    let a = march(&down, x, cfg, step, len)?;
    let b = march(&up, x, cfg, step, len)?;
    Ok(a.reversed().joined(&b))
}

/// Pressure line from `start` (oriented by `sign`) until it meets `target`.
/// Returns the traced curve, ending at the crossing, and the crossing.
fn pressure_line_to(
    gradp: &Field,
    start: P,
    sign: f64,
    target: &Polyline,
    cfg: &TraceConfig,
    step: f64,
    max_len: f64,
) -> Result<(Polyline, Crossing)> {
    let dir = director(gradp, cfg.stagnation_tol, sign, false, Vanish::Critical);
    let mut pl = Polyline::new(start);
    let mut x = start;
    let mut len = 0.0;
    while len < max_len {
        let next = dir.step(x, step, cfg.integrator_order, len)?;
        if let Some(c) = target.crossing_with(x, next) {
            pl.push(x.lerp(next, c.u));
            return Ok((pl, c));
        }
        pl.push(next);
        x = next;
        len += step;
    }
    Err(Error::NoIntersection(format!(
        "no crossing within length {max_len:.3e} from ({:.6}, {:.6})",
        start.x, start.y
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSample {
    pub eps: f64,
    pub eta_length: f64,
    pub arc_length: f64,
    pub ratio: f64,
    /// `|angle - pi/2|` at the crossing of the pressure line and the level set.
    pub right_angle_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaRatio {
    pub s: f64,
    pub r: f64,
    pub samples: Vec<EtaSample>,
    pub extrapolated: ExtrapolationResult<f64>,
}

/// Ratio of the pressure-line length from `Phi(s, r)` to the level set
/// through `Phi(s + eps, r)`, over the arc length `|Phi(s..s+eps, r)|`,
/// extrapolated to `eps -> 0` at first order.
///
/// The pressure line is oriented downstream (positive tangential
/// component), which leaves the length unchanged.
pub fn eta_ratio(gradp: &Field, arc: &Arc, s: f64, r: f64, eps_list: &[f64], cfg: &TraceConfig) -> Result<EtaRatio> {
    cfg.validate()?;
    if eps_list.len() < 2 || eps_list.windows(2).any(|w| w[1] >= w[0]) || eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("eps_list must be positive and decreasing".into()));
    }
    let a = arc.at(s, r);
    let g = gradp.eval(a);
    if !(g.norm() >= cfg.stagnation_tol) {
        return Err(Error::CriticalPoint { x: a.x, y: a.y });
    }
    let along = g.dot(arc.tangent(s)) / g.norm();
    let sign = if along < 0.0 { -1.0 } else { 1.0 };

    let mut samples = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let ell = arc.arc_segment_length(s, s + eps, r);
        if along.abs() <= 1e-12 {
            // pressure line runs along the normal; the level set through
            // Phi(s + eps, r) is the circle through the start point
            samples.push(EtaSample {
                eps,
                eta_length: 0.0,
                arc_length: ell,
                ratio: 0.0,
                right_angle_defect: 0.0,
            });
            continue;
        }
        let step = cfg.step.min(ell / 512.0);
        let level = level_curve(gradp, arc.at(s + eps, r), cfg, step, 2.0 * ell)?;
        let (eta, hit) = pressure_line_to(gradp, a, sign, &level, cfg, step, 4.0 * ell)?;
        let d_eta = eta.segment_direction(eta.segment_count() - 1).unwrap_or(Vec2::zero());
        let d_level = level.segment_direction(hit.seg).unwrap_or(Vec2::zero());
        let angle = d_eta.dot(d_level).abs().min(1.0).acos();
        samples.push(EtaSample {
            eps,
            eta_length: eta.length(),
            arc_length: ell,
            ratio: eta.length() / ell,
            right_angle_defect: (std::f64::consts::FRAC_PI_2 - angle).abs(),
        });
    }
    let pairs: Vec<(f64, f64)> = samples.iter().map(|e| (e.eps, e.ratio)).collect();
    let extrapolated = richardson(&pairs, 1.0)?;
    Ok(EtaRatio {
        s,
        r,
        samples,
        extrapolated,
    })
}

/// Default `eps` list `{4e-3, 2e-3, 1e-3} * delta`.
pub fn default_eps_list(delta: f64) -> Vec<f64> {
    vec![4e-3 * delta, 2e-3 * delta, 1e-3 * delta]
}

#[cfg(test)]
mod tests {
    use super::synthetic::{fan_field, graded_fan_field, rigid_rotation};
    use super::*;
    use crate::field::{laminar_field, stationary_gradp_ansatz, stationary_gradp_field, AdvectionVariant};
    use approx::assert_relative_eq;

    fn setup() -> (Arc, LaminarParams<f64>, TraceConfig) {
        // chart starts above s = -0.2 so fan sources there are upstream
        let arc = ArcBoundary::centered(1.0, [-0.05, 0.4]).unwrap();
        let p = LaminarParams::new(1.0, 1.0, 1.0).unwrap();
        let cfg = TraceConfig::default_for(&arc, &p);
        (arc, p, cfg)
    }

    #[test]
    fn rigid_rotation_half_turn() {
        let cfg = TraceConfig::new(1e-3, std::f64::consts::PI, 1e-12, IntegratorOrder::Rk4).unwrap();
        let pl = trace_streamline(&rigid_rotation(), Vec2::new(1.0, 0.0), &cfg).unwrap();
        assert!(pl.last().distance(Vec2::new(-1.0, 0.0)) < 1e-6);
        assert_relative_eq!(pl.length(), std::f64::consts::PI, max_relative = 1e-6);
    }

    #[test]
    fn laminar_trace_stays_on_circle() {
        let (arc, p, cfg) = setup();
        let u = laminar_field(&arc, &p);
        let pl = trace_streamline(&u, arc.at(-0.4, 0.15), &cfg.with_max_length(0.8)).unwrap();
        for x in pl.points() {
            assert!((x.distance(arc.center()) - 1.15).abs() < 1e-6);
        }
    }

    #[test]
    fn wall_start_stagnates() {
        let (arc, p, cfg) = setup();
        let u = laminar_field(&arc, &p);
        assert!(matches!(
            trace_streamline(&u, arc.arc_point(0.0), &cfg),
            Err(Error::StagnationEncountered { .. })
        ));
    }

    #[test]
    fn step_halving_converges() {
        let end = |h: f64, order| {
            let cfg = TraceConfig::new(h, 2.0, 1e-12, order).unwrap();
            trace_streamline(&rigid_rotation(), Vec2::new(1.0, 0.0), &cfg).unwrap().last()
        };
        let exact = Vec2::new(2f64.cos(), 2f64.sin());
        let e1 = end(0.1, IntegratorOrder::Rk2).distance(exact);
        let e2 = end(0.05, IntegratorOrder::Rk2).distance(exact);
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.3);
        let e1 = end(0.2, IntegratorOrder::Rk4).distance(exact);
        let e2 = end(0.1, IntegratorOrder::Rk4).distance(exact);
        assert!(((e1 / e2).log2() - 4.0).abs() < 0.3);
    }

    #[test]
    fn laminar_return_map_is_identity() {
        let (arc, p, cfg) = setup();
        let u = laminar_field(&arc, &p);
        for r in [0.05, 0.1, 0.2] {
            let l = poincare_l(&u, &arc, 0.0, 0.1, r, &cfg).unwrap();
            assert!((l / r - 1.0).abs() < 1e-6, "r = {r}, L = {l}");
        }
    }

    #[test]
    fn behind_flow_has_no_crossing() {
        let (arc, p, cfg) = setup();
        let u = laminar_field(&arc, &p);
        assert!(matches!(
            poincare_l(&u, &arc, 0.0, -0.1, 0.1, &cfg.with_max_length(1.0)),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn fan_field_ratio() {
        let (arc, _, cfg) = setup();
        // virtual source at s = -0.2: ratio (0.1 + 0.2) / (0 + 0.2)
        let fan = fan_field(&arc, -0.2).unwrap();
        for r in [0.02, 0.05, 0.1] {
            let l = poincare_l(&fan, &arc, 0.0, 0.1, r, &cfg).unwrap();
            assert_relative_eq!(l / r, 1.5, max_relative = 1e-7);
        }
    }

    #[test]
    fn classification() {
        let (arc, p, cfg) = setup();
        let radii = [0.2, 0.1, 0.05, 0.02];
        let u = laminar_field(&arc, &p);
        assert_eq!(classify_flow(&u, &arc, &radii, 0.0, 0.1, 1.2, &cfg).unwrap().kind, FlowKind::Parallel);
        let fan = fan_field(&arc, -0.2).unwrap();
        assert_eq!(classify_flow(&fan, &arc, &radii, 0.0, 0.1, 1.2, &cfg).unwrap().kind, FlowKind::StrongDiverging);
        let graded = graded_fan_field(&arc, 0.5).unwrap();
        let c = classify_flow(&graded, &arc, &radii, 0.0, 0.1, 1.2, &cfg).unwrap();
        assert_eq!(c.kind, FlowKind::WeakDiverging, "{:?}", c.evidence);
        for (r, q) in c.evidence {
            assert_relative_eq!(q, 1.0 / (1.0 - r * 0.1 / 0.5), max_relative = 1e-7);
        }
        // a fan whose ratio stays below C
        let mild = fan_field(&arc, -2.0).unwrap();
        assert_eq!(classify_flow(&mild, &arc, &radii, 0.0, 0.1, 1.2, &cfg).unwrap().kind, FlowKind::Unclassified);
        assert!(classify_flow(&u, &arc, &[0.1, 0.2], 0.0, 0.1, 1.2, &cfg).is_err());
    }

    #[test]
    fn pressure_lines_simple_fields() {
        let cfg = TraceConfig::new(1e-2, 1.0, 1e-12, IntegratorOrder::Rk4).unwrap();
        let constant = FieldHandle::new("c", |_| Vec2::new(1.0, 0.0));
        let pl = trace_pressure_line(&constant, Vec2::new(0.0, 0.5), &cfg, PressureDirection::Along).unwrap();
        assert!(pl.points().iter().all(|p| (p.y - 0.5).abs() < 1e-15));
        assert_relative_eq!(pl.last().x, 1.0, epsilon = 1e-12);

        let radial = FieldHandle::new("radial", |x: P| x);
        let pl = trace_pressure_line(&radial, Vec2::new(0.0, 2.0), &cfg, PressureDirection::Perpendicular).unwrap();
        assert!(pl.points().iter().all(|p| (p.norm() - 2.0).abs() < 1e-9));

        let zero = FieldHandle::new("z", |_| Vec2::zero());
        assert!(matches!(
            trace_pressure_line(&zero, Vec2::zero(), &cfg, PressureDirection::Along),
            Err(Error::CriticalPoint { .. })
        ));
    }

    #[test]
    fn ansatz_pressure_lines_are_regular() {
        let (arc, p, cfg) = setup();
        let g = stationary_gradp_field(&arc, &p, AdvectionVariant::Paper).with_chart_guard(arc);
        for r in [0.05, 0.2, 0.45] {
            let along = trace_pressure_line(&g, arc.at(0.2, r), &cfg.with_max_length(0.2), PressureDirection::Along);
            assert!(along.is_ok(), "r = {r}: {along:?}");
            let cfg = cfg.with_step(r / 100.0).with_max_length(r / 2.0);
            let level = trace_pressure_line(&g, arc.at(0.0, r), &cfg, PressureDirection::Perpendicular);
            assert!(level.is_ok(), "r = {r}: {level:?}");
        }
    }

    #[test]
    fn eta_ratio_limits() {
        let (arc, p, cfg) = setup();
        let eps = default_eps_list(1.0);
        // purely tangential gradient: ratio 1
        let c = arc.center();
        let tangential = FieldHandle::new("t", move |x: P| {
            let y = x - c;
            Vec2::new(y.y, -y.x) * (1.0 / y.norm())
        });
        let e = eta_ratio(&tangential, &arc, 0.0, 0.1, &eps, &cfg).unwrap();
        assert_relative_eq!(e.extrapolated.value, 1.0, max_relative = 1e-6);
        // purely normal gradient: ratio 0
        let normal = FieldHandle::new("n", move |x: P| x - c);
        let e = eta_ratio(&normal, &arc, 0.0, 0.1, &eps, &cfg).unwrap();
        assert_eq!(e.extrapolated.value, 0.0);

        let g = stationary_gradp_field(&arc, &p, AdvectionVariant::Paper);
        let e = eta_ratio(&g, &arc, 0.0, 0.1, &eps, &cfg).unwrap();
        let a = stationary_gradp_ansatz(&p, 1.0, 0.1, AdvectionVariant::Paper);
        let expect = a.tangential.abs() / a.tangential.hypot(a.normal);
        assert_relative_eq!(expect, 0.9491342977984483, epsilon = 1e-12);
        assert_relative_eq!(e.extrapolated.value, expect, max_relative = 1e-3);
        assert!(e.samples.last().unwrap().right_angle_defect < 1e-2);
    }
}
