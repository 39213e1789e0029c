//! Constant-curvature wall segment and the normal-coordinate chart around it.
//!
//! The arc is traversed clockwise (tangent angle decreasing in `s`), so the
//! fluid sits on the `perp()` side of the tangent and the center of curvature
//! lies below the wall:
//!
//! ```text
//! phi(s) = center + delta * (sin a, cos a),   a = (s + phase) / delta
//! Phi(s, r) = phi(s) + r * perp(phi'(s))
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::vec2::Vec2;

/// Fraction of the arc-length range added on each side of the chart sector.
pub const CHART_PADDING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArcBoundaryRepr<T>", into = "ArcBoundaryRepr<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct ArcBoundary<T: Real> {
    delta: T,
    phase: T,
    center: Vec2<T>,
    s_range: [T; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
struct ArcBoundaryRepr<T: Copy> {
    delta: T,
    #[serde(default = "zero")]
    phase: T,
    #[serde(default = "origin")]
    center: [T; 2],
    s_range: [T; 2],
}

fn zero<T: num_traits::Zero>() -> T {
    T::zero()
}

fn origin<T: num_traits::Zero + Copy>() -> [T; 2] {
    [T::zero(), T::zero()]
}

impl<T: Real> TryFrom<ArcBoundaryRepr<T>> for ArcBoundary<T> {
    type Error = Error;
    fn try_from(r: ArcBoundaryRepr<T>) -> Result<Self> {
        ArcBoundary::new(r.delta, r.phase, r.center.into(), r.s_range)
    }
}

impl<T: Real> From<ArcBoundary<T>> for ArcBoundaryRepr<T> {
    fn from(a: ArcBoundary<T>) -> Self {
        ArcBoundaryRepr {
            delta: a.delta,
            phase: a.phase,
            center: a.center.into(),
            s_range: a.s_range,
        }
    }
}

/// Normal coordinates: arc length along the wall and distance above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPoint<T> {
    pub s: T,
    pub r: T,
}

impl<T: Real> NormalPoint<T> {
    pub fn new(s: T, r: T) -> Result<Self> {
        if !(r >= T::zero()) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "normal point needs finite s and r >= 0, got s = {:?}, r = {:?}",
                s, r
            )));
        }
        Ok(NormalPoint { s, r })
    }
}

/// Orthonormal frame attached to a wall point `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame<T: Real> {
    pub origin: Vec2<T>,
    /// Unit tangent (flow direction).
    pub e1: Vec2<T>,
    /// Unit normal pointing into the fluid, away from the center.
    pub e2: Vec2<T>,
}

impl<T: Real> LocalFrame<T> {
    /// `Q + s e1 + r e2`.
    pub fn to_global(&self, s: T, r: T) -> Vec2<T> {
        self.origin + self.e1 * s + self.e2 * r
    }

    pub fn to_local(&self, x: Vec2<T>) -> (T, T) {
        let d = x - self.origin;
        (d.dot(self.e1), d.dot(self.e2))
    }

    /// Components of a vector in the frame basis.
    pub fn components(&self, v: Vec2<T>) -> (T, T) {
        (v.dot(self.e1), v.dot(self.e2))
    }
}

impl<T: Real> ArcBoundary<T> {
    pub fn new(delta: T, phase: T, center: Vec2<T>, s_range: [T; 2]) -> Result<Self> {
        let mut bad = Vec::new();
        if !(delta > T::zero()) || !delta.is_finite() {
            bad.push(format!("delta must be positive and finite, got {:?}", delta));
        }
        if !(s_range[0] < s_range[1]) {
            bad.push(format!("s_range must be increasing, got {:?}", s_range));
        }
        if !phase.is_finite() || !center.is_finite() {
            bad.push("phase and center must be finite".to_string());
        }
        if bad.is_empty() {
            let padded = (s_range[1] - s_range[0]) * T::lit(1.0 + 2.0 * CHART_PADDING);
            if padded >= T::TAU() * delta {
                bad.push("padded s_range wraps around the full circle".to_string());
            }
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParameter(bad.join("; ")));
        }
        Ok(ArcBoundary {
            delta,
            phase,
            center,
            s_range,
        })
    }

    /// Arc of radius `delta` centered at the origin, crown at `s = 0`.
    pub fn centered(delta: T, s_range: [T; 2]) -> Result<Self> {
        ArcBoundary::new(delta, T::zero(), Vec2::zero(), s_range)
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn phase(&self) -> T {
        self.phase
    }

    pub fn center(&self) -> Vec2<T> {
        self.center
    }

    pub fn s_range(&self) -> [T; 2] {
        self.s_range
    }

    pub fn s_mid(&self) -> T {
        (self.s_range[0] + self.s_range[1]) * T::half()
    }

    /// Arc-length interval accepted by [`from_cartesian`](Self::from_cartesian).
    pub fn chart_range(&self) -> [T; 2] {
        let pad = (self.s_range[1] - self.s_range[0]) * T::lit(CHART_PADDING);
        [self.s_range[0] - pad, self.s_range[1] + pad]
    }

    #[inline]
    fn angle(&self, s: T) -> T {
        (s + self.phase) / self.delta
    }

    /// `phi(s)`.
    pub fn arc_point(&self, s: T) -> Vec2<T> {
        let (sin, cos) = self.angle(s).sin_cos();
        self.center + Vec2::new(sin, cos) * self.delta
    }

    /// Unit tangent `phi'(s)`.
    pub fn tangent(&self, s: T) -> Vec2<T> {
        let (sin, cos) = self.angle(s).sin_cos();
        Vec2::new(cos, -sin)
    }

    /// Unit normal `perp(phi'(s))`, pointing away from the center.
    pub fn normal(&self, s: T) -> Vec2<T> {
        self.tangent(s).perp()
    }

    /// Polar angle of the tangent; strictly decreasing in `s`.
    pub fn tangent_angle(&self, s: T) -> T {
        -self.angle(s)
    }

    pub fn frame(&self, s: T) -> LocalFrame<T> {
        LocalFrame {
            origin: self.arc_point(s),
            e1: self.tangent(s),
            e2: self.normal(s),
        }
    }

    /// `Phi(s, r)`.
    pub fn to_cartesian(&self, p: NormalPoint<T>) -> Vec2<T> {
        self.at(p.s, p.r)
    }

    /// `Phi(s, r)` without constructing a [`NormalPoint`].
    #[inline]
    pub fn at(&self, s: T, r: T) -> Vec2<T> {
        let (sin, cos) = self.angle(s).sin_cos();
        self.center + Vec2::new(sin, cos) * (self.delta + r)
    }

    /// Inverse of [`to_cartesian`](Self::to_cartesian) on the padded chart.
    pub fn from_cartesian(&self, x: Vec2<T>) -> Result<NormalPoint<T>> {
        let y = x - self.center;
        let dist = y.norm();
        if dist < self.delta * (T::one() - T::lit(1e-12)) {
            return Err(Error::PointBelowWall {
                distance: dist.approx_f64(),
                delta: self.delta.approx_f64(),
            });
        }
        let s = self.unwrap_s(y.x.atan2(y.y));
        let [lo, hi] = self.chart_range();
        if s < lo || s > hi {
            return Err(Error::OutOfChart {
                s: s.approx_f64(),
                lo: lo.approx_f64(),
                hi: hi.approx_f64(),
            });
        }
        Ok(NormalPoint {
            s,
            r: (dist - self.delta).max(T::zero()),
        })
    }

    /// Arc-length coordinate of the ray from the center through `x`, with no
    /// wall or chart checks.
    pub fn arc_coordinate(&self, x: Vec2<T>) -> T {
        let y = x - self.center;
        self.unwrap_s(y.x.atan2(y.y))
    }

    /// Arc-length coordinate of the ray from the center through angle `a`,
    /// taken on the branch closest to the middle of the arc.
    fn unwrap_s(&self, a: T) -> T {
        let mid = self.angle(self.s_mid());
        let mut d = a - mid;
        let tau = T::TAU();
        d = d - tau * ((d + T::PI()) / tau).floor();
        (mid + d) * self.delta - self.phase
    }

    /// True when `x` lies on or above the wall inside the padded chart.
    pub fn contains(&self, x: Vec2<T>) -> bool {
        self.from_cartesian(x).is_ok()
    }

    /// Length of `s' -> Phi(s', r)` for `s' in [s1, s2]`.
    pub fn arc_segment_length(&self, s1: T, s2: T, r: T) -> T {
        arc_segment_length(self.delta, s1, s2, r)
    }
}

/// `|C y| = sqrt((delta + r)^2 + s^2)` for `y = Q + s e1 + r e2`.
pub fn local_center_distance<T: Real>(delta: T, s: T, r: T) -> T {
    (delta + r).hypot(s)
}

/// `((r + delta) / delta) * (s2 - s1)`: arc length at height `r`.
pub fn arc_segment_length<T: Scalar>(delta: T, s1: T, s2: T, r: T) -> T {
    (r + delta.clone()) / delta * (s2 - s1)
}
