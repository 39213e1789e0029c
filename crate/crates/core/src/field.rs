//! Parallel laminar velocity field near the arc, its closed-form derivatives
//! and the stationary pressure-gradient ansatz built from them.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArcBoundary;
use crate::scalar::{Real, Scalar};
use crate::vec2::{Mat2, Vec2};

/// Wall profile `h(r) = alpha1 r - (alpha2 / 2) r^2` and viscosity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr<T>", into = "ParamsRepr<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct LaminarParams<T> {
    pub(crate) alpha1: T,
    pub(crate) alpha2: T,
    pub(crate) nu: T,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr<T> {
    alpha1: T,
    alpha2: T,
    nu: T,
}

impl<T: Scalar> TryFrom<ParamsRepr<T>> for LaminarParams<T> {
    type Error = Error;
    fn try_from(r: ParamsRepr<T>) -> Result<Self> {
        LaminarParams::new(r.alpha1, r.alpha2, r.nu)
    }
}

impl<T: Scalar> From<LaminarParams<T>> for ParamsRepr<T> {
    fn from(p: LaminarParams<T>) -> Self {
        ParamsRepr {
            alpha1: p.alpha1,
            alpha2: p.alpha2,
            nu: p.nu,
        }
    }
}

impl<T: Scalar> LaminarParams<T> {
    pub fn new(alpha1: T, alpha2: T, nu: T) -> Result<Self> {
        let mut bad = Vec::new();
        for (name, v) in [("alpha1", &alpha1), ("alpha2", &alpha2), ("nu", &nu)] {
            if !(*v > T::zero()) {
                bad.push(format!("{name} must be > 0, got {v:?}"));
            }
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParameter(bad.join("; ")));
        }
        Ok(LaminarParams { alpha1, alpha2, nu })
    }

    /// Linear shear profile (`alpha2 = 0`). Only for geometric checks;
    /// the theorem routines reject it.
    pub fn pure_shear(alpha1: T, nu: T) -> Result<Self> {
        if !(alpha1 > T::zero()) || !(nu > T::zero()) {
            return Err(Error::InvalidParameter(
                "alpha1 and nu must be > 0".to_string(),
            ));
        }
        Ok(LaminarParams {
            alpha1,
            alpha2: T::zero(),
            nu,
        })
    }

    pub fn alpha1(&self) -> T {
        self.alpha1.clone()
    }

    pub fn alpha2(&self) -> T {
        self.alpha2.clone()
    }

    pub fn nu(&self) -> T {
        self.nu.clone()
    }

    pub fn is_pure_shear(&self) -> bool {
        self.alpha2.is_zero()
    }

    /// `alpha1 / alpha2`; `None` for a pure shear profile.
    pub fn boundary_layer_thickness(&self) -> Option<T> {
        if self.is_pure_shear() {
            None
        } else {
            Some(self.alpha1.clone() / self.alpha2.clone())
        }
    }

    pub(crate) fn require_curved_profile(&self) -> Result<()> {
        if self.is_pure_shear() {
            Err(Error::InvalidParameter(
                "alpha2 must be > 0 (pure shear profile not admissible here)".to_string(),
            ))
        } else {
            Ok(())
        }
    }

    /// Same parameters in another scalar type.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LaminarParams<U> {
        LaminarParams {
            alpha1: f(&self.alpha1),
            alpha2: f(&self.alpha2),
            nu: f(&self.nu),
        }
    }
}

/// Tangential / normal split of a vector with respect to the wall frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Components<T> {
    pub tangential: T,
    pub normal: T,
}

/// Which closed form to use for the normal advection term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdvectionVariant {
    /// `-h(r) / (r + delta)`, the form written in the original derivation.
    Paper,
    /// `-h(r)^2 / (r + delta)`, centripetal acceleration `|u|^2 / radius`.
    Corrected,
}

impl fmt::Display for AdvectionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdvectionVariant::Paper => f.write_str("paper"),
            AdvectionVariant::Corrected => f.write_str("corrected"),
        }
    }
}

pub fn profile_h<T: Scalar>(p: &LaminarParams<T>, r: T) -> T {
    p.alpha1() * r.clone() - T::half() * p.alpha2() * r.clone() * r
}

/// `h'(r)`.
pub fn profile_slope<T: Scalar>(p: &LaminarParams<T>, r: T) -> T {
    p.alpha1() - p.alpha2() * r
}

/// Vector Laplacian of the laminar field at wall distance `r`, in the wall
/// frame: `h'' + h'/(r + delta) - h/(r + delta)^2` tangentially, zero normally.
pub fn analytic_laplacian<T: Scalar>(p: &LaminarParams<T>, delta: T, r: T) -> Components<T> {
    let rad = r.clone() + delta;
    let h = profile_h(p, r.clone());
    let tangential = -p.alpha2() + profile_slope(p, r) / rad.clone() - h / (rad.clone() * rad);
    Components {
        tangential,
        normal: T::zero(),
    }
}

/// `(u . grad) u` of the laminar field at wall distance `r`.
pub fn advection<T: Scalar>(
    p: &LaminarParams<T>,
    delta: T,
    r: T,
    variant: AdvectionVariant,
) -> Components<T> {
    let rad = r.clone() + delta;
    let h = profile_h(p, r);
    let normal = match variant {
        AdvectionVariant::Paper => -h / rad,
        AdvectionVariant::Corrected => -(h.clone() * h) / rad,
    };
    Components {
        tangential: T::zero(),
        normal,
    }
}

/// `nu Lap u - (u . grad) u = P t + P_perp n` for the stationary problem.
/// The tangential part is `P(r)`, the normal part `P_perp(r)`.
pub fn stationary_gradp_ansatz<T: Scalar>(
    p: &LaminarParams<T>,
    delta: T,
    r: T,
    variant: AdvectionVariant,
) -> Components<T> {
    let lap = analytic_laplacian(p, delta.clone(), r.clone());
    let adv = advection(p, delta, r, variant);
    Components {
        tangential: p.nu() * lap.tangential,
        normal: -adv.normal,
    }
}

pub type VectorFn<T> = Arc<dyn Fn(Vec2<T>) -> Vec2<T> + Send + Sync>;
pub type MatrixFn<T> = Arc<dyn Fn(Vec2<T>) -> Mat2<T> + Send + Sync>;
pub type ScalarFn<T> = Arc<dyn Fn(Vec2<T>) -> T + Send + Sync>;
pub type Guard<T> = Arc<dyn Fn(Vec2<T>) -> bool + Send + Sync>;

/// Evaluable planar vector field with optional analytic derivatives.
///
/// Cloning is cheap; all closures are shared.
#[derive(Clone)]
pub struct FieldHandle<T: Real> {
    name: String,
    divergence_free: bool,
    eval: VectorFn<T>,
    jacobian: Option<MatrixFn<T>>,
    laplacian: Option<VectorFn<T>>,
    guard: Option<Guard<T>>,
}

impl<T: Real> fmt::Debug for FieldHandle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldHandle")
            .field("name", &self.name)
            .field("divergence_free", &self.divergence_free)
            .field("jacobian", &self.jacobian.is_some())
            .field("laplacian", &self.laplacian.is_some())
            .field("guard", &self.guard.is_some())
            .finish()
    }
}

impl<T: Real> FieldHandle<T> {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(Vec2<T>) -> Vec2<T> + Send + Sync + 'static,
    {
        FieldHandle {
            name: name.into(),
            divergence_free: false,
            eval: Arc::new(eval),
            jacobian: None,
            laplacian: None,
            guard: None,
        }
    }

    pub fn with_jacobian<F>(mut self, f: F) -> Self
    where
        F: Fn(Vec2<T>) -> Mat2<T> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(f));
        self
    }

    pub fn with_laplacian<F>(mut self, f: F) -> Self
    where
        F: Fn(Vec2<T>) -> Vec2<T> + Send + Sync + 'static,
    {
        self.laplacian = Some(Arc::new(f));
        self
    }

    /// Installs a domain predicate checked by stencils and tracers.
    pub fn with_guard<F>(mut self, f: F) -> Self
    where
        F: Fn(Vec2<T>) -> bool + Send + Sync + 'static,
    {
        self.guard = Some(Arc::new(f));
        self
    }

    /// Restricts the field to the padded chart of `arc`.
    pub fn with_chart_guard(self, arc: ArcBoundary<T>) -> Self {
        self.with_guard(move |x| arc.contains(x))
    }

    pub fn divergence_free(mut self, yes: bool) -> Self {
        self.divergence_free = yes;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    #[inline]
    pub fn eval(&self, x: Vec2<T>) -> Vec2<T> {
        (self.eval)(x)
    }

    pub fn analytic_jacobian(&self, x: Vec2<T>) -> Option<Mat2<T>> {
        self.jacobian.as_ref().map(|j| j(x))
    }

    pub fn analytic_laplacian(&self, x: Vec2<T>) -> Option<Vec2<T>> {
        self.laplacian.as_ref().map(|l| l(x))
    }

    /// `true` when no guard is installed or the guard accepts `x`.
    #[inline]
    pub fn admits(&self, x: Vec2<T>) -> bool {
        self.guard.as_ref().is_none_or(|g| g(x))
    }

    pub fn has_guard(&self) -> bool {
        self.guard.is_some()
    }
}

/// Evaluable scalar field, used for pressures.
#[derive(Clone)]
pub struct ScalarField<T: Real> {
    name: String,
    value: ScalarFn<T>,
    gradient: VectorFn<T>,
    guard: Option<Guard<T>>,
}

impl<T: Real> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("name", &self.name).finish()
    }
}

impl<T: Real> ScalarField<T> {
    pub fn new<F, G>(name: impl Into<String>, value: F, gradient: G) -> Self
    where
        F: Fn(Vec2<T>) -> T + Send + Sync + 'static,
        G: Fn(Vec2<T>) -> Vec2<T> + Send + Sync + 'static,
    {
        ScalarField {
            name: name.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            guard: None,
        }
    }

    /// Scalar field whose gradient is taken by fourth-order central
    /// differences with step `h`.
    pub fn with_fd_gradient<F>(name: impl Into<String>, value: F, h: T) -> Self
    where
        F: Fn(Vec2<T>) -> T + Send + Sync + 'static,
    {
        let value: ScalarFn<T> = Arc::new(value);
        let v = Arc::clone(&value);
        let gradient = move |x: Vec2<T>| {
            let d = |e: Vec2<T>| {
                let f = |k: T| v(x + e * (k * h));
                (f(-T::two()) - f(T::two()) + (f(T::one()) - f(-T::one())) * T::lit(8.0))
                    / (T::lit(12.0) * h)
            };
            Vec2::new(d(Vec2::new(T::one(), T::zero())), d(Vec2::new(T::zero(), T::one())))
        };
        ScalarField {
            name: name.into(),
            value,
            gradient: Arc::new(gradient),
            guard: None,
        }
    }

    pub fn with_chart_guard(mut self, arc: ArcBoundary<T>) -> Self {
        self.guard = Some(Arc::new(move |x| arc.contains(x)));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: Vec2<T>) -> T {
        (self.value)(x)
    }

    pub fn gradient(&self, x: Vec2<T>) -> Vec2<T> {
        (self.gradient)(x)
    }

    /// The gradient as a vector field, sharing the guard.
    pub fn gradient_field(&self) -> FieldHandle<T> {
        let g = Arc::clone(&self.gradient);
        let mut f = FieldHandle::new(format!("grad {}", self.name), move |x| g(x));
        f.guard = self.guard.clone();
        f
    }
}

/// Clockwise unit tangent of the circle about `center` through `x`.
#[inline]
fn circle_tangent<T: Real>(y: Vec2<T>, d: T) -> Vec2<T> {
    Vec2::new(y.y / d, -y.x / d)
}

/// Velocity of the parallel laminar flow: speed `h(dist - delta)` along
/// circles concentric with the arc.
///
/// Carries the analytic Jacobian and Laplacian. It is defined everywhere
/// except the center; chart checks are left to the caller.
pub fn laminar_field<T: Real>(arc: &ArcBoundary<T>, params: &LaminarParams<T>) -> FieldHandle<T> {
    let c = arc.center();
    let delta = arc.delta();
    let (a1, a2) = (params.alpha1, params.alpha2);
    let h = move |rho: T| a1 * rho - T::half() * a2 * rho * rho;
    let dh = move |rho: T| a1 - a2 * rho;

    let eval = move |x: Vec2<T>| {
        let y = x - c;
        let d = y.norm();
        if d == T::zero() {
            return Vec2::zero();
        }
        circle_tangent(y, d) * h(d - delta)
    };
    // u = g(d) (y2, -y1) with g = h(d - delta) / d
    let jac = move |x: Vec2<T>| {
        let y = x - c;
        let d = y.norm();
        let rho = d - delta;
        let g = h(rho) / d;
        let gp = dh(rho) / d - h(rho) / (d * d);
        [
            [gp * y.x * y.y / d, gp * y.y * y.y / d + g],
            [-gp * y.x * y.x / d - g, -gp * y.x * y.y / d],
        ]
    };
    let lap = move |x: Vec2<T>| {
        let y = x - c;
        let d = y.norm();
        let rho = d - delta;
        let k = -a2 / d + dh(rho) / (d * d) - h(rho) / (d * d * d);
        Vec2::new(y.y, -y.x) * k
    };
    FieldHandle::new("laminar", eval)
        .with_jacobian(jac)
        .with_laplacian(lap)
        .divergence_free(true)
}

/// `G(x) = P(r) t + P_perp(r) n` with `r = dist - delta`, the stationary
/// pressure gradient the laminar field would require.
pub fn stationary_gradp_field<T: Real>(
    arc: &ArcBoundary<T>,
    params: &LaminarParams<T>,
    variant: AdvectionVariant,
) -> FieldHandle<T> {
    let c = arc.center();
    let delta = arc.delta();
    let params = params.clone();
    FieldHandle::new(format!("stationary grad p ({variant})"), move |x: Vec2<T>| {
        let y = x - c;
        let d = y.norm();
        let g = stationary_gradp_ansatz(&params, delta, d - delta, variant);
        let n = y.scale(d.recip());
        circle_tangent(y, d) * g.tangential + n * g.normal
    })
}

/// Writes `x,y,u1,u2` rows for each sample point.
pub fn write_field_samples<W: Write>(
    field: &FieldHandle<f64>,
    points: &[Vec2<f64>],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "u1", "u2"])?;
    for &p in points {
        let u = field.eval(p);
        w.write_record([p.x, p.y, u.x, u.y].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use approx::assert_relative_eq;

    fn unit() -> LaminarParams<f64> {
        LaminarParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn profile_values() {
        let p = LaminarParams::new(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(profile_h(&p, 0.5), 0.25);
        assert_eq!(profile_h(&p, 0.0), 0.0);
        let e = 1e-6;
        assert_relative_eq!((profile_h(&p, e) - profile_h(&p, -e)) / (2.0 * e), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn params_validation() {
        assert!(LaminarParams::new(1.0, -1.0, 1.0).is_err());
        assert!(LaminarParams::new(0.0, 1.0, 1.0).is_err());
        let s = LaminarParams::pure_shear(1.0, 1.0).unwrap();
        assert!(s.boundary_layer_thickness().is_none());
        assert!(s.require_curved_profile().is_err());
        assert_eq!(unit().boundary_layer_thickness(), Some(1.0));
        let json = serde_json::to_string(&unit()).unwrap();
        assert_eq!(json, r#"{"alpha1":1.0,"alpha2":1.0,"nu":1.0}"#);
        assert!(serde_json::from_str::<LaminarParams<f64>>(r#"{"alpha1":1,"alpha2":0,"nu":1}"#).is_err());
    }

    #[test]
    fn laplacian_closed_form() {
        let p = unit();
        assert_relative_eq!(analytic_laplacian(&p, 1.0, 0.1).tangential, -0.2603305785123967, epsilon = 1e-15);
        let q = LaminarParams::new(2.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(analytic_laplacian(&q, 1.5, 0.0).tangential, 2.0 / 1.5 - 0.5);
        // exact rational evaluation of the same expression
        let pe = p.map(|v| crate::scalar::exact(*v));
        let lap = analytic_laplacian(&pe, ratio(1, 1), ratio(1, 10));
        assert_eq!(lap.tangential, -ratio(315, 1210));
    }

    #[test]
    fn advection_variants() {
        let p = unit();
        assert_eq!(advection(&p, 1.0, 0.0, AdvectionVariant::Paper).normal, 0.0);
        assert_eq!(advection(&p, 1.0, 0.0, AdvectionVariant::Corrected).normal, 0.0);
        assert_relative_eq!(advection(&p, 1.0, 0.1, AdvectionVariant::Paper).normal, -0.0863636363636, epsilon = 1e-12);
        assert_relative_eq!(advection(&p, 1.0, 0.1, AdvectionVariant::Corrected).normal, -0.0082045454545, epsilon = 1e-12);
    }

    #[test]
    fn ansatz_values() {
        let p = unit();
        let g = stationary_gradp_ansatz(&p, 1.0, 0.1, AdvectionVariant::Paper);
        assert_relative_eq!(g.tangential, -0.2603305785123967, epsilon = 1e-15);
        assert_relative_eq!(g.normal, 0.0863636363636, epsilon = 1e-12);
        let q = LaminarParams::new(3.0, 1.0, 0.7).unwrap();
        let g0 = stationary_gradp_ansatz(&q, 2.0, 0.0, AdvectionVariant::Paper);
        assert_relative_eq!(g0.tangential, 0.7 * (1.5 - 1.0));
        assert_eq!(g0.normal, 0.0);
    }

    #[test]
    fn laminar_local_components() {
        // frame at the crown of a unit arc, pure shear
        let arc = ArcBoundary::centered(1.0, [-0.5, 0.5]).unwrap();
        let p = LaminarParams::pure_shear(1.0, 1.0).unwrap();
        let u = laminar_field(&arc, &p);
        let f = arc.frame(0.0);
        let (v1, v2) = f.components(u.eval(f.to_global(1.0, 0.0)));
        let expect = (2f64.sqrt() - 1.0) / 2f64.sqrt();
        assert_relative_eq!(v1, expect, epsilon = 1e-15);
        assert_relative_eq!(v2, -expect, epsilon = 1e-15);
        let (w1, w2) = f.components(u.eval(f.to_global(0.0, 0.3)));
        assert_relative_eq!(w1, 0.3, epsilon = 1e-15);
        assert_eq!(w2, 0.0);
    }

    #[test]
    fn laminar_speed_tangency_no_slip() {
        let arc = ArcBoundary::new(1.4, 0.3, Vec2::new(0.2, -0.5), [0.0, 1.0]).unwrap();
        let p = LaminarParams::new(1.3, 0.8, 0.5).unwrap();
        let u = laminar_field(&arc, &p);
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            assert!(u.eval(arc.arc_point(s)).norm() <= 1e-12);
            for r in [0.01, 0.1, 0.4, 1.0] {
                let x = arc.at(s, r);
                let v = u.eval(x);
                assert_relative_eq!(v.norm(), profile_h(&p, r), max_relative = 1e-10);
                let radial = x - arc.center();
                assert!(v.dot(radial).abs() <= 1e-10 * v.norm() * radial.norm());
                // flows along the arc direction
                assert!(v.dot(arc.tangent(s)) > 0.0);
            }
        }
    }

    #[test]
    fn scalar_field_fd_gradient() {
        let f = ScalarField::with_fd_gradient("q", |x: Vec2<f64>| x.x * x.x * x.y, 1e-3);
        let g = f.gradient(Vec2::new(0.5, 2.0));
        assert_relative_eq!(g.x, 2.0, epsilon = 1e-10);
        assert_relative_eq!(g.y, 0.25, epsilon = 1e-10);
    }

    #[test]
    fn csv_samples() {
        let arc = ArcBoundary::centered(1.0, [-0.5, 0.5]).unwrap();
        let u = laminar_field(&arc, &unit());
        let mut buf = Vec::new();
        write_field_samples(&u, &[arc.at(0.0, 0.5)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,u1,u2\n0,1.5,0.375,"));
    }
}
