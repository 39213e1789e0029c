//! Test fields with known tracing answers.

use crate::error::{Error, Result};
use crate::field::{FieldHandle, LaminarParams, ScalarField};
use crate::geometry::ArcBoundary;
use crate::vec2::Vec2;

type P = Vec2<f64>;
type Arc = ArcBoundary<f64>;

/// `u = (-y, x)`.
pub fn rigid_rotation() -> FieldHandle<f64> {
    FieldHandle::new("rigid rotation", |x: P| Vec2::new(-x.y, x.x)).divergence_free(true)
}

/// Cartesian velocity of the chart-plane velocity `(ds/dt, dr/dt)` at `(s, r)`.
fn chart_velocity(arc: &Arc, s: f64, r: f64, ds: f64, dr: f64) -> P {
    arc.tangent(s) * ((arc.delta() + r) / arc.delta() * ds) + arc.normal(s) * dr
}

fn chart_coords(arc: &Arc, x: P) -> (f64, f64) {
    (arc.arc_coordinate(x), x.distance(arc.center()) - arc.delta())
}

/// Streamlines that are straight rays in the `(s, r)` chart, issuing from
/// the wall point `(source_s, 0)` upstream of the chart.
///
/// The return map is linear: `L(r) / r = (s1 - source_s) / (s - source_s)`.
pub fn fan_field(arc: &Arc, source_s: f64) -> Result<FieldHandle<f64>> {
    let lo = arc.chart_range()[0];
    if !(source_s < lo) {
        return Err(Error::InvalidParameter(format!(
            "fan source s = {source_s} must lie upstream of the chart start {lo}"
        )));
    }
    let a = *arc;
    Ok(FieldHandle::new(format!("fan (source s = {source_s})"), move |x: P| {
        let (s, r) = chart_coords(&a, x);
        chart_velocity(&a, s, r, 1.0, r / (s - source_s))
    })
    .with_chart_guard(*arc))
}

/// Chart streamlines of `dr/ds = r^2 / ell`, for which
/// `L(r) / r = 1 / (1 - r (s1 - s) / ell)`: above one and tending to one.
pub fn graded_fan_field(arc: &Arc, ell: f64) -> Result<FieldHandle<f64>> {
    if !(ell > 0.0) {
        return Err(Error::InvalidParameter(format!("ell must be > 0, got {ell}")));
    }
    let a = *arc;
    Ok(FieldHandle::new(format!("graded fan (ell = {ell})"), move |x: P| {
        let (s, r) = chart_coords(&a, x);
        chart_velocity(&a, s, r, 1.0, r * r / ell)
    })
    .with_chart_guard(*arc))
}

/// `nu (alpha1 / delta - alpha2)`: the tangential wall pressure gradient.
pub fn wall_gradient(params: &LaminarParams<f64>, delta: f64) -> f64 {
    params.nu() * (params.alpha1() / delta - params.alpha2())
}

/// `p = g_w * s(x)`: constant along rays from the center, gradient
/// `g_w delta / dist` along the circles. Pressure lines are circles.
pub fn angular_pressure(arc: &Arc, params: &LaminarParams<f64>) -> ScalarField<f64> {
    radial_perturbed(arc, params, "angular", |_| (0.0, 0.0))
}

/// Angular pressure plus `kappa (dist - delta)^2`; the wall gradient is unchanged.
pub fn perturbed_pressure(arc: &Arc, params: &LaminarParams<f64>, kappa: f64) -> ScalarField<f64> {
    radial_perturbed(arc, params, "angular + quadratic", move |rho| {
        (kappa * rho * rho, 2.0 * kappa * rho)
    })
}

/// Angular pressure plus `kappa (dist - delta)`: a normal wall gradient.
pub fn wall_normal_pressure(arc: &Arc, params: &LaminarParams<f64>, kappa: f64) -> ScalarField<f64> {
    radial_perturbed(arc, params, "angular + linear", move |rho| (kappa * rho, kappa))
}

/// Angular pressure plus `g(dist - delta)` given `(g, g')`.
fn radial_perturbed(
    arc: &Arc,
    params: &LaminarParams<f64>,
    name: &str,
    g: impl Fn(f64) -> (f64, f64) + Copy + Send + Sync + 'static,
) -> ScalarField<f64> {
    let gw = wall_gradient(params, arc.delta());
    let (a, c, delta) = (*arc, arc.center(), arc.delta());
    ScalarField::new(
        name,
        move |x: P| gw * a.arc_coordinate(x) + g(x.distance(c) - delta).0,
        move |x: P| {
            let y = x - c;
            let d = y.norm();
            Vec2::new(y.y, -y.x) * (gw * delta / (d * d)) + y * (g(d - delta).1 / d)
        },
    )
    .with_chart_guard(*arc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdops::{fd_gradient, StencilOrder, StencilSpec};
    use approx::assert_relative_eq;

    #[test]
    fn pressure_gradients_match_values() {
        let arc = ArcBoundary::new(1.0, 0.3, Vec2::new(0.2, -0.1), [-0.5, 0.5]).unwrap();
        let p = LaminarParams::new(2.0, 1.0, 0.5).unwrap();
        let spec = StencilSpec::new(1e-3, StencilOrder::Fourth).unwrap();
        for f in [angular_pressure(&arc, &p), perturbed_pressure(&arc, &p, 3.0), wall_normal_pressure(&arc, &p, 3.0)] {
            let v = f.clone();
            // fd of the scalar through a field whose first component is p
            let as_field = FieldHandle::new("p", move |x| Vec2::new(v.value(x), 0.0));
            for (s, r) in [(0.0, 0.1), (0.3, 0.2), (-0.4, 0.05)] {
                let x = arc.at(s, r);
                let j = fd_gradient(&as_field, x, &spec).unwrap();
                let g = f.gradient(x);
                assert_relative_eq!(j[0][0], g.x, epsilon = 1e-9);
                assert_relative_eq!(j[0][1], g.y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn angular_wall_gradient() {
        let arc = ArcBoundary::centered(0.5, [-0.5, 0.5]).unwrap();
        let p = LaminarParams::new(2.0, 1.0, 1.0).unwrap();
        let f = angular_pressure(&arc, &p);
        for s in [-0.3, 0.0, 0.2] {
            let g = f.gradient(arc.arc_point(s));
            let expect = arc.tangent(s) * 3.0;
            assert!(g.distance(expect) < 1e-12);
        }
    }

    #[test]
    fn chart_fields_move_downstream() {
        let arc = ArcBoundary::centered(1.0, [-0.5, 0.5]).unwrap();
        let f = fan_field(&arc, -0.7).unwrap();
        let u = f.eval(arc.at(0.0, 0.1));
        assert_relative_eq!(u.dot(arc.tangent(0.0)), 1.1);
        assert_relative_eq!(u.dot(arc.normal(0.0)), 0.1 / 0.7);
        assert!(fan_field(&arc, -0.5).is_err());
        assert!(graded_fan_field(&arc, 0.0).is_err());
    }
}
