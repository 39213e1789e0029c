//! Finite-difference oracles and Richardson extrapolation.
//!
//! Everything here only calls [`FieldHandle::eval`]; analytic derivative
//! closures are never consulted, so these routines can adjudicate them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldHandle;
use crate::scalar::Real;
use crate::vec2::{mat_vec, Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilOrder {
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn as_int(self) -> u32 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }
}

/// Central stencil with step `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilSpec<T> {
    pub h: T,
    pub order: StencilOrder,
}

impl<T: Real> StencilSpec<T> {
    pub fn new(h: T, order: StencilOrder) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("stencil step must be > 0, got {h:?}")));
        }
        Ok(StencilSpec { h, order })
    }

    /// `h = 1e-3 * max(delta, boundary layer thickness)`.
    pub fn default_for(delta: T, boundary_layer: T, order: StencilOrder) -> Self {
        StencilSpec {
            h: T::lit(1e-3) * delta.max(boundary_layer),
            order,
        }
    }

    pub fn halved(self) -> Self {
        StencilSpec {
            h: self.h * T::half(),
            order: self.order,
        }
    }
}

fn sample<T: Real>(field: &FieldHandle<T>, x: Vec2<T>) -> Result<Vec2<T>> {
    if !field.admits(x) {
        return Err(Error::StencilOutOfDomain {
            x: x.x.approx_f64(),
            y: x.y.approx_f64(),
        });
    }
    Ok(field.eval(x))
}

/// First derivative of `field` at `x` along the unit direction `e`.
fn directional<T: Real>(field: &FieldHandle<T>, x: Vec2<T>, e: Vec2<T>, spec: &StencilSpec<T>) -> Result<Vec2<T>> {
    let h = spec.h;
    let at = |k: T| sample(field, x + e * (k * h));
    match spec.order {
        StencilOrder::Second => Ok((at(T::one())? - at(-T::one())?) * (T::half() / h)),
        StencilOrder::Fourth => {
            let two = T::two();
            let v = (at(T::one())? - at(-T::one())?) * T::lit(8.0) - (at(two)? - at(-two)?);
            Ok(v * (T::lit(12.0) * h).recip())
        }
    }
}

fn second_directional<T: Real>(
    field: &FieldHandle<T>,
    x: Vec2<T>,
    e: Vec2<T>,
    center: Vec2<T>,
    spec: &StencilSpec<T>,
) -> Result<Vec2<T>> {
    let h = spec.h;
    let at = |k: T| sample(field, x + e * (k * h));
    match spec.order {
        StencilOrder::Second => Ok((at(T::one())? + at(-T::one())? - center * T::two()) * (h * h).recip()),
        StencilOrder::Fourth => {
            let two = T::two();
            let v = (at(T::one())? + at(-T::one())?) * T::lit(16.0)
                - (at(two)? + at(-two)?)
                - center * T::lit(30.0);
            Ok(v * (T::lit(12.0) * h * h).recip())
        }
    }
}

fn axes<T: Real>() -> (Vec2<T>, Vec2<T>) {
    (Vec2::new(T::one(), T::zero()), Vec2::new(T::zero(), T::one()))
}

/// Central-difference Jacobian, `J[i][j] = d u_i / d x_j`.
pub fn fd_gradient<T: Real>(field: &FieldHandle<T>, x: Vec2<T>, spec: &StencilSpec<T>) -> Result<Mat2<T>> {
    let (ex, ey) = axes();
    let dx = directional(field, x, ex, spec)?;
    let dy = directional(field, x, ey, spec)?;
    Ok([[dx.x, dy.x], [dx.y, dy.y]])
}

/// Componentwise Laplacian with the 5-point (order 2) or 9-point cross
/// (order 4) stencil.
pub fn fd_laplacian<T: Real>(field: &FieldHandle<T>, x: Vec2<T>, spec: &StencilSpec<T>) -> Result<Vec2<T>> {
    let (ex, ey) = axes();
    let c = sample(field, x)?;
    Ok(second_directional(field, x, ex, c, spec)? + second_directional(field, x, ey, c, spec)?)
}

pub fn fd_divergence<T: Real>(field: &FieldHandle<T>, x: Vec2<T>, spec: &StencilSpec<T>) -> Result<T> {
    let j = fd_gradient(field, x, spec)?;
    Ok(j[0][0] + j[1][1])
}

/// `(u . grad) u` from the finite-difference Jacobian.
pub fn fd_advection<T: Real>(field: &FieldHandle<T>, x: Vec2<T>, spec: &StencilSpec<T>) -> Result<Vec2<T>> {
    let j = fd_gradient(field, x, spec)?;
    Ok(mat_vec(&j, sample(field, x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationResult<T> {
    pub value: T,
    pub error_estimate: T,
    /// Order implied by the last three samples, when there are three.
    pub observed_order: Option<T>,
    pub levels_used: usize,
}

/// Richardson extrapolation of `(h, value)` samples to `h -> 0`, assuming
/// `value(h) = L + c h^order + ...`.
///
/// Samples must have distinct steps in geometric progression (any order of
/// listing). The leading term is eliminated between the two finest samples.
/// With three or more samples the error estimate is the change between the
/// last two extrapolants; with two it is the size of the correction.
pub fn richardson<T: Real>(samples: &[(T, T)], order: T) -> Result<ExtrapolationResult<T>> {
    if samples.len() < 2 {
        return Err(Error::InvalidSamples("need at least two samples".into()));
    }
    if !(order > T::zero()) {
        return Err(Error::InvalidSamples(format!("order must be > 0, got {order:?}")));
    }
    let mut s: Vec<(T, T)> = samples.to_vec();
    if s.iter().any(|(h, v)| !(*h > T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidSamples("steps must be > 0 and values finite".into()));
    }
    s.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite steps"));
    let q = s[0].0 / s[1].0;
    if !(q > T::one() + T::lit(1e-12)) {
        return Err(Error::InvalidSamples("steps must be distinct".into()));
    }
    for w in s.windows(2) {
        let qi = w[0].0 / w[1].0;
        if ((qi - q) / q).abs() > T::lit(1e-6) {
            return Err(Error::InvalidSamples(format!(
                "steps are not in geometric progression (ratios {q:?} and {qi:?})"
            )));
        }
    }

    // differences below the rounding floor count as converged
    let scale = s.iter().fold(T::zero(), |m, (_, v)| m.max(v.abs()));
    let floor = T::lit(64.0) * T::epsilon() * scale.max(T::min_positive_value());
    let diffs: Vec<T> = s.windows(2).map(|w| w[1].1 - w[0].1).collect();
    for (i, w) in diffs.windows(2).enumerate() {
        let (a, b) = (w[0].abs(), w[1].abs());
        if b > floor && b >= a {
            return Err(Error::NonMonotoneSequence(format!(
                "|difference| grew from {a:?} to {b:?} at level {}",
                i + 2
            )));
        }
    }

    let denom = q.powf(order) - T::one();
    let extrap = |i: usize| s[i + 1].1 + (s[i + 1].1 - s[i].1) / denom;
    let n = s.len();
    let value = extrap(n - 2);
    let error_estimate = if n >= 3 {
        (value - extrap(n - 3)).abs()
    } else {
        (value - s[n - 1].1).abs()
    };
    let observed_order = if n >= 3 {
        let (a, b) = (diffs[n - 3].abs(), diffs[n - 2].abs());
        if a > floor && b > floor {
            Some((a / b).ln() / q.ln())
        } else {
            None
        }
    } else {
        None
    };
    Ok(ExtrapolationResult {
        value,
        error_estimate,
        observed_order,
        levels_used: n,
    })
}

/// `log(e_coarse / e_fine) / log(ratio)`.
pub fn observed_order<T: Real>(err_coarse: T, err_fine: T, refinement: T) -> T {
    (err_coarse / err_fine).ln() / refinement.ln()
}

/// Writes `h,value,error` rows, where `error` is measured against `reference`.
pub fn write_convergence_csv<W: Write>(samples: &[(f64, f64)], reference: f64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "value", "error"])?;
    for &(h, v) in samples {
        w.write_record(&[h.to_string(), v.to_string(), (v - reference).abs().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{laminar_field, profile_slope, LaminarParams};
    use crate::geometry::ArcBoundary;
    use approx::assert_relative_eq;

    fn spec(h: f64, order: StencilOrder) -> StencilSpec<f64> {
        StencilSpec::new(h, order).unwrap()
    }

    #[test]
    fn constant_and_linear_fields() {
        let c = FieldHandle::new("const", |_| Vec2::new(2.0, -1.0));
        let j = fd_gradient(&c, Vec2::new(0.3, 0.4), &spec(1e-2, StencilOrder::Second)).unwrap();
        assert_eq!(j, [[0.0, 0.0], [0.0, 0.0]]);

        let rot = FieldHandle::new("lin", |x: Vec2<f64>| Vec2::new(x.y, -x.x));
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            let j = fd_gradient(&rot, Vec2::new(0.7, -0.2), &spec(1e-3, order)).unwrap();
            assert_relative_eq!(j[0][1], 1.0, epsilon = 1e-12);
            assert_relative_eq!(j[1][0], -1.0, epsilon = 1e-12);
            assert!(j[0][0].abs() < 1e-12 && j[1][1].abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_exactness() {
        let harmonic = FieldHandle::new("harm", |x: Vec2<f64>| Vec2::new(x.x * x.x - x.y * x.y, -2.0 * x.x * x.y));
        let l = fd_laplacian(&harmonic, Vec2::new(0.4, 0.9), &spec(1e-2, StencilOrder::Second)).unwrap();
        assert!(l.norm() <= 1e-10);
        let quad = FieldHandle::new("quad", |x: Vec2<f64>| Vec2::new(x.y * x.y, 0.0));
        let l = fd_laplacian(&quad, Vec2::new(0.1, 0.2), &spec(0.25, StencilOrder::Second)).unwrap();
        assert_relative_eq!(l.x, 2.0, epsilon = 1e-12);
        assert_eq!(l.y, 0.0);
        let quartic = FieldHandle::new("q4", |x: Vec2<f64>| Vec2::new(x.x.powi(4), x.x * x.y.powi(3)));
        let l = fd_laplacian(&quartic, Vec2::new(0.3, -0.5), &spec(0.1, StencilOrder::Fourth)).unwrap();
        assert_relative_eq!(l.x, 12.0 * 0.09, epsilon = 1e-11);
        assert_relative_eq!(l.y, 6.0 * 0.3 * -0.5, epsilon = 1e-11);
    }

    #[test]
    fn rigid_rotation_advection() {
        let rot = FieldHandle::new("rot", |x: Vec2<f64>| Vec2::new(-x.y, x.x));
        let a = fd_advection(&rot, Vec2::new(1.0, 0.0), &spec(1e-3, StencilOrder::Second)).unwrap();
        assert_relative_eq!(a.x, -1.0, epsilon = 1e-10);
        assert!(a.y.abs() < 1e-10);
    }

    #[test]
    fn laminar_shear_entry() {
        let arc = ArcBoundary::centered(1.0, [-0.5, 0.5]).unwrap();
        let p = LaminarParams::new(1.0, 1.0, 1.0).unwrap();
        let u = laminar_field(&arc, &p);
        // at the crown e1 = x and e2 = y; v1(0, r) = h(r) is quadratic in r,
        // so the central difference is exact up to rounding
        let x = arc.at(0.0, 0.2);
        for h in [1e-2, 1e-3] {
            let j = fd_gradient(&u, x, &spec(h, StencilOrder::Second)).unwrap();
            assert!((j[0][1] - profile_slope(&p, 0.2)).abs() < 1e-9);
        }
        // off the symmetry line the truncation error shows second order
        let f = arc.frame(0.0);
        let y = f.to_global(0.3, 0.2);
        let exact = u.analytic_jacobian(y).unwrap()[0][1];
        let e = |h| (fd_gradient(&u, y, &spec(h, StencilOrder::Second)).unwrap()[0][1] - exact).abs();
        let order = observed_order(e(2e-2), e(1e-2), 2.0);
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn guard_trips() {
        let arc = ArcBoundary::centered(1.0, [-0.5, 0.5]).unwrap();
        let p = LaminarParams::new(1.0, 1.0, 1.0).unwrap();
        let u = laminar_field(&arc, &p).with_chart_guard(arc);
        let near_wall = arc.at(0.0, 1e-4);
        assert!(matches!(
            fd_gradient(&u, near_wall, &spec(1e-3, StencilOrder::Second)),
            Err(Error::StencilOutOfDomain { .. })
        ));
    }

    #[test]
    fn richardson_exact_cases() {
        let l = 3.25;
        let quad: Vec<_> = [0.1, 0.05, 0.025].iter().map(|&h| (h, l + 7.0 * h * h)).collect();
        let r = richardson(&quad, 2.0).unwrap();
        assert_relative_eq!(r.value, l, epsilon = 1e-12);
        assert_relative_eq!(r.observed_order.unwrap(), 2.0, epsilon = 1e-9);
        let lin: Vec<_> = [0.1, 0.05, 0.025].iter().map(|&h| (h, l - 2.0 * h)).collect();
        let r = richardson(&lin, 1.0).unwrap();
        assert_relative_eq!(r.value, l, epsilon = 1e-12);
        assert_relative_eq!(r.observed_order.unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn richardson_rejects_bad_input() {
        assert!(matches!(richardson(&[(0.1, 1.0)], 1.0), Err(Error::InvalidSamples(_))));
        assert!(matches!(
            richardson(&[(0.1, 1.0), (0.05, 2.0), (0.02, 2.5)], 1.0),
            Err(Error::InvalidSamples(_))
        ));
        // differences grow: 1.0 -> 1.1 -> 1.3
        assert!(matches!(
            richardson(&[(0.4, 1.0), (0.2, 1.1), (0.1, 1.3)], 1.0),
            Err(Error::NonMonotoneSequence(_))
        ));
    }

    #[test]
    fn convergence_csv_header() {
        let mut buf = Vec::new();
        write_convergence_csv(&[(0.1, 1.0)], 0.5, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "h,value,error\n0.1,1,0.5\n");
    }
}
