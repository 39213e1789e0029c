use std::io::Write;

use crate::error::Result;
use crate::vec2::Vec2;

type P = Vec2<f64>;

/// Ordered path with running arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<P>,
    cumulative: Vec<f64>,
}

/// Crossing of a polyline segment with another segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Index of the polyline segment (`points[seg]` to `points[seg + 1]`).
    pub seg: usize,
    /// Position along that segment in `[0, 1]`.
    pub t: f64,
    /// Position along the probing segment in `[0, 1]`.
    pub u: f64,
    pub point: P,
}

impl Polyline {
    pub fn new(start: P) -> Self {
        Polyline {
            points: vec![start],
            cumulative: vec![0.0],
        }
    }

    pub fn from_points(points: impl IntoIterator<Item = P>) -> Option<Self> {
        let mut it = points.into_iter();
        let mut pl = Polyline::new(it.next()?);
        for p in it {
            pl.push(p);
        }
        Some(pl)
    }

    /// Appends `p` unless it repeats the last point.
    pub fn push(&mut self, p: P) {
        let last = *self.points.last().expect("non-empty");
        if p == last {
            return;
        }
        let l = self.length() + last.distance(p);
        self.points.push(p);
        self.cumulative.push(l);
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn cumulative_length(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn first(&self) -> P {
        self.points[0]
    }

    pub fn last(&self) -> P {
        *self.points.last().expect("non-empty")
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Reversed copy with recomputed lengths.
    pub fn reversed(&self) -> Polyline {
        Polyline::from_points(self.points.iter().rev().copied()).expect("non-empty")
    }

    /// Concatenation `self` then `other` (a shared joint point is kept once).
    pub fn joined(&self, other: &Polyline) -> Polyline {
        let mut out = self.clone();
        for &p in &other.points {
            out.push(p);
        }
        out
    }

    /// Unit direction of segment `seg`.
    pub fn segment_direction(&self, seg: usize) -> Option<P> {
        (self.points[seg + 1] - self.points[seg]).normalized()
    }

    /// First segment (lowest index) crossing the segment `a -> b`.
    pub fn crossing_with(&self, a: P, b: P) -> Option<Crossing> {
        let probe = b - a;
        let slack = 1e-12;
        for (seg, w) in self.points.windows(2).enumerate() {
            let (p, r) = (w[0], w[1] - w[0]);
            let denom = r.cross(probe);
            if denom.abs() <= f64::EPSILON * r.norm() * probe.norm() {
                continue;
            }
            let qp = a - p;
            let t = qp.cross(probe) / denom;
            let u = qp.cross(r) / denom;
            if (-slack..=1.0 + slack).contains(&t) && (-slack..=1.0 + slack).contains(&u) {
                let t = t.clamp(0.0, 1.0);
                return Some(Crossing {
                    seg,
                    t,
                    u: u.clamp(0.0, 1.0),
                    point: p + r * t,
                });
            }
        }
        None
    }

    /// Arc length from the start to position `t` on segment `seg`.
    pub fn length_at(&self, seg: usize, t: f64) -> f64 {
        self.cumulative[seg] + t * (self.cumulative[seg + 1] - self.cumulative[seg])
    }

    /// Writes `index,x,y,cumlen` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "x", "y", "cumlen"])?;
        for (i, (p, l)) in self.points.iter().zip(&self.cumulative).enumerate() {
            w.write_record(&[i.to_string(), p.x.to_string(), p.y.to_string(), l.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lengths_and_duplicates() {
        let mut pl = Polyline::new(Vec2::new(0.0, 0.0));
        pl.push(Vec2::new(3.0, 4.0));
        pl.push(Vec2::new(3.0, 4.0));
        pl.push(Vec2::new(3.0, 5.0));
        assert_eq!(pl.points().len(), 3);
        assert_eq!(pl.cumulative_length(), &[0.0, 5.0, 6.0]);
        assert_eq!(pl.reversed().length(), 6.0);
        assert_eq!(pl.length_at(1, 0.5), 5.5);
    }

    #[test]
    fn crossing() {
        let pl = Polyline::from_points([Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)]).unwrap();
        let c = pl.crossing_with(Vec2::new(1.5, -1.0), Vec2::new(1.5, 1.0)).unwrap();
        assert_eq!(c.seg, 1);
        assert!((c.t - 0.5).abs() < 1e-15 && (c.u - 0.5).abs() < 1e-15);
        assert!(pl.crossing_with(Vec2::new(3.0, -1.0), Vec2::new(3.0, 1.0)).is_none());
        // parallel probe
        assert!(pl.crossing_with(Vec2::new(0.0, 1.0), Vec2::new(2.0, 1.0)).is_none());
    }

    #[test]
    fn csv_layout() {
        let pl = Polyline::from_points([Vec2::new(0.0, 0.0), Vec2::new(0.0, 2.0)]).unwrap();
        let mut buf = Vec::new();
        pl.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,x,y,cumlen\n0,0,0,0\n1,0,2,2\n");
    }

    proptest! {
        #[test]
        fn cumulative_matches_chord_sum(pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40)) {
            let pl = Polyline::from_points(pts.iter().map(|&(x, y)| Vec2::new(x, y))).unwrap();
            let c = pl.cumulative_length();
            let mut sum = 0.0;
            for (i, w) in pl.points().windows(2).enumerate() {
                prop_assert!(w[0] != w[1]);
                sum += w[0].distance(w[1]);
                prop_assert!((c[i + 1] - sum).abs() <= 1e-12 * (1.0 + sum));
                prop_assert!(c[i + 1] >= c[i]);
            }
        }
    }
}
