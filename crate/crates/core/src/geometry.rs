//! Minimal 3D vector and box primitives for the tracer.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (o - self).norm()
    }

    pub fn axis(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    fn with_axis(mut self, axis: Axis, v: f64) -> Self {
        match axis {
            Axis::X => self.x = v,
            Axis::Y => self.y = v,
            Axis::Z => self.z = v,
        }
        self
    }

    /// Azimuth in [-π, π] and zenith angle in [0, π] of this direction.
    pub fn angles(self) -> (f64, f64) {
        let n = self.norm();
        let azimuth = self.y.atan2(self.x);
        let elevation = if n > 0.0 { (self.z / n).clamp(-1.0, 1.0).acos() } else { 0.0 };
        (azimuth, elevation)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

/// Closed axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn is_non_degenerate(&self) -> bool {
        AXES.iter().all(|&a| self.max.axis(a) > self.min.axis(a))
    }

    pub fn contains(&self, p: Vec3) -> bool {
        AXES.iter()
            .all(|&a| p.axis(a) >= self.min.axis(a) && p.axis(a) <= self.max.axis(a))
    }

    /// True when the closed segment `a → b` touches the closed box.
    /// Grazing contact counts as an intersection.
    pub fn intersects_segment(&self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for axis in AXES {
            let (o, dir) = (a.axis(axis), d.axis(axis));
            let (lo, hi) = (self.min.axis(axis), self.max.axis(axis));
            if dir == 0.0 {
                if o < lo || o > hi {
                    return false;
                }
                continue;
            }
            let (mut ta, mut tb) = ((lo - o) / dir, (hi - o) / dir);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

/// A bounded vertical rectangle lying in the plane `axis = offset`.
/// `outward` is the sign of the face normal along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalFace {
    pub axis: Axis,
    pub offset: f64,
    pub outward: f64,
    /// Extent along the other horizontal axis.
    pub span: (f64, f64),
    pub height: f64,
    /// Index of the owning building.
    pub building: usize,
}

impl VerticalFace {
    fn other(&self) -> Axis {
        match self.axis {
            Axis::X => Axis::Y,
            _ => Axis::X,
        }
    }

    /// Signed distance of `p` from the face plane, positive on the outer side.
    pub fn side(&self, p: Vec3) -> f64 {
        (p.axis(self.axis) - self.offset) * self.outward
    }

    pub fn mirror(&self, p: Vec3) -> Vec3 {
        p.with_axis(self.axis, 2.0 * self.offset - p.axis(self.axis))
    }

    /// Intersection of segment `a → b` with the face plane, if the segment
    /// crosses it and the hit lies on the closed face rectangle.
    pub fn hit(&self, a: Vec3, b: Vec3) -> Option<Vec3> {
        let (da, db) = (a.axis(self.axis) - self.offset, b.axis(self.axis) - self.offset);
        if da == db || da * db > 0.0 {
            return None;
        }
        let t = da / (da - db);
        let mut p = a + (b - a) * t;
        p = p.with_axis(self.axis, self.offset);
        let along = p.axis(self.other());
        if along < self.span.0 || along > self.span.1 || p.z < 0.0 || p.z > self.height {
            return None;
        }
        Some(p)
    }

    /// Unit outward normal.
    pub fn normal(&self) -> Vec3 {
        Vec3::default().with_axis(self.axis, self.outward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> Aabb {
        Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn segment_through_box() {
        let b = unit_box();
        assert!(b.intersects_segment(Vec3::new(-1.0, 0.5, 0.5), Vec3::new(2.0, 0.5, 0.5)));
        assert!(!b.intersects_segment(Vec3::new(-1.0, 2.0, 0.5), Vec3::new(2.0, 2.0, 0.5)));
        assert!(!b.intersects_segment(Vec3::new(-2.0, 0.5, 0.5), Vec3::new(-1.0, 0.5, 0.5)));
    }

    #[test]
    fn grazing_counts_as_blocked() {
        let b = unit_box();
        assert!(b.intersects_segment(Vec3::new(-1.0, 1.0, 0.5), Vec3::new(2.0, 1.0, 0.5)));
        assert!(b.intersects_segment(Vec3::new(-1.0, -1.0, 0.5), Vec3::new(1.0, 1.0, 0.5)));
    }

    #[test]
    fn mirror_and_hit() {
        let face = VerticalFace {
            axis: Axis::Y,
            offset: 10.0,
            outward: -1.0,
            span: (0.0, 100.0),
            height: 20.0,
            building: 0,
        };
        let a = Vec3::new(10.0, 0.0, 2.0);
        let m = face.mirror(a);
        assert_eq!(m, Vec3::new(10.0, 20.0, 2.0));
        let p = face.hit(m, Vec3::new(30.0, 0.0, 2.0)).unwrap();
        assert!((p.x - 20.0).abs() < 1e-12 && p.y == 10.0);
        assert!(face.side(a) > 0.0);
    }

    #[test]
    fn angles_cover_ranges() {
        let (az, el) = Vec3::new(0.0, 0.0, 1.0).angles();
        assert_eq!((az, el), (0.0, 0.0));
        let (az, el) = Vec3::new(-1.0, 0.0, 0.0).angles();
        assert!((az - std::f64::consts::PI).abs() < 1e-15);
        assert!((el - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
