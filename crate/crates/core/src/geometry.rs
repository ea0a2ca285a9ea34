//! Points and small vector helpers.
//!
//! Coordinates are stored as fixed `[f64; 3]` regardless of the graph
//! dimension; planar graphs keep the third component at zero. All of the
//! vector math below is dimension-agnostic under that convention, which lets
//! the elastic-shape and reduction code treat 2D and 3D graphs uniformly.

use serde::{Deserialize, Serialize};

/// A point (or free vector) in R^2 or R^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: [f64; 3],
}

impl Point {
    pub const ORIGIN: Point = Point {
        coords: [0.0, 0.0, 0.0],
    };

    pub fn new2(x: f64, y: f64) -> Self {
        Point {
            coords: [x, y, 0.0],
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point { coords: [x, y, z] }
    }

    /// Build a point from `dim` leading coordinates; the rest are zero.
    pub fn from_slice(coords: &[f64]) -> Self {
        let mut c = [0.0; 3];
        for (i, v) in coords.iter().take(3).enumerate() {
            c[i] = *v;
        }
        Point { coords: c }
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn z(&self) -> f64 {
        self.coords[2]
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point {
            coords: [
                self.coords[0] + other.coords[0],
                self.coords[1] + other.coords[1],
                self.coords[2] + other.coords[2],
            ],
        }
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point {
            coords: [
                self.coords[0] - other.coords[0],
                self.coords[1] - other.coords[1],
                self.coords[2] - other.coords[2],
            ],
        }
    }

    pub fn scale(&self, s: f64) -> Point {
        Point {
            coords: [self.coords[0] * s, self.coords[1] * s, self.coords[2] * s],
        }
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords[0] * other.coords[0]
            + self.coords[1] * other.coords[1]
            + self.coords[2] * other.coords[2]
    }

    pub fn cross(&self, other: &Point) -> Point {
        let a = &self.coords;
        let b = &other.coords;
        Point {
            coords: [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ],
        }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        let d = self.sub(other);
        d.dot(&d)
    }

    /// Unit vector in the same direction, or `None` for a near-zero vector.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        if n < 1e-12 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }
}

/// Mean position of a nonempty point set.
pub fn centroid(points: &[Point]) -> Point {
    let mut acc = Point::ORIGIN;
    for p in points {
        acc = acc.add(p);
    }
    acc.scale(1.0 / points.len() as f64)
}

/// Rotation taking `from` onto `to` through the smallest angle, applied to `v`.
///
/// Both direction arguments must be unit vectors. Anti-parallel directions
/// rotate by pi about a perpendicular axis chosen deterministically from
/// coordinate order. For planar inputs (z = 0) the result stays planar.
pub fn rotate_align(v: &Point, from: &Point, to: &Point) -> Point {
    let cos_t = from.dot(to).clamp(-1.0, 1.0);
    let axis_raw = from.cross(to);
    let sin_t = axis_raw.norm();
    if sin_t < 1e-12 {
        if cos_t > 0.0 {
            return *v;
        }
        // Anti-parallel: pi rotation about the first coordinate axis not
        // parallel to `from`.
        let axis = perpendicular_axis(from);
        return rodrigues(v, &axis, -1.0, 0.0);
    }
    let axis = axis_raw.scale(1.0 / sin_t);
    rodrigues(v, &axis, cos_t, sin_t)
}

fn perpendicular_axis(dir: &Point) -> Point {
    for i in 0..3 {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        let e = Point { coords: e };
        if let Some(axis) = dir.cross(&e).normalized() {
            return axis;
        }
    }
    // dir was zero; caller guarantees a unit vector, but stay total.
    Point::new3(0.0, 0.0, 1.0)
}

/// Rodrigues rotation of `v` about unit `axis` by the angle with the given
/// cosine and sine.
fn rodrigues(v: &Point, axis: &Point, cos_t: f64, sin_t: f64) -> Point {
    let kxv = axis.cross(v);
    let kdv = axis.dot(v);
    v.scale(cos_t)
        .add(&kxv.scale(sin_t))
        .add(&axis.scale(kdv * (1.0 - cos_t)))
}
