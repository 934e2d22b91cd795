use std::ops::{Add, Mul, Neg, Sub};

/// A point (or vector) of the input plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by a quarter turn.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.x2, self.x1)
    }

    pub fn lerp(self, other: Point2, s: f64) -> Point2 {
        Point2::new(
            self.x1 + s * (other.x1 - self.x1),
            self.x2 + s * (other.x2 - self.x2),
        )
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x1 * rhs, self.x2 * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x1, -self.x2)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

/// Distance from `x` to the segment `[a, b]`.
pub fn point_segment_distance(x: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len_sq = d.norm_sq();
    if len_sq == 0.0 {
        return x.distance(a);
    }
    let s = ((x - a).dot(d) / len_sq).clamp(0.0, 1.0);
    x.distance(a.lerp(b, s))
}

/// Smallest distance from `x` to a polyline.
pub fn point_polyline_distance(x: Point2, line: &[Point2]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [p] => x.distance(*p),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(x, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}
