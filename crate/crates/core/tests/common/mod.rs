#![allow(dead_code)]

use hyst2d_core::{Domain, FoliationPair, ParamPair, ParamRange, Point2, Signal2D};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Classical scalar Preisach operator with relays `(alpha, beta)`,
/// `-1 <= beta < alpha <= 1`, unit density and 0/1 outputs, started from
/// negative saturation. Written against the turning-point picture only.
pub struct ScalarPreisach {
    // alternating extrema after the protected base at -inf
    stack: Vec<f64>,
}

impl Default for ScalarPreisach {
    fn default() -> Self {
        Self { stack: vec![f64::NEG_INFINITY] }
    }
}

/// Measure of `{b <= beta <= alpha <= a}` inside the unit density support.
pub fn everett(a: f64, b: f64) -> f64 {
    let (a, b) = (a.clamp(-1.0, 1.0), b.clamp(-1.0, 1.0));
    let d = (a - b).max(0.0);
    d * d / 2.0
}

impl ScalarPreisach {
    pub fn push(&mut self, x: f64) {
        self.stack.push(x);
        loop {
            let n = self.stack.len();
            if n >= 3 {
                let (a, b, c) = (self.stack[n - 3], self.stack[n - 2], self.stack[n - 1]);
                // b is not a turning point
                if (a <= b && b <= c) || (a >= b && b >= c) {
                    if n - 2 == 0 {
                        break;
                    }
                    self.stack.remove(n - 2);
                    continue;
                }
            }
            if n >= 4 {
                let (a, b, c) = (self.stack[n - 3], self.stack[n - 2], self.stack[n - 1]);
                // c beats the earlier extremum a of its own kind
                if (c - b).abs() >= (a - b).abs() && n - 3 >= 1 {
                    self.stack.drain(n - 3..n - 1);
                    continue;
                }
            }
            break;
        }
    }

    pub fn output(&self) -> f64 {
        let s = &self.stack;
        let mut h = 0.0;
        // maxima sit at odd positions when the first move is upward
        let mut i = 1;
        while i < s.len() {
            if s[i] > s[i - 1] {
                h += everett(s[i], s[i - 1]);
                if let Some(&m) = s.get(i + 1) {
                    h -= everett(s[i], m);
                }
                i += 2;
            } else {
                i += 1;
            }
        }
        h
    }
}

pub fn linear_square() -> FoliationPair {
    FoliationPair::linear(
        Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap(),
        Point2::new(1.0, 0.0),
        ParamRange::new(-1.5, 1.5).unwrap(),
        ParamRange::new(-1.5, 1.5).unwrap(),
        0.01,
    )
    .unwrap()
}

/// Unit-weight triangle `c0 + c1 > 0` in `[-1, 1]^2`.
pub fn triangle() -> FoliationPair {
    FoliationPair::linear(
        Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap(),
        Point2::new(1.0, 0.0),
        ParamRange::new(-1.0, 1.0).unwrap(),
        ParamRange::new(-1.0, 1.0).unwrap(),
        1e-3,
    )
    .unwrap()
}

pub fn radial_annulus() -> FoliationPair {
    FoliationPair::radial(
        Domain::annulus(Point2::ORIGIN, 0.5, 3.0).unwrap(),
        Point2::ORIGIN,
        4.0,
        ParamRange::new(0.5, 3.0).unwrap(),
        ParamRange::new(1.0, 3.5).unwrap(),
        0.01,
    )
    .unwrap()
}

fn timed(rng: &mut ChaCha8Rng, pts: Vec<Point2>) -> Signal2D {
    let mut t = 0.0;
    let mut times = Vec::with_capacity(pts.len());
    for _ in &pts {
        times.push(t);
        t += rng.random_range(0.05..1.0);
    }
    Signal2D::new(times, pts).unwrap()
}

/// Piecewise-linear signal with vertices in `(-1.9, 1.9)^2`.
pub fn square_signal(rng: &mut ChaCha8Rng, vertices: usize) -> Signal2D {
    let pts = (0..vertices)
        .map(|_| Point2::new(rng.random_range(-1.9..1.9), rng.random_range(-1.9..1.9)))
        .collect();
    timed(rng, pts)
}

/// Vertices in a sector of the annulus narrow enough that chords avoid the hole.
pub fn annulus_signal(rng: &mut ChaCha8Rng, vertices: usize) -> Signal2D {
    let pts = (0..vertices)
        .map(|_| {
            let (r, a): (f64, f64) = (rng.random_range(0.8..2.9), rng.random_range(-0.6..0.6));
            Point2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    timed(rng, pts)
}

/// Uniform admissible pair with curve gap at least the foliation minimum.
pub fn admissible_pair(rng: &mut ChaCha8Rng, f: &FoliationPair) -> ParamPair {
    loop {
        let (r0, r1) = (f.c0_range(), f.c1_range());
        let p = ParamPair::new(rng.random_range(r0.lo..r0.hi), rng.random_range(r1.lo..r1.hi));
        if f.is_admissible(p) && f.curve_gap(p).unwrap() >= f.min_gap() {
            return p;
        }
    }
}

/// Value of an output trace at time `t` (after every event at `t`).
pub fn value_at(samples: &[(f64, f64)], t: f64) -> f64 {
    let i = samples.partition_point(|s| s.0 <= t);
    samples[i - 1].1
}
