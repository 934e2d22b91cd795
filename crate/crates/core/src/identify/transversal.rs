use crate::error::{Error, Result};
use crate::foliation::{Family, FoliationPair, ParamPair};
use crate::geometry::Point2;
use crate::relay::RelayEvent;
use crate::MAX_BISECTIONS;

/// Checks per unit of arc length when validating monotonicity.
const MONOTONE_SAMPLES: usize = 1024;

/// A polyline parametrized by arc length `s` on `[s_min, s_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransversalCurve {
    points: Vec<Point2>,
    cum: Vec<f64>,
    s_start: f64,
}

impl TransversalCurve {
    /// `s_start` is the arc-length value assigned to the first vertex.
    pub fn new(points: Vec<Point2>, s_start: f64) -> Result<Self> {
        let mut pts: Vec<Point2> = Vec::with_capacity(points.len());
        for p in points {
            if !p.is_finite() {
                return Err(Error::NotTransversal("vertices must be finite".into()));
            }
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        if pts.len() < 2 {
            return Err(Error::NotTransversal("need two distinct vertices".into()));
        }
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            cum.push(cum.last().unwrap() + w[0].distance(w[1]));
        }
        Ok(Self { points: pts, cum, s_start })
    }

    pub fn segment(a: Point2, b: Point2, s_start: f64) -> Result<Self> {
        Self::new(vec![a, b], s_start)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn s_min(&self) -> f64 {
        self.s_start
    }

    pub fn s_max(&self) -> f64 {
        self.s_start + self.cum.last().unwrap()
    }

    /// Arc-length values of the vertices.
    pub fn vertex_s(&self) -> Vec<f64> {
        self.cum.iter().map(|c| self.s_start + c).collect()
    }

    /// Point at arc length `s`, clamped to the curve.
    pub fn point_at(&self, s: f64) -> Point2 {
        let l = (s - self.s_start).clamp(0.0, *self.cum.last().unwrap());
        let i = self.cum.partition_point(|&c| c <= l).saturating_sub(1).min(self.points.len() - 2);
        let seg = self.cum[i + 1] - self.cum[i];
        self.points[i].lerp(self.points[i + 1], (l - self.cum[i]) / seg)
    }

    /// Checks that `c0` strictly increases and `c1` strictly decreases
    /// along the curve, and caches the maps.
    pub fn bind(&self, f: &FoliationPair) -> Result<BoundCurve> {
        let len = self.s_max() - self.s_min();
        let n = ((len * MONOTONE_SAMPLES as f64).ceil() as usize).max(MONOTONE_SAMPLES);
        let mut s: Vec<f64> = (0..=n).map(|i| self.s_min() + len * i as f64 / n as f64).collect();
        s.extend(self.vertex_s());
        s.sort_by(f64::total_cmp);
        s.dedup();
        let samples: Vec<(f64, f64, f64)> = s
            .iter()
            .map(|&si| {
                let p = f.params(self.point_at(si));
                (si, p.c0, p.c1)
            })
            .collect();
        for w in samples.windows(2) {
            if !(w[1].1 > w[0].1) {
                return Err(Error::NotTransversal(format!("c0 does not increase near s = {}", w[0].0)));
            }
            if !(w[1].2 < w[0].2) {
                return Err(Error::NotTransversal(format!("c1 does not decrease near s = {}", w[0].0)));
            }
        }
        Ok(BoundCurve { curve: self.clone(), foliation: f.clone(), samples })
    }
}

/// A transversal curve validated against a foliation.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    curve: TransversalCurve,
    foliation: FoliationPair,
    // (s, c0, c1), strictly monotone
    samples: Vec<(f64, f64, f64)>,
}

impl BoundCurve {
    pub fn curve(&self) -> &TransversalCurve {
        &self.curve
    }

    pub fn foliation(&self) -> &FoliationPair {
        &self.foliation
    }

    pub fn s_min(&self) -> f64 {
        self.curve.s_min()
    }

    pub fn s_max(&self) -> f64 {
        self.curve.s_max()
    }

    pub fn point_at(&self, s: f64) -> Point2 {
        self.curve.point_at(s)
    }

    /// `c_family(P(s))`.
    pub fn level_at(&self, family: Family, s: f64) -> f64 {
        self.foliation.field(family, self.curve.point_at(s))
    }

    /// Arc length where the curve meets `gamma_family(level)`.
    pub fn s_for(&self, family: Family, level: f64) -> Option<f64> {
        let col = |k: usize| match family {
            Family::Zero => self.samples[k].1,
            Family::One => self.samples[k].2,
        };
        let n = self.samples.len();
        let (first, last) = (col(0), col(n - 1));
        let (lo_v, hi_v) = if first < last { (first, last) } else { (last, first) };
        if !(lo_v <= level && level <= hi_v) {
            return None;
        }
        // sign of (value - level) flips once along the monotone samples
        let increasing = family == Family::Zero;
        let before = |k: usize| if increasing { col(k) < level } else { col(k) > level };
        let k = (0..n).collect::<Vec<_>>().partition_point(|&k| before(k));
        if k == 0 {
            return Some(self.samples[0].0);
        }
        let (mut lo, mut hi) = (self.samples[k - 1].0, self.samples[k.min(n - 1)].0);
        let g = |s: f64| {
            let v = self.level_at(family, s);
            if increasing { v < level } else { v > level }
        };
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if g(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// The scalar relay a 2D relay becomes on a transversal curve: up at
/// arc length `s_up`, down at `s_down < s_up`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRelay {
    pub s_up: f64,
    pub s_down: f64,
}

impl ScalarRelay {
    /// Switching events for the piecewise-linear scalar input `(t, s)`.
    pub fn trace(&self, input: &[(f64, f64)], init: bool) -> (bool, Vec<RelayEvent>) {
        let s0 = input[0].1;
        let mut v = if s0 >= self.s_up {
            true
        } else if s0 <= self.s_down {
            false
        } else {
            init
        };
        let initial = v;
        let mut events = Vec::new();
        for w in input.windows(2) {
            let ((ta, sa), (tb, sb)) = (w[0], w[1]);
            loop {
                let level = if v { self.s_down } else { self.s_up };
                let reached = if v { sb <= level } else { sb >= level };
                let before = if v { sa <= level } else { sa >= level };
                if !reached || before {
                    break;
                }
                let t = ta + (level - sa) / (sb - sa) * (tb - ta);
                let t = events.last().map_or(t, |e: &RelayEvent| t.max(e.t));
                v = !v;
                events.push(RelayEvent { t, value: v });
            }
        }
        (initial, events)
    }
}

/// Arc lengths where the relay's two curves cross `k`.
pub fn restrict_relay(k: &BoundCurve, p: ParamPair) -> Result<ScalarRelay> {
    let s_up = k.s_for(Family::Zero, p.c0).ok_or(Error::NoIntersection { family: Family::Zero, level: p.c0 })?;
    let s_down = k.s_for(Family::One, p.c1).ok_or(Error::NoIntersection { family: Family::One, level: p.c1 })?;
    if !(s_up > s_down) {
        return Err(Error::NotAdmissible { c0: p.c0, c1: p.c1 });
    }
    Ok(ScalarRelay { s_up, s_down })
}
