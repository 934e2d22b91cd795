//! Domains and pairs of curve families.
//!
//! `D0(c) = {x : c0(x) < c}` and `D1(c) = {x : c1(x) < c}`; the curves
//! `gamma_i(c)` are the level sets `c_i(x) = c` inside the domain. A relay with
//! parameters `(c0, c1)` switches to 1 when the input leaves `D0(c0)` and to 0
//! when it leaves `D1(c1)`.

mod contour;
pub mod validate;

use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{point_polyline_distance, Point2};

/// Which of the two curve families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Zero,
    One,
}

impl Family {
    pub fn index(self) -> usize {
        match self {
            Family::Zero => 0,
            Family::One => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Family> {
        match i {
            0 => Some(Family::Zero),
            1 => Some(Family::One),
            _ => None,
        }
    }

    pub fn other(self) -> Family {
        match self {
            Family::Zero => Family::One,
            Family::One => Family::Zero,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// An open, bounded, connected input domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Rectangle { x1_min: f64, x1_max: f64, x2_min: f64, x2_max: f64 },
    Annulus { center: Point2, r_min: f64, r_max: f64 },
}

impl Domain {
    pub fn rectangle(x1_min: f64, x1_max: f64, x2_min: f64, x2_max: f64) -> Result<Self> {
        let d = Domain::Rectangle { x1_min, x1_max, x2_min, x2_max };
        d.validate()?;
        Ok(d)
    }

    pub fn annulus(center: Point2, r_min: f64, r_max: f64) -> Result<Self> {
        let d = Domain::Annulus { center, r_min, r_max };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Rectangle { x1_min, x1_max, x2_min, x2_max } => {
                let vals = [x1_min, x1_max, x2_min, x2_max];
                if vals.iter().any(|v| !v.is_finite()) || x1_min >= x1_max || x2_min >= x2_max {
                    return Err(Error::InvalidDomain(format!(
                        "rectangle bounds must be finite with min < max, got [{x1_min}, {x1_max}] x [{x2_min}, {x2_max}]"
                    )));
                }
            }
            Domain::Annulus { center, r_min, r_max } => {
                if !center.is_finite() || !r_min.is_finite() || !r_max.is_finite() || r_min <= 0.0 || r_min >= r_max {
                    return Err(Error::InvalidDomain(format!(
                        "annulus radii must satisfy 0 < r_min < r_max, got {r_min}, {r_max}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Strict membership; boundary points are outside.
    pub fn contains(&self, x: Point2) -> bool {
        match *self {
            Domain::Rectangle { x1_min, x1_max, x2_min, x2_max } => {
                x1_min < x.x1 && x.x1 < x1_max && x2_min < x.x2 && x.x2 < x2_max
            }
            Domain::Annulus { center, r_min, r_max } => {
                let r = x.distance(center);
                r_min < r && r < r_max
            }
        }
    }

    /// Whether the closed segment `[a, b]` lies in the domain.
    pub fn contains_segment(&self, a: Point2, b: Point2) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        match *self {
            // convex
            Domain::Rectangle { .. } => true,
            Domain::Annulus { center, r_min, .. } => {
                crate::geometry::point_segment_distance(center, a, b) > r_min
            }
        }
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        match *self {
            Domain::Rectangle { x1_min, x1_max, x2_min, x2_max } => {
                (Point2::new(x1_min, x2_min), Point2::new(x1_max, x2_max))
            }
            Domain::Annulus { center, r_max, .. } => (
                center - Point2::new(r_max, r_max),
                center + Point2::new(r_max, r_max),
            ),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Domain::Rectangle { x1_min, x1_max, x2_min, x2_max } => (x1_max - x1_min) * (x2_max - x2_min),
            Domain::Annulus { r_min, r_max, .. } => std::f64::consts::PI * (r_max * r_max - r_min * r_min),
        }
    }

    /// Midpoints of an `n` by `n` lattice over the bounding box that fall
    /// inside the domain.
    pub fn cover_points(&self, n: usize) -> Vec<Point2> {
        let (lo, hi) = self.bounding_box();
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = Point2::new(
                    lo.x1 + (i as f64 + 0.5) * (hi.x1 - lo.x1) / n as f64,
                    lo.x2 + (j as f64 + 0.5) * (hi.x2 - lo.x2) / n as f64,
                );
                if self.contains(x) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// Parameters `tau` where `a + tau * t` meets the boundary (`t` unit).
    fn line_crossings(&self, a: Point2, t: Point2) -> Vec<f64> {
        let mut out = Vec::new();
        match *self {
            Domain::Rectangle { x1_min, x1_max, x2_min, x2_max } => {
                if t.x1 != 0.0 {
                    out.push((x1_min - a.x1) / t.x1);
                    out.push((x1_max - a.x1) / t.x1);
                }
                if t.x2 != 0.0 {
                    out.push((x2_min - a.x2) / t.x2);
                    out.push((x2_max - a.x2) / t.x2);
                }
            }
            Domain::Annulus { center, r_min, r_max } => {
                let w = a - center;
                let b = t.dot(w);
                for r in [r_min, r_max] {
                    let disc = b * b - (w.norm_sq() - r * r);
                    if disc >= 0.0 {
                        out.push(-b - disc.sqrt());
                        out.push(-b + disc.sqrt());
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Angles where the circle `|x - p| = r` meets the boundary, in [0, 2 pi).
    fn circle_crossings(&self, p: Point2, r: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push = |theta: f64| out.push(theta.rem_euclid(TAU));
        match *self {
            Domain::Rectangle { x1_min, x1_max, x2_min, x2_max } => {
                for xm in [x1_min, x1_max] {
                    let c = (xm - p.x1) / r;
                    if c.abs() <= 1.0 {
                        push(c.acos());
                        push(-c.acos());
                    }
                }
                for ym in [x2_min, x2_max] {
                    let s = (ym - p.x2) / r;
                    if s.abs() <= 1.0 {
                        push(s.asin());
                        push(std::f64::consts::PI - s.asin());
                    }
                }
            }
            Domain::Annulus { center, r_min, r_max } => {
                let v = center - p;
                let d = v.norm();
                if d > 0.0 {
                    let phi = v.x2.atan2(v.x1);
                    for big_r in [r_min, r_max] {
                        let c = (r * r + d * d - big_r * big_r) / (2.0 * r * d);
                        if c.abs() <= 1.0 {
                            push(phi + c.acos());
                            push(phi - c.acos());
                        }
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// A closed parameter interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
}

impl ParamRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidFoliation(format!("bad parameter range [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, c: f64) -> bool {
        self.lo <= c && c <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Relay parameters: the level of the up-switching curve and of the
/// down-switching curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPair {
    pub c0: f64,
    pub c1: f64,
}

impl ParamPair {
    pub const fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }
}

/// Sampling densities used where no closed form exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    /// Lattice size per axis for cover checks.
    pub cover: usize,
    /// Points returned by default curve sampling.
    pub curve_points: usize,
    /// Random point pairs for the ordering check.
    pub random_pairs: usize,
    /// Marching-squares lattice size per axis for tabulated curves.
    pub contour: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { cover: 200, curve_points: 512, random_pairs: 1000, contour: 128 }
    }
}

#[derive(Debug, Clone)]
pub enum FoliationKind {
    /// `c0 = n.x`, `c1 = -n.x`: families of parallel lines.
    Linear { normal: Point2 },
    /// `c0 = |x - p|`, `c1 = C - |x - p|`: concentric circles.
    Radial { center: Point2, constant: f64 },
    /// Arbitrary fields, validated by sampling only.
    Tabulated { c0: Arc<ScalarField>, c1: Arc<ScalarField> },
}

/// The two curve families over a domain, with parameter ranges and the
/// smallest admitted curve gap.
#[derive(Debug, Clone)]
pub struct FoliationPair {
    domain: Domain,
    kind: FoliationKind,
    c0_range: ParamRange,
    c1_range: ParamRange,
    min_gap: f64,
    sampling: Sampling,
    // (c0, c1) at the cover points, built on first use
    cover_cache: OnceLock<Arc<Vec<(f64, f64)>>>,
}

impl FoliationPair {
    pub fn new(
        domain: Domain,
        kind: FoliationKind,
        c0_range: ParamRange,
        c1_range: ParamRange,
        min_gap: f64,
    ) -> Result<Self> {
        domain.validate()?;
        let kind = match kind {
            FoliationKind::Linear { normal } => {
                let len = normal.norm();
                if !(len.is_finite() && len > 0.0) {
                    return Err(Error::InvalidFoliation("direction must be a nonzero vector".into()));
                }
                FoliationKind::Linear { normal: normal * (1.0 / len) }
            }
            FoliationKind::Radial { center, constant } => {
                if !center.is_finite() || !constant.is_finite() {
                    return Err(Error::InvalidFoliation("radial center and constant must be finite".into()));
                }
                FoliationKind::Radial { center, constant }
            }
            k => k,
        };
        if !(min_gap.is_finite() && min_gap > 0.0) {
            return Err(Error::InvalidFoliation(format!("min_gap must be positive, got {min_gap}")));
        }
        Ok(Self {
            domain,
            kind,
            c0_range,
            c1_range,
            min_gap,
            sampling: Sampling::default(),
            cover_cache: OnceLock::new(),
        })
    }

    pub fn linear(domain: Domain, normal: Point2, c0_range: ParamRange, c1_range: ParamRange, min_gap: f64) -> Result<Self> {
        Self::new(domain, FoliationKind::Linear { normal }, c0_range, c1_range, min_gap)
    }

    pub fn radial(
        domain: Domain,
        center: Point2,
        constant: f64,
        c0_range: ParamRange,
        c1_range: ParamRange,
        min_gap: f64,
    ) -> Result<Self> {
        Self::new(domain, FoliationKind::Radial { center, constant }, c0_range, c1_range, min_gap)
    }

    pub fn tabulated(
        domain: Domain,
        c0: ScalarField,
        c1: ScalarField,
        c0_range: ParamRange,
        c1_range: ParamRange,
        min_gap: f64,
    ) -> Result<Self> {
        Self::new(
            domain,
            FoliationKind::Tabulated { c0: Arc::new(c0), c1: Arc::new(c1) },
            c0_range,
            c1_range,
            min_gap,
        )
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self.cover_cache = OnceLock::new();
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kind(&self) -> &FoliationKind {
        &self.kind
    }

    pub fn c0_range(&self) -> ParamRange {
        self.c0_range
    }

    pub fn c1_range(&self) -> ParamRange {
        self.c1_range
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.kind, FoliationKind::Tabulated { .. })
    }

    /// `c1(x) = offset - c0(x)` for the built-ins; `None` for tabulated fields.
    pub fn c1_offset(&self) -> Option<f64> {
        match self.kind {
            FoliationKind::Linear { .. } => Some(0.0),
            FoliationKind::Radial { constant, .. } => Some(constant),
            FoliationKind::Tabulated { .. } => None,
        }
    }

    /// Field value of `family` at `x`, without a domain check.
    pub fn field(&self, family: Family, x: Point2) -> f64 {
        match (&self.kind, family) {
            (FoliationKind::Linear { normal }, Family::Zero) => normal.dot(x),
            (FoliationKind::Linear { normal }, Family::One) => -normal.dot(x),
            (FoliationKind::Radial { center, .. }, Family::Zero) => x.distance(*center),
            (FoliationKind::Radial { center, constant }, Family::One) => constant - x.distance(*center),
            (FoliationKind::Tabulated { c0, .. }, Family::Zero) => c0.eval(x.x1, x.x2),
            (FoliationKind::Tabulated { c1, .. }, Family::One) => c1.eval(x.x1, x.x2),
        }
    }

    /// `(c0(x), c1(x))` without a domain check.
    pub fn params(&self, x: Point2) -> ParamPair {
        ParamPair::new(self.field(Family::Zero, x), self.field(Family::One, x))
    }

    /// `(c0(x), c1(x))` for a point of the domain.
    pub fn classify_point(&self, x: Point2) -> Result<ParamPair> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain { x1: x.x1, x2: x.x2 });
        }
        let p = self.params(x);
        if !p.c0.is_finite() || !p.c1.is_finite() {
            return Err(Error::InvalidFoliation(format!(
                "fields are not finite at ({}, {})",
                x.x1, x.x2
            )));
        }
        Ok(p)
    }

    /// Membership of `x` in the open set `D_family(level)`.
    pub fn in_set(&self, family: Family, level: f64, x: Point2) -> bool {
        self.field(family, x) < level
    }

    pub fn in_ranges(&self, p: ParamPair) -> bool {
        self.c0_range.contains(p.c0) && self.c1_range.contains(p.c1)
    }

    /// Open range of the built-in coordinate (`n.x` or `|x - p|`) over the domain.
    fn coordinate_range(&self) -> Option<(f64, f64)> {
        match (&self.kind, &self.domain) {
            (FoliationKind::Linear { normal }, Domain::Rectangle { x1_min, x1_max, x2_min, x2_max }) => {
                let corners = [
                    Point2::new(*x1_min, *x2_min),
                    Point2::new(*x1_max, *x2_min),
                    Point2::new(*x1_min, *x2_max),
                    Point2::new(*x1_max, *x2_max),
                ];
                let vals = corners.map(|c| normal.dot(c));
                Some((
                    vals.iter().copied().fold(f64::INFINITY, f64::min),
                    vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ))
            }
            (FoliationKind::Linear { normal }, Domain::Annulus { center, r_max, .. }) => {
                let m = normal.dot(*center);
                Some((m - r_max, m + r_max))
            }
            (FoliationKind::Radial { center, .. }, Domain::Rectangle { x1_min, x1_max, x2_min, x2_max }) => {
                let dx = (x1_min - center.x1).max(0.0).max(center.x1 - x1_max);
                let dy = (x2_min - center.x2).max(0.0).max(center.x2 - x2_max);
                let far_x = (center.x1 - x1_min).abs().max((x1_max - center.x1).abs());
                let far_y = (center.x2 - x2_min).abs().max((x2_max - center.x2).abs());
                Some((dx.hypot(dy), far_x.hypot(far_y)))
            }
            (FoliationKind::Radial { center, .. }, Domain::Annulus { center: q, r_min, r_max }) => {
                let d = center.distance(*q);
                Some(((r_min - d).max(d - r_max).max(0.0), d + r_max))
            }
            (FoliationKind::Tabulated { .. }, _) => None,
        }
    }

    fn cover_values(&self) -> Arc<Vec<(f64, f64)>> {
        self.cover_cache
            .get_or_init(|| {
                let pts = self.domain.cover_points(self.sampling.cover);
                Arc::new(pts.into_iter().map(|x| {
                    let p = self.params(x);
                    (p.c0, p.c1)
                }).collect())
            })
            .clone()
    }

    /// Whether `D0(c0)` and `D1(c1)` together cover the domain.
    ///
    /// Closed form for the built-ins, a cover-lattice check for tabulated
    /// fields. Out-of-range parameters are never admissible.
    pub fn is_admissible(&self, p: ParamPair) -> bool {
        if !self.in_ranges(p) {
            return false;
        }
        match self.coordinate_range() {
            Some((lo, hi)) => {
                // some x has c0(x) >= c0 and c1(x) >= c1 iff the coordinate
                // interval [c0, tau] meets (lo, hi)
                let tau = self.c1_offset().unwrap() - p.c1;
                p.c0 > tau || p.c0 >= hi || tau <= lo
            }
            None => self.is_admissible_sampled(p),
        }
    }

    /// Distance of a built-in pair from the nearest admissibility threshold,
    /// in units of the coordinate. `None` for tabulated fields.
    pub fn admissibility_margin(&self, p: ParamPair) -> Option<f64> {
        let (lo, hi) = self.coordinate_range()?;
        let tau = self.c1_offset()? - p.c1;
        Some((p.c0 - tau).abs().min((p.c0 - hi).abs()).min((tau - lo).abs()))
    }

    /// Cover check on the configured lattice, for any kind of foliation.
    pub fn is_admissible_sampled(&self, p: ParamPair) -> bool {
        self.in_ranges(p) && self.cover_values().iter().all(|&(a, b)| a < p.c0 || b < p.c1)
    }

    /// Distance between `gamma0(c0)` and `gamma1(c1)`; infinite when either
    /// curve misses the domain.
    pub fn curve_gap(&self, p: ParamPair) -> Result<f64> {
        if !self.is_admissible(p) {
            return Err(Error::NotAdmissible { c0: p.c0, c1: p.c1 });
        }
        match self.coordinate_range() {
            Some((lo, hi)) => {
                let tau = self.c1_offset().unwrap() - p.c1;
                let inside = |v: f64| lo < v && v < hi;
                if !inside(p.c0) || !inside(tau) {
                    Ok(f64::INFINITY)
                } else {
                    Ok(p.c0 - tau)
                }
            }
            None => {
                let a = self.curve_pieces(Family::Zero, p.c0);
                let b = self.curve_pieces(Family::One, p.c1);
                if a.is_empty() || b.is_empty() {
                    return Ok(f64::INFINITY);
                }
                Ok(polyline_set_distance(&a, &b).min(polyline_set_distance(&b, &a)))
            }
        }
    }

    /// Connected pieces of `gamma_family(c)` inside the domain.
    ///
    /// Built-ins are sampled exactly with `curve_points` points spread by arc
    /// length; tabulated curves come from marching squares.
    pub fn curve_pieces(&self, family: Family, c: f64) -> Vec<Vec<Point2>> {
        self.curve_pieces_n(family, c, self.sampling.curve_points)
    }

    fn curve_pieces_n(&self, family: Family, c: f64, n: usize) -> Vec<Vec<Point2>> {
        match &self.kind {
            FoliationKind::Linear { normal } => {
                let offset = if family == Family::Zero { c } else { -c };
                let a = *normal * offset;
                let t = normal.perp();
                let cuts = self.domain.line_crossings(a, t);
                let intervals: Vec<(f64, f64)> = cuts
                    .windows(2)
                    .filter(|w| w[1] > w[0] && self.domain.contains(a + t * (0.5 * (w[0] + w[1]))))
                    .map(|w| (w[0], w[1]))
                    .collect();
                spread(&intervals, 1.0, n, |tau| a + t * tau)
            }
            FoliationKind::Radial { center, constant } => {
                let r = if family == Family::Zero { c } else { constant - c };
                if r.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                    return Vec::new();
                }
                let at = |theta: f64| *center + Point2::new(theta.cos(), theta.sin()) * r;
                let cuts = self.domain.circle_crossings(*center, r);
                let intervals: Vec<(f64, f64)> = if cuts.is_empty() {
                    if self.domain.contains(at(0.0)) {
                        vec![(0.0, TAU)]
                    } else {
                        Vec::new()
                    }
                } else {
                    let mut iv = Vec::new();
                    for k in 0..cuts.len() {
                        let a = cuts[k];
                        let b = if k + 1 < cuts.len() { cuts[k + 1] } else { cuts[0] + TAU };
                        if b > a && self.domain.contains(at(0.5 * (a + b))) {
                            iv.push((a, b));
                        }
                    }
                    iv
                };
                spread(&intervals, r, n, at)
            }
            FoliationKind::Tabulated { .. } => {
                let f = |x: Point2| self.field(family, x);
                contour::level_pieces(&self.domain, &f, c, self.sampling.contour)
            }
        }
    }

    /// Ordered points on `gamma_family(c)` inside the domain.
    pub fn sample_curve(&self, family: Family, c: f64, n_points: usize) -> Result<Vec<Point2>> {
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!("n_points must be at least 2, got {n_points}")));
        }
        let pts: Vec<Point2> = self.curve_pieces_n(family, c, n_points).into_iter().flatten().collect();
        if pts.is_empty() {
            return Err(Error::EmptyCurve { family, level: c });
        }
        if pts.len() <= n_points {
            return Ok(pts);
        }
        // tabulated: subsample by index so every point stays on the curve
        let m = pts.len() - 1;
        Ok((0..n_points)
            .map(|k| pts[(k * m + (n_points - 1) / 2) / (n_points - 1)])
            .collect())
    }

    /// Interior parameters `s` in (0, 1) where a field turns along `a + s (b - a)`.
    ///
    /// `None` when a tabulated field turns too often to resolve.
    pub fn segment_turning_points(&self, a: Point2, b: Point2) -> Option<Vec<f64>> {
        match &self.kind {
            FoliationKind::Linear { .. } => Some(Vec::new()),
            FoliationKind::Radial { center, .. } => {
                let d = b - a;
                let len_sq = d.norm_sq();
                if len_sq == 0.0 {
                    return Some(Vec::new());
                }
                let s = -(a - *center).dot(d) / len_sq;
                Some(if s > 0.0 && s < 1.0 { vec![s] } else { Vec::new() })
            }
            FoliationKind::Tabulated { .. } => {
                const SUBSTEPS: usize = 32;
                const MAX_TURNS: usize = 8;
                let mut out = Vec::new();
                for family in [Family::Zero, Family::One] {
                    let g = |s: f64| self.field(family, a.lerp(b, s));
                    let vals: Vec<f64> = (0..=SUBSTEPS).map(|k| g(k as f64 / SUBSTEPS as f64)).collect();
                    let mut last_dir = 0.0;
                    for k in 0..SUBSTEPS {
                        let diff = vals[k + 1] - vals[k];
                        if diff == 0.0 {
                            continue;
                        }
                        let dir = diff.signum();
                        if last_dir != 0.0 && dir != last_dir {
                            // extremum inside [k - 1, k + 1]; refine by ternary search
                            let (mut lo, mut hi) = ((k as f64 - 1.0) / SUBSTEPS as f64, (k as f64 + 1.0) / SUBSTEPS as f64);
                            let sign = -last_dir; // maximise g * last_dir
                            for _ in 0..80 {
                                let m1 = lo + (hi - lo) / 3.0;
                                let m2 = hi - (hi - lo) / 3.0;
                                if sign * g(m1) < sign * g(m2) {
                                    hi = m2;
                                } else {
                                    lo = m1;
                                }
                            }
                            let s = 0.5 * (lo + hi);
                            if s > 0.0 && s < 1.0 {
                                out.push(s);
                            }
                        }
                        last_dir = dir;
                    }
                }
                if out.len() > MAX_TURNS {
                    return None;
                }
                out.sort_by(f64::total_cmp);
                out.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
                Some(out)
            }
        }
    }

    /// A point with `c_family(x) = level`, reached from `anchor` along the
    /// field's gradient line (straight for the built-ins). May leave the domain.
    pub fn point_on_level(&self, family: Family, level: f64, anchor: Point2) -> Option<Point2> {
        match &self.kind {
            FoliationKind::Linear { normal } => {
                let target = if family == Family::Zero { level } else { -level };
                Some(anchor + *normal * (target - normal.dot(anchor)))
            }
            FoliationKind::Radial { center, constant } => {
                let r = if family == Family::Zero { level } else { constant - level };
                if r < 0.0 {
                    return None;
                }
                let v = anchor - *center;
                let len = v.norm();
                let dir = if len > 0.0 { v * (1.0 / len) } else { Point2::new(1.0, 0.0) };
                Some(*center + dir * r)
            }
            FoliationKind::Tabulated { .. } => {
                let g = |x: Point2| self.field(family, x) - level;
                let (lo, hi) = self.domain.bounding_box();
                let diam = lo.distance(hi);
                let eps = 1e-6 * diam;
                let grad = Point2::new(
                    g(anchor + Point2::new(eps, 0.0)) - g(anchor - Point2::new(eps, 0.0)),
                    g(anchor + Point2::new(0.0, eps)) - g(anchor - Point2::new(0.0, eps)),
                );
                let gl = grad.norm();
                if gl == 0.0 || !gl.is_finite() {
                    return if g(anchor) == 0.0 { Some(anchor) } else { None };
                }
                let dir = grad * (1.0 / gl);
                let g0 = g(anchor);
                if g0 == 0.0 {
                    return Some(anchor);
                }
                // walk uphill when below the level, downhill when above
                let dir = if g0 < 0.0 { dir } else { -dir };
                let steps = 400;
                let mut prev = 0.0;
                for k in 1..=steps {
                    let s = diam * k as f64 / steps as f64;
                    let x = anchor + dir * s;
                    if !self.domain.contains(x) {
                        return None;
                    }
                    if (g(x) < 0.0) != (g0 < 0.0) || g(x) == 0.0 {
                        let (mut a, mut b) = (prev, s);
                        for _ in 0..80 {
                            let m = 0.5 * (a + b);
                            if (g(anchor + dir * m) < 0.0) == (g0 < 0.0) && g(anchor + dir * m) != 0.0 {
                                a = m;
                            } else {
                                b = m;
                            }
                        }
                        return Some(anchor + dir * b);
                    }
                    prev = s;
                }
                None
            }
        }
    }
}

/// `n` points at the midpoints of equal arc-length slices of the given
/// parameter intervals. `scale` converts parameter to arc length.
fn spread(intervals: &[(f64, f64)], scale: f64, n: usize, at: impl Fn(f64) -> Point2) -> Vec<Vec<Point2>> {
    let total: f64 = intervals.iter().map(|(a, b)| (b - a) * scale).sum();
    if intervals.is_empty() || !(total > 0.0) {
        return Vec::new();
    }
    let n = n.max(1);
    let step = total / n as f64;
    let mut pieces = Vec::new();
    let mut k = 0usize;
    let mut offset = 0.0;
    for &(a, b) in intervals {
        let len = (b - a) * scale;
        let mut piece = Vec::new();
        while k < n {
            let pos = (k as f64 + 0.5) * step - offset;
            if pos >= len {
                break;
            }
            piece.push(at(a + pos / scale));
            k += 1;
        }
        offset += len;
        if !piece.is_empty() {
            pieces.push(piece);
        }
    }
    pieces
}

/// Smallest distance from any vertex of `a` to the polylines of `b`.
fn polyline_set_distance(a: &[Vec<Point2>], b: &[Vec<Point2>]) -> f64 {
    a.iter()
        .flatten()
        .map(|&x| b.iter().map(|line| point_polyline_distance(x, line)).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min)
}
