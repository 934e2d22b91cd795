//! Single relays under exit-time and threshold semantics.

use crate::error::{Error, Result};
use crate::foliation::{Family, FoliationPair, ParamPair};
use crate::geometry::Point2;
use crate::signal::Signal2D;
use crate::{MAX_BISECTIONS, TIME_TOL};

/// Extra interior probes per segment in the exit-time search.
const EXIT_SUBSTEPS: usize = 4;

/// Smallest `t` in `(lo, hi]` with `pred(t)`, to within `TIME_TOL`.
///
/// Requires `!pred(lo)` and `pred(hi)`; returns the upper bracket end.
pub(crate) fn bisect_first(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= TIME_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// A sample of the reduced signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub t: f64,
    pub k0: f64,
    pub k1: f64,
}

impl Knot {
    pub fn k(&self, family: Family) -> f64 {
        match family {
            Family::Zero => self.k0,
            Family::One => self.k1,
        }
    }
}

/// The reduced signals `K0(t) = c0(u(t))` and `K1(t) = c1(u(t))`.
///
/// Knots are the input samples plus every interior turning point of either
/// field along a segment, so both channels are monotone between knots.
#[derive(Debug, Clone)]
pub struct KSignals {
    foliation: FoliationPair,
    signal: Signal2D,
    samples: Vec<Knot>,
    knots: Vec<Knot>,
    breakpoints: [Vec<f64>; 2],
}

impl KSignals {
    pub fn new(f: &FoliationPair, u: &Signal2D) -> Result<Self> {
        u.check_domain(f.domain())?;
        let times = u.times();
        let pts = u.points();
        let knot = |t: f64, x: Point2| {
            let p = f.params(x);
            Knot { t, k0: p.c0, k1: p.c1 }
        };
        let samples: Vec<Knot> = times.iter().zip(pts).map(|(&t, &x)| knot(t, x)).collect();
        if samples.iter().any(|k| !k.k0.is_finite() || !k.k1.is_finite()) {
            return Err(Error::InvalidFoliation("fields are not finite along the signal".into()));
        }
        let mut knots = Vec::with_capacity(samples.len());
        for i in 0..u.len() - 1 {
            knots.push(samples[i]);
            let turns = f
                .segment_turning_points(pts[i], pts[i + 1])
                .ok_or(Error::NotPiecewiseMonotone { t: times[i] })?;
            for s in turns {
                let t = times[i] + s * (times[i + 1] - times[i]);
                if t > times[i] && t < times[i + 1] {
                    knots.push(knot(t, pts[i].lerp(pts[i + 1], s)));
                }
            }
        }
        knots.push(*samples.last().unwrap());
        let breakpoints = [Family::Zero, Family::One].map(|fam| breakpoints(&knots, fam));
        Ok(Self {
            foliation: f.clone(),
            signal: u.clone(),
            samples,
            knots,
            breakpoints,
        })
    }

    pub fn foliation(&self) -> &FoliationPair {
        &self.foliation
    }

    pub fn signal(&self) -> &Signal2D {
        &self.signal
    }

    /// Values at the input timestamps.
    pub fn samples(&self) -> &[Knot] {
        &self.samples
    }

    /// Samples plus interior turning points, in time order.
    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// Times where `channel` changes direction.
    pub fn breakpoints(&self, channel: Family) -> &[f64] {
        &self.breakpoints[channel.index()]
    }

    pub fn start(&self) -> f64 {
        self.signal.start()
    }

    pub fn end(&self) -> f64 {
        self.signal.end()
    }

    pub fn point(&self, t: f64) -> Point2 {
        self.signal.at(t)
    }

    pub fn k(&self, channel: Family, t: f64) -> f64 {
        self.foliation.field(channel, self.signal.at(t))
    }

    pub fn at(&self, t: f64) -> Knot {
        let p = self.foliation.params(self.signal.at(t));
        Knot { t, k0: p.c0, k1: p.c1 }
    }
}

/// Direction changes of one channel; flat stretches keep the earlier direction.
fn breakpoints(knots: &[Knot], channel: Family) -> Vec<f64> {
    let mut out = Vec::new();
    let mut dir = 0.0;
    for w in knots.windows(2) {
        let d = w[1].k(channel) - w[0].k(channel);
        if d == 0.0 {
            continue;
        }
        if dir != 0.0 && d.signum() != dir {
            out.push(w[0].t);
        }
        dir = d.signum();
    }
    out
}

pub fn reduce_signal(f: &FoliationPair, u: &Signal2D) -> Result<KSignals> {
    KSignals::new(f, u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayEvent {
    pub t: f64,
    /// Value after the switch.
    pub value: bool,
}

/// One relay's output over a trace: initial value plus switching events.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayState {
    pub pair: ParamPair,
    pub initial: bool,
    pub events: Vec<RelayEvent>,
}

impl RelayState {
    /// Final value.
    pub fn value(&self) -> bool {
        self.events.last().map_or(self.initial, |e| e.value)
    }

    /// Right-continuous value at `t`.
    pub fn value_at(&self, t: f64) -> bool {
        self.events
            .iter()
            .rev()
            .find(|e| e.t <= t)
            .map_or(self.initial, |e| e.value)
    }

    /// Left limit at `t`.
    pub fn left_limit(&self, t: f64) -> bool {
        self.events
            .iter()
            .rev()
            .find(|e| e.t < t)
            .map_or(self.initial, |e| e.value)
    }
}

fn require_admissible(f: &FoliationPair, p: ParamPair) -> Result<()> {
    if f.is_admissible(p) {
        Ok(())
    } else {
        Err(Error::NotAdmissible { c0: p.c0, c1: p.c1 })
    }
}

/// Initial relay value at `x0`; `xi` applies inside both sets.
pub fn relay_init(f: &FoliationPair, p: ParamPair, x0: Point2, xi: bool) -> Result<bool> {
    require_admissible(f, p)?;
    if !f.domain().contains(x0) {
        return Err(Error::OutsideDomain { x1: x0.x1, x2: x0.x2 });
    }
    init_value(f, p, x0, xi)
}

fn init_value(f: &FoliationPair, p: ParamPair, x0: Point2, xi: bool) -> Result<bool> {
    let out0 = !f.in_set(Family::Zero, p.c0, x0);
    let out1 = !f.in_set(Family::One, p.c1, x0);
    match (out0, out1) {
        (true, true) => Err(Error::AmbiguousInitialization { c0: p.c0, c1: p.c1 }),
        (true, false) => Ok(true),
        (false, true) => Ok(false),
        (false, false) => Ok(xi),
    }
}

/// Geometric simulation: the relay switches to 1 when `u` leaves `D0(c0)`
/// and to 0 when it leaves `D1(c1)`. Touching a curve counts as leaving.
pub fn relay_trace_exit(f: &FoliationPair, p: ParamPair, u: &Signal2D, xi: bool) -> Result<RelayState> {
    require_admissible(f, p)?;
    let gap = f.curve_gap(p)?;
    if gap < f.min_gap() {
        return Err(Error::DegenerateGap { c0: p.c0, c1: p.c1, gap, min_gap: f.min_gap() });
    }
    u.check_domain(f.domain())?;
    let initial = init_value(f, p, u.points()[0], xi)?;
    let times = u.times();
    let pts = u.points();
    let mut value = initial;
    let mut events = Vec::new();
    let mut t_cur = u.start();
    for i in 0..u.len() - 1 {
        let (ta, tb) = (times[i], times[i + 1]);
        let turns = f
            .segment_turning_points(pts[i], pts[i + 1])
            .ok_or(Error::NotPiecewiseMonotone { t: ta })?;
        let mut probes: Vec<f64> = turns.iter().map(|s| ta + s * (tb - ta)).collect();
        probes.extend((1..EXIT_SUBSTEPS).map(|k| ta + (tb - ta) * k as f64 / EXIT_SUBSTEPS as f64));
        probes.push(tb);
        probes.sort_by(f64::total_cmp);
        loop {
            // the set being watched is the one whose exit flips the value
            let (family, level) = if value { (Family::One, p.c1) } else { (Family::Zero, p.c0) };
            let outside = |t: f64| !f.in_set(family, level, u.at(t));
            let mut prev = t_cur.max(ta);
            let mut hit = None;
            for &q in &probes {
                if q <= prev {
                    continue;
                }
                if outside(q) {
                    hit = Some(bisect_first(prev, q, outside));
                    break;
                }
                prev = q;
            }
            match hit {
                Some(t) => {
                    value = !value;
                    events.push(RelayEvent { t, value });
                    t_cur = t;
                }
                None => break,
            }
        }
        t_cur = t_cur.max(tb);
    }
    Ok(RelayState { pair: p, initial, events })
}

/// Initial value under threshold semantics.
pub(crate) fn forced_initial(k: &KSignals, p: ParamPair, init: bool) -> Result<bool> {
    let k0 = k.knots()[0];
    match (k0.k0 >= p.c0, k0.k1 >= p.c1) {
        (true, true) => Err(Error::AdmissibilityViolation { t: k0.t, c0: p.c0, c1: p.c1 }),
        (true, false) => Ok(true),
        (false, true) => Ok(false),
        (false, false) => Ok(init),
    }
}

/// Next switching time of a relay holding `on` on the monotone piece
/// `[a, b]` of `k`, searching from `from`.
pub(crate) fn next_switch(k: &KSignals, a: &Knot, b: &Knot, from: f64, on: bool, p: ParamPair) -> Result<Option<f64>> {
    let (channel, level) = if on { (Family::One, p.c1) } else { (Family::Zero, p.c0) };
    if b.k(channel) < level {
        return Ok(None);
    }
    let start = if from <= a.t { a.k(channel) } else { k.k(channel, from) };
    if start >= level {
        return Err(Error::AdmissibilityViolation { t: from, c0: p.c0, c1: p.c1 });
    }
    Ok(Some(bisect_first(from.max(a.t), b.t, |t| k.k(channel, t) >= level)))
}

/// Threshold simulation on the reduced signals: switch to 1 when `K0`
/// reaches `c0`, to 0 when `K1` reaches `c1`.
pub fn relay_trace_threshold(k: &KSignals, p: ParamPair, init: bool) -> Result<RelayState> {
    let initial = forced_initial(k, p, init)?;
    let mut value = initial;
    let mut events = Vec::new();
    let knots = k.knots();
    let mut t_cur = knots[0].t;
    for w in knots.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.k0 > p.c0 && b.k1 > p.c1 {
            return Err(Error::AdmissibilityViolation { t: b.t, c0: p.c0, c1: p.c1 });
        }
        while let Some(t) = next_switch(k, a, b, t_cur.max(a.t), value, p)? {
            value = !value;
            events.push(RelayEvent { t, value });
            t_cur = t;
        }
    }
    Ok(RelayState { pair: p, initial, events })
}
