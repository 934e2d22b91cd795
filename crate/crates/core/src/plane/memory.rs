//! Dominant reversal points and history reduction.

use crate::error::{Error, Result};
use crate::foliation::{Family, FoliationPair};
use crate::geometry::Point2;
use crate::relay::{KSignals, Knot};
use crate::signal::Signal2D;

/// A surviving local maximum of `K_family`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryEntry {
    pub family: Family,
    pub level: f64,
    pub t: f64,
    /// Set for the value at the end of the trace when the channel rises into it.
    pub terminal: bool,
}

/// The reduced memory of a trace: the alternating stack of dominant
/// reversals after wiping, plus the knots that follow the last of them.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryInterface {
    pub origin: Knot,
    pub entries: Vec<MemoryEntry>,
    pub trailing: Vec<Knot>,
}

impl MemoryInterface {
    pub fn levels(&self) -> Vec<(Family, f64)> {
        self.entries.iter().map(|e| (e.family, e.level)).collect()
    }
}

/// Local maxima of both channels in time order, plus terminal values of any
/// channel still rising at the end.
fn candidates(knots: &[Knot]) -> Vec<MemoryEntry> {
    let mut out = Vec::new();
    for family in [Family::Zero, Family::One] {
        let mut dir = 0.0;
        for w in knots.windows(2) {
            let d = w[1].k(family) - w[0].k(family);
            if d == 0.0 {
                continue;
            }
            if dir > 0.0 && d < 0.0 {
                out.push(MemoryEntry { family, level: w[0].k(family), t: w[0].t, terminal: false });
            }
            dir = d.signum();
        }
        if dir > 0.0 {
            let last = knots.last().unwrap();
            out.push(MemoryEntry { family, level: last.k(family), t: last.t, terminal: true });
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.family.cmp(&b.family)));
    out
}

/// Applies the wiping rule: a later maximum of the same channel at least as
/// high erases the earlier one together with the opposite reversal that
/// followed it, unless that reversal reaches beyond the starting point.
fn wipe(origin: &Knot, cands: Vec<MemoryEntry>) -> Vec<MemoryEntry> {
    let mut stack: Vec<MemoryEntry> = Vec::new();
    for e in cands {
        loop {
            let n = stack.len();
            if n >= 1 && stack[n - 1].family == e.family {
                // same channel twice in a row (only for non-opposite fields)
                if e.level >= stack[n - 1].level {
                    stack.pop();
                    continue;
                }
                break;
            }
            if n >= 2 && stack[n - 2].family == e.family && e.level >= stack[n - 2].level {
                let y = stack[n - 1];
                let before = if n >= 3 { stack[n - 3].level } else { origin.k(y.family) };
                if y.level <= before {
                    stack.truncate(n - 2);
                } else {
                    stack.remove(n - 2);
                }
                continue;
            }
            break;
        }
        stack.push(e);
    }
    stack
}

/// Dominant reversal points of the reduced signals.
pub fn dominant_reversals(k: &KSignals) -> Result<MemoryInterface> {
    let knots = k.knots();
    let origin = knots[0];
    let entries = wipe(&origin, candidates(knots));
    let after = entries.last().map_or(origin.t, |e| e.t);
    let trailing = knots.iter().copied().filter(|q| q.t > after).collect();
    Ok(MemoryInterface { origin, entries, trailing })
}

/// A shortest input with the same final relay configuration as `u`: it
/// starts at `u`'s start, visits the dominant reversal levels in order and
/// then the trailing knots.
///
/// Points are placed on the gradient line of `c0` through the start point,
/// so the result can leave the domain for strongly curved families; that
/// case is reported as an error.
pub fn reduce_history(u: &Signal2D, f: &FoliationPair) -> Result<Signal2D> {
    let k = KSignals::new(f, u)?;
    let mem = dominant_reversals(&k)?;
    let anchor = u.points()[0];
    let mut pts = vec![anchor];
    let place = |family: Family, level: f64| -> Result<Point2> {
        f.point_on_level(family, level, anchor)
            .filter(|x| f.domain().contains(*x))
            .ok_or(Error::ReductionOutsideDomain { level })
    };
    for e in &mem.entries {
        pts.push(place(e.family, e.level)?);
    }
    for q in &mem.trailing {
        pts.push(place(Family::Zero, q.k0)?);
    }
    let mut reduced = Signal2D::polyline(&pts);
    if matches!(reduced, Err(Error::InvalidSignal(_))) {
        // a constant history reduces to a single point
        reduced = Signal2D::new(vec![0.0, 1.0], vec![anchor, anchor]);
    }
    let reduced = reduced?;
    reduced.check_domain(f.domain())?;
    Ok(reduced)
}
