//! Total variation, modulus of continuity and the relay switching bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::foliation::{Family, FoliationPair, ParamPair};
use crate::relay::{bisect_first, relay_trace_exit, KSignals, RelayState};
use crate::signal::Signal2D;

/// Coarse window-start grid of the modulus search.
const OMEGA_GRID: usize = 1000;
/// Refinement rounds around the best coarse candidates.
const OMEGA_REFINE: usize = 20;
/// Flips a random switcher may make inside one free interval.
pub const MAX_FLIPS: usize = 6;

/// Variation of a 0/1 trace: its number of switches.
pub fn total_variation_relay(r: &RelayState) -> f64 {
    r.events.len() as f64
}

/// Arc length of the piecewise-linear input.
pub fn total_variation_signal(u: &Signal2D) -> f64 {
    u.points().windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// First time after `t1` at which `u` is at distance `delta` from `u(t1)`.
fn first_exit(u: &Signal2D, t1: f64, delta: f64) -> Option<f64> {
    let c = u.at(t1);
    let times = u.times();
    let pts = u.points();
    let d2 = delta * delta;
    for i in u.segment_index(t1)..u.len() - 1 {
        let (ta, tb) = (times[i].max(t1), times[i + 1]);
        if ta >= tb {
            continue;
        }
        let a = u.at(ta);
        let b = pts[i + 1];
        // |a + s (b - a) - c|^2 = delta^2 for s in [0, 1]
        let d = b - a;
        let w = a - c;
        let qa = d.norm_sq();
        let qb = 2.0 * d.dot(w);
        let qc = w.norm_sq() - d2;
        if qc >= 0.0 {
            return Some(ta);
        }
        if qa == 0.0 {
            continue;
        }
        // qc < 0, so exactly one root is positive
        let s = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
        if s <= 1.0 {
            return Some(ta + s * (tb - ta));
        }
    }
    None
}

/// `omega(u, delta)`: the largest `r` such that times closer than `r` map to
/// points closer than `delta`. Equals the duration when `u` never moves that
/// far.
pub fn modulus_of_continuity(u: &Signal2D, delta: f64) -> f64 {
    let total = u.duration();
    let window = |t1: f64| first_exit(u, t1, delta).map_or(f64::INFINITY, |t2| t2 - t1);
    let mut starts: Vec<f64> = (0..=OMEGA_GRID)
        .map(|i| u.start() + total * i as f64 / OMEGA_GRID as f64)
        .chain(u.times().iter().copied())
        .collect();
    starts.sort_by(f64::total_cmp);
    let mut scored: Vec<(f64, f64)> = starts.iter().map(|&t| (window(t), t)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0].0;
    if !best.is_finite() {
        return total;
    }
    let step = total / OMEGA_GRID as f64;
    for &(_, t) in scored.iter().take(8) {
        let (mut lo, mut hi) = ((t - step).max(u.start()), (t + step).min(u.end()));
        for _ in 0..OMEGA_REFINE {
            let probes: Vec<(f64, f64)> = (0..=4)
                .map(|k| lo + (hi - lo) * k as f64 / 4.0)
                .map(|s| (window(s), s))
                .collect();
            let &(v, s) = probes.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
            best = best.min(v);
            let half = 0.25 * (hi - lo);
            lo = (s - half).max(u.start());
            hi = (s + half).min(u.end());
        }
    }
    best.min(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationReport {
    pub v_relay: f64,
    pub v_input: f64,
    pub omega: f64,
    pub delta: f64,
    pub duration: f64,
    pub bound_31: f64,
    pub bound_32: f64,
    pub satisfied_31: bool,
    pub satisfied_32: bool,
}

impl VariationReport {
    pub fn csv_header() -> &'static str {
        "v_relay,v_input,omega,delta,duration,bound_31,bound_32,satisfied_31,satisfied_32"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.v_relay,
            self.v_input,
            self.omega,
            self.delta,
            self.duration,
            self.bound_31,
            self.bound_32,
            self.satisfied_31,
            self.satisfied_32
        )
    }

    pub fn render(&self) -> String {
        format!(
            "v_relay = {}\nv_input = {}\nomega = {}\ndelta = {}\nduration = {}\nbound_31 = {}\nbound_32 = {}\nsatisfied_31 = {}\nsatisfied_32 = {}\n",
            self.v_relay,
            self.v_input,
            self.omega,
            self.delta,
            self.duration,
            self.bound_31,
            self.bound_32,
            self.satisfied_31,
            self.satisfied_32
        )
    }
}

/// Relay variation against the modulus bound `T / omega + 1` and the input
/// variation bound `V(u) / delta`, with `delta` the curve gap.
pub fn check_bounds(f: &FoliationPair, p: ParamPair, u: &Signal2D, xi: bool) -> Result<VariationReport> {
    let relay = relay_trace_exit(f, p, u, xi)?;
    let delta = f.curve_gap(p)?;
    let v_relay = total_variation_relay(&relay);
    let v_input = total_variation_signal(u);
    let duration = u.duration();
    let omega = if delta.is_finite() { modulus_of_continuity(u, delta) } else { duration };
    let bound_31 = duration / omega + 1.0;
    let bound_32 = v_input / delta;
    Ok(VariationReport {
        v_relay,
        v_input,
        omega,
        delta,
        duration,
        bound_31,
        bound_32,
        satisfied_31: v_relay <= bound_31,
        satisfied_32: v_relay <= bound_32,
    })
}

/// What a constrained switcher must do on a stretch of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `u` outside the closure of `D0`: value 1.
    One,
    /// `u` outside the closure of `D1`: value 0.
    Zero,
    Free,
}

/// Maximal time intervals of constant constraint, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub intervals: Vec<(f64, f64, Constraint)>,
    /// Value forced at the start by the supplied initial state, if any.
    pub initial: Option<bool>,
}

pub fn skeleton(k: &KSignals, p: ParamPair, xi: bool) -> Skeleton {
    let knots = k.knots();
    let mut cuts = vec![knots[0].t];
    for w in knots.windows(2) {
        for (family, level) in [(Family::Zero, p.c0), (Family::One, p.c1)] {
            let (a, b) = (w[0].k(family), w[1].k(family));
            if (a - level) * (b - level) < 0.0 {
                let rising = b > a;
                let above = |t: f64| (k.k(family, t) > level) == rising;
                cuts.push(bisect_first(w[0].t, w[1].t, above));
            }
        }
        cuts.push(w[1].t);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let classify = |t: f64| {
        let q = k.at(t);
        if q.k0 > p.c0 {
            Constraint::One
        } else if q.k1 > p.c1 {
            Constraint::Zero
        } else {
            Constraint::Free
        }
    };
    let mut intervals: Vec<(f64, f64, Constraint)> = Vec::new();
    for w in cuts.windows(2) {
        let c = classify(0.5 * (w[0] + w[1]));
        match intervals.last_mut() {
            Some(last) if last.2 == c => last.1 = w[1],
            _ => intervals.push((w[0], w[1], c)),
        }
    }
    if intervals.is_empty() {
        let t = knots[0].t;
        intervals.push((t, t, classify(t)));
    }
    let start = knots[0];
    let initial = (start.k0 < p.c0 && start.k1 < p.c1).then_some(xi);
    Skeleton { intervals, initial }
}

/// Switch count of a piecewise-constant trace given as consecutive values.
fn switches(values: &[bool]) -> usize {
    values.windows(2).filter(|w| w[0] != w[1]).count()
}

/// A random switcher honouring the skeleton, as its sequence of values.
fn random_switcher(sk: &Skeleton, rng: &mut impl Rng) -> Vec<bool> {
    let mut out = Vec::new();
    for (idx, &(_, _, c)) in sk.intervals.iter().enumerate() {
        match c {
            Constraint::One => out.push(true),
            Constraint::Zero => out.push(false),
            Constraint::Free => {
                let mut v = match (idx, sk.initial) {
                    (0, Some(xi)) => xi,
                    _ => rng.random(),
                };
                out.push(v);
                // flip times only matter through their count
                for _ in 0..rng.random_range(0..=MAX_FLIPS) {
                    v = !v;
                    out.push(v);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityReport {
    pub relay_variation: usize,
    pub trials: usize,
    pub min_candidate_variation: usize,
    /// Values of the first candidate found below the relay, if any.
    pub counterexample: Option<Vec<bool>>,
}

impl MinimalityReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Compares the relay's variation with `trials` random switchers obeying
/// the same forcing constraints. The relay itself is candidate 0.
///
/// Trial `i` draws from stream `i` of a ChaCha generator seeded with `seed`,
/// so results do not depend on scheduling.
pub fn minimality_probe(f: &FoliationPair, p: ParamPair, u: &Signal2D, xi: bool, trials: usize, seed: u64) -> Result<MinimalityReport> {
    let relay = relay_trace_exit(f, p, u, xi)?;
    let k = KSignals::new(f, u)?;
    let sk = skeleton(&k, p, xi);
    let relay_variation = relay.events.len();
    let results: Vec<(usize, Vec<bool>)> = (1..trials.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let cand = random_switcher(&sk, &mut rng);
            (switches(&cand), cand)
        })
        .collect();
    let min_candidate_variation = results.iter().map(|r| r.0).chain([relay_variation]).min().unwrap();
    let counterexample = results.into_iter().find(|r| r.0 < relay_variation).map(|r| r.1);
    Ok(MinimalityReport { relay_variation, trials: trials.max(1), min_candidate_variation, counterexample })
}
