//! Sampled checks of the ordering conditions a foliation pair must satisfy.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Family, FoliationPair, ParamPair};
use crate::geometry::Point2;

/// Levels per family used by the nesting checks.
pub const NESTING_LEVELS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Counterexample points, if any.
    pub witness: Vec<Point2>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = write!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            if !c.witness.is_empty() {
                let pts: Vec<String> = c.witness.iter().map(|p| format!("({}, {})", p.x1, p.x2)).collect();
                let _ = write!(out, " witness {}", pts.join(" "));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs every check. `transversal`, when given, is a polyline along which
/// the family-0 level must increase; pairs of its points are tested for the
/// admissibility ordering.
pub fn validate(f: &FoliationPair, seed: u64, transversal: Option<&[Point2]>) -> ValidationReport {
    let cover = f.domain().cover_points(f.sampling().cover);
    let mut checks = vec![
        totality(f, &cover),
        nesting(f, &cover, Family::Zero),
        nesting(f, &cover, Family::One),
        opposite_order(f, seed),
        admissibility_agreement(f),
    ];
    if let Some(k) = transversal {
        checks.push(transversal_order(f, k));
    }
    ValidationReport { checks }
}

fn totality(f: &FoliationPair, cover: &[Point2]) -> Check {
    let bad = cover.iter().find(|&&x| {
        let p = f.params(x);
        !p.c0.is_finite() || !p.c1.is_finite()
    });
    Check {
        name: "maps-total",
        passed: bad.is_none() && !cover.is_empty(),
        detail: format!("{} cover points evaluated", cover.len()),
        witness: bad.copied().into_iter().collect(),
    }
}

fn nesting(f: &FoliationPair, cover: &[Point2], family: Family) -> Check {
    let range = if family == Family::Zero { f.c0_range() } else { f.c1_range() };
    let name = if family == Family::Zero { "nested-family-0" } else { "nested-family-1" };
    let vals: Vec<f64> = cover.iter().map(|&x| f.field(family, x)).collect();
    let levels: Vec<f64> = (0..NESTING_LEVELS)
        .map(|k| range.lo + range.width() * k as f64 / (NESTING_LEVELS - 1) as f64)
        .collect();
    for w in levels.windows(2) {
        let (c, c2) = (w[0], w[1]);
        // D(c) must sit inside D(c2) ...
        if let Some(i) = (0..cover.len()).find(|&i| vals[i] < c && !(vals[i] < c2)) {
            return Check {
                name,
                passed: false,
                detail: format!("point of D({c}) outside D({c2})"),
                witness: vec![cover[i]],
            };
        }
        // ... and strictly
        if !vals.iter().any(|&v| v < c2 && !(v < c)) {
            return Check {
                name,
                passed: false,
                detail: format!("D({c}) and D({c2}) agree on every sampled point"),
                witness: Vec::new(),
            };
        }
    }
    Check {
        name,
        passed: true,
        detail: format!("{NESTING_LEVELS} levels over [{}, {}]", range.lo, range.hi),
        witness: Vec::new(),
    }
}

fn random_point(f: &FoliationPair, rng: &mut ChaCha8Rng) -> Point2 {
    let (lo, hi) = f.domain().bounding_box();
    loop {
        let x = Point2::new(rng.random_range(lo.x1..hi.x1), rng.random_range(lo.x2..hi.x2));
        if f.domain().contains(x) {
            return x;
        }
    }
}

fn opposite_order(f: &FoliationPair, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.sampling().random_pairs;
    for _ in 0..n {
        let x = random_point(f, &mut rng);
        let y = random_point(f, &mut rng);
        let (a, b) = (f.params(x), f.params(y));
        let d0 = a.c0 - b.c0;
        let d1 = a.c1 - b.c1;
        let prod = d0 * d1;
        let tie = 1e-12 * (1.0 + a.c0.abs().max(a.c1.abs()));
        let lopsided = prod == 0.0 && ((d0.abs() > tie) != (d1.abs() > tie));
        if prod > 0.0 || lopsided {
            return Check {
                name: "opposite-order",
                passed: false,
                detail: format!("c0 difference {d0} and c1 difference {d1} do not have opposite signs"),
                witness: vec![x, y],
            };
        }
    }
    Check {
        name: "opposite-order",
        passed: true,
        detail: format!("{n} random pairs"),
        witness: Vec::new(),
    }
}

fn admissibility_agreement(f: &FoliationPair) -> Check {
    if !f.is_builtin() {
        return Check {
            name: "admissibility-agreement",
            passed: true,
            detail: "skipped: no closed form for tabulated fields".into(),
            witness: Vec::new(),
        };
    }
    let (lo, hi) = f.domain().bounding_box();
    // the cover lattice cannot resolve slivers thinner than its spacing
    let margin = 2.0 * lo.distance(hi) / f.sampling().cover as f64;
    let n = 21;
    let (r0, r1) = (f.c0_range(), f.c1_range());
    let mut tested = 0;
    for i in 0..n {
        for j in 0..n {
            let p = ParamPair::new(
                r0.lo + r0.width() * i as f64 / (n - 1) as f64,
                r1.lo + r1.width() * j as f64 / (n - 1) as f64,
            );
            if f.admissibility_margin(p).is_some_and(|m| m < margin) {
                continue;
            }
            tested += 1;
            if f.is_admissible(p) != f.is_admissible_sampled(p) {
                return Check {
                    name: "admissibility-agreement",
                    passed: false,
                    detail: format!("closed form and cover check disagree at ({}, {})", p.c0, p.c1),
                    witness: Vec::new(),
                };
            }
        }
    }
    Check {
        name: "admissibility-agreement",
        passed: true,
        detail: format!("{tested} parameter pairs"),
        witness: Vec::new(),
    }
}

fn transversal_order(f: &FoliationPair, k: &[Point2]) -> Check {
    let pts = resample(k, 64);
    let mut tested = 0;
    for &p in &pts {
        for &q in &pts {
            if p == q {
                continue;
            }
            let pair = ParamPair::new(f.field(Family::Zero, p), f.field(Family::One, q));
            if !f.is_admissible(pair) {
                continue;
            }
            tested += 1;
            if !(f.field(Family::Zero, q) < pair.c0) {
                return Check {
                    name: "transversal-order",
                    passed: false,
                    detail: "admissible pair with out-of-order points".into(),
                    witness: vec![p, q],
                };
            }
        }
    }
    Check {
        name: "transversal-order",
        passed: true,
        detail: format!("{tested} admissible point pairs"),
        witness: Vec::new(),
    }
}

/// `n` points evenly spaced by arc length along a polyline.
fn resample(line: &[Point2], n: usize) -> Vec<Point2> {
    let lens: Vec<f64> = line.windows(2).map(|w| w[0].distance(w[1])).collect();
    let total: f64 = lens.iter().sum();
    if line.len() < 2 || total == 0.0 {
        return line.to_vec();
    }
    (0..n)
        .map(|i| {
            let mut s = total * i as f64 / (n - 1) as f64;
            for (k, &l) in lens.iter().enumerate() {
                if s <= l || k == lens.len() - 1 {
                    return line[k].lerp(line[k + 1], if l > 0.0 { (s / l).min(1.0) } else { 0.0 });
                }
                s -= l;
            }
            unreachable!()
        })
        .collect()
}
