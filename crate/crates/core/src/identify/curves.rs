use std::io::Write;

use crate::error::{Error, Result};
use crate::foliation::Family;
use crate::geometry::Point2;
use crate::plane::{RelayGrid, WeightFunction};
use crate::MAX_BISECTIONS;

use super::surface::{extract_phi, measure_transition_surface, Lattice, PhiGrid};
use super::transversal::TransversalCurve;

/// One member `k_xi` of a family of transversals.
#[derive(Debug, Clone)]
pub struct TaggedCurve {
    pub xi: f64,
    pub curve: TransversalCurve,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRecoveryConfig {
    pub h_s: f64,
    /// Bisection tolerance in arc length.
    pub tol: f64,
    /// Slice `s1` used for family 0 levels; the middle node if unset.
    pub s1_ref: Option<f64>,
    /// Slice `s0` used for family 1 levels; the middle node if unset.
    pub s0_ref: Option<f64>,
}

impl Default for CurveRecoveryConfig {
    fn default() -> Self {
        Self { h_s: 0.05, tol: 1e-3, s1_ref: None, s0_ref: None }
    }
}

/// Points recovered on one level curve, one per transversal.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCloud {
    pub family: Family,
    pub level: f64,
    /// `(xi, s, point)`.
    pub points: Vec<(f64, f64, Point2)>,
}

impl LevelCloud {
    /// Range of the recovered arc lengths across the family.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
        if self.points.is_empty() { 0.0 } else { hi - lo }
    }
}

/// A level that could not be placed on one transversal.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedLevel {
    pub xi: f64,
    pub family: Family,
    pub level: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveRecovery {
    pub gamma0: Vec<LevelCloud>,
    pub gamma1: Vec<LevelCloud>,
    pub skipped: Vec<SkippedLevel>,
}

impl CurveRecovery {
    pub fn clouds(&self, family: Family) -> &[LevelCloud] {
        match family {
            Family::Zero => &self.gamma0,
            Family::One => &self.gamma1,
        }
    }

    /// Writes `s_level,xi,x1,x2` for one family.
    pub fn write_csv<W: Write>(&self, family: Family, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["s_level", "xi", "x1", "x2"])?;
        for cloud in self.clouds(family) {
            for (xi, _, p) in &cloud.points {
                w.write_record([cloud.level.to_string(), xi.to_string(), p.x1.to_string(), p.x2.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Recovers points of the requested level curves with a known weight.
///
/// Each transversal is parametrized so that `c0 = s0` and
/// `c1 = offset - s1` along it, `offset` being the foliation's constant
/// (zero when it has none). Then `Phi(s, s1_ref) = w(c0, offset - s1_ref)`
/// locates `gamma0(c0)` on the slice, and symmetrically for family 1.
pub fn recover_curves(
    model: &RelayGrid,
    curves: &[TaggedCurve],
    w: &WeightFunction,
    levels0: &[f64],
    levels1: &[f64],
    cfg: &CurveRecoveryConfig,
) -> Result<CurveRecovery> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", cfg.tol)));
    }
    let offset = model.foliation().c1_offset().unwrap_or(0.0);
    let mut out = CurveRecovery {
        gamma0: levels0.iter().map(|&level| LevelCloud { family: Family::Zero, level, points: vec![] }).collect(),
        gamma1: levels1.iter().map(|&level| LevelCloud { family: Family::One, level, points: vec![] }).collect(),
        skipped: vec![],
    };
    for tc in curves {
        let bound = tc.curve.bind(model.foliation())?;
        let phi = extract_phi(&measure_transition_surface(model, &bound, cfg.h_s)?)?;
        let lat = phi.lattice;
        let mid = lat.n / 2;
        let j_ref = cfg.s1_ref.map_or(mid, |s| lat.nearest(s));
        let i_ref = cfg.s0_ref.map_or(mid, |s| lat.nearest(s));
        let (s1_ref, s0_ref) = (lat.s(j_ref), lat.s(i_ref));

        for (family, levels) in [(Family::Zero, levels0), (Family::One, levels1)] {
            for (idx, &level) in levels.iter().enumerate() {
                let found = match family {
                    Family::Zero => {
                        let target = w.eval(level, offset - s1_ref);
                        let g = |s: f64| column(&phi, j_ref, s);
                        solve(g, s1_ref, lat.s_max(), target, tc.xi, level, cfg)
                    }
                    Family::One => {
                        let target = w.eval(s0_ref, level);
                        let g = |s: f64| row(&phi, i_ref, s);
                        solve(g, lat.s_min, s0_ref, target, tc.xi, level, cfg)
                    }
                };
                match found {
                    Ok(s) => {
                        let cloud = match family {
                            Family::Zero => &mut out.gamma0[idx],
                            Family::One => &mut out.gamma1[idx],
                        };
                        cloud.points.push((tc.xi, s, tc.curve.point_at(s)));
                    }
                    Err(error @ (Error::NoRoot { .. } | Error::AmbiguousRoot { .. })) => {
                        out.skipped.push(SkippedLevel { xi: tc.xi, family, level, error })
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(out)
}

fn lerp_nodes(lat: &Lattice, s: f64, value: impl Fn(usize) -> Option<f64>) -> Option<f64> {
    let u = ((s - lat.s_min) / lat.h_s).clamp(0.0, (lat.n - 1) as f64);
    let m = (u.floor() as usize).min(lat.n - 2);
    let f = u - m as f64;
    match (value(m), value(m + 1)) {
        (Some(a), Some(b)) => Some(a + f * (b - a)),
        (Some(a), None) if f == 0.0 => Some(a),
        (None, Some(b)) if f == 1.0 => Some(b),
        _ => None,
    }
}

// Phi(s, s1) along a fixed column j
fn column(phi: &PhiGrid, j: usize, s: f64) -> Option<f64> {
    lerp_nodes(&phi.lattice, s, |i| phi.phi(i, j))
}

// Phi(s0, s) along a fixed row i
fn row(phi: &PhiGrid, i: usize, s: f64) -> Option<f64> {
    lerp_nodes(&phi.lattice, s, |j| phi.phi(i, j))
}

/// Scans `[lo, hi]` at a tenth of the lattice step for sign changes of
/// `g - target`; exactly one bracket is refined by bisection.
fn solve(
    g: impl Fn(f64) -> Option<f64>,
    lo: f64,
    hi: f64,
    target: f64,
    xi: f64,
    level: f64,
    cfg: &CurveRecoveryConfig,
) -> Result<f64> {
    let steps = (((hi - lo) / (cfg.h_s / 10.0)).ceil() as usize).max(1);
    let at = |m: usize| lo + (hi - lo) * m as f64 / steps as f64;
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for m in 0..=steps {
        let s = at(m);
        let Some(v) = g(s).map(|v| v - target) else {
            prev = None;
            continue;
        };
        if v == 0.0 {
            // a run of exact zeros is one root
            if prev.is_none_or(|p| p.1 != 0.0) {
                brackets.push((s, s));
            }
        } else if let Some((sp, vp)) = prev {
            if vp != 0.0 && (vp < 0.0) != (v < 0.0) {
                brackets.push((sp, s));
            }
        }
        prev = Some((s, v));
    }
    match brackets.len() {
        0 => return Err(Error::NoRoot { xi, level }),
        1 => {}
        n => return Err(Error::AmbiguousRoot { xi, level, brackets: n }),
    }
    let (mut a, mut b) = brackets[0];
    let sign_a = g(a).map_or(0.0, |v| v - target) < 0.0;
    for _ in 0..MAX_BISECTIONS {
        if b - a <= cfg.tol {
            break;
        }
        let mid = 0.5 * (a + b);
        match g(mid).map(|v| v - target) {
            Some(v) if v == 0.0 => return Ok(mid),
            Some(v) if (v < 0.0) == sign_a => a = mid,
            _ => b = mid,
        }
    }
    Ok(0.5 * (a + b))
}
