use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::foliation::{Family, FoliationPair, ParamPair};
use crate::plane::{InitialState, RelayGrid};
use crate::signal::Signal2D;

use super::transversal::{BoundCurve, TransversalCurve};

/// Below this `|J|` the weight cannot be recovered.
const SINGULAR_JACOBIAN: f64 = 1e-8;

/// Uniform nodes `s_min + m * h_s`, `m = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub s_min: f64,
    pub h_s: f64,
    pub n: usize,
}

impl Lattice {
    /// Largest lattice of spacing `h_s` inside `[s_min, s_max]`.
    pub fn covering(s_min: f64, s_max: f64, h_s: f64) -> Result<Self> {
        if !(h_s.is_finite() && h_s > 0.0) {
            return Err(Error::InvalidParameter(format!("h_s must be positive, got {h_s}")));
        }
        let n = ((s_max - s_min) / h_s + 1e-9).floor() as usize + 1;
        if n < 2 {
            return Err(Error::GridTooCoarse { nodes: n });
        }
        Ok(Self { s_min, h_s, n })
    }

    pub fn s(&self, m: usize) -> f64 {
        self.s_min + m as f64 * self.h_s
    }

    pub fn s_max(&self) -> f64 {
        self.s(self.n - 1)
    }

    /// Nearest node index, clamped.
    pub fn nearest(&self, s: f64) -> usize {
        (((s - self.s_min) / self.h_s).round().max(0.0) as usize).min(self.n - 1)
    }
}

/// Values on the nodes `(i, j)` with `j <= i`, row `i` indexing `s0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangle<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Clone> Triangle<T> {
    pub fn filled(n: usize, v: T) -> Self {
        Self { rows: (0..n).map(|i| vec![v.clone(); i + 1]).collect() }
    }
}

impl<T> Triangle<T> {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        self.rows.get(i).and_then(|r| r.get(j))
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.rows[i][j] = v;
    }

    /// `(i, j, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().enumerate().map(move |(j, v)| (i, j, v)))
    }
}

fn write_triangle<W: Write>(
    writer: W,
    lattice: &Lattice,
    name: &str,
    values: impl Iterator<Item = (usize, usize, Option<f64>)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["s0", "s1", name])?;
    for (i, j, v) in values {
        if let Some(v) = v {
            w.write_record([lattice.s(i).to_string(), lattice.s(j).to_string(), v.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

/// Measured `psi(s0, s1)`: output drop when a demagnetized model is
/// driven up to `s0` and back down to `s1` along the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSurface {
    pub lattice: Lattice,
    pub psi: Triangle<f64>,
}

impl TransitionSurface {
    pub fn psi(&self, i: usize, j: usize) -> Option<f64> {
        self.psi.get(i, j).copied()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_triangle(writer, &self.lattice, "psi", self.psi.iter().map(|(i, j, v)| (i, j, Some(*v))))
    }
}

/// Runs one up-down excursion per lattice row on copies of `model`.
pub fn measure_transition_surface(model: &RelayGrid, k: &BoundCurve, h_s: f64) -> Result<TransitionSurface> {
    let lattice = Lattice::covering(k.s_min(), k.s_max(), h_s)?;
    // lattice nodes plus interior vertices, so the straight segments of
    // the signal follow the polyline
    let mut stops: Vec<(f64, Option<usize>)> = (0..lattice.n).map(|m| (lattice.s(m), Some(m))).collect();
    for s in k.curve().vertex_s() {
        if s > lattice.s_min && s < lattice.s_max() && (0..lattice.n).all(|m| lattice.s(m) != s) {
            stops.push((s, None));
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));

    let rows = (0..lattice.n)
        .into_par_iter()
        .map(|i| excursion(model, k, &lattice, &stops, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionSurface { lattice, psi: Triangle { rows } })
}

fn excursion(model: &RelayGrid, k: &BoundCurve, lattice: &Lattice, stops: &[(f64, Option<usize>)], i: usize) -> Result<Vec<f64>> {
    if i == 0 {
        return Ok(vec![0.0]);
    }
    let top = stops.iter().position(|s| s.1 == Some(i)).unwrap();
    let s_min = lattice.s_min;
    let mut times = Vec::new();
    let mut points = Vec::new();
    let mut down_time = vec![0.0; i + 1];
    for &(s, _) in &stops[..=top] {
        times.push(s - s_min);
        points.push(k.point_at(s));
    }
    let peak = stops[top].0 - s_min;
    for &(s, m) in stops[..top].iter().rev() {
        let t = 2.0 * peak - (s - s_min);
        times.push(t);
        points.push(k.point_at(s));
        if let Some(m) = m {
            down_time[m] = t;
        }
    }
    let u = Signal2D::new(times, points)?;
    let mut grid = model.clone();
    grid.set_state(InitialState::AllZero)?;
    let out = grid.apply(&u)?;
    let at = |t: f64| {
        let idx = out.samples.partition_point(|r| r.0 <= t);
        out.samples[idx - 1].1
    };
    let h_top = at(peak);
    let mut row: Vec<f64> = down_time[..i].iter().map(|&t| h_top - at(t)).collect();
    row.push(0.0);
    Ok(row)
}

/// `Phi = -d2 psi / ds0 ds1` on the lattice nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiGrid {
    pub lattice: Lattice,
    pub phi: Triangle<Option<f64>>,
}

impl PhiGrid {
    pub fn phi(&self, i: usize, j: usize) -> Option<f64> {
        self.phi.get(i, j).copied().flatten()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_triangle(writer, &self.lattice, "phi", self.phi.iter().map(|(i, j, v)| (i, j, *v)))
    }
}

// first-derivative stencils (offset, coefficient), in order of preference
const STENCILS: [&[(isize, f64)]; 3] = [
    &[(-1, -0.5), (1, 0.5)],
    &[(0, -1.5), (1, 2.0), (2, -0.5)],
    &[(0, 1.5), (-1, -2.0), (-2, 0.5)],
];

/// Mixed second differences, central where the triangle allows and
/// one-sided otherwise. Nodes on the diagonal may be used.
pub fn extract_phi(surface: &TransitionSurface) -> Result<PhiGrid> {
    let lattice = surface.lattice;
    let n = lattice.n;
    if n < 3 {
        return Err(Error::GridTooCoarse { nodes: n });
    }
    let h2 = lattice.h_s * lattice.h_s;
    let node = |i: isize, j: isize| -> Option<f64> {
        if i < 0 || j < 0 || j > i {
            return None;
        }
        surface.psi(i as usize, j as usize)
    };
    let apply = |i: usize, j: usize, a: &[(isize, f64)], b: &[(isize, f64)]| -> Option<f64> {
        let mut acc = 0.0;
        for &(da, ca) in a {
            for &(db, cb) in b {
                acc += ca * cb * node(i as isize + da, j as isize + db)?;
            }
        }
        Some(-acc / h2)
    };
    let mut phi = Triangle::filled(n, None);
    for i in 0..n {
        for j in 0..=i {
            let v = STENCILS.iter().flat_map(|a| STENCILS.iter().map(move |b| (a, b))).find_map(|(a, b)| apply(i, j, a, b));
            phi.set(i, j, v);
        }
    }
    Ok(PhiGrid { lattice, phi })
}

/// `|dc0/ds (s0) * dc1/ds (s1)|` on the lattice nodes, by central
/// differences of step `h_s / 2`, one-sided at the ends.
pub fn jacobian_grid(f: &FoliationPair, k: &TransversalCurve, lattice: &Lattice) -> Result<Triangle<f64>> {
    let half = 0.5 * lattice.h_s;
    let (lo, hi) = (k.s_min(), k.s_max());
    let derivative = |family: Family, s: f64| {
        let c = |s: f64| f.field(family, k.point_at(s));
        let (a, b) = ((s - half).max(lo), (s + half).min(hi));
        (c(b) - c(a)) / (b - a)
    };
    let d0: Vec<f64> = (0..lattice.n).map(|m| derivative(Family::Zero, lattice.s(m))).collect();
    let d1: Vec<f64> = (0..lattice.n).map(|m| derivative(Family::One, lattice.s(m))).collect();
    let mut jac = Triangle::filled(lattice.n, 0.0);
    for i in 0..lattice.n {
        for j in 0..=i {
            let v = (d0[i] * d1[j]).abs();
            if !(v >= SINGULAR_JACOBIAN) {
                return Err(Error::SingularJacobian { s0: lattice.s(i), s1: lattice.s(j) });
            }
            jac.set(i, j, v);
        }
    }
    Ok(jac)
}

/// Recovered weight: `W = Phi / J` on the nodes and `w` resampled at the
/// model's cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredWeight {
    pub lattice: Lattice,
    pub nodes: Triangle<Option<f64>>,
    pub cells: Vec<(ParamPair, Option<f64>)>,
}

impl RecoveredWeight {
    /// Largest `|w - truth|` over the cells that received a value.
    pub fn max_error(&self, truth: impl Fn(f64, f64) -> f64) -> f64 {
        self.cells
            .iter()
            .filter_map(|(p, v)| v.map(|v| (v - truth(p.c0, p.c1)).abs()))
            .fold(0.0, f64::max)
    }

    pub fn write_nodes_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_triangle(writer, &self.lattice, "W", self.nodes.iter().map(|(i, j, v)| (i, j, *v)))
    }

    /// Writes `c0,c1,w` for the cells with a value.
    pub fn write_cells_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["c0", "c1", "w"])?;
        for (p, v) in &self.cells {
            if let Some(v) = v {
                w.write_record([p.c0.to_string(), p.c1.to_string(), v.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Divides by the Jacobian and maps back to `(c0, c1)`: bilinear inside
/// fully defined lattice squares, nearest defined node elsewhere.
pub fn recover_weight(phi: &PhiGrid, k: &BoundCurve, model: &RelayGrid) -> Result<RecoveredWeight> {
    let lattice = phi.lattice;
    let jac = jacobian_grid(k.foliation(), k.curve(), &lattice)?;
    let mut nodes = Triangle::filled(lattice.n, None);
    for (i, j, v) in phi.phi.iter() {
        nodes.set(i, j, v.map(|v| v / jac.get(i, j).unwrap()));
    }
    let at = |i: usize, j: usize| nodes.get(i, j).copied().flatten();
    let defined: Vec<(usize, usize, f64)> = nodes.iter().filter_map(|(i, j, v)| v.map(|v| (i, j, v))).collect();
    let cells = model
        .cells()
        .iter()
        .map(|c| {
            let (Some(s0), Some(s1)) = (k.s_for(Family::Zero, c.pair.c0), k.s_for(Family::One, c.pair.c1)) else {
                return (c.pair, None);
            };
            let u = (s0 - lattice.s_min) / lattice.h_s;
            let v = (s1 - lattice.s_min) / lattice.h_s;
            let top = (lattice.n - 2) as f64;
            let (i, j) = (u.floor().clamp(0.0, top) as usize, v.floor().clamp(0.0, top) as usize);
            let (fu, fv) = (u - i as f64, v - j as f64);
            if (0.0..=1.0).contains(&fu) && (0.0..=1.0).contains(&fv) {
                if let (Some(q00), Some(q10), Some(q01), Some(q11)) = (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)) {
                    let w = q00 * (1.0 - fu) * (1.0 - fv) + q10 * fu * (1.0 - fv) + q01 * (1.0 - fu) * fv + q11 * fu * fv;
                    return (c.pair, Some(w));
                }
            }
            let nearest = defined
                .iter()
                .min_by(|x, y| {
                    let dx = (x.0 as f64 - u).powi(2) + (x.1 as f64 - v).powi(2);
                    let dy = (y.0 as f64 - u).powi(2) + (y.1 as f64 - v).powi(2);
                    dx.total_cmp(&dy)
                })
                .map(|x| x.2);
            (c.pair, nearest)
        })
        .collect();
    Ok(RecoveredWeight { lattice, nodes, cells })
}
