//! The superposed operator: a midpoint-rule grid of weighted relays over the
//! admissible parameter region.

mod memory;

use std::io::{Read, Write};

use rayon::prelude::*;

pub use memory::{dominant_reversals, reduce_history, MemoryEntry, MemoryInterface};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::GridField;
use crate::foliation::{FoliationPair, ParamPair, ParamRange};
use crate::relay::{relay_trace_threshold, KSignals, RelayEvent};
use crate::signal::Signal2D;

/// Weight density `w(c0, c1)` on the parameter plane.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    Constant(f64),
    /// Expression in the variables `c0` and `c1`.
    ClosedForm(Expr),
    /// Bilinear interpolation of values indexed by `(c0, c1)`.
    Grid(GridField),
}

impl WeightFunction {
    pub fn expression(src: &str) -> Result<Self> {
        Ok(WeightFunction::ClosedForm(Expr::parse(src, ["c0", "c1"])?))
    }

    pub fn eval(&self, c0: f64, c1: f64) -> f64 {
        match self {
            WeightFunction::Constant(v) => *v,
            WeightFunction::ClosedForm(e) => e.eval(c0, c1),
            WeightFunction::Grid(g) => g.eval(c0, c1),
        }
    }
}

/// Initial relay values of a new grid.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    AllZero,
    AllOne,
    /// One value per retained cell, in grid order.
    PerCell(Vec<bool>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub pair: ParamPair,
    pub area: f64,
    pub weight: f64,
    pub state: bool,
}

impl Cell {
    fn contribution(&self) -> f64 {
        if self.state {
            self.weight * self.area
        } else {
            0.0
        }
    }
}

/// Output trace `(t, H)` of one `apply` call.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisOutput {
    pub samples: Vec<(f64, f64)>,
    pub h: f64,
    pub cells: usize,
    pub events: usize,
}

impl HysteresisOutput {
    pub fn final_value(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.1)
    }

    pub fn initial_value(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.1)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "H"])?;
        for (t, v) in &self.samples {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Switching events of the last `apply`, per cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellEvents {
    pub cell: usize,
    pub events: Vec<RelayEvent>,
}

#[derive(Debug, Clone)]
pub struct RelayGrid {
    foliation: FoliationPair,
    h: f64,
    cells: Vec<Cell>,
}

/// Cell centers along one parameter axis: `floor(width / h)` cells of size `h`
/// from the lower end, or the midpoint alone when `h` exceeds the width.
fn axis_centers(r: ParamRange, h: f64) -> Vec<f64> {
    let n = (r.width() / h + 1e-9).floor() as usize;
    if n == 0 {
        return vec![0.5 * (r.lo + r.hi)];
    }
    (0..n).map(|i| r.lo + (i as f64 + 0.5) * h).collect()
}

impl RelayGrid {
    /// Midpoint cells of spacing `h` whose centers are admissible with curve
    /// gap at least the foliation's `min_gap`.
    pub fn build(f: &FoliationPair, w: &WeightFunction, h: f64, i0: InitialState) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("h must be positive, got {h}")));
        }
        let mut cells = Vec::new();
        for &c1 in &axis_centers(f.c1_range(), h) {
            for &c0 in &axis_centers(f.c0_range(), h) {
                let pair = ParamPair::new(c0, c1);
                if !f.is_admissible(pair) || f.curve_gap(pair)? < f.min_gap() {
                    continue;
                }
                let weight = w.eval(c0, c1);
                if !weight.is_finite() {
                    return Err(Error::InvalidWeight(format!("weight is not finite at ({c0}, {c1})")));
                }
                cells.push(Cell { pair, area: h * h, weight, state: false });
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyRegion { h });
        }
        let mut grid = Self { foliation: f.clone(), h, cells };
        grid.set_state(i0)?;
        Ok(grid)
    }

    pub fn foliation(&self) -> &FoliationPair {
        &self.foliation
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn states(&self) -> Vec<bool> {
        self.cells.iter().map(|c| c.state).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// Current output `sum w * area * state`.
    pub fn value(&self) -> f64 {
        self.cells.iter().map(Cell::contribution).sum()
    }

    pub fn set_state(&mut self, i0: InitialState) -> Result<()> {
        match i0 {
            InitialState::AllZero => self.cells.iter_mut().for_each(|c| c.state = false),
            InitialState::AllOne => self.cells.iter_mut().for_each(|c| c.state = true),
            InitialState::PerCell(v) => {
                if v.len() != self.cells.len() {
                    return Err(Error::InvalidGrid(format!(
                        "{} initial values for {} cells",
                        v.len(),
                        self.cells.len()
                    )));
                }
                for (c, s) in self.cells.iter_mut().zip(v) {
                    c.state = s;
                }
            }
        }
        Ok(())
    }

    /// Replaces every cell weight by `w` at the cell center.
    pub fn set_weight(&mut self, w: &WeightFunction) -> Result<()> {
        for c in &mut self.cells {
            let v = w.eval(c.pair.c0, c.pair.c1);
            if !v.is_finite() {
                return Err(Error::InvalidWeight(format!("weight is not finite at ({}, {})", c.pair.c0, c.pair.c1)));
            }
            c.weight = v;
        }
        Ok(())
    }

    /// Drives every relay with `u`; the grid keeps its end state.
    pub fn apply(&mut self, u: &Signal2D) -> Result<HysteresisOutput> {
        let k = KSignals::new(&self.foliation, u)?;
        self.apply_reduced(&k).map(|(out, _)| out)
    }

    /// As [`apply`](Self::apply), on precomputed reduced signals, also
    /// returning the per-cell events.
    pub fn apply_reduced(&mut self, k: &KSignals) -> Result<(HysteresisOutput, Vec<CellEvents>)> {
        let traces = self
            .cells
            .par_iter()
            .map(|c| relay_trace_threshold(k, c.pair, c.state))
            .collect::<Result<Vec<_>>>()?;

        for (c, r) in self.cells.iter_mut().zip(&traces) {
            c.state = r.initial;
        }
        let mut value = self.value();
        let mut events: Vec<(f64, usize, bool)> = traces
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.events.iter().map(move |e| (e.t, i, e.value)))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let times = k.signal().times();
        let mut samples = Vec::with_capacity(times.len() + events.len());
        let mut ev = events.iter().peekable();
        for &t in times {
            while let Some(&&(te, i, v)) = ev.peek() {
                if te > t {
                    break;
                }
                let c = &mut self.cells[i];
                value -= c.contribution();
                c.state = v;
                value += c.contribution();
                samples.push((te, value));
                ev.next();
            }
            samples.push((t, value));
        }
        let per_cell = traces
            .into_iter()
            .enumerate()
            .filter(|(_, r)| !r.events.is_empty())
            .map(|(cell, r)| CellEvents { cell, events: r.events })
            .collect();
        Ok((
            HysteresisOutput { samples, h: self.h, cells: self.cells.len(), events: events.len() },
            per_cell,
        ))
    }

    /// Writes `c0,c1,area,weight,state`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["c0", "c1", "area", "weight", "state"])?;
        for c in &self.cells {
            w.write_record([
                c.pair.c0.to_string(),
                c.pair.c1.to_string(),
                c.area.to_string(),
                c.weight.to_string(),
                (c.state as u8).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    /// Reads a grid written by [`write_csv`](Self::write_csv); `h` is taken
    /// from the first cell's area.
    pub fn read_csv<R: Read>(f: &FoliationPair, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers != ["c0", "c1", "area", "weight", "state"] {
            return Err(Error::Csv(format!(
                "expected header c0,c1,area,weight,state, found {}",
                headers.join(",")
            )));
        }
        let mut cells = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                let s = rec.get(k).unwrap_or("");
                s.parse::<f64>().map_err(|_| Error::Csv(format!("row {}: bad number `{s}`", line + 2)))
            };
            let state = match rec.get(4) {
                Some("0") => false,
                Some("1") => true,
                other => return Err(Error::Csv(format!("row {}: bad state {:?}", line + 2, other))),
            };
            let pair = ParamPair::new(num(0)?, num(1)?);
            if !f.is_admissible(pair) {
                return Err(Error::InvalidGrid(format!("cell ({}, {}) is not admissible", pair.c0, pair.c1)));
            }
            cells.push(Cell { pair, area: num(2)?, weight: num(3)?, state });
        }
        let first = cells.first().ok_or(Error::InvalidGrid("grid file has no cells".into()))?;
        let h = first.area.sqrt();
        Ok(Self { foliation: f.clone(), h, cells })
    }
}

#[cfg(test)]
mod tests;
