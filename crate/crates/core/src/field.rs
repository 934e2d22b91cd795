//! Scalar fields on the plane: closed-form expressions or bilinear grids.

use std::io::Read;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Values on a regular lattice, bilinearly interpolated.
///
/// Queries outside the lattice are clamped to its border.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // row-major: values[j * xs.len() + i] sits at (xs[i], ys[j])
    values: Vec<f64>,
}

impl GridField {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::InvalidFoliation(
                "grid needs at least two nodes per axis".into(),
            ));
        }
        if values.len() != xs.len() * ys.len() {
            return Err(Error::InvalidFoliation(format!(
                "grid has {} values for {}x{} nodes",
                values.len(),
                xs.len(),
                ys.len()
            )));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&xs) || !increasing(&ys) {
            return Err(Error::InvalidFoliation("grid axes must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFoliation("grid values must be finite".into()));
        }
        Ok(Self { xs, ys, values })
    }

    /// Tabulates `f` on an `nx` by `ny` lattice spanning the given box.
    pub fn tabulate(
        (x_lo, x_hi): (f64, f64),
        (y_lo, y_hi): (f64, f64),
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        let xs = axis(x_lo, x_hi, nx.max(2));
        let ys = axis(y_lo, y_hi, ny.max(2));
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for &y in &ys {
            for &x in &xs {
                values.push(f(x, y));
            }
        }
        Self::new(xs, ys, values)
    }

    /// Reads long-format CSV (`x,y,value` per row, any header names) whose
    /// rows cover a full rectangular lattice.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Csv(format!("expected 3 columns, found {}", rec.len())));
            }
            let mut v = [0.0; 3];
            for (k, field) in rec.iter().enumerate() {
                v[k] = field
                    .parse::<f64>()
                    .map_err(|_| Error::Csv(format!("bad number `{field}`")))?;
            }
            rows.push(v);
        }
        let axis = |k: usize| {
            let mut a: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        };
        let xs = axis(0);
        let ys = axis(1);
        if rows.len() != xs.len() * ys.len() {
            return Err(Error::Csv("grid rows do not form a full lattice".into()));
        }
        let mut values = vec![f64::NAN; xs.len() * ys.len()];
        for r in &rows {
            let i = xs.partition_point(|&x| x < r[0]);
            let j = ys.partition_point(|&y| y < r[1]);
            values[j * xs.len() + i] = r[2];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Csv("grid has duplicate nodes".into()));
        }
        Self::new(xs, ys, values)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (i, tx) = locate(&self.xs, x);
        let (j, ty) = locate(&self.ys, y);
        let nx = self.xs.len();
        let v = |i: usize, j: usize| self.values[j * nx + i];
        let bottom = v(i, j) * (1.0 - tx) + v(i + 1, j) * tx;
        let top = v(i, j + 1) * (1.0 - tx) + v(i + 1, j + 1) * tx;
        bottom * (1.0 - ty) + top * ty
    }
}

/// Cell index and local coordinate in [0, 1], clamped to the axis span.
fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let last = axis.len() - 2;
    let i = axis.partition_point(|&a| a <= x).saturating_sub(1).min(last);
    let t = (x - axis[i]) / (axis[i + 1] - axis[i]);
    (i, t.clamp(0.0, 1.0))
}

/// A total scalar map of two variables.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Expr(Expr),
    Grid(GridField),
}

impl ScalarField {
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        match self {
            ScalarField::Expr(e) => e.eval(a, b),
            ScalarField::Grid(g) => g.eval(a, b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bilinear_reproduces_nodes_and_clamps() {
        let g = GridField::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0], vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
            .unwrap();
        assert_eq!(g.eval(1.0, 0.0), 1.0);
        assert_eq!(g.eval(3.0, 2.0), 12.0);
        assert_eq!(g.eval(0.5, 1.0), 5.5);
        assert_eq!(g.eval(-5.0, 0.0), 0.0);
        assert_eq!(g.eval(9.0, 9.0), 12.0);
    }

    #[test]
    fn rejects_malformed_grids() {
        assert!(GridField::new(vec![0.0], vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(GridField::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0; 3]).is_err());
        assert!(GridField::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0; 4]).is_err());
        assert!(GridField::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "x,y,v\n1,0,1\n0,0,0\n0,1,2\n1,1,3\n";
        let g = GridField::from_csv(text.as_bytes()).unwrap();
        assert_eq!(g.eval(0.5, 0.5), 1.5);
        let holey = "x,y,v\n0,0,0\n1,1,3\n1,0,1\n";
        assert!(GridField::from_csv(holey.as_bytes()).is_err());
    }

    proptest! {
        // bilinear interpolation is exact for functions a + b x + c y + d x y
        #[test]
        fn exact_on_bilinear_functions(
            a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
            x in -1.0f64..1.0, y in -1.0f64..1.0,
        ) {
            let f = |x: f64, y: f64| a + b * x + c * y + d * x * y;
            let g = GridField::tabulate((-1.0, 1.0), (-1.0, 1.0), 7, 5, f).unwrap();
            prop_assert!((g.eval(x, y) - f(x, y)).abs() < 1e-12);
        }
    }
}
