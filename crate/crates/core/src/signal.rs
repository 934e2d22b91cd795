//! Piecewise-linear planar input signals.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::foliation::Domain;
use crate::geometry::Point2;

/// A continuous input `u(t)`, linear between strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal2D {
    times: Vec<f64>,
    points: Vec<Point2>,
}

impl Signal2D {
    pub fn new(times: Vec<f64>, points: Vec<Point2>) -> Result<Self> {
        if times.len() != points.len() {
            return Err(Error::InvalidSignal(format!(
                "{} timestamps for {} points",
                times.len(),
                points.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidSignal("at least two samples are required".into()));
        }
        if let Some(i) = (0..times.len()).find(|&i| !times[i].is_finite() || !points[i].is_finite()) {
            return Err(Error::InvalidSignal(format!("sample {i} is not finite")));
        }
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSignal(format!(
                "timestamps must increase strictly, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { times, points })
    }

    pub fn from_samples(samples: impl IntoIterator<Item = (f64, Point2)>) -> Result<Self> {
        let (times, points) = samples.into_iter().unzip();
        Self::new(times, points)
    }

    /// Samples `f` at `n` evenly spaced times on `[t0, t1]`.
    pub fn sample_fn(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> Point2) -> Result<Self> {
        if n < 2 || !(t1 > t0) {
            return Err(Error::InvalidSignal(format!("cannot sample {n} points on [{t0}, {t1}]")));
        }
        Self::from_samples((0..n).map(|i| {
            let t = if i == n - 1 { t1 } else { t0 + (t1 - t0) * i as f64 / (n - 1) as f64 };
            (t, f(t))
        }))
    }

    /// `center + amplitude * sin(2 pi frequency t + phase)` componentwise.
    pub fn sine(center: Point2, amplitude: Point2, frequency: f64, phase: f64, t_end: f64, n: usize) -> Result<Self> {
        Self::sample_fn(0.0, t_end, n, |t| {
            let s = (TAU * frequency * t + phase).sin();
            center + Point2::new(amplitude.x1 * s, amplitude.x2 * s)
        })
    }

    /// Straight segment from `from` to `to` over `[0, duration]`.
    pub fn ramp(from: Point2, to: Point2, duration: f64) -> Result<Self> {
        Self::new(vec![0.0, duration], vec![from, to])
    }

    /// Waypoints visited at unit speed, starting at `t = 0`.
    ///
    /// Repeated consecutive waypoints are dropped.
    pub fn polyline(waypoints: &[Point2]) -> Result<Self> {
        let mut times = Vec::with_capacity(waypoints.len());
        let mut points: Vec<Point2> = Vec::with_capacity(waypoints.len());
        let mut t = 0.0;
        for &w in waypoints {
            if let Some(&last) = points.last() {
                let d = last.distance(w);
                if d == 0.0 {
                    continue;
                }
                t += d;
            }
            times.push(t);
            points.push(w);
        }
        Self::new(times, points)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    /// Index of the segment containing `t` (clamped to the time span).
    pub fn segment_index(&self, t: f64) -> usize {
        let n = self.times.len();
        self.times.partition_point(|&s| s <= t).saturating_sub(1).min(n - 2)
    }

    /// Interpolated value; clamped outside the time span.
    pub fn at(&self, t: f64) -> Point2 {
        if t <= self.start() {
            return self.points[0];
        }
        if t >= self.end() {
            return *self.points.last().unwrap();
        }
        let i = self.segment_index(t);
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        self.points[i].lerp(self.points[i + 1], (t - ta) / (tb - ta))
    }

    /// Largest segment speed, the Lipschitz constant of the interpolant.
    pub fn lipschitz(&self) -> f64 {
        (0..self.len() - 1)
            .map(|i| self.points[i].distance(self.points[i + 1]) / (self.times[i + 1] - self.times[i]))
            .fold(0.0, f64::max)
    }

    /// Checks that every sample and every segment stays inside `domain`.
    pub fn check_domain(&self, domain: &Domain) -> Result<()> {
        for (i, &x) in self.points.iter().enumerate() {
            if !domain.contains(x) {
                return Err(Error::SignalOutsideDomain { t: self.times[i] });
            }
        }
        for i in 0..self.len() - 1 {
            if !domain.contains_segment(self.points[i], self.points[i + 1]) {
                return Err(Error::SignalOutsideDomain { t: self.times[i] });
            }
        }
        Ok(())
    }

    /// Reads CSV with header `t,x1,x2`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers != ["t", "x1", "x2"] {
            return Err(Error::Csv(format!("expected header t,x1,x2, found {}", headers.join(","))));
        }
        let mut samples = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                let s = rec.get(k).unwrap_or("");
                s.parse::<f64>()
                    .map_err(|_| Error::Csv(format!("row {}: bad number `{s}`", line + 2)))
            };
            samples.push((num(0)?, Point2::new(num(1)?, num(2)?)));
        }
        Self::from_samples(samples)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "x1", "x2"])?;
        for (t, x) in self.times.iter().zip(&self.points) {
            w.write_record([t.to_string(), x.x1.to_string(), x.x2.to_string()])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_timestamps() {
        let p = Point2::ORIGIN;
        assert!(Signal2D::new(vec![0.0], vec![p]).is_err());
        assert!(Signal2D::new(vec![0.0, 0.0], vec![p, p]).is_err());
        assert!(Signal2D::new(vec![1.0, 0.0], vec![p, p]).is_err());
        assert!(Signal2D::new(vec![0.0, 1.0], vec![p]).is_err());
        assert!(Signal2D::new(vec![0.0, f64::NAN], vec![p, p]).is_err());
    }

    #[test]
    fn interpolates_and_clamps() {
        let u = Signal2D::new(vec![0.0, 1.0, 3.0], vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 4.0)])
            .unwrap();
        assert_eq!(u.at(0.5), Point2::new(0.5, 0.0));
        assert_eq!(u.at(2.0), Point2::new(1.0, 2.0));
        assert_eq!(u.at(-1.0), Point2::new(0.0, 0.0));
        assert_eq!(u.at(9.0), Point2::new(1.0, 4.0));
        assert_eq!(u.lipschitz(), 2.0);
    }

    #[test]
    fn domain_check_names_the_time() {
        let d = Domain::annulus(Point2::ORIGIN, 0.5, 3.0).unwrap();
        let u = Signal2D::polyline(&[Point2::new(1.0, 0.0), Point2::new(2.0, 0.0), Point2::new(3.5, 0.0)]).unwrap();
        assert_eq!(u.check_domain(&d), Err(Error::SignalOutsideDomain { t: 2.5 }));
        // the chord through the hole is rejected even though both ends are inside
        let u = Signal2D::polyline(&[Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)]).unwrap();
        assert_eq!(u.check_domain(&d), Err(Error::SignalOutsideDomain { t: 0.0 }));
    }

    #[test]
    fn csv_round_trip() {
        let u = Signal2D::sine(Point2::ORIGIN, Point2::new(2.0, 0.5), 1.0, 0.0, 1.0, 17).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        assert_eq!(Signal2D::from_csv(buf.as_slice()).unwrap(), u);
        assert!(Signal2D::from_csv("t,x,y\n0,0,0\n1,1,1\n".as_bytes()).is_err());
        assert!(Signal2D::from_csv("t,x1,x2\n0,0,0\n1,a,1\n".as_bytes()).is_err());
    }

    #[test]
    fn polyline_uses_arc_length_time() {
        let u = Signal2D::polyline(&[Point2::ORIGIN, Point2::new(3.0, 4.0), Point2::new(3.0, 4.0), Point2::new(3.0, 5.0)])
            .unwrap();
        assert_eq!(u.times(), &[0.0, 5.0, 6.0]);
    }

    proptest! {
        #[test]
        fn interpolant_hits_every_sample(ys in prop::collection::vec(-5.0f64..5.0, 2..20)) {
            let u = Signal2D::sample_fn(0.0, 1.0, ys.len(), |t| Point2::new(t, 0.0)).unwrap();
            let v = Signal2D::new(u.times().to_vec(), ys.iter().map(|&y| Point2::new(y, -y)).collect()).unwrap();
            for (i, &t) in v.times().iter().enumerate() {
                prop_assert_eq!(v.at(t), v.points()[i]);
            }
        }
    }
}
