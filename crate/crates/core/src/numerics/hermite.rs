//! Piecewise cubic Hermite interpolation of vector-valued samples with known slopes.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::ode::StepRecord;

/// Knots sorted ascending in t, each with values and slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTable<T> {
    t: Vec<T>,
    y: Vec<Vec<T>>,
    dy: Vec<Vec<T>>,
}

impl<T: Real> HermiteTable<T> {
    pub fn new(mut knots: Vec<StepRecord<T>>) -> Result<Self> {
        knots.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap_or(std::cmp::Ordering::Equal));
        knots.dedup_by(|a, b| a.t == b.t);
        if knots.len() < 2 {
            return Err(Error::InvalidParameter("interpolation needs at least two distinct knots".into()));
        }
        let width = knots[0].y.len();
        if knots.iter().any(|k| k.y.len() != width || k.dy.len() != width) {
            return Err(Error::DimensionMismatch { expected: width, found: 0 });
        }
        let (mut t, mut y, mut dy) = (Vec::new(), Vec::new(), Vec::new());
        for k in knots {
            t.push(k.t);
            y.push(k.y);
            dy.push(k.dy);
        }
        Ok(Self { t, y, dy })
    }

    pub fn lo(&self) -> T {
        self.t[0]
    }

    pub fn hi(&self) -> T {
        self.t[self.t.len() - 1]
    }

    pub fn knots(&self) -> &[T] {
        &self.t
    }

    pub fn width(&self) -> usize {
        self.y[0].len()
    }

    /// Interpolated state and its derivative at `t` in [lo, hi].
    pub fn eval(&self, t: T) -> Result<(Vec<T>, Vec<T>)> {
        if !(t >= self.lo() && t <= self.hi()) {
            return Err(Error::Domain(format!("t = {t} outside interpolation range [{}, {}]", self.lo(), self.hi())));
        }
        let i = match self.t.partition_point(|&k| k <= t) {
            0 => 0,
            p if p >= self.t.len() => self.t.len() - 2,
            p => p - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + one;
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        let d00 = (T::lit(6.0) * s2 - T::lit(6.0) * s) / h;
        let d10 = three * s2 - T::lit(4.0) * s + one;
        let d01 = -d00;
        let d11 = three * s2 - two * s;
        let mut val = Vec::with_capacity(self.width());
        let mut der = Vec::with_capacity(self.width());
        for c in 0..self.width() {
            let (y0, y1) = (self.y[i][c], self.y[i + 1][c]);
            let (m0, m1) = (self.dy[i][c], self.dy[i + 1][c]);
            val.push(h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1);
            der.push(d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1);
        }
        Ok((val, der))
    }
}
