//! The explicit power-law family on a half space u = Nξ + b > 0.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariant::ray_slopes;
use crate::profile::{Interval, ProfileJet, ProfileTriple, ScalarProfile};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct PowerLawParams<T> {
    pub k: T,
    #[serde(default = "one")]
    pub c1: T,
    #[serde(default = "one")]
    pub c2: T,
    #[serde(default = "zero")]
    pub b: T,
    #[serde(default)]
    pub branch: Branch,
}

fn one<T: Real>() -> T {
    T::one()
}

fn zero<T: Real>() -> T {
    T::zero()
}

impl<T: Real> PowerLawParams<T> {
    pub fn new(k: T, branch: Branch) -> Self {
        Self { k, c1: T::one(), c2: T::one(), b: T::zero(), branch }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k", self.k), ("c1", self.c1), ("c2", self.c2)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidParameter("b must be finite".into()));
        }
        Ok(())
    }

    /// N for the selected branch.
    pub fn slope(&self, n: usize, m: usize) -> T {
        let (plus, minus) = ray_slopes(self.k, n, m);
        match self.branch {
            Branch::Plus => plus,
            Branch::Minus => minus,
        }
    }

    /// {ξ : Nξ + b > 0}.
    pub fn domain(&self, n: usize, m: usize) -> Interval<T> {
        let slope = self.slope(n, m);
        let edge = -self.b / slope;
        if slope > T::zero() {
            Interval { lo: edge, hi: T::infinity() }
        } else {
            Interval { lo: T::neg_infinity(), hi: edge }
        }
    }

    /// Coefficient of ln(Nξ + b) in the potential: −(m − (n−2)k + N)/N.
    pub fn log_coefficient(&self, n: usize, m: usize) -> T {
        let slope = self.slope(n, m);
        -(T::of_usize(m) - T::of_usize(n - 2) * self.k + slope) / slope
    }
}

/// coef · u^exponent with u = slope·ξ + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile<T> {
    pub coef: T,
    pub exponent: T,
    pub slope: T,
    pub intercept: T,
}

impl<T: Real> ScalarProfile<T> for PowerProfile<T> {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>> {
        let u = self.slope * xi + self.intercept;
        if !(u > T::zero()) {
            return Err(Error::Domain(format!("power-law base {u} is not positive at xi = {xi}")));
        }
        let e = self.exponent;
        let v = self.coef * u.powf(e);
        Ok(ProfileJet::new(v, v * e * self.slope / u, v * e * (e - T::one()) * self.slope * self.slope / (u * u)))
    }

    fn contains(&self, xi: T) -> bool {
        self.slope * xi + self.intercept > T::zero()
    }
}

/// coef · ln u with u = slope·ξ + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProfile<T> {
    pub coef: T,
    pub slope: T,
    pub intercept: T,
}

impl<T: Real> ScalarProfile<T> for LogProfile<T> {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>> {
        let u = self.slope * xi + self.intercept;
        if !(u > T::zero()) {
            return Err(Error::Domain(format!("logarithm argument {u} is not positive at xi = {xi}")));
        }
        let d1 = self.coef * self.slope / u;
        Ok(ProfileJet::new(self.coef * u.ln(), d1, -d1 * self.slope / u))
    }

    fn contains(&self, xi: T) -> bool {
        self.slope * xi + self.intercept > T::zero()
    }
}

/// φ = c₂u^{−k/N}, f = c₁u^{−1/N}, h = −(m − (n−2)k + N)/N · ln u with u = Nξ + b.
pub fn build_power_law<T: Real>(params: &PowerLawParams<T>, n: usize, m: usize) -> Result<ProfileTriple<T>> {
    params.validate()?;
    if n < 3 || m < 1 {
        return Err(Error::InvalidParameter(format!("need n >= 3 and m >= 1, got n = {n}, m = {m}")));
    }
    let slope = params.slope(n, m);
    let (k, b) = (params.k, params.b);
    let phi = PowerProfile { coef: params.c2, exponent: -k / slope, slope, intercept: b };
    let f = PowerProfile { coef: params.c1, exponent: -T::one() / slope, slope, intercept: b };
    let h = LogProfile { coef: params.log_coefficient(n, m), slope, intercept: b };
    Ok(ProfileTriple::new(Arc::new(phi), Arc::new(f), Arc::new(h), params.domain(n, m)))
}
