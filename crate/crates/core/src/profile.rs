//! Functions of the single invariant ξ and triples (φ, f, h) of them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Value and first two derivatives of a one-variable function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Real> ProfileJet<T> {
    pub fn new(value: T, d1: T, d2: T) -> Self {
        Self { value, d1, d2 }
    }

    pub fn constant(value: T) -> Self {
        Self { value, d1: T::zero(), d2: T::zero() }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

/// A smooth function of ξ with derivative channels.
pub trait ScalarProfile<T: Real>: Send + Sync {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>>;

    fn contains(&self, _xi: T) -> bool {
        true
    }
}

pub type SharedProfile<T> = Arc<dyn ScalarProfile<T>>;

/// Profile given by a closed-form closure returning (value, first, second derivative).
pub struct FnProfile<F> {
    f: F,
}

impl<F> FnProfile<F> {
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<T: Real, F: Fn(T) -> (T, T, T) + Send + Sync> ScalarProfile<T> for FnProfile<F> {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>> {
        let (value, d1, d2) = (self.f)(xi);
        Ok(ProfileJet { value, d1, d2 })
    }
}

pub fn fn_profile<T: Real>(f: impl Fn(T) -> (T, T, T) + Send + Sync + 'static) -> SharedProfile<T> {
    Arc::new(FnProfile::new(f))
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantProfile<T>(pub T);

impl<T: Real> ScalarProfile<T> for ConstantProfile<T> {
    fn eval(&self, _xi: T) -> Result<ProfileJet<T>> {
        Ok(ProfileJet::constant(self.0))
    }
}

/// `inner + offset`; derivatives pass through untouched.
pub struct ShiftedProfile<T: Real> {
    pub inner: SharedProfile<T>,
    pub offset: T,
}

impl<T: Real> ScalarProfile<T> for ShiftedProfile<T> {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>> {
        let j = self.inner.eval(xi)?;
        Ok(ProfileJet { value: j.value + self.offset, ..j })
    }

    fn contains(&self, xi: T) -> bool {
        self.inner.contains(xi)
    }
}

/// `inner · factor(ξ)` with the product rule applied to both channels.
pub struct ModulatedProfile<T: Real> {
    pub inner: SharedProfile<T>,
    pub factor: SharedProfile<T>,
}

impl<T: Real> ScalarProfile<T> for ModulatedProfile<T> {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>> {
        let a = self.inner.eval(xi)?;
        let b = self.factor.eval(xi)?;
        let two = T::lit(2.0);
        Ok(ProfileJet {
            value: a.value * b.value,
            d1: a.d1 * b.value + a.value * b.d1,
            d2: a.d2 * b.value + two * a.d1 * b.d1 + a.value * b.d2,
        })
    }

    fn contains(&self, xi: T) -> bool {
        self.inner.contains(xi) && self.factor.contains(xi)
    }
}

/// `inner + extra(ξ)`.
pub struct SumProfile<T: Real> {
    pub inner: SharedProfile<T>,
    pub extra: SharedProfile<T>,
}

impl<T: Real> ScalarProfile<T> for SumProfile<T> {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>> {
        let a = self.inner.eval(xi)?;
        let b = self.extra.eval(xi)?;
        Ok(ProfileJet { value: a.value + b.value, d1: a.d1 + b.d1, d2: a.d2 + b.d2 })
    }

    fn contains(&self, xi: T) -> bool {
        self.inner.contains(xi) && self.extra.contains(xi)
    }
}

/// Open interval (lo, hi); infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn whole_line() -> Self {
        Self { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn contains(&self, xi: T) -> bool {
        xi > self.lo && xi < self.hi
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        Self::new(self.lo.max(other.lo), self.hi.min(other.hi)).ok()
    }

    /// `count` evenly spaced points strictly inside `[a, b] ∩ self`, endpoints included when interior.
    pub fn samples(&self, a: T, b: T, count: usize) -> Vec<T> {
        if count == 0 {
            return Vec::new();
        }
        if count == 1 {
            return vec![(a + b) * T::lit(0.5)];
        }
        let step = (b - a) / T::of_usize(count - 1);
        (0..count).map(|i| a + step * T::of_usize(i)).filter(|&x| self.contains(x)).collect()
    }
}

/// Jets of the three profiles at one ξ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleJet<T> {
    pub phi: ProfileJet<T>,
    pub f: ProfileJet<T>,
    pub h: ProfileJet<T>,
}

/// (φ, f, h) as functions of ξ on an open interval.
#[derive(Clone)]
pub struct ProfileTriple<T: Real> {
    pub phi: SharedProfile<T>,
    pub f: SharedProfile<T>,
    pub h: SharedProfile<T>,
    pub domain: Interval<T>,
}

impl<T: Real> ProfileTriple<T> {
    pub fn new(phi: SharedProfile<T>, f: SharedProfile<T>, h: SharedProfile<T>, domain: Interval<T>) -> Self {
        Self { phi, f, h, domain }
    }

    pub fn contains(&self, xi: T) -> bool {
        self.domain.contains(xi) && self.phi.contains(xi) && self.f.contains(xi) && self.h.contains(xi)
    }

    pub fn eval(&self, xi: T) -> Result<TripleJet<T>> {
        if !self.contains(xi) {
            return Err(Error::Domain(format!(
                "xi = {xi} outside the profile domain ({}, {})",
                self.domain.lo, self.domain.hi
            )));
        }
        let tj = TripleJet { phi: self.phi.eval(xi)?, f: self.f.eval(xi)?, h: self.h.eval(xi)? };
        if !(tj.phi.is_finite() && tj.f.is_finite() && tj.h.is_finite()) {
            return Err(Error::NonFinite { point: vec![xi.to_f64_lossy()] });
        }
        if !(tj.f.value > T::zero() && tj.phi.value > T::zero()) {
            return Err(Error::Domain(format!("phi and f must be positive at xi = {xi}")));
        }
        Ok(tj)
    }

    pub fn with_h(&self, h: SharedProfile<T>) -> Self {
        Self { h, ..self.clone() }
    }

    pub fn with_phi(&self, phi: SharedProfile<T>) -> Self {
        Self { phi, ..self.clone() }
    }

    pub fn with_f(&self, f: SharedProfile<T>) -> Self {
        Self { f, ..self.clone() }
    }

    /// h → h + c.
    pub fn shift_h(&self, c: T) -> Self {
        self.with_h(Arc::new(ShiftedProfile { inner: self.h.clone(), offset: c }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_channels() {
        let a = fn_profile(|x: f64| (x * x, 2.0 * x, 2.0));
        let b = fn_profile(|x: f64| (x.exp(), x.exp(), x.exp()));
        let p = ModulatedProfile { inner: a, factor: b };
        let j = p.eval(0.7).unwrap();
        let e = 0.7f64.exp();
        assert!((j.value - 0.49 * e).abs() < 1e-15);
        assert!((j.d1 - (1.4 + 0.49) * e).abs() < 1e-14);
        assert!((j.d2 - (2.0 + 2.8 + 0.49) * e).abs() < 1e-14);
    }

    #[test]
    fn interval_sampling() {
        let i = Interval::new(0.0f64, 1.0).unwrap();
        assert!(!i.contains(0.0));
        assert_eq!(i.samples(0.1, 0.9, 5).len(), 5);
        assert_eq!(i.samples(-1.0, 0.9, 20).iter().filter(|x| **x <= 0.0).count(), 0);
        assert!(Interval::new(1.0f64, 1.0).is_err());
    }

    #[test]
    fn triple_rejects_outside_points() {
        let one = fn_profile(|_x: f64| (1.0, 0.0, 0.0));
        let t = ProfileTriple::new(one.clone(), one.clone(), one, Interval::new(0.0, 1.0).unwrap());
        assert!(t.eval(0.5).is_ok());
        assert!(matches!(t.eval(1.5), Err(Error::Domain(_))));
    }
}
