//! Potentials for null directions by nested quadrature.
//!
//! With g = m(f''/f)φ² + 2mφφ'f'/f − (n−2)φφ'', the potential is
//! h = H0 + c5 + ∫_{ξ0}^ξ G/φ² with G = G0 + c4 + ∫_{ξ0}^ξ g.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::invariant::{CausalType, Direction};
use crate::numerics::{integrate_adaptive, QuadOptions};
use crate::profile::{Interval, ProfileJet, ProfileTriple, ScalarProfile, SharedProfile};
use crate::scalar::Real;
use crate::warped::SolitonConfig;

pub const INNER_TOLERANCE: f64 = 1e-10;
pub const OUTER_TOLERANCE: f64 = 1e-9;

#[derive(Clone)]
pub struct NullQuadratureParams<T: Real> {
    pub phi: SharedProfile<T>,
    pub f: SharedProfile<T>,
    pub c4: T,
    pub c5: T,
    pub xi0: T,
    /// Value of the inner antiderivative at ξ0, before adding c4.
    pub inner_anchor: T,
    /// Value of the outer antiderivative at ξ0, before adding c5.
    pub outer_anchor: T,
    pub domain: Interval<T>,
}

impl<T: Real> NullQuadratureParams<T> {
    pub fn new(phi: SharedProfile<T>, f: SharedProfile<T>, domain: Interval<T>) -> Self {
        Self { phi, f, c4: T::zero(), c5: T::zero(), xi0: T::zero(), inner_anchor: T::zero(), outer_anchor: T::zero(), domain }
    }
}

struct Integrands<T: Real> {
    phi: SharedProfile<T>,
    f: SharedProfile<T>,
    n: T,
    m: T,
}

impl<T: Real> Integrands<T> {
    fn jets(&self, xi: T) -> Result<(ProfileJet<T>, ProfileJet<T>)> {
        let p = self.phi.eval(xi)?;
        let f = self.f.eval(xi)?;
        if !(p.value > T::zero() && f.value > T::zero()) {
            return Err(Error::Domain(format!("phi and f must be positive at xi = {xi}")));
        }
        Ok((p, f))
    }

    fn inner(&self, p: &ProfileJet<T>, f: &ProfileJet<T>) -> T {
        let two = T::lit(2.0);
        self.m * (f.d2 / f.value) * p.value * p.value + two * self.m * p.value * p.d1 * f.d1 / f.value
            - (self.n - two) * p.value * p.d2
    }
}

/// The potential profile; `eval` runs the quadratures on demand.
pub struct NullPotential<T: Real> {
    ints: Integrands<T>,
    c4: T,
    c5: T,
    xi0: T,
    inner_anchor: T,
    outer_anchor: T,
    domain: Interval<T>,
}

impl<T: Real> NullPotential<T> {
    fn opts(tol: f64) -> QuadOptions<T> {
        QuadOptions { abs_tol: T::lit(tol), rel_tol: T::zero(), max_intervals: 4000 }
    }

    /// G(ξ) = G0 + c4 + ∫_{ξ0}^ξ g.
    pub fn inner_antiderivative(&self, xi: T) -> Result<T> {
        let mut failure = None;
        let r = integrate_adaptive(
            |s| match self.ints.jets(s) {
                Ok((p, f)) => self.ints.inner(&p, &f),
                Err(e) => {
                    failure.get_or_insert(e);
                    T::nan()
                }
            },
            self.xi0,
            xi,
            &Self::opts(INNER_TOLERANCE),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(self.inner_anchor + self.c4 + r?.value)
    }

    fn outer(&self, xi: T) -> Result<T> {
        let mut failure = None;
        let r = integrate_adaptive(
            |s| {
                let v = self.ints.jets(s).and_then(|(p, _)| Ok(self.inner_antiderivative(s)? / (p.value * p.value)));
                v.unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    T::nan()
                })
            },
            self.xi0,
            xi,
            &Self::opts(OUTER_TOLERANCE),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(self.outer_anchor + self.c5 + r?.value)
    }
}

impl<T: Real> ScalarProfile<T> for NullPotential<T> {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>> {
        if !self.domain.contains(xi) {
            return Err(Error::Domain(format!("xi = {xi} outside ({}, {})", self.domain.lo, self.domain.hi)));
        }
        let (p, f) = self.ints.jets(xi)?;
        let g = self.ints.inner(&p, &f);
        let big = self.inner_antiderivative(xi)?;
        let p2 = p.value * p.value;
        let d1 = big / p2;
        let d2 = g / p2 - T::lit(2.0) * p.d1 * big / (p2 * p.value);
        Ok(ProfileJet::new(self.outer(xi)?, d1, d2))
    }

    fn contains(&self, xi: T) -> bool {
        self.domain.contains(xi) && self.ints.phi.contains(xi) && self.ints.f.contains(xi)
    }
}

/// Builds (φ, f, h) for a null direction. The anchor ξ0 must lie in the domain.
pub fn build_null_quadrature<T: Real>(
    params: &NullQuadratureParams<T>,
    config: &SolitonConfig<T>,
    direction: &Direction<T>,
) -> Result<ProfileTriple<T>> {
    if direction.causal_type() != CausalType::Null {
        return Err(Error::WrongCausalType { expected: "null" });
    }
    if !config.is_steady_ricci_flat() {
        return Err(Error::NullDirectionForcing { rho: config.rho().to_f64_lossy(), lambda_f: config.lambda_f().to_f64_lossy() });
    }
    if !params.domain.contains(params.xi0) {
        return Err(Error::InvalidParameter(format!("anchor xi0 = {} outside the domain", params.xi0)));
    }
    for v in [params.c4, params.c5, params.inner_anchor, params.outer_anchor] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter("quadrature constants must be finite".into()));
        }
    }
    let h = NullPotential {
        ints: Integrands { phi: params.phi.clone(), f: params.f.clone(), n: T::of_usize(config.n()), m: T::of_usize(config.m()) },
        c4: params.c4,
        c5: params.c5,
        xi0: params.xi0,
        inner_anchor: params.inner_anchor,
        outer_anchor: params.outer_anchor,
        domain: params.domain,
    };
    Ok(ProfileTriple::new(params.phi.clone(), params.f.clone(), Arc::new(h), params.domain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::Signature;
    use crate::invariant::classify_direction;
    use crate::profile::ConstantProfile;

    fn setup() -> (SolitonConfig<f64>, Direction<f64>) {
        let sig = Signature::lorentzian(3).unwrap();
        (SolitonConfig::steady(sig.clone(), 2).unwrap(), classify_direction(&sig, &[1.0, 1.0, 0.0]).unwrap())
    }

    #[test]
    fn flat_case_gives_constant_potential() {
        let (cfg, dir) = setup();
        let one: SharedProfile<f64> = Arc::new(ConstantProfile(1.0));
        let params = NullQuadratureParams { c5: 0.75, ..NullQuadratureParams::new(one.clone(), one, Interval::whole_line()) };
        let t = build_null_quadrature(&params, &cfg, &dir).unwrap();
        for xi in [-1.5, 0.0, 2.0] {
            let j = t.h.eval(xi).unwrap();
            assert_eq!((j.value, j.d1, j.d2), (0.75, 0.0, 0.0));
        }
    }

    #[test]
    fn linear_potential_from_c4() {
        let (cfg, dir) = setup();
        let one: SharedProfile<f64> = Arc::new(ConstantProfile(1.0));
        let params = NullQuadratureParams { c4: 2.0, ..NullQuadratureParams::new(one.clone(), one, Interval::whole_line()) };
        let t = build_null_quadrature(&params, &cfg, &dir).unwrap();
        assert!((t.h.eval(1.5).unwrap().value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn requires_null_direction_and_steady_config() {
        let (cfg, _) = setup();
        let sig = cfg.sig().clone();
        let one: SharedProfile<f64> = Arc::new(ConstantProfile(1.0));
        let params = NullQuadratureParams::new(one.clone(), one, Interval::whole_line());
        let spacelike = classify_direction(&sig, &[0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(build_null_quadrature(&params, &cfg, &spacelike), Err(Error::WrongCausalType { .. })));
        let null = classify_direction(&sig, &[1.0, 0.0, 1.0]).unwrap();
        let shrinking = SolitonConfig::new(sig, 2, 1.0, 0.0).unwrap();
        assert!(matches!(build_null_quadrature(&params, &shrinking, &null), Err(Error::NullDirectionForcing { .. })));
    }
}
