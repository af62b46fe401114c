//! Closed-form geometry of ḡ = g/φ² over a pseudo-Euclidean space (R^n, g),
//! g_ij = δ_ij ε_i.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Channel, Jet, MetricField, ScalarField, SharedField};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::tensor::{jet_with_channel, Christoffel, FdScheme};

/// Diagonal signature (ε_1, …, ε_n) with ε_i = ±1 and n ≥ 3.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct Signature(Vec<i8>);

impl Signature {
    pub fn new(eps: Vec<i8>) -> Result<Self> {
        if eps.len() < 3 {
            return Err(Error::InvalidSignature(format!("base dimension must be at least 3, got {}", eps.len())));
        }
        if let Some(bad) = eps.iter().find(|&&e| e != 1 && e != -1) {
            return Err(Error::InvalidSignature(format!("entries must be +1 or -1, found {bad}")));
        }
        Ok(Self(eps))
    }

    pub fn riemannian(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    /// (−, +, …, +).
    pub fn lorentzian(n: usize) -> Result<Self> {
        let mut eps = vec![1; n];
        if let Some(first) = eps.first_mut() {
            *first = -1;
        }
        Self::new(eps)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn eps<T: Real>(&self, i: usize) -> T {
        if self.0[i] > 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|e| -e).collect())
    }

    /// Σ ε_k a_k b_k.
    pub fn dot<T: Real>(&self, a: &[T], b: &[T]) -> T {
        (0..self.dim()).map(|k| self.eps::<T>(k) * a[k] * b[k]).sum()
    }

    pub fn flat_metric<T: Real>(&self) -> crate::field::FlatMetric<T> {
        crate::field::FlatMetric { diagonal: (0..self.dim()).map(|i| self.eps(i)).collect() }
    }
}

impl TryFrom<Vec<i8>> for Signature {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Signature> for Vec<i8> {
    fn from(s: Signature) -> Self {
        s.0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if *e > 0 { "+" } else { "-" })?;
        }
        f.write_str(")")
    }
}

/// Positive conformal factor φ, with the stencil used when φ has no analytic jet.
#[derive(Clone)]
pub struct ConformalFactor<T: Real> {
    pub phi: SharedField<T>,
    pub fallback: FdScheme<T>,
}

impl<T: Real> ConformalFactor<T> {
    pub fn new(phi: SharedField<T>) -> Self {
        Self { phi, fallback: FdScheme::default() }
    }

    pub fn with_fallback(mut self, scheme: FdScheme<T>) -> Self {
        self.fallback = scheme;
        self
    }
}

/// Conformal data frozen at one point: φ and its first and second partials.
#[derive(Debug, Clone)]
pub struct ConformalGeometry<T: Real> {
    sig: Signature,
    phi: Jet<T>,
    channel: Channel,
}

impl<T: Real> ConformalGeometry<T> {
    pub fn at(sig: &Signature, factor: &ConformalFactor<T>, point: &[T]) -> Result<Self> {
        if factor.phi.dim() != sig.dim() || point.len() != sig.dim() {
            return Err(Error::DimensionMismatch { expected: sig.dim(), found: point.len() });
        }
        let (phi, channel) = jet_with_channel(factor.phi.as_ref(), point, &factor.fallback)?;
        Self::from_jet(sig, phi, channel)
    }

    pub fn from_jet(sig: &Signature, phi: Jet<T>, channel: Channel) -> Result<Self> {
        if phi.dim() != sig.dim() {
            return Err(Error::DimensionMismatch { expected: sig.dim(), found: phi.dim() });
        }
        if !(phi.value > T::zero()) {
            return Err(Error::Domain(format!("conformal factor must be positive, got {}", phi.value)));
        }
        Ok(Self { sig: sig.clone(), phi, channel })
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn phi(&self) -> &Jet<T> {
        &self.phi
    }

    fn n(&self) -> usize {
        self.sig.dim()
    }

    /// Γ̄^k_ij = 0 (distinct), Γ̄^i_ij = −φ_j/φ, Γ̄^k_ii = ε_iε_k φ_k/φ, Γ̄^i_ii = −φ_i/φ.
    pub fn christoffel(&self) -> Christoffel<T> {
        let n = self.n();
        let p = self.phi.value;
        let dp = &self.phi.gradient;
        let mut gamma = Christoffel::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    gamma.set(i, i, i, -dp[i] / p);
                    for k in (0..n).filter(|&k| k != i) {
                        gamma.set(k, i, i, self.sig.eps::<T>(i) * self.sig.eps::<T>(k) * dp[k] / p);
                    }
                } else {
                    gamma.set(i, i, j, -dp[j] / p);
                    gamma.set(j, i, j, -dp[i] / p);
                }
            }
        }
        gamma
    }

    pub fn ricci(&self) -> DenseMatrix<T> {
        let n = self.n();
        let nt = T::of_usize(n);
        let two = T::lit(2.0);
        let p = self.phi.value;
        let lap: T = (0..n).map(|k| self.sig.eps::<T>(k) * self.phi.hessian[(k, k)]).sum();
        let grad_sq = self.sig.dot(&self.phi.gradient, &self.phi.gradient);
        DenseMatrix::from_fn(n, |i, j| {
            let mut r = (nt - two) * self.phi.hessian[(i, j)] / p;
            if i == j {
                let e = self.sig.eps::<T>(i);
                r = r + e * lap / p - (nt - T::one()) * e * grad_sq / (p * p);
            }
            r
        })
    }

    pub fn hessian(&self, u: &Jet<T>) -> DenseMatrix<T> {
        let n = self.n();
        let two = T::lit(2.0);
        let p = self.phi.value;
        let dp = &self.phi.gradient;
        let du = &u.gradient;
        let cross = self.sig.dot(dp, du) / p;
        DenseMatrix::from_fn(n, |i, j| {
            if i == j {
                u.hessian[(i, i)] + two * dp[i] / p * du[i] - self.sig.eps::<T>(i) * cross
            } else {
                u.hessian[(i, j)] + dp[j] / p * du[i] + dp[i] / p * du[j]
            }
        })
    }

    /// (Δ_ḡ u, ḡ(∇u, ∇u)).
    pub fn laplacian_and_gradsq(&self, u: &Jet<T>) -> (T, T) {
        let n = self.n();
        let p = self.phi.value;
        let nt = T::of_usize(n);
        let lap_flat: T = (0..n).map(|k| self.sig.eps::<T>(k) * u.hessian[(k, k)]).sum();
        let lap = p * p * lap_flat - (nt - T::lit(2.0)) * p * self.sig.dot(&self.phi.gradient, &u.gradient);
        let grad_sq = p * p * self.sig.dot(&u.gradient, &u.gradient);
        (lap, grad_sq)
    }
}

pub fn conformal_christoffel<T: Real>(
    sig: &Signature,
    factor: &ConformalFactor<T>,
    point: &[T],
) -> Result<Christoffel<T>> {
    Ok(ConformalGeometry::at(sig, factor, point)?.christoffel())
}

pub fn conformal_ricci<T: Real>(sig: &Signature, factor: &ConformalFactor<T>, point: &[T]) -> Result<DenseMatrix<T>> {
    Ok(ConformalGeometry::at(sig, factor, point)?.ricci())
}

pub fn conformal_hessian<T: Real>(
    sig: &Signature,
    factor: &ConformalFactor<T>,
    u: &dyn ScalarField<T>,
    point: &[T],
) -> Result<DenseMatrix<T>> {
    let geo = ConformalGeometry::at(sig, factor, point)?;
    let (ju, _) = jet_with_channel(u, point, &factor.fallback)?;
    Ok(geo.hessian(&ju))
}

pub fn conformal_laplacian_and_gradsq<T: Real>(
    sig: &Signature,
    factor: &ConformalFactor<T>,
    u: &dyn ScalarField<T>,
    point: &[T],
) -> Result<(T, T)> {
    let geo = ConformalGeometry::at(sig, factor, point)?;
    let (ju, _) = jet_with_channel(u, point, &factor.fallback)?;
    Ok(geo.laplacian_and_gradsq(&ju))
}

/// The metric g/φ² as a black-box field, for the finite-difference oracle.
pub struct ConformalMetric<T: Real> {
    pub sig: Signature,
    pub phi: SharedField<T>,
}

impl<T: Real> MetricField<T> for ConformalMetric<T> {
    fn dim(&self) -> usize {
        self.sig.dim()
    }

    fn components(&self, x: &[T]) -> DenseMatrix<T> {
        let p = self.phi.value(x);
        let inv = T::one() / (p * p);
        DenseMatrix::from_fn(self.sig.dim(), |i, j| if i == j { self.sig.eps::<T>(i) * inv } else { T::zero() })
    }

    fn contains(&self, x: &[T]) -> bool {
        self.phi.contains(x) && self.phi.value(x) > T::zero()
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::{ConstantField, JetField};
    use crate::tensor;

    fn exp_x1(n: usize) -> SharedField<f64> {
        Arc::new(JetField::new(n, move |x: &[f64]| {
            let e = x[0].exp();
            let mut gradient = vec![0.0; n];
            gradient[0] = e;
            let mut hessian = DenseMatrix::zeros(n);
            hessian[(0, 0)] = e;
            Jet { value: e, gradient, hessian }
        }))
    }

    #[test]
    fn signature_validation() {
        assert!(Signature::new(vec![1, 1]).is_err());
        assert!(Signature::new(vec![1, 0, 1]).is_err());
        assert!(Signature::new(vec![1, -1, 1]).is_ok());
        assert_eq!(Signature::lorentzian(4).unwrap().to_string(), "(-,+,+,+)");
    }

    #[test]
    fn constant_factor_is_flat() {
        let sig = Signature::lorentzian(4).unwrap();
        let factor = ConformalFactor::new(Arc::new(ConstantField { dim: 4, value: 2.5 }));
        let x = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(conformal_christoffel(&sig, &factor, &x).unwrap().max_abs(), 0.0);
        assert_eq!(conformal_ricci(&sig, &factor, &x).unwrap(), DenseMatrix::zeros(4));
    }

    #[test]
    fn exponential_factor_christoffels() {
        let sig = Signature::riemannian(3).unwrap();
        let factor = ConformalFactor::new(exp_x1(3));
        let g = conformal_christoffel(&sig, &factor, &[0.2, 0.0, 0.0]).unwrap();
        // φ_1/φ = 1
        assert_eq!(g[(0, 0, 0)], -1.0);
        assert_eq!(g[(1, 0, 1)], -1.0);
        assert_eq!(g[(1, 1, 0)], -1.0);
        assert_eq!(g[(0, 1, 1)], 1.0);
        assert_eq!(g[(0, 2, 2)], 1.0);
        assert_eq!(g[(2, 0, 2)], -1.0);
        assert_eq!(g[(1, 1, 1)], 0.0);
        assert_eq!(g[(2, 1, 2)], 0.0);
    }

    #[test]
    fn exponential_factor_ricci() {
        let sig = Signature::riemannian(3).unwrap();
        let factor = ConformalFactor::new(exp_x1(3));
        for x in [[0.0, 0.0, 0.0], [1.3, -0.4, 2.0]] {
            let r = conformal_ricci(&sig, &factor, &x).unwrap();
            let expected = DenseMatrix::from_diagonal(&[0.0, -1.0, -1.0]);
            assert!(r.sub(&expected).max_abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_factor_laplacian() {
        let sig = Signature::riemannian(3).unwrap();
        let factor = ConformalFactor::new(exp_x1(3));
        let u = JetField::new(3, |x: &[f64]| Jet {
            value: x[0],
            gradient: vec![1.0, 0.0, 0.0],
            hessian: DenseMatrix::zeros(3),
        });
        let (lap, gsq) = conformal_laplacian_and_gradsq(&sig, &factor, &u, &[0.0, 0.0, 0.0]).unwrap();
        assert!((lap + 1.0).abs() < 1e-15);
        assert!((gsq - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_laplacian_of_quadratic() {
        let sig = Signature::new(vec![-1, 1, 1, 1]).unwrap();
        let factor = ConformalFactor::new(Arc::new(ConstantField { dim: 4, value: 1.0 }));
        let s2 = sig.clone();
        let u = JetField::new(4, move |x: &[f64]| Jet {
            value: 0.5 * s2.dot(x, x),
            gradient: (0..4).map(|k| s2.eps::<f64>(k) * x[k]).collect(),
            hessian: DenseMatrix::from_fn(4, |i, j| if i == j { s2.eps(i) } else { 0.0 }),
        });
        let x = [0.5, 1.0, -2.0, 0.25];
        let (lap, gsq) = conformal_laplacian_and_gradsq(&sig, &factor, &u, &x).unwrap();
        assert_eq!(lap, 4.0);
        let expected: f64 = (0..4).map(|k| sig.eps::<f64>(k) * x[k] * x[k]).sum();
        assert!((gsq - expected).abs() < 1e-15);
    }

    #[test]
    fn flat_hessian_of_product() {
        let sig = Signature::riemannian(3).unwrap();
        let factor = ConformalFactor::new(Arc::new(ConstantField { dim: 3, value: 1.0 }));
        let u = JetField::new(3, |x: &[f64]| {
            let mut hessian = DenseMatrix::zeros(3);
            hessian[(0, 1)] = 1.0;
            hessian[(1, 0)] = 1.0;
            Jet { value: x[0] * x[1], gradient: vec![x[1], x[0], 0.0], hessian }
        });
        let h = conformal_hessian(&sig, &factor, &u, &[0.3, 0.7, 0.1]).unwrap();
        let mut expected = DenseMatrix::zeros(3);
        expected[(0, 1)] = 1.0;
        expected[(1, 0)] = 1.0;
        assert_eq!(h, expected);
    }

    #[test]
    fn nonpositive_factor_rejected() {
        let sig = Signature::riemannian(3).unwrap();
        let factor = ConformalFactor::new(Arc::new(ConstantField { dim: 3, value: -1.0 }));
        assert!(matches!(conformal_ricci(&sig, &factor, &[0.0; 3]), Err(Error::Domain(_))));
    }

    #[test]
    fn fd_channel_is_recorded() {
        let sig = Signature::riemannian(3).unwrap();
        let phi: SharedField<f64> = Arc::new(crate::field::FnField::new(3, |x: &[f64]| 1.0 + 0.1 * x[0] * x[1]));
        let geo = ConformalGeometry::at(&sig, &ConformalFactor::new(phi), &[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(geo.channel(), Channel::FiniteDifference);
        let geo = ConformalGeometry::at(&sig, &ConformalFactor::new(exp_x1(3)), &[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(geo.channel(), Channel::Analytic);
    }

    #[test]
    fn negated_signature_keeps_connection() {
        let sig = Signature::new(vec![-1, 1, 1]).unwrap();
        let phi: SharedField<f64> = Arc::new(JetField::new(3, |x: &[f64]| {
            let v = 2.0 + 0.3 * x[0] + 0.1 * x[1] * x[1] - 0.2 * x[2];
            let mut hessian = DenseMatrix::zeros(3);
            hessian[(1, 1)] = 0.2;
            Jet { value: v, gradient: vec![0.3, 0.2 * x[1], -0.2], hessian }
        }));
        let factor = ConformalFactor::new(phi);
        let x = [0.1, 0.4, -0.3];
        let a = ConformalGeometry::at(&sig, &factor, &x).unwrap();
        let b = ConformalGeometry::at(&sig.negated(), &factor, &x).unwrap();
        assert_eq!(a.christoffel(), b.christoffel());
        // Ricci is invariant under g -> -g.
        assert!(a.ricci().sub(&b.ricci()).max_abs() < 1e-15);
    }

    #[test]
    fn exponential_factor_against_oracle() {
        let sig = Signature::riemannian(3).unwrap();
        let phi = exp_x1(3);
        let x = [0.2, 0.0, 0.0];
        let closed = conformal_christoffel(&sig, &ConformalFactor::new(phi.clone()), &x).unwrap();
        let metric = ConformalMetric { sig: sig.clone(), phi: phi.clone() };
        let fd = tensor::christoffel(&metric, &x, &FdScheme::default()).unwrap();
        assert!(closed.max_abs_diff(&fd) < 1e-6);
        let ric_fd = tensor::ricci(&metric, &x, &FdScheme::default()).unwrap();
        let ric = conformal_ricci(&sig, &ConformalFactor::new(phi), &x).unwrap();
        assert!(ric.sub(&ric_fd).max_abs() < 5e-6);
    }
}
