//! Finite-difference curvature of arbitrary metric fields.
//!
//! This is the independent oracle for the closed-form modules: it knows
//! nothing about conformal factors or warped products, only metric
//! components sampled at stencil points.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Channel, Jet, MetricField, ScalarField};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// Metrics whose condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Central-difference stencil: per-axis step and order (2 or 4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdScheme<T> {
    pub step: T,
    pub order: u8,
}

impl<T: Real> Default for FdScheme<T> {
    fn default() -> Self {
        Self { step: T::lit(1e-3), order: 2 }
    }
}

impl<T: Real> FdScheme<T> {
    pub fn new(step: T, order: u8) -> Result<Self> {
        let scheme = Self { step, order };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn order2(step: T) -> Self {
        Self { step, order: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) || !self.step.is_finite() {
            return Err(Error::InvalidScheme(format!("step must be positive, got {}", self.step)));
        }
        if self.order != 2 && self.order != 4 {
            return Err(Error::InvalidScheme(format!("order must be 2 or 4, got {}", self.order)));
        }
        Ok(())
    }

    /// Stencil offsets (in units of `step`) and weights (in units of 1/step).
    fn stencil(&self) -> &'static [(f64, f64)] {
        match self.order {
            4 => &[(2.0, -1.0 / 12.0), (1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (-2.0, 1.0 / 12.0)],
            _ => &[(1.0, 0.5), (-1.0, -0.5)],
        }
    }

    fn reach(&self) -> T {
        self.step * T::of_usize(self.order as usize / 2)
    }
}

fn to_f64_vec<T: Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.to_f64_lossy()).collect()
}

/// Central difference of a vector-valued map along one axis.
fn central<T, F>(
    eval: F,
    contains: &dyn Fn(&[T]) -> bool,
    point: &[T],
    axis: usize,
    scheme: &FdScheme<T>,
) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    scheme.validate()?;
    if axis >= point.len() {
        return Err(Error::DimensionMismatch { expected: point.len(), found: axis + 1 });
    }
    let mut acc: Option<Vec<T>> = None;
    let mut shifted = point.to_vec();
    for &(offset, weight) in scheme.stencil() {
        shifted[axis] = point[axis] + T::lit(offset) * scheme.step;
        if !contains(&shifted) {
            return Err(Error::OutOfDomain { point: to_f64_vec(&shifted), axis });
        }
        let values = eval(&shifted)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { point: to_f64_vec(&shifted) });
        }
        let w = T::lit(weight) / scheme.step;
        match acc.as_mut() {
            None => acc = Some(values.into_iter().map(|v| v * w).collect()),
            Some(a) => {
                for (slot, v) in a.iter_mut().zip(values) {
                    *slot = *slot + v * w;
                }
            }
        }
    }
    Ok(acc.unwrap_or_default())
}

fn check_hint<T: Real>(metric: &dyn MetricField<T>, point: &[T], scheme: &FdScheme<T>) -> Result<()> {
    if let Some(hint) = metric.regularity_hint(point) {
        if scheme.reach() >= hint {
            return Err(Error::InvalidScheme(format!(
                "stencil reach {} exceeds regularity hint {} at {:?}",
                scheme.reach(),
                hint,
                to_f64_vec(point)
            )));
        }
    }
    Ok(())
}

fn scalar_value<T: Real>(field: &dyn ScalarField<T>, x: &[T]) -> Result<T> {
    let v = field.value(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: to_f64_vec(x) })
    }
}

/// Partial derivative of a scalar field along `axis`.
pub fn fd_partial<T: Real>(
    field: &dyn ScalarField<T>,
    point: &[T],
    axis: usize,
    scheme: &FdScheme<T>,
) -> Result<T> {
    check_dim(field.dim(), point)?;
    let contains = |x: &[T]| field.contains(x);
    let d = central(|x| Ok(vec![scalar_value(field, x)?]), &contains, point, axis, scheme)?;
    Ok(d[0])
}

/// Partial derivative of every metric component along `axis`.
pub fn fd_metric_partial<T: Real>(
    metric: &dyn MetricField<T>,
    point: &[T],
    axis: usize,
    scheme: &FdScheme<T>,
) -> Result<DenseMatrix<T>> {
    check_dim(metric.dim(), point)?;
    let contains = |x: &[T]| metric.contains(x);
    let d = central(|x| Ok(metric.components(x).into_vec()), &contains, point, axis, scheme)?;
    Ok(DenseMatrix::from_row_major(metric.dim(), d))
}

fn check_dim<T>(dim: usize, point: &[T]) -> Result<()> {
    if dim != point.len() {
        return Err(Error::DimensionMismatch { expected: dim, found: point.len() });
    }
    Ok(())
}

fn fd_gradient<T: Real>(field: &dyn ScalarField<T>, point: &[T], scheme: &FdScheme<T>) -> Result<Vec<T>> {
    (0..point.len()).map(|a| fd_partial(field, point, a, scheme)).collect()
}

/// Coordinate Hessian by nested central differences, symmetrized.
pub fn fd_coordinate_hessian<T: Real>(
    field: &dyn ScalarField<T>,
    point: &[T],
    scheme: &FdScheme<T>,
) -> Result<DenseMatrix<T>> {
    check_dim(field.dim(), point)?;
    let d = point.len();
    let contains = |x: &[T]| field.contains(x);
    let mut rows = Vec::with_capacity(d);
    for a in 0..d {
        rows.push(central(|x| fd_gradient(field, x, scheme), &contains, point, a, scheme)?);
    }
    let half = T::lit(0.5);
    Ok(DenseMatrix::from_fn(d, |i, j| (rows[i][j] + rows[j][i]) * half))
}

/// Finite-difference jet of a field, ignoring any analytic channel.
pub fn fd_jet<T: Real>(field: &dyn ScalarField<T>, point: &[T], scheme: &FdScheme<T>) -> Result<Jet<T>> {
    check_dim(field.dim(), point)?;
    if !field.contains(point) {
        return Err(Error::OutOfDomain { point: to_f64_vec(point), axis: 0 });
    }
    Ok(Jet {
        value: scalar_value(field, point)?,
        gradient: fd_gradient(field, point, scheme)?,
        hessian: fd_coordinate_hessian(field, point, scheme)?,
    })
}

/// Analytic jet when the field provides one, finite differences otherwise.
pub fn jet_with_channel<T: Real>(
    field: &dyn ScalarField<T>,
    point: &[T],
    fallback: &FdScheme<T>,
) -> Result<(Jet<T>, Channel)> {
    check_dim(field.dim(), point)?;
    if !field.contains(point) {
        return Err(Error::OutOfDomain { point: to_f64_vec(point), axis: 0 });
    }
    match field.analytic_jet(point) {
        Some(jet) => {
            if !jet.value.is_finite() || jet.gradient.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { point: to_f64_vec(point) });
            }
            Ok((jet, Channel::Analytic))
        }
        None => Ok((fd_jet(field, point, fallback)?, Channel::FiniteDifference)),
    }
}

/// Christoffel symbols of the second kind, indexed `(k, i, j)` for Γ^k_{ij}.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> Christoffel<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: T) {
        let d = self.dim;
        self.data[(k * d + i) * d + j] = v;
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    fn from_vec(dim: usize, data: Vec<T>) -> Self {
        Self { dim, data }
    }
}

impl<T> Index<(usize, usize, usize)> for Christoffel<T> {
    type Output = T;
    #[inline]
    fn index(&self, (k, i, j): (usize, usize, usize)) -> &T {
        &self.data[(k * self.dim + i) * self.dim + j]
    }
}

/// Metric components and inverse at a point, rejecting ill-conditioned matrices.
pub fn metric_with_inverse<T: Real>(
    metric: &dyn MetricField<T>,
    point: &[T],
) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    check_dim(metric.dim(), point)?;
    if !metric.contains(point) {
        return Err(Error::OutOfDomain { point: to_f64_vec(point), axis: 0 });
    }
    let g = metric.components(point);
    if g.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { point: to_f64_vec(point) });
    }
    let singular = |condition: f64| Error::SingularMetric { point: to_f64_vec(point), condition };
    let (inv, cond) = g.inverse_with_condition().ok_or_else(|| singular(f64::INFINITY))?;
    if !(cond.to_f64_lossy() <= MAX_CONDITION) {
        return Err(singular(cond.to_f64_lossy()));
    }
    Ok((g, inv))
}

/// Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}).
pub fn christoffel<T: Real>(
    metric: &dyn MetricField<T>,
    point: &[T],
    scheme: &FdScheme<T>,
) -> Result<Christoffel<T>> {
    check_hint(metric, point, scheme)?;
    let d = metric.dim();
    let (_, ginv) = metric_with_inverse(metric, point)?;
    let dg: Vec<DenseMatrix<T>> =
        (0..d).map(|a| fd_metric_partial(metric, point, a, scheme)).collect::<Result<_>>()?;
    let half = T::lit(0.5);
    let mut gamma = Christoffel::zeros(d);
    for i in 0..d {
        for j in i..d {
            // first kind: [ij, l]
            let lowered: Vec<T> =
                (0..d).map(|l| dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]).collect();
            for k in 0..d {
                let v = half * (0..d).map(|l| ginv[(k, l)] * lowered[l]).sum::<T>();
                gamma.set(k, i, j, v);
                gamma.set(k, j, i, v);
            }
        }
    }
    Ok(gamma)
}

/// Ric_{ij} = ∂_kΓ^k_{ij} − ∂_iΓ^k_{kj} + Γ^k_{kl}Γ^l_{ij} − Γ^k_{il}Γ^l_{kj}.
pub fn ricci<T: Real>(metric: &dyn MetricField<T>, point: &[T], scheme: &FdScheme<T>) -> Result<DenseMatrix<T>> {
    let d = metric.dim();
    let gamma = christoffel(metric, point, scheme)?;
    let contains = |x: &[T]| metric.contains(x);
    let dgamma: Vec<Christoffel<T>> = (0..d)
        .map(|a| {
            central(|x| Ok(christoffel(metric, x, scheme)?.data), &contains, point, a, scheme)
                .map(|v| Christoffel::from_vec(d, v))
        })
        .collect::<Result<_>>()?;
    let trace: Vec<T> = (0..d).map(|l| (0..d).map(|k| gamma[(k, k, l)]).sum()).collect();
    Ok(DenseMatrix::from_fn(d, |i, j| {
        let mut r = T::zero();
        for k in 0..d {
            r = r + dgamma[k][(k, i, j)] - dgamma[i][(k, k, j)];
            r = r + trace[k] * gamma[(k, i, j)];
            for l in 0..d {
                r = r - gamma[(k, i, l)] * gamma[(l, k, j)];
            }
        }
        r
    }))
}

/// Hess(h)_{ij} = h_{,ij} − Γ^k_{ij} h_{,k}, all by finite differences.
pub fn hessian<T: Real>(
    h: &dyn ScalarField<T>,
    metric: &dyn MetricField<T>,
    point: &[T],
    scheme: &FdScheme<T>,
) -> Result<DenseMatrix<T>> {
    check_dim(h.dim(), point)?;
    let d = metric.dim();
    let gamma = christoffel(metric, point, scheme)?;
    let grad = fd_gradient(h, point, scheme)?;
    let second = fd_coordinate_hessian(h, point, scheme)?;
    Ok(DenseMatrix::from_fn(d, |i, j| {
        second[(i, j)] - (0..d).map(|k| gamma[(k, i, j)] * grad[k]).sum::<T>()
    }))
}

/// Ric + Hess(h) − ρ g at a point; vanishes iff the soliton equation holds there.
pub fn soliton_residual_field<T: Real>(
    metric: &dyn MetricField<T>,
    h: &dyn ScalarField<T>,
    rho: T,
    point: &[T],
    scheme: &FdScheme<T>,
) -> Result<DenseMatrix<T>> {
    let (g, _) = metric_with_inverse(metric, point)?;
    let ric = ricci(metric, point, scheme)?;
    let hess = hessian(h, metric, point, scheme)?;
    Ok(ric.add(&hess).sub(&g.scale(rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ConstantField, FlatMetric, FnField, FnMetric};

    fn flat(eps: &[f64]) -> FlatMetric<f64> {
        FlatMetric { diagonal: eps.to_vec() }
    }

    #[test]
    fn constant_field_has_zero_partial() {
        let c = ConstantField { dim: 3, value: 4.2 };
        for axis in 0..3 {
            let d = fd_partial(&c, &[0.3, -1.0, 2.0], axis, &FdScheme::default()).unwrap();
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn central_difference_exact_on_quadratics() {
        let f = FnField::new(2, |x: &[f64]| x[0] * x[0]);
        for &step in &[1e-1, 1e-2, 1e-3] {
            let d = fd_partial(&f, &[0.75, 0.0], 0, &FdScheme::order2(step)).unwrap();
            assert!((d - 1.5).abs() < 1e-12, "step {step}: {d}");
        }
    }

    #[test]
    fn exponential_derivative_error_budget() {
        let f = FnField::new(1, |x: &[f64]| x[0].exp());
        let d = fd_partial(&f, &[0.0], 0, &FdScheme::order2(1e-3)).unwrap();
        // sinh(h)/h - 1 = h^2/6 + ...
        assert!((d - 1.0).abs() < 2e-7);
        let d4 = fd_partial(&f, &[0.0], 0, &FdScheme::new(1e-3, 4).unwrap()).unwrap();
        assert!((d4 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn out_of_domain_stencil_is_reported() {
        struct HalfLine;
        impl ScalarField<f64> for HalfLine {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[0].ln()
            }
            fn contains(&self, x: &[f64]) -> bool {
                x[0] > 0.0
            }
        }
        let err = fd_partial(&HalfLine, &[5e-4], 0, &FdScheme::default()).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { axis: 0, .. }));
    }

    #[test]
    fn nan_is_propagated_with_point() {
        let f = FnField::new(1, |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { 0.0 });
        let err = fd_partial(&f, &[0.0], 0, &FdScheme::default()).unwrap_err();
        match err {
            Error::NonFinite { point } => assert!(point[0] > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_schemes_rejected() {
        assert!(FdScheme::new(0.0f64, 2).is_err());
        assert!(FdScheme::new(1e-3f64, 3).is_err());
        assert!(FdScheme::new(-1e-3f64, 2).is_err());
    }

    #[test]
    fn flat_metric_has_vanishing_connection_and_curvature() {
        let g = flat(&[-1.0, 1.0, 1.0, 1.0]);
        let x = [0.1, -0.4, 2.0, 3.0];
        let gamma = christoffel(&g, &x, &FdScheme::default()).unwrap();
        assert!(gamma.max_abs() < 1e-12);
        let ric = ricci(&g, &x, &FdScheme::default()).unwrap();
        assert!(ric.max_abs() < 1e-10);
    }

    #[test]
    fn warped_plane_christoffels() {
        // diag(1, x^2): Γ^2_{12} = 1/x, Γ^1_{22} = -x
        let g = FnMetric::new(2, |x: &[f64]| DenseMatrix::from_diagonal(&[1.0, x[0] * x[0]]));
        let x = [1.3, 0.2];
        let gamma = christoffel(&g, &x, &FdScheme::default()).unwrap();
        assert!((gamma[(1, 0, 1)] - 1.0 / 1.3).abs() < 1e-8);
        assert!((gamma[(1, 1, 0)] - 1.0 / 1.3).abs() < 1e-8);
        assert!((gamma[(0, 1, 1)] + 1.3).abs() < 1e-8);
        for (k, i, j) in [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 1, 1)] {
            assert!(gamma[(k, i, j)].abs() < 1e-8);
        }
    }

    #[test]
    fn round_sphere_ricci_equals_metric() {
        // dθ² + sin²θ dφ² has Ric = g.
        let g = FnMetric::new(2, |x: &[f64]| DenseMatrix::from_diagonal(&[1.0, x[0].sin().powi(2)]));
        let x = [1.0, 0.5];
        let ric = ricci(&g, &x, &FdScheme::default()).unwrap();
        let gx = g.components(&x);
        assert!(ric.sub(&gx).max_abs() < 1e-6, "{ric:?}");
    }

    #[test]
    fn flat_quadratic_potential_hessian() {
        let eps = [-1.0, 1.0, 1.0];
        let g = flat(&eps);
        let h = FnField::new(3, move |x: &[f64]| 0.5 * (0..3).map(|i| eps[i] * x[i] * x[i]).sum::<f64>());
        let hess = hessian(&h, &g, &[0.3, 0.1, -0.2], &FdScheme::default()).unwrap();
        assert!(hess.sub(&DenseMatrix::from_diagonal(&eps)).max_abs() < 1e-9);
    }

    #[test]
    fn gaussian_soliton_and_uniform_failure() {
        let a = 0.7;
        let g = flat(&[1.0, 1.0, 1.0]);
        let h = FnField::new(3, move |x: &[f64]| 0.5 * a * x.iter().map(|v| v * v).sum::<f64>());
        let x = [0.4, -0.3, 1.1];
        let r = soliton_residual_field(&g, &h, a, &x, &FdScheme::default()).unwrap();
        assert!(r.max_abs() < 1e-9);
        let zero = ConstantField { dim: 3, value: 0.0 };
        let r = soliton_residual_field(&g, &zero, 1.0, &x, &FdScheme::default()).unwrap();
        assert_eq!(r, DenseMatrix::from_diagonal(&[-1.0, -1.0, -1.0]));
    }

    #[test]
    fn singular_metric_rejected() {
        let g = FnMetric::new(2, |_x: &[f64]| DenseMatrix::from_diagonal(&[1.0, 1e-14]));
        let err = christoffel(&g, &[0.0, 0.0], &FdScheme::default()).unwrap_err();
        assert!(matches!(err, Error::SingularMetric { .. }));
    }

    #[test]
    fn regularity_hint_limits_step() {
        struct Hinted;
        impl MetricField<f64> for Hinted {
            fn dim(&self) -> usize {
                2
            }
            fn components(&self, _x: &[f64]) -> DenseMatrix<f64> {
                DenseMatrix::identity(2)
            }
            fn regularity_hint(&self, _x: &[f64]) -> Option<f64> {
                Some(1e-4)
            }
        }
        assert!(christoffel(&Hinted, &[0.0, 0.0], &FdScheme::default()).is_err());
        assert!(christoffel(&Hinted, &[0.0, 0.0], &FdScheme::order2(1e-5)).is_ok());
    }

    #[test]
    fn christoffel_symmetric_by_construction() {
        let g = FnMetric::new(3, |x: &[f64]| {
            let mut m = DenseMatrix::identity(3);
            m[(0, 1)] = 0.1 * x[2];
            m[(1, 0)] = 0.1 * x[2];
            m[(2, 2)] = 1.0 + x[0] * x[0];
            m
        });
        let gamma = christoffel(&g, &[0.2, 0.3, 0.4], &FdScheme::default()).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(gamma[(k, i, j)], gamma[(k, j, i)]);
                }
            }
        }
    }
}
