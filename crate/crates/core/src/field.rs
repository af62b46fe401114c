//! Scalar and metric fields on coordinate patches of R^d.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// Value, gradient and coordinate Hessian of a scalar field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub gradient: Vec<T>,
    pub hessian: DenseMatrix<T>,
}

impl<T: Real> Jet<T> {
    pub fn constant(dim: usize, value: T) -> Self {
        Self { value, gradient: vec![T::zero(); dim], hessian: DenseMatrix::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }
}

/// Where a set of derivatives came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    Analytic,
    FiniteDifference,
}

impl Channel {
    /// The weaker of two channels; any finite-difference input taints the result.
    pub fn combine(self, other: Channel) -> Channel {
        if self == Channel::Analytic && other == Channel::Analytic {
            Channel::Analytic
        } else {
            Channel::FiniteDifference
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Analytic => f.write_str("analytic"),
            Channel::FiniteDifference => f.write_str("finite-difference"),
        }
    }
}

/// A real function on an open subset of R^d.
pub trait ScalarField<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> T;

    fn contains(&self, _x: &[T]) -> bool {
        true
    }

    /// Exact derivatives, when the field knows them.
    fn analytic_jet(&self, _x: &[T]) -> Option<Jet<T>> {
        None
    }
}

/// A symmetric (pseudo-)metric on an open subset of R^d.
pub trait MetricField<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn components(&self, x: &[T]) -> DenseMatrix<T>;

    fn contains(&self, _x: &[T]) -> bool {
        true
    }

    /// Lower bound on the distance from `x` to the singular locus, if known.
    fn regularity_hint(&self, _x: &[T]) -> Option<T> {
        None
    }
}

pub type SharedField<T> = Arc<dyn ScalarField<T>>;

/// Black-box scalar field built from a closure; derivatives come from finite differences.
pub struct FnField<T, F> {
    dim: usize,
    f: F,
    _marker: std::marker::PhantomData<fn() -> T>,
}

impl<T, F> FnField<T, F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, _marker: std::marker::PhantomData }
    }
}

impl<T: Real, F: Fn(&[T]) -> T + Send + Sync> ScalarField<T> for FnField<T, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[T]) -> T {
        (self.f)(x)
    }
}

/// Scalar field with a closed-form jet.
pub struct JetField<T, F> {
    dim: usize,
    f: F,
    _marker: std::marker::PhantomData<fn() -> T>,
}

impl<T, F> JetField<T, F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, _marker: std::marker::PhantomData }
    }
}

impl<T: Real, F: Fn(&[T]) -> Jet<T> + Send + Sync> ScalarField<T> for JetField<T, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[T]) -> T {
        (self.f)(x).value
    }

    fn analytic_jet(&self, x: &[T]) -> Option<Jet<T>> {
        Some((self.f)(x))
    }
}

/// Constant scalar field.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField<T> {
    pub dim: usize,
    pub value: T,
}

impl<T: Real> ScalarField<T> for ConstantField<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _x: &[T]) -> T {
        self.value
    }

    fn analytic_jet(&self, _x: &[T]) -> Option<Jet<T>> {
        Some(Jet::constant(self.dim, self.value))
    }
}

/// Metric from a closure returning the component matrix.
pub struct FnMetric<T, F> {
    dim: usize,
    f: F,
    _marker: std::marker::PhantomData<fn() -> T>,
}

impl<T, F> FnMetric<T, F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, _marker: std::marker::PhantomData }
    }
}

impl<T: Real, F: Fn(&[T]) -> DenseMatrix<T> + Send + Sync> MetricField<T> for FnMetric<T, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self, x: &[T]) -> DenseMatrix<T> {
        (self.f)(x)
    }
}

/// Constant diagonal metric diag(eps_1, ..., eps_d).
#[derive(Debug, Clone)]
pub struct FlatMetric<T> {
    pub diagonal: Vec<T>,
}

impl<T: Real> MetricField<T> for FlatMetric<T> {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn components(&self, _x: &[T]) -> DenseMatrix<T> {
        DenseMatrix::from_diagonal(&self.diagonal)
    }
}
