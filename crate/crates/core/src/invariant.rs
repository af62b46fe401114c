//! Reduction to profiles of ξ = Σ α_i x_i: direction classification, the
//! ODE residual systems, consistency with the base-coordinate system, and the
//! phase-plane variables x = f'/f, y = h' + ((n−2)k − m) f'/f.

use std::sync::Arc;

use serde::Serialize;

use crate::conformal::Signature;
use crate::error::{Error, Result};
use crate::field::{Jet, ScalarField, SharedField};
use crate::linalg::DenseMatrix;
use crate::profile::{ProfileTriple, SharedProfile, TripleJet};
use crate::scalar::Real;
use crate::warped::{pde_residuals, SolitonConfig, WarpedData};

/// Threshold on |Σ ε_i α_i²| / Σ α_i² below which a direction counts as null.
pub const NULL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalType {
    /// Σ ε_i α_i² = eps after normalization; +1 spacelike, −1 timelike.
    Unit { eps: i8 },
    Null,
}

/// A classified, normalized direction α.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction<T> {
    alpha: Vec<T>,
    causal: CausalType,
    /// √|Σ ε α²| of the vector as supplied; ξ of the raw vector equals `scale` times ξ here.
    scale: T,
}

impl<T: Real> Direction<T> {
    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn causal_type(&self) -> CausalType {
        self.causal
    }

    pub fn is_null(&self) -> bool {
        self.causal == CausalType::Null
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    /// Σ ε_i α_i² of the normalized vector: ±1, or 0 for null directions.
    pub fn norm_class(&self) -> T {
        match self.causal {
            CausalType::Unit { eps } => if eps > 0 { T::one() } else { -T::one() },
            CausalType::Null => T::zero(),
        }
    }

    pub fn xi(&self, x: &[T]) -> T {
        self.alpha.iter().zip(x).map(|(&a, &v)| a * v).sum()
    }

    /// A base point with the given ξ: ξ α/|α|² plus the part of `offset`
    /// Euclidean-orthogonal to α.
    pub fn base_point(&self, xi: T, offset: &[T]) -> Vec<T> {
        let norm2: T = self.alpha.iter().map(|&a| a * a).sum();
        let along = self.xi(offset) / norm2;
        self.alpha
            .iter()
            .zip(offset)
            .map(|(&a, &o)| xi * a / norm2 + o - along * a)
            .collect()
    }
}

pub fn classify_direction<T: Real>(sig: &Signature, alpha: &[T]) -> Result<Direction<T>> {
    if alpha.len() != sig.dim() {
        return Err(Error::DimensionMismatch { expected: sig.dim(), found: alpha.len() });
    }
    let euclid: T = alpha.iter().map(|&a| a * a).sum();
    if !(euclid > T::zero()) || !euclid.is_finite() {
        return Err(Error::ZeroDirection);
    }
    let s = sig.dot(alpha, alpha);
    if s.abs() <= T::lit(NULL_TOLERANCE) * euclid {
        return Ok(Direction { alpha: alpha.to_vec(), causal: CausalType::Null, scale: T::one() });
    }
    let scale = s.abs().sqrt();
    Ok(Direction {
        alpha: alpha.iter().map(|&a| a / scale).collect(),
        causal: CausalType::Unit { eps: if s > T::zero() { 1 } else { -1 } },
        scale,
    })
}

/// A configuration, direction and triple accepted together. Null directions
/// only admit ρ = λ_F = 0.
#[derive(Clone)]
pub struct InvariantProblem<T: Real> {
    pub config: SolitonConfig<T>,
    pub direction: Direction<T>,
    pub triple: ProfileTriple<T>,
}

impl<T: Real> InvariantProblem<T> {
    pub fn new(config: SolitonConfig<T>, direction: Direction<T>, triple: ProfileTriple<T>) -> Result<Self> {
        if direction.alpha().len() != config.n() {
            return Err(Error::DimensionMismatch { expected: config.n(), found: direction.alpha().len() });
        }
        if direction.is_null() {
            check_null_forcing(&config)?;
        }
        Ok(Self { config, direction, triple })
    }

    /// ODE residuals at ξ: three for unit directions, one (padded with zeros) for null.
    pub fn ode_residuals(&self, xi: T) -> Result<[T; 3]> {
        match self.direction.causal_type() {
            CausalType::Unit { eps } => ode_residuals_unit(&self.config, &self.triple, xi, eps),
            CausalType::Null => Ok([ode_residual_null(&self.config, &self.triple, xi)?, T::zero(), T::zero()]),
        }
    }

    pub fn warped_data(&self) -> Result<WarpedData<T>> {
        pull_back(&self.config, &self.direction, &self.triple)
    }
}

fn check_null_forcing<T: Real>(config: &SolitonConfig<T>) -> Result<()> {
    if !config.is_steady_ricci_flat() {
        return Err(Error::NullDirectionForcing {
            rho: config.rho().to_f64_lossy(),
            lambda_f: config.lambda_f().to_f64_lossy(),
        });
    }
    Ok(())
}

/// (n−2)fφ'' + fφh'' − mφf'' − 2mφ'f' + 2fφ'h'.
fn mixed_equation<T: Real>(config: &SolitonConfig<T>, t: &TripleJet<T>) -> T {
    let nt = T::of_usize(config.n());
    let m = T::of_usize(config.m());
    let two = T::lit(2.0);
    let (p, f, h) = (&t.phi, &t.f, &t.h);
    (nt - two) * f.value * p.d2 + f.value * p.value * h.d2 - m * p.value * f.d2 - two * m * p.d1 * f.d1
        + two * f.value * p.d1 * h.d1
}

/// fφφ'' − (n−1)fφ'² + mφφ'f' − fφφ'h'.
fn trace_bracket<T: Real>(config: &SolitonConfig<T>, t: &TripleJet<T>) -> T {
    let nt = T::of_usize(config.n());
    let m = T::of_usize(config.m());
    let (p, f, h) = (&t.phi, &t.f, &t.h);
    f.value * p.value * p.d2 - (nt - T::one()) * f.value * p.d1 * p.d1 + m * p.value * p.d1 * f.d1
        - f.value * p.value * p.d1 * h.d1
}

/// −fφ²f'' + (n−2)fφφ'f' − (m−1)φ²f'² + fφ²f'h'.
fn fiber_bracket<T: Real>(config: &SolitonConfig<T>, t: &TripleJet<T>) -> T {
    let nt = T::of_usize(config.n());
    let m = T::of_usize(config.m());
    let (p, f, h) = (&t.phi, &t.f, &t.h);
    let p2 = p.value * p.value;
    -f.value * p2 * f.d2 + (nt - T::lit(2.0)) * f.value * p.value * p.d1 * f.d1 - (m - T::one()) * p2 * f.d1 * f.d1
        + f.value * p2 * f.d1 * h.d1
}

/// The three residuals with Σ ε_k α_k² = `s`.
pub fn ode_residuals_from_jets<T: Real>(config: &SolitonConfig<T>, t: &TripleJet<T>, s: T) -> [T; 3] {
    let f = t.f.value;
    [
        mixed_equation(config, t),
        s * trace_bracket(config, t) - config.rho() * f,
        s * fiber_bracket(config, t) - (config.rho() * f * f - config.lambda_f()),
    ]
}

/// The residuals divided by fφ, fφ² and f²φ², which with ρ = λ_F = 0 depend
/// on f and φ only through f'/f, f''/f, φ'/φ and φ''/φ.
pub fn scale_free_residuals<T: Real>(config: &SolitonConfig<T>, t: &TripleJet<T>, s: T) -> [T; 3] {
    let r = ode_residuals_from_jets(config, t, s);
    let fp = t.f.value * t.phi.value;
    [r[0] / fp, r[1] / (fp * t.phi.value), r[2] / (fp * fp)]
}

/// Residuals of the steady/non-steady ODE system for a unit direction with
/// Σ ε_k α_k² = eps_i0.
pub fn ode_residuals_unit<T: Real>(config: &SolitonConfig<T>, triple: &ProfileTriple<T>, xi: T, eps_i0: i8) -> Result<[T; 3]> {
    let s = match eps_i0 {
        1 => T::one(),
        -1 => -T::one(),
        other => return Err(Error::InvalidParameter(format!("eps_i0 must be +1 or -1, got {other}"))),
    };
    Ok(ode_residuals_from_jets(config, &triple.eval(xi)?, s))
}

/// Residual of the single equation left for a null direction; refuses ρ ≠ 0 or λ_F ≠ 0.
pub fn ode_residual_null<T: Real>(config: &SolitonConfig<T>, triple: &ProfileTriple<T>, xi: T) -> Result<T> {
    check_null_forcing(config)?;
    Ok(mixed_equation(config, &triple.eval(xi)?))
}

/// The fiber equation in its one-dimensional-fiber form
/// s[−φ²f'' + (n−2)φφ'f' + φ²f'h'] − ρf.
pub fn single_fiber_third_equation<T: Real>(config: &SolitonConfig<T>, t: &TripleJet<T>, s: T) -> T {
    let nt = T::of_usize(config.n());
    let (p, f, h) = (&t.phi, &t.f, &t.h);
    let p2 = p.value * p.value;
    s * (-p2 * f.d2 + (nt - T::lit(2.0)) * p.value * p.d1 * f.d1 + p2 * f.d1 * h.d1) - config.rho() * f.value
}

/// A profile composed with ξ(x) = Σ α_i x_i, with chain-rule jets.
pub struct PulledBack<T: Real> {
    pub profile: SharedProfile<T>,
    pub alpha: Vec<T>,
    pub domain: crate::profile::Interval<T>,
}

impl<T: Real> PulledBack<T> {
    fn xi(&self, x: &[T]) -> T {
        self.alpha.iter().zip(x).map(|(&a, &v)| a * v).sum()
    }
}

impl<T: Real> ScalarField<T> for PulledBack<T> {
    fn dim(&self) -> usize {
        self.alpha.len()
    }

    fn value(&self, x: &[T]) -> T {
        match self.profile.eval(self.xi(x)) {
            Ok(j) => j.value,
            Err(_) => T::nan(),
        }
    }

    fn contains(&self, x: &[T]) -> bool {
        let xi = self.xi(x);
        self.domain.contains(xi) && self.profile.contains(xi)
    }

    fn analytic_jet(&self, x: &[T]) -> Option<Jet<T>> {
        let j = self.profile.eval(self.xi(x)).ok()?;
        let n = self.alpha.len();
        Some(Jet {
            value: j.value,
            gradient: self.alpha.iter().map(|&a| j.d1 * a).collect(),
            hessian: DenseMatrix::from_fn(n, |i, k| j.d2 * self.alpha[i] * self.alpha[k]),
        })
    }
}

/// Base-coordinate fields φ(ξ(x)), f(ξ(x)), h(ξ(x)).
pub fn pull_back<T: Real>(config: &SolitonConfig<T>, direction: &Direction<T>, triple: &ProfileTriple<T>) -> Result<WarpedData<T>> {
    let lift = |p: &SharedProfile<T>| -> SharedField<T> {
        Arc::new(PulledBack { profile: p.clone(), alpha: direction.alpha().to_vec(), domain: triple.domain })
    };
    WarpedData::new(config.clone(), lift(&triple.phi), lift(&triple.f), lift(&triple.h))
}

/// Agreement between base-coordinate residuals and the reduced ODE residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub points: usize,
    pub max_pde_residual: f64,
    pub max_ode_residual: f64,
    /// max |R_ij − α_iα_j r1| over i ≠ j.
    pub max_offdiag_relation: f64,
    /// max |R_i − (α_i² φ r1 + ε_i r2)|.
    pub max_diag_relation: f64,
    /// max |R_fiber − r3|.
    pub max_fiber_relation: f64,
}

impl ConsistencyReport {
    pub fn max_relation_error(&self) -> f64 {
        self.max_offdiag_relation.max(self.max_diag_relation).max(self.max_fiber_relation)
    }
}

pub fn pde_ode_consistency<T: Real>(
    config: &SolitonConfig<T>,
    triple: &ProfileTriple<T>,
    direction: &Direction<T>,
    points: &[Vec<T>],
) -> Result<ConsistencyReport> {
    if direction.is_null() {
        check_null_forcing(config)?;
    }
    let data = pull_back(config, direction, triple)?;
    let alpha = direction.alpha();
    let s = config.sig().dot(alpha, alpha);
    let n = config.n();
    let mut rep = ConsistencyReport {
        points: points.len(),
        max_pde_residual: 0.0,
        max_ode_residual: 0.0,
        max_offdiag_relation: 0.0,
        max_diag_relation: 0.0,
        max_fiber_relation: 0.0,
    };
    let upd = |slot: &mut f64, v: T| *slot = slot.max(v.abs().to_f64_lossy());
    for x in points {
        let xi = direction.xi(x);
        let tj = triple.eval(xi)?;
        let r = ode_residuals_from_jets(config, &tj, s);
        let pde = pde_residuals(&data, x)?;
        upd(&mut rep.max_pde_residual, pde.max_abs());
        for v in r {
            upd(&mut rep.max_ode_residual, v);
        }
        for i in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                upd(&mut rep.max_offdiag_relation, pde.offdiag[(i, k)] - alpha[i] * alpha[k] * r[0]);
            }
            let e = config.sig().eps::<T>(i);
            upd(&mut rep.max_diag_relation, pde.diag[i] - (alpha[i] * alpha[i] * tj.phi.value * r[0] + e * r[1]));
        }
        upd(&mut rep.max_fiber_relation, pde.fiber - r[2]);
    }
    Ok(rep)
}

/// A point of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState<T> {
    pub x: T,
    pub y: T,
    pub k: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(x: T, y: T, k: T) -> Result<Self> {
        if !(k > T::zero()) {
            return Err(Error::InvalidParameter(format!("coupling k must be positive, got {k}")));
        }
        Ok(Self { x, y, k })
    }

    /// z = y/x, undefined on the line x = 0.
    pub fn z(&self) -> Option<T> {
        if self.x == T::zero() {
            None
        } else {
            Some(self.y / self.x)
        }
    }
}

/// (x', y') = (xy, [m + (n−2)k²]x² − 2kxy).
pub fn phase_rhs<T: Real>(state: &PhaseState<T>, config: &SolitonConfig<T>) -> (T, T) {
    let (x, y, k) = (state.x, state.y, state.k);
    let nt = T::of_usize(config.n());
    let m = T::of_usize(config.m());
    let c = m + (nt - T::lit(2.0)) * k * k;
    (x * y, c * x * x - T::lit(2.0) * k * x * y)
}

/// Slopes of the two invariant rays y = N x: N = −k ± √(m + (n−1)k²).
pub fn ray_slopes<T: Real>(k: T, n: usize, m: usize) -> (T, T) {
    let root = (T::of_usize(m) + T::of_usize(n - 1) * k * k).sqrt();
    (-k + root, -k - root)
}

/// k as the median of (φ'/φ)/(f'/f) over samples where |f'/f| ≥ 1e-10.
pub fn estimate_k<T: Real>(triple: &ProfileTriple<T>, xis: &[T]) -> Result<T> {
    let mut ratios = Vec::new();
    for &xi in xis {
        let t = triple.eval(xi)?;
        let lf = t.f.d1 / t.f.value;
        if lf.abs() >= T::lit(1e-10) {
            ratios.push((t.phi.d1 / t.phi.value) / lf);
        }
    }
    if ratios.is_empty() {
        return Err(Error::InvalidParameter("f'/f vanishes on every sample; k is undetermined".into()));
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = ratios.len() / 2;
    Ok(if ratios.len() % 2 == 1 { ratios[mid] } else { (ratios[mid - 1] + ratios[mid]) * T::lit(0.5) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSample<T> {
    pub xi: T,
    pub state: PhaseState<T>,
    /// x' and y' from the profile derivative channels.
    pub dx: T,
    pub dy: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePath<T> {
    pub k: T,
    pub samples: Vec<PhaseSample<T>>,
}

impl<T: Real> PhasePath<T> {
    /// max over samples of |x' − xy| and |y' − ([m+(n−2)k²]x² − 2kxy)|.
    pub fn max_flow_residual(&self, config: &SolitonConfig<T>) -> T {
        self.samples.iter().fold(T::zero(), |acc, s| {
            let (fx, fy) = phase_rhs(&s.state, config);
            acc.max((s.dx - fx).abs()).max((s.dy - fy).abs())
        })
    }
}

/// Default tolerance on |φ'/φ − k f'/f| (relative to max(1, |φ'/φ|)).
pub const PROPORTIONALITY_TOLERANCE: f64 = 1e-8;

/// Phase-plane image of a triple satisfying φ'/φ = k f'/f.
pub fn reduce_profiles<T: Real>(
    config: &SolitonConfig<T>,
    triple: &ProfileTriple<T>,
    k: T,
    xis: &[T],
) -> Result<PhasePath<T>> {
    let nt = T::of_usize(config.n());
    let m = T::of_usize(config.m());
    let shift = (nt - T::lit(2.0)) * k - m;
    let tol = T::lit(PROPORTIONALITY_TOLERANCE);
    let mut worst = (T::zero(), T::zero());
    let mut samples = Vec::with_capacity(xis.len());
    for &xi in xis {
        let t = triple.eval(xi)?;
        let lp = t.phi.d1 / t.phi.value;
        let x = t.f.d1 / t.f.value;
        let dev = (lp - k * x).abs() / T::one().max(lp.abs());
        if dev > worst.0 {
            worst = (dev, xi);
        }
        let dx = t.f.d2 / t.f.value - x * x;
        samples.push(PhaseSample {
            xi,
            state: PhaseState::new(x, t.h.d1 + shift * x, k)?,
            dx,
            dy: t.h.d2 + shift * dx,
        });
    }
    if worst.0 > tol {
        return Err(Error::Proportionality { max_deviation: worst.0.to_f64_lossy(), xi: worst.1.to_f64_lossy() });
    }
    Ok(PhasePath { k, samples })
}
