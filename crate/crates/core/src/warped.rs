//! Warped products M = (R^n, g/φ²) ×_f F^m: curvature blocks, the soliton
//! residual system in base coordinates, and the concrete flat-torus embedding
//! used by the finite-difference oracle.

use serde::{Deserialize, Serialize};

use crate::conformal::{ConformalGeometry, Signature};
use crate::error::{Error, Result};
use crate::field::{Channel, Jet, MetricField, ScalarField, SharedField};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::tensor::{jet_with_channel, soliton_residual_field, FdScheme};

/// Dimensions, base signature and the two constants of the soliton problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig<T>", into = "RawConfig<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct SolitonConfig<T> {
    m: usize,
    sig: Signature,
    rho: T,
    lambda_f: T,
}

#[derive(Serialize, Deserialize)]
struct RawConfig<T> {
    n: usize,
    m: usize,
    signature: Vec<i8>,
    rho: T,
    lambda_f: T,
}

impl<T: Real> TryFrom<RawConfig<T>> for SolitonConfig<T> {
    type Error = Error;
    fn try_from(raw: RawConfig<T>) -> Result<Self> {
        if raw.signature.len() != raw.n {
            return Err(Error::InvalidConfig(format!(
                "signature has {} entries but n = {}",
                raw.signature.len(),
                raw.n
            )));
        }
        Self::new(Signature::new(raw.signature)?, raw.m, raw.rho, raw.lambda_f)
    }
}

impl<T: Real> From<SolitonConfig<T>> for RawConfig<T> {
    fn from(c: SolitonConfig<T>) -> Self {
        RawConfig { n: c.n(), m: c.m, signature: c.sig.entries().to_vec(), rho: c.rho, lambda_f: c.lambda_f }
    }
}

impl<T: Real> SolitonConfig<T> {
    pub fn new(sig: Signature, m: usize, rho: T, lambda_f: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("fiber dimension m must be at least 1".into()));
        }
        if m == 1 && lambda_f != T::zero() {
            return Err(Error::InvalidConfig(format!(
                "a one-dimensional fiber is Ricci-flat; lambda_F must be 0, got {lambda_f}"
            )));
        }
        if !rho.is_finite() || !lambda_f.is_finite() {
            return Err(Error::InvalidConfig("rho and lambda_F must be finite".into()));
        }
        Ok(Self { m, sig, rho, lambda_f })
    }

    /// Steady soliton over a Ricci-flat fiber.
    pub fn steady(sig: Signature, m: usize) -> Result<Self> {
        Self::new(sig, m, T::zero(), T::zero())
    }

    pub fn n(&self) -> usize {
        self.sig.dim()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn lambda_f(&self) -> T {
        self.lambda_f
    }

    pub fn is_steady_ricci_flat(&self) -> bool {
        self.rho == T::zero() && self.lambda_f == T::zero()
    }
}

/// How the fiber is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fiber {
    /// Only the Einstein constant λ_F enters.
    Abstract,
    /// Flat torus R^m / Z^m with g_F = identity; λ_F = 0.
    FlatTorus,
}

/// The triple (φ, f, h) on the base together with its configuration.
#[derive(Clone)]
pub struct WarpedData<T: Real> {
    pub config: SolitonConfig<T>,
    pub phi: SharedField<T>,
    pub f: SharedField<T>,
    pub h: SharedField<T>,
    fiber: Fiber,
    pub fallback: FdScheme<T>,
}

impl<T: Real> WarpedData<T> {
    pub fn new(config: SolitonConfig<T>, phi: SharedField<T>, f: SharedField<T>, h: SharedField<T>) -> Result<Self> {
        let n = config.n();
        for (name, field) in [("phi", &phi), ("f", &f), ("h", &h)] {
            if field.dim() != n {
                return Err(Error::InvalidConfig(format!(
                    "{name} is defined on R^{} but the base is R^{n}",
                    field.dim()
                )));
            }
        }
        Ok(Self { config, phi, f, h, fiber: Fiber::Abstract, fallback: FdScheme::default() })
    }

    /// Switches to the concrete flat-torus fiber; requires λ_F = 0.
    pub fn with_flat_torus_fiber(mut self) -> Result<Self> {
        if self.config.lambda_f() != T::zero() {
            return Err(Error::InvalidConfig("a flat torus fiber has lambda_F = 0".into()));
        }
        self.fiber = Fiber::FlatTorus;
        Ok(self)
    }

    pub fn with_fallback(mut self, scheme: FdScheme<T>) -> Self {
        self.fallback = scheme;
        self
    }

    pub fn fiber(&self) -> Fiber {
        self.fiber
    }

    pub fn jets(&self, point: &[T]) -> Result<WarpedJets<T>> {
        let (phi, c1) = jet_with_channel(self.phi.as_ref(), point, &self.fallback)?;
        let (f, c2) = jet_with_channel(self.f.as_ref(), point, &self.fallback)?;
        let (h, c3) = jet_with_channel(self.h.as_ref(), point, &self.fallback)?;
        WarpedJets::new(&self.config, phi, f, h, c1.combine(c2).combine(c3))
    }

    /// The (n+m)-dimensional metric g/φ² ⊕ f² g_F with the flat-torus fiber.
    pub fn block_metric(&self) -> Result<BlockMetric<T>> {
        if self.fiber != Fiber::FlatTorus {
            return Err(Error::UnsupportedFiberMode);
        }
        Ok(BlockMetric {
            sig: self.config.sig().clone(),
            m: self.config.m(),
            phi: self.phi.clone(),
            f: self.f.clone(),
        })
    }

    /// h viewed as a function on the total space (independent of the fiber).
    pub fn lifted_potential(&self) -> LiftedField<T> {
        LiftedField { inner: self.h.clone(), fiber_dim: self.config.m() }
    }
}

/// Jets of φ, f and h at one base point.
#[derive(Debug, Clone)]
pub struct WarpedJets<T: Real> {
    pub phi: Jet<T>,
    pub f: Jet<T>,
    pub h: Jet<T>,
    pub channel: Channel,
    geometry: ConformalGeometry<T>,
    config: SolitonConfig<T>,
}

impl<T: Real> WarpedJets<T> {
    pub fn new(config: &SolitonConfig<T>, phi: Jet<T>, f: Jet<T>, h: Jet<T>, channel: Channel) -> Result<Self> {
        if !(f.value > T::zero()) {
            return Err(Error::Domain(format!("warping function must be positive, got {}", f.value)));
        }
        let geometry = ConformalGeometry::from_jet(config.sig(), phi.clone(), channel)?;
        Ok(Self { phi, f, h, channel, geometry, config: config.clone() })
    }

    pub fn geometry(&self) -> &ConformalGeometry<T> {
        &self.geometry
    }

    fn sum_eps(&self, term: impl Fn(usize) -> T) -> T {
        let sig = self.config.sig();
        (0..sig.dim()).map(|k| sig.eps::<T>(k) * term(k)).sum()
    }
}

/// Base block of Ric_g̃ and the coefficient γ with Ric_g̃(Y, Z) = γ g_F(Y, Z).
#[derive(Debug, Clone, PartialEq)]
pub struct RicciBlocks<T> {
    pub base: DenseMatrix<T>,
    pub fiber_scalar: T,
    pub channel: Channel,
}

pub fn warped_ricci_blocks<T: Real>(data: &WarpedData<T>, point: &[T]) -> Result<RicciBlocks<T>> {
    Ok(ricci_blocks_from_jets(&data.jets(point)?))
}

pub fn ricci_blocks_from_jets<T: Real>(j: &WarpedJets<T>) -> RicciBlocks<T> {
    let m = T::of_usize(j.config.m());
    let geo = j.geometry();
    let base = geo.ricci().sub(&geo.hessian(&j.f).scale(m / j.f.value));
    let (lap, grad_sq) = geo.laplacian_and_gradsq(&j.f);
    let fiber_scalar = j.config.lambda_f() - j.f.value * lap - (m - T::one()) * grad_sq;
    RicciBlocks { base, fiber_scalar, channel: j.channel }
}

/// Fiber Ricci coefficient for m = 1 written as −f Δ_ḡ f.
pub fn single_fiber_ricci_scalar<T: Real>(j: &WarpedJets<T>) -> T {
    let (lap, _) = j.geometry().laplacian_and_gradsq(&j.f);
    -j.f.value * lap
}

/// Coefficient of g_F in Hess_g̃(h) for h depending on the base only: f φ² Σ ε_k f_k h_k.
pub fn fiber_hessian_scalar<T: Real>(data: &WarpedData<T>, point: &[T]) -> Result<T> {
    Ok(fiber_hessian_from_jets(&data.jets(point)?))
}

pub fn fiber_hessian_from_jets<T: Real>(j: &WarpedJets<T>) -> T {
    let p = j.phi.value;
    j.f.value * p * p * j.sum_eps(|k| j.f.gradient[k] * j.h.gradient[k])
}

/// Residuals of the three base-coordinate soliton equations at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeResiduals<T> {
    /// Mixed equations for i ≠ j (diagonal entries are zero).
    pub offdiag: DenseMatrix<T>,
    /// One equation per base direction.
    pub diag: Vec<T>,
    /// The fiber equation.
    pub fiber: T,
    /// max(1, |ρ| · |g̃|_∞) at the point.
    pub scale: T,
}

impl<T: Real> PdeResiduals<T> {
    pub fn max_abs(&self) -> T {
        self.diag.iter().fold(self.offdiag.max_abs().max(self.fiber.abs()), |acc, v| acc.max(v.abs()))
    }

    pub fn max_normalized(&self) -> T {
        self.max_abs() / self.scale
    }
}

pub fn pde_residuals<T: Real>(data: &WarpedData<T>, point: &[T]) -> Result<PdeResiduals<T>> {
    Ok(pde_residuals_from_jets(&data.jets(point)?))
}

pub fn pde_residuals_from_jets<T: Real>(j: &WarpedJets<T>) -> PdeResiduals<T> {
    let n = j.config.n();
    let nt = T::of_usize(n);
    let m = T::of_usize(j.config.m());
    let (one, two) = (T::one(), T::lit(2.0));
    let rho = j.config.rho();
    let sig = j.config.sig();
    let (p, dp, ddp) = (j.phi.value, &j.phi.gradient, &j.phi.hessian);
    let (f, df, ddf) = (j.f.value, &j.f.gradient, &j.f.hessian);
    let (dh, ddh) = (&j.h.gradient, &j.h.hessian);

    let offdiag = DenseMatrix::from_fn(n, |i, k| {
        if i == k {
            return T::zero();
        }
        (nt - two) * f * ddp[(i, k)] + f * p * ddh[(i, k)] - m * p * ddf[(i, k)] - m * dp[i] * df[k] - m * dp[k] * df[i]
            + f * dp[i] * dh[k]
            + f * dp[k] * dh[i]
    });

    let trace_part = j.sum_eps(|k| {
        f * p * ddp[(k, k)] - (nt - one) * f * dp[k] * dp[k] + m * p * dp[k] * df[k] - f * p * dp[k] * dh[k]
    });
    let diag = (0..n)
        .map(|i| {
            let e = sig.eps::<T>(i);
            p * ((nt - two) * f * ddp[(i, i)] + f * p * ddh[(i, i)] - m * p * ddf[(i, i)] - two * m * dp[i] * df[i]
                + two * f * dp[i] * dh[i])
                + e * trace_part
                - e * rho * f
        })
        .collect();

    let fiber = j.sum_eps(|k| {
        -f * p * p * ddf[(k, k)] + (nt - two) * f * p * df[k] * dp[k] - (m - one) * p * p * df[k] * df[k]
            + f * p * p * df[k] * dh[k]
    }) - (rho * f * f - j.config.lambda_f());

    let metric_size = (one / (p * p)).max(f * f);
    let scale = one.max(rho.abs() * metric_size);
    PdeResiduals { offdiag, diag, fiber, scale }
}

/// Fiber equation in the one-dimensional-fiber form
/// −φ²Σε f_kk + (n−2)φΣε f_kφ_k + φ²Σε f_kh_k − ρ f.
pub fn single_fiber_residual<T: Real>(j: &WarpedJets<T>) -> T {
    let nt = T::of_usize(j.config.n());
    let p = j.phi.value;
    let f = &j.f;
    -p * p * j.sum_eps(|k| f.hessian[(k, k)]) + (nt - T::lit(2.0)) * p * j.sum_eps(|k| f.gradient[k] * j.phi.gradient[k])
        + p * p * j.sum_eps(|k| f.gradient[k] * j.h.gradient[k])
        - j.config.rho() * f.value
}

/// Ric_g̃ + Hess_g̃(h) − ρ g̃ on the (n+m)-dimensional flat-torus product,
/// assembled from the closed-form residuals.
pub fn assembled_soliton_residual<T: Real>(j: &WarpedJets<T>) -> DenseMatrix<T> {
    let n = j.config.n();
    let m = j.config.m();
    let r = pde_residuals_from_jets(j);
    let p = j.phi.value;
    let f = j.f.value;
    DenseMatrix::from_fn(n + m, |a, b| match (a < n, b < n) {
        (true, true) if a == b => r.diag[a] / (f * p * p),
        (true, true) => r.offdiag[(a, b)] / (f * p),
        (false, false) if a == b => r.fiber,
        _ => T::zero(),
    })
}

/// g/φ² ⊕ f² I_m on R^n × R^m.
pub struct BlockMetric<T: Real> {
    sig: Signature,
    m: usize,
    phi: SharedField<T>,
    f: SharedField<T>,
}

impl<T: Real> MetricField<T> for BlockMetric<T> {
    fn dim(&self) -> usize {
        self.sig.dim() + self.m
    }

    fn components(&self, x: &[T]) -> DenseMatrix<T> {
        let n = self.sig.dim();
        let base = &x[..n];
        let p = self.phi.value(base);
        let f = self.f.value(base);
        let diag: Vec<T> = (0..n + self.m)
            .map(|i| if i < n { self.sig.eps::<T>(i) / (p * p) } else { f * f })
            .collect();
        DenseMatrix::from_diagonal(&diag)
    }

    fn contains(&self, x: &[T]) -> bool {
        let base = &x[..self.sig.dim()];
        self.phi.contains(base)
            && self.f.contains(base)
            && self.phi.value(base) > T::zero()
            && self.f.value(base) > T::zero()
    }
}

/// A base field pulled back to the total space.
pub struct LiftedField<T: Real> {
    inner: SharedField<T>,
    fiber_dim: usize,
}

impl<T: Real> ScalarField<T> for LiftedField<T> {
    fn dim(&self) -> usize {
        self.inner.dim() + self.fiber_dim
    }

    fn value(&self, x: &[T]) -> T {
        self.inner.value(&x[..self.inner.dim()])
    }

    fn contains(&self, x: &[T]) -> bool {
        self.inner.contains(&x[..self.inner.dim()])
    }
}

/// Finite-difference residual on the total space, split into blocks.
#[derive(Debug, Clone)]
pub struct OracleResidual<T> {
    pub full: DenseMatrix<T>,
    pub n: usize,
}

impl<T: Real> OracleResidual<T> {
    pub fn base_block(&self) -> DenseMatrix<T> {
        self.full.block(0, self.n)
    }

    pub fn fiber_block(&self) -> DenseMatrix<T> {
        self.full.block(self.n, self.full.dim() - self.n)
    }

    pub fn max_mixed(&self) -> T {
        let d = self.full.dim();
        let mut worst = T::zero();
        for i in 0..self.n {
            for a in self.n..d {
                worst = worst.max(self.full[(i, a)].abs()).max(self.full[(a, i)].abs());
            }
        }
        worst
    }

    /// Largest deviation of the fiber block from c·I with c its mean diagonal.
    pub fn fiber_proportionality_deviation(&self) -> (T, T) {
        let fb = self.fiber_block();
        let m = fb.dim();
        let c = (0..m).map(|a| fb[(a, a)]).sum::<T>() / T::of_usize(m);
        let dev = fb.sub(&DenseMatrix::identity(m).scale(c)).max_abs();
        (dev, c)
    }
}

/// Base point padded with zero fiber coordinates.
pub fn total_space_point<T: Real>(base: &[T], m: usize) -> Vec<T> {
    let mut x = base.to_vec();
    x.extend(std::iter::repeat(T::zero()).take(m));
    x
}

pub fn oracle_residual<T: Real>(data: &WarpedData<T>, base_point: &[T], scheme: &FdScheme<T>) -> Result<OracleResidual<T>> {
    let metric = data.block_metric()?;
    let h = data.lifted_potential();
    let x = total_space_point(base_point, data.config.m());
    let full = soliton_residual_field(&metric, &h, data.config.rho(), &x, scheme)?;
    Ok(OracleResidual { full, n: data.config.n() })
}

/// Outcome of the fiber-Einstein check over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberCheckReport {
    pub points: usize,
    /// max over points of |fiber block − c·g_F|.
    pub max_deviation: f64,
    /// max over points of |mixed block|.
    pub max_mixed: f64,
    /// max over points of |c − closed-form fiber residual|.
    pub max_scalar_mismatch: f64,
}

pub fn einstein_fiber_check<T: Real>(
    data: &WarpedData<T>,
    grid: &[Vec<T>],
    scheme: &FdScheme<T>,
) -> Result<FiberCheckReport> {
    if data.fiber() != Fiber::FlatTorus {
        return Err(Error::UnsupportedFiberMode);
    }
    let mut report = FiberCheckReport { points: grid.len(), max_deviation: 0.0, max_mixed: 0.0, max_scalar_mismatch: 0.0 };
    for point in grid {
        let oracle = oracle_residual(data, point, scheme)?;
        let (dev, c) = oracle.fiber_proportionality_deviation();
        let closed = pde_residuals(data, point)?.fiber;
        report.max_deviation = report.max_deviation.max(dev.to_f64_lossy());
        report.max_mixed = report.max_mixed.max(oracle.max_mixed().to_f64_lossy());
        report.max_scalar_mismatch = report.max_scalar_mismatch.max((c - closed).abs().to_f64_lossy());
    }
    Ok(report)
}

/// Result of searching a grid for a nonvanishing entry of Hess_ḡ(f).
#[derive(Debug, Clone, PartialEq)]
pub enum HessianWitness {
    Found { point: Vec<f64>, i: usize, k: usize, value: f64 },
    /// Every sampled entry was below the threshold; nothing can be concluded.
    Inconclusive,
}

pub fn base_hessian_witness<T: Real>(data: &WarpedData<T>, grid: &[Vec<T>], threshold: T) -> Result<HessianWitness> {
    for point in grid {
        let j = data.jets(point)?;
        let hess = j.geometry().hessian(&j.f);
        let n = hess.dim();
        for i in 0..n {
            for k in i..n {
                if hess[(i, k)].abs() > threshold {
                    return Ok(HessianWitness::Found {
                        point: point.iter().map(|v| v.to_f64_lossy()).collect(),
                        i,
                        k,
                        value: hess[(i, k)].to_f64_lossy(),
                    });
                }
            }
        }
    }
    Ok(HessianWitness::Inconclusive)
}

/// Per-equation maxima of the closed-form residuals over a set of base points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSweep {
    pub points: usize,
    pub max_offdiag: f64,
    pub max_diag: f64,
    pub max_fiber: f64,
    pub max_normalized: f64,
}

impl ResidualSweep {
    pub fn max_abs(&self) -> f64 {
        self.max_offdiag.max(self.max_diag).max(self.max_fiber)
    }
}

pub fn residual_sweep<T: Real>(data: &WarpedData<T>, grid: &[Vec<T>]) -> Result<ResidualSweep> {
    let mut sweep = ResidualSweep { points: grid.len(), max_offdiag: 0.0, max_diag: 0.0, max_fiber: 0.0, max_normalized: 0.0 };
    for point in grid {
        let r = pde_residuals(data, point)?;
        sweep.max_offdiag = sweep.max_offdiag.max(r.offdiag.max_abs().to_f64_lossy());
        sweep.max_diag = sweep.max_diag.max(r.diag.iter().fold(0.0, |a, v| a.max(v.abs().to_f64_lossy())));
        sweep.max_fiber = sweep.max_fiber.max(r.fiber.abs().to_f64_lossy());
        sweep.max_normalized = sweep.max_normalized.max(r.max_normalized().to_f64_lossy());
    }
    Ok(sweep)
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u32, base: u32) -> f64 {
    let inv = 1.0 / base as f64;
    let mut r = 0.0;
    let mut scale = inv;
    while i > 0 {
        r += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    r
}

/// Base sample points in the box center ± half_width.
pub fn lattice_grid<T: Real>(center: &[T], half_width: T, per_axis: usize) -> Vec<Vec<T>> {
    let n = center.len();
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|a| {
                    let c = idx % per_axis;
                    idx /= per_axis;
                    let t = if per_axis == 1 { 0.0 } else { 2.0 * c as f64 / (per_axis - 1) as f64 - 1.0 };
                    center[a] + half_width * T::lit(t)
                })
                .collect()
        })
        .collect()
}

/// Halton points in the box center ± half_width (n ≤ 16).
pub fn halton_grid<T: Real>(center: &[T], half_width: T, count: usize) -> Vec<Vec<T>> {
    (1..=count as u32)
        .map(|i| {
            center
                .iter()
                .enumerate()
                .map(|(a, &c)| c + half_width * T::lit(2.0 * radical_inverse(i, PRIMES[a % 16]) - 1.0))
                .collect()
        })
        .collect()
}

/// 7^n lattice for n ≤ 3, 32 Halton points above.
pub fn default_grid<T: Real>(center: &[T], half_width: T) -> Vec<Vec<T>> {
    if center.len() >= 4 {
        halton_grid(center, half_width, 32)
    } else {
        lattice_grid(center, half_width, 7)
    }
}
