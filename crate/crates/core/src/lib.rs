//! Warped-product gradient Ricci solitons over conformally flat
//! pseudo-Euclidean bases.
//!
//! The base is ℝⁿ with g = diag(ε₁, …, εₙ) rescaled to g/φ², warped with an
//! Einstein fiber of dimension m. The crate evaluates the soliton equations in
//! closed form, cross-checks them against a finite-difference curvature
//! oracle, reduces them along translation-invariant directions, and builds the
//! explicit solution families.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`.
//!
//! ```
//! use warped_soliton::invariant::pde_ode_consistency;
//! use warped_soliton::preset;
//!
//! # fn main() -> warped_soliton::Result<()> {
//! let p = preset("power-law-riemannian").unwrap();
//! let built = p.build::<f64>()?;
//! let pts: Vec<Vec<f64>> = [0.8, 1.2, 2.0]
//!     .iter()
//!     .map(|&xi| built.direction.base_point(xi, &[0.0, 0.3, -0.1]))
//!     .collect();
//! let rep = pde_ode_consistency(&built.config, &built.triple, &built.direction, &pts)?;
//! assert!(rep.max_pde_residual < 1e-9);
//! # Ok(())
//! # }
//! ```

pub mod conformal;
pub mod error;
pub mod field;
pub mod invariant;
pub mod linalg;
pub mod numerics;
pub mod profile;
pub mod scalar;
pub mod solutions;
pub mod tensor;
pub mod warped;

pub use conformal::{ConformalFactor, ConformalGeometry, ConformalMetric, Signature};
pub use error::{Error, Result};
pub use field::{Channel, Jet, MetricField, ScalarField, SharedField};
pub use invariant::{classify_direction, CausalType, Direction, InvariantProblem, PhaseState};
pub use linalg::DenseMatrix;
pub use profile::{Interval, ProfileJet, ProfileTriple, ScalarProfile, SharedProfile};
pub use scalar::Real;
pub use solutions::{preset, presets, BuiltFamily, FamilySpec, PresetSpec};
pub use tensor::{Christoffel, FdScheme};
pub use warped::{PdeResiduals, SolitonConfig, WarpedData};

pub type Config64 = SolitonConfig<f64>;
pub type Direction64 = Direction<f64>;
pub type Triple64 = ProfileTriple<f64>;
pub type WarpedData64 = WarpedData<f64>;
pub type Scheme64 = FdScheme<f64>;
pub type Matrix64 = DenseMatrix<f64>;
pub type Family64 = BuiltFamily<f64>;

pub type Config32 = SolitonConfig<f32>;
pub type Triple32 = ProfileTriple<f32>;
