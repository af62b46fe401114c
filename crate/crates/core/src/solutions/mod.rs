//! Explicit solution families and a catalog of named instances.

mod null_quadrature;
mod phase_flow;
mod power_law;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal::Signature;
use crate::error::{Error, Result};
use crate::invariant::{classify_direction, CausalType, Direction};
use crate::profile::{fn_profile, ConstantProfile, Interval, ProfileTriple, SharedProfile};
use crate::scalar::Real;
use crate::warped::SolitonConfig;

pub use null_quadrature::{build_null_quadrature, NullPotential, NullQuadratureParams, INNER_TOLERANCE, OUTER_TOLERANCE};
pub use phase_flow::{
    build_phase_flow, Orientation, PhaseConstants, PhaseFlow, PhaseFlowParams, TruncationReport, PHASE_FLOW_MAX_STEP,
    PHASE_FLOW_TOLERANCE,
};
pub use power_law::{build_power_law, Branch, LogProfile, PowerLawParams, PowerProfile};

/// Profile pairs (φ, f) with closed-form anchors for the null-direction family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profiles", rename_all = "kebab-case")]
pub enum NullProfiles {
    /// f = φ = k·e^{aξ}, a ≠ 0.
    Exponential { k: f64, a: f64 },
    /// f = e^{−ξ²}, φ = e^{ξ}.
    GaussianExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullQuadratureSpec {
    #[serde(flatten)]
    pub profiles: NullProfiles,
    #[serde(default)]
    pub c4: f64,
    #[serde(default)]
    pub c5: f64,
}

impl NullQuadratureSpec {
    /// Profiles and the anchors that put c4, c5 in the closed-form normalization.
    pub fn params<T: Real>(&self, n: usize, m: usize) -> Result<NullQuadratureParams<T>> {
        let (nt, mt) = (n as f64, m as f64);
        let (phi, f, g0, h0): (SharedProfile<T>, SharedProfile<T>, f64, f64) = match self.profiles {
            NullProfiles::Exponential { k, a } => {
                if !(k > 0.0) || a == 0.0 || !a.is_finite() {
                    return Err(Error::InvalidParameter(format!("need k > 0 and a != 0, got k = {k}, a = {a}")));
                }
                let (kt, at) = (T::lit(k), T::lit(a));
                let p = fn_profile(move |x: T| {
                    let v = kt * (at * x).exp();
                    (v, at * v, at * at * v)
                });
                (p.clone(), p, (3.0 * mt - (nt - 2.0)) * a * k * k / 2.0, -self.c4 / (2.0 * a * k * k))
            }
            NullProfiles::GaussianExp => {
                let phi = fn_profile(|x: T| (x.exp(), x.exp(), x.exp()));
                let f = fn_profile(|x: T| {
                    let v = (-x * x).exp();
                    (v, -T::lit(2.0) * x * v, (T::lit(4.0) * x * x - T::lit(2.0)) * v)
                });
                (phi, f, mt - (nt - 2.0) / 2.0, -self.c4 / 2.0)
            }
        };
        Ok(NullQuadratureParams {
            c4: T::lit(self.c4),
            c5: T::lit(self.c5),
            inner_anchor: T::lit(g0),
            outer_anchor: T::lit(h0),
            ..NullQuadratureParams::new(phi, f, Interval::whole_line())
        })
    }
}

/// Serializable description of a solution family instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    #[serde(alias = "thm14")]
    PowerLaw(PowerLawParams<f64>),
    #[serde(alias = "thm15")]
    PhaseFlow { params: PhaseFlowParams<f64>, span: [f64; 2] },
    #[serde(alias = "thm17")]
    NullQuadrature(NullQuadratureSpec),
    /// Constant φ and f with h = 0.
    FlatProduct { phi: f64, f: f64 },
}

/// A family instance ready for evaluation.
#[derive(Clone)]
pub struct BuiltFamily<T: Real> {
    pub config: SolitonConfig<T>,
    pub direction: Direction<T>,
    pub triple: ProfileTriple<T>,
    pub phase: Option<Arc<PhaseFlow<T>>>,
    /// The constant k in φ'/φ = k f'/f, when the family has one.
    pub k: Option<T>,
}

fn cast_power<T: Real>(p: &PowerLawParams<f64>) -> PowerLawParams<T> {
    PowerLawParams { k: T::lit(p.k), c1: T::lit(p.c1), c2: T::lit(p.c2), b: T::lit(p.b), branch: p.branch }
}

fn cast_phase<T: Real>(p: &PhaseFlowParams<f64>) -> PhaseFlowParams<T> {
    PhaseFlowParams {
        k: T::lit(p.k),
        c3: T::lit(p.c3),
        z0: T::lit(p.z0),
        xi0: T::lit(p.xi0),
        c1: T::lit(p.c1),
        c2: T::lit(p.c2),
        h0: T::lit(p.h0),
        orientation: p.orientation,
    }
}

/// Converts an f64 configuration to another scalar type.
pub fn cast_config<T: Real>(c: &SolitonConfig<f64>) -> Result<SolitonConfig<T>> {
    SolitonConfig::new(c.sig().clone(), c.m(), T::lit(c.rho()), T::lit(c.lambda_f()))
}

impl FamilySpec {
    pub fn build<T: Real>(&self, config: &SolitonConfig<T>, direction: &Direction<T>) -> Result<BuiltFamily<T>> {
        let (n, m) = (config.n(), config.m());
        let unit_only = || -> Result<()> {
            if direction.is_null() {
                Err(Error::WrongCausalType { expected: "spacelike or timelike" })
            } else {
                Ok(())
            }
        };
        let steady = || -> Result<()> {
            if config.is_steady_ricci_flat() {
                Ok(())
            } else {
                Err(Error::InvalidConfig("this family is a steady solution with a Ricci-flat fiber; set rho = lambda_f = 0".into()))
            }
        };
        let (triple, phase, k) = match self {
            FamilySpec::PowerLaw(p) => {
                unit_only()?;
                steady()?;
                let p = cast_power::<T>(p);
                (build_power_law(&p, n, m)?, None, Some(p.k))
            }
            FamilySpec::PhaseFlow { params, span } => {
                unit_only()?;
                steady()?;
                let p = cast_phase::<T>(params);
                let flow = build_phase_flow(&p, n, m, (T::lit(span[0]), T::lit(span[1])))?;
                (flow.triple(), Some(flow), Some(p.k))
            }
            FamilySpec::NullQuadrature(spec) => {
                let k = match spec.profiles {
                    NullProfiles::Exponential { .. } => Some(T::one()),
                    NullProfiles::GaussianExp => None,
                };
                (build_null_quadrature(&spec.params::<T>(n, m)?, config, direction)?, None, k)
            }
            FamilySpec::FlatProduct { phi, f } => {
                steady()?;
                if !(*phi > 0.0 && *f > 0.0) {
                    return Err(Error::InvalidParameter("flat product needs positive phi and f".into()));
                }
                let c = |v: f64| -> SharedProfile<T> { Arc::new(ConstantProfile(T::lit(v))) };
                (ProfileTriple::new(c(*phi), c(*f), c(0.0), Interval::whole_line()), None, None)
            }
        };
        Ok(BuiltFamily { config: config.clone(), direction: direction.clone(), triple, phase, k })
    }
}

/// A named, fully specified solution instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetSpec {
    pub name: String,
    pub description: String,
    pub config: SolitonConfig<f64>,
    pub direction: Vec<f64>,
    pub family: FamilySpec,
    /// Suggested ξ range for sampling and residual sweeps.
    pub xi_range: [f64; 2],
}

impl PresetSpec {
    pub fn build<T: Real>(&self) -> Result<BuiltFamily<T>> {
        let config = cast_config::<T>(&self.config)?;
        let alpha: Vec<T> = self.direction.iter().map(|&a| T::lit(a)).collect();
        let direction = classify_direction(config.sig(), &alpha)?;
        self.family.build(&config, &direction)
    }

    pub fn causal_type(&self) -> Result<CausalType> {
        Ok(classify_direction::<f64>(self.config.sig(), &self.direction)?.causal_type())
    }
}

fn spec(name: &str, description: &str, sig: Vec<i8>, m: usize, direction: Vec<f64>, family: FamilySpec, xi_range: [f64; 2]) -> PresetSpec {
    let sig = Signature::new(sig).expect("catalog signatures are valid");
    PresetSpec {
        name: name.into(),
        description: description.into(),
        config: SolitonConfig::steady(sig, m).expect("catalog configurations are valid"),
        direction,
        family,
        xi_range,
    }
}

/// The catalog of named instances.
pub fn presets() -> Vec<PresetSpec> {
    vec![
        spec(
            "null-exp",
            "null direction in (-,+,+), m = 2, f = phi = e^xi, c4 = c5 = 0",
            vec![-1, 1, 1],
            2,
            vec![1.0, 1.0, 0.0],
            FamilySpec::NullQuadrature(NullQuadratureSpec { profiles: NullProfiles::Exponential { k: 1.0, a: 1.0 }, c4: 0.0, c5: 0.0 }),
            [-2.0, 2.0],
        ),
        spec(
            "null-gauss",
            "null direction in (-,+,+), m = 2, f = exp(-xi^2), phi = e^xi, c4 = c5 = 0",
            vec![-1, 1, 1],
            2,
            vec![1.0, 1.0, 0.0],
            FamilySpec::NullQuadrature(NullQuadratureSpec { profiles: NullProfiles::GaussianExp, c4: 0.0, c5: 0.0 }),
            [-2.0, 2.0],
        ),
        spec(
            "power-law-riemannian",
            "Euclidean base, n = 3, m = 2, k = 1, plus branch, b = 0 (domain xi > 0)",
            vec![1, 1, 1],
            2,
            vec![1.0, 0.0, 0.0],
            FamilySpec::PowerLaw(PowerLawParams::new(1.0, Branch::Plus)),
            [0.5, 2.5],
        ),
        spec(
            "power-law-lorentzian-timelike",
            "Lorentzian base, n = 4, m = 1, timelike direction, k = 0.5, minus branch, b = 1",
            vec![-1, 1, 1, 1],
            1,
            vec![1.0, 0.0, 0.0, 0.0],
            FamilySpec::PowerLaw(PowerLawParams { b: 1.0, ..PowerLawParams::new(0.5, Branch::Minus) }),
            [-1.0, 0.4],
        ),
        spec(
            "power-law-lorentzian-spacelike",
            "Lorentzian base, n = 3, m = 2, spacelike direction, k = 2, plus branch, b = 1",
            vec![-1, 1, 1],
            2,
            vec![0.0, 1.0, 0.0],
            FamilySpec::PowerLaw(PowerLawParams { b: 1.0, ..PowerLawParams::new(2.0, Branch::Plus) }),
            [0.0, 2.0],
        ),
        spec(
            "phase-flow-riemannian",
            "Euclidean base, n = 3, m = 2, k = 1, c3 = 1, z(0) = 3, integrated on [-0.5, 0.5]",
            vec![1, 1, 1],
            2,
            vec![1.0, 0.0, 0.0],
            FamilySpec::PhaseFlow { params: PhaseFlowParams::new(1.0, 1.0, 3.0), span: [-0.5, 0.5] },
            [-0.4, 0.4],
        ),
        spec(
            "flat-product",
            "Euclidean base, n = 3, m = 2, constant phi = f = 1, h = 0",
            vec![1, 1, 1],
            2,
            vec![1.0, 0.0, 0.0],
            FamilySpec::FlatProduct { phi: 1.0, f: 1.0 },
            [-1.0, 1.0],
        ),
    ]
}

/// Looks up a preset by name. The null-direction examples are also reachable
/// as "thm17-exp" and "thm17-gauss".
pub fn preset(name: &str) -> Option<PresetSpec> {
    let canonical = match name {
        "thm17-exp" => "null-exp",
        "thm17-gauss" => "null-gauss",
        other => other,
    };
    presets().into_iter().find(|p| p.name == canonical)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_populated_and_unique() {
        let all = presets();
        assert!(all.len() >= 4);
        let mut names: Vec<_> = all.iter().map(|p| p.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
        assert!(preset("thm17-exp").is_some());
        assert!(preset("nope").is_none());
    }

    #[test]
    fn presets_round_trip_through_toml() {
        for p in presets() {
            let text = toml::to_string(&p).unwrap();
            let back: PresetSpec = toml::from_str(&text).unwrap();
            assert_eq!(back, p, "{text}");
        }
    }

    #[test]
    fn presets_build() {
        for p in presets() {
            let built = p.build::<f64>().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            let mid = 0.5 * (p.xi_range[0] + p.xi_range[1]);
            assert!(built.triple.eval(mid).is_ok(), "{}", p.name);
        }
    }

    #[test]
    fn family_kind_aliases() {
        let f: FamilySpec = toml::from_str("kind = \"thm14\"\nk = 1.0\n").unwrap();
        assert_eq!(f, FamilySpec::PowerLaw(PowerLawParams::new(1.0, Branch::Plus)));
        let f: FamilySpec = toml::from_str("kind = \"null-quadrature\"\nprofiles = \"gaussian-exp\"\nc4 = 1.0\n").unwrap();
        assert_eq!(f, FamilySpec::NullQuadrature(NullQuadratureSpec { profiles: NullProfiles::GaussianExp, c4: 1.0, c5: 0.0 }));
    }
}
