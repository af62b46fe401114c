//! Turning a run configuration into evaluable profiles.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warped_soliton::invariant::pull_back;
use warped_soliton::profile::{fn_profile, ConstantProfile, ModulatedProfile};
use warped_soliton::solutions::{PhaseFlow, TruncationReport};
use warped_soliton::{
    classify_direction, CausalType, Direction, FamilySpec, ProfileTriple, SolitonConfig, WarpedData,
};

use crate::config::{DefectSection, DefectTarget, ResolvedFamily, RunConfig};
use crate::error::CliError;
use crate::external::JetTable;

pub struct Model {
    pub config: SolitonConfig<f64>,
    pub direction: Direction<f64>,
    pub triple: ProfileTriple<f64>,
    pub kind: String,
    pub preset: Option<String>,
    pub phase: Option<Arc<PhaseFlow<f64>>>,
    pub k: Option<f64>,
    /// Grid ξ values, inside the requested range.
    pub grid: Vec<f64>,
    pub xi_range: (f64, f64),
}

impl Model {
    pub fn build(run: &RunConfig) -> Result<Self, CliError> {
        let r = run.resolve()?;
        let direction = classify_direction(r.config.sig(), &r.alpha).map_err(|e| CliError::config("direction.alpha", e))?;
        let (triple, kind, preset, phase, k, table_xis) = match &r.family {
            ResolvedFamily::Spec { spec, preset } => {
                let built = spec.build(&r.config, &direction).map_err(|e| CliError::config("family", e))?;
                (built.triple, kind_name(spec).to_string(), preset.clone(), built.phase, built.k, None)
            }
            ResolvedFamily::External(path) => {
                let table = JetTable::read_csv(path)?;
                let xis = table.xis().to_vec();
                (table.triple(), "external-profile".to_string(), None, None, None, Some(xis))
            }
        };
        let triple = match &run.defect {
            Some(d) => apply_defect(&triple, d),
            None => triple,
        };
        let (lo, hi) = r.xi_range;
        let grid = match table_xis {
            Some(xis) => xis.into_iter().filter(|x| *x >= lo && *x <= hi).collect(),
            None => linspace(lo, hi, run.grid.samples),
        };
        if grid.is_empty() {
            return Err(CliError::Config(format!("grid: no samples in [{lo}, {hi}]")));
        }
        let xi_range = (grid[0], grid[grid.len() - 1]);
        Ok(Self { config: r.config, direction, triple, kind, preset, phase, k, grid, xi_range })
    }

    pub fn causal_type(&self) -> CausalType {
        self.direction.causal_type()
    }

    pub fn equation_names(&self) -> &'static [&'static str] {
        if self.direction.is_null() {
            &["mixed"]
        } else {
            &["mixed", "trace", "fiber"]
        }
    }

    pub fn warped_data(&self) -> Result<WarpedData<f64>, CliError> {
        pull_back(&self.config, &self.direction, &self.triple).map_err(|e| CliError::config("pull-back", e))
    }

    /// Deterministic base points: ξ drawn from the grid, offsets uniform in [−w, w]ⁿ.
    pub fn base_points(&self, count: usize, seed: u64, half_width: f64) -> Vec<(f64, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.config.n();
        (0..count)
            .map(|_| {
                let xi = self.grid[rng.gen_range(0..self.grid.len())];
                let offset: Vec<f64> =
                    (0..n).map(|_| if half_width > 0.0 { rng.gen_range(-half_width..=half_width) } else { 0.0 }).collect();
                (xi, self.direction.base_point(xi, &offset))
            })
            .collect()
    }

    pub fn truncation(&self) -> Option<TruncationReport> {
        self.phase.as_ref().map(|p| p.report.clone())
    }
}

pub fn kind_name(spec: &FamilySpec) -> &'static str {
    match spec {
        FamilySpec::PowerLaw(_) => "power-law",
        FamilySpec::PhaseFlow { .. } => "phase-flow",
        FamilySpec::NullQuadrature(_) => "null-quadrature",
        FamilySpec::FlatProduct { .. } => "flat-product",
    }
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

pub fn apply_defect(triple: &ProfileTriple<f64>, defect: &DefectSection) -> ProfileTriple<f64> {
    let (target, replacement): (DefectTarget, Arc<dyn warped_soliton::ScalarProfile<f64>>) = match *defect {
        DefectSection::Replace { target, value } => (target, Arc::new(ConstantProfile(value))),
        DefectSection::Modulate { target, amplitude, frequency } => {
            let inner = match target {
                DefectTarget::Phi => triple.phi.clone(),
                DefectTarget::F => triple.f.clone(),
                DefectTarget::H => triple.h.clone(),
            };
            let factor = fn_profile(move |x: f64| {
                let (s, c) = (frequency * x).sin_cos();
                (1.0 + amplitude * s, amplitude * frequency * c, -amplitude * frequency * frequency * s)
            });
            (target, Arc::new(ModulatedProfile { inner, factor }))
        }
    };
    match target {
        DefectTarget::Phi => triple.with_phi(replacement),
        DefectTarget::F => triple.with_f(replacement),
        DefectTarget::H => triple.with_h(replacement),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(extra: &str) -> RunConfig {
        RunConfig::from_toml(&format!("[family]\nkind = \"preset\"\nname = \"power-law-riemannian\"\n{extra}")).unwrap()
    }

    #[test]
    fn grid_and_points_are_deterministic() {
        let m = Model::build(&run("[grid]\nsamples = 5\nseed = 7\n")).unwrap();
        assert_eq!(m.grid, vec![0.5, 1.0, 1.5, 2.0, 2.5]);
        let a = m.base_points(4, 7, 0.5);
        let b = m.base_points(4, 7, 0.5);
        assert_eq!(a, b);
        for (xi, x) in &a {
            assert!((m.direction.xi(x) - xi).abs() < 1e-12);
        }
    }

    #[test]
    fn defects_change_only_their_target() {
        let m = Model::build(&run("[defect]\nmode = \"replace\"\ntarget = \"h\"\nvalue = 0.0\n")).unwrap();
        let clean = Model::build(&run("")).unwrap();
        let (a, b) = (m.triple.eval(1.0).unwrap(), clean.triple.eval(1.0).unwrap());
        assert_eq!(a.h.value, 0.0);
        assert_eq!(a.phi, b.phi);
        assert_eq!(a.f, b.f);
        let m = Model::build(&run("[defect]\nmode = \"modulate\"\ntarget = \"f\"\namplitude = 0.1\nfrequency = 2.0\n")).unwrap();
        let a = m.triple.eval(1.0).unwrap();
        assert!((a.f.value - b.f.value * (1.0 + 0.1 * 2f64.sin())).abs() < 1e-14);
    }
}
