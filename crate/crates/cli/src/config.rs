//! Run configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use warped_soliton::solutions::{preset, FamilySpec, PresetSpec};
use warped_soliton::{Signature, SolitonConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSection {
    pub signature: Vec<i8>,
    pub m: usize,
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub lambda_f: f64,
}

impl ConfigSection {
    pub fn to_config(&self) -> Result<SolitonConfig<f64>, CliError> {
        let sig = Signature::new(self.signature.clone()).map_err(|e| CliError::config("config.signature", e))?;
        SolitonConfig::new(sig, self.m, self.rho, self.lambda_f).map_err(|e| CliError::config("config", e))
    }

    pub fn from_config(c: &SolitonConfig<f64>) -> Self {
        Self { signature: c.sig().entries().to_vec(), m: c.m(), rho: c.rho(), lambda_f: c.lambda_f() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionSection {
    pub alpha: Vec<f64>,
}

/// The family to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum FamilySection {
    Preset { kind: PresetTag, name: String },
    External { kind: ExternalTag, path: PathBuf },
    Spec(FamilySpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetTag {
    Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExternalTag {
    ExternalProfile,
}

impl FamilySection {
    fn parse(table: toml::Table) -> Result<Self, CliError> {
        let kind = match table.get("kind") {
            Some(toml::Value::String(s)) => s.clone(),
            Some(_) => return Err(CliError::Config("family.kind: expected a string".into())),
            None => return Err(CliError::Config("family.kind: missing".into())),
        };
        let field = |key: &str| table.get(key).cloned();
        match kind.as_str() {
            "preset" => {
                let name = match field("name") {
                    Some(toml::Value::String(s)) => s,
                    _ => return Err(CliError::Config("family.name: preset name (string) required".into())),
                };
                if table.len() > 2 {
                    return Err(CliError::Config("family: a preset takes only `kind` and `name`".into()));
                }
                Ok(FamilySection::Preset { kind: PresetTag::Preset, name })
            }
            "external-profile" => {
                let path = match field("path") {
                    Some(toml::Value::String(s)) => PathBuf::from(s),
                    _ => return Err(CliError::Config("family.path: table path (string) required".into())),
                };
                Ok(FamilySection::External { kind: ExternalTag::ExternalProfile, path })
            }
            _ => toml::Value::Table(table)
                .try_into::<FamilySpec>()
                .map(FamilySection::Spec)
                .map_err(|e| CliError::Config(format!("family: {}", e.message()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_base_points")]
    pub base_points: usize,
    #[serde(default)]
    pub seed: u64,
    /// Half-width of the random transverse offsets of base points.
    #[serde(default = "default_offset")]
    pub offset: f64,
}

fn default_samples() -> usize {
    101
}

fn default_base_points() -> usize {
    16
}

fn default_offset() -> f64 {
    0.5
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            xi_min: None,
            xi_max: None,
            samples: default_samples(),
            base_points: default_base_points(),
            seed: 0,
            offset: default_offset(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "default_ode_tol")]
    pub ode: f64,
    #[serde(default = "default_pde_tol")]
    pub pde: f64,
    #[serde(default = "default_oracle_tol")]
    pub oracle: f64,
}

fn default_ode_tol() -> f64 {
    1e-8
}

fn default_pde_tol() -> f64 {
    1e-8
}

fn default_oracle_tol() -> f64 {
    5e-6
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self { ode: default_ode_tol(), pde: default_pde_tol(), oracle: default_oracle_tol() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Run the finite-difference oracle during `verify`.
    #[serde(default)]
    pub enabled: bool,
    /// Finite-difference steps, coarsest first, each half the previous.
    #[serde(default = "default_steps")]
    pub steps: Vec<f64>,
    #[serde(default = "default_order")]
    pub order: u8,
    /// Number of base points used by the oracle.
    #[serde(default = "default_oracle_points")]
    pub points: usize,
}

fn default_steps() -> Vec<f64> {
    vec![4e-3, 2e-3, 1e-3]
}

fn default_order() -> u8 {
    2
}

fn default_oracle_points() -> usize {
    3
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { enabled: false, steps: default_steps(), order: default_order(), points: default_oracle_points() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectTarget {
    Phi,
    F,
    H,
}

/// A deliberate change to one profile, for checking that failures are detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DefectSection {
    /// Replace the profile by a constant.
    Replace { target: DefectTarget, value: f64 },
    /// Multiply the profile by 1 + amplitude·sin(frequency·ξ).
    Modulate { target: DefectTarget, amplitude: f64, frequency: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), format: Format::Json }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub config: Option<ConfigSection>,
    pub direction: Option<DirectionSection>,
    pub family: FamilySection,
    pub grid: GridSection,
    pub tolerances: ToleranceSection,
    pub oracle: OracleSection,
    pub defect: Option<DefectSection>,
    pub output: OutputSection,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    config: Option<ConfigSection>,
    direction: Option<DirectionSection>,
    family: toml::Table,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    tolerances: ToleranceSection,
    #[serde(default)]
    oracle: OracleSection,
    defect: Option<DefectSection>,
    #[serde(default)]
    output: OutputSection,
}

/// Everything a command needs after resolving presets and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: SolitonConfig<f64>,
    pub alpha: Vec<f64>,
    pub family: ResolvedFamily,
    pub xi_range: (f64, f64),
}

#[derive(Debug, Clone)]
pub enum ResolvedFamily {
    Spec { spec: FamilySpec, preset: Option<String> },
    External(PathBuf),
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let raw: RawRunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
        let cfg = RunConfig {
            config: raw.config,
            direction: raw.direction,
            family: FamilySection::parse(raw.family)?,
            grid: raw.grid,
            tolerances: raw.tolerances,
            oracle: raw.oracle,
            defect: raw.defect,
            output: raw.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative table paths are taken relative to the config file.
        if let FamilySection::External { path: p, .. } = &mut cfg.family {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize configuration: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if g.samples == 0 {
            return Err(CliError::Config("grid.samples: the grid is empty".into()));
        }
        if let (Some(a), Some(b)) = (g.xi_min, g.xi_max) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(CliError::Config(format!("grid: need xi_min < xi_max, got [{a}, {b}]")));
            }
        }
        if !(g.offset >= 0.0 && g.offset.is_finite()) {
            return Err(CliError::Config("grid.offset: must be a non-negative number".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [("ode", t.ode), ("pde", t.pde), ("oracle", t.oracle)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("tolerances.{name}: must be positive, got {v}")));
            }
        }
        let o = &self.oracle;
        if o.steps.is_empty() || o.steps.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(CliError::Config("oracle.steps: need at least one positive step".into()));
        }
        if !matches!(o.order, 2 | 4) {
            return Err(CliError::Config(format!("oracle.order: must be 2 or 4, got {}", o.order)));
        }
        if o.points == 0 {
            return Err(CliError::Config("oracle.points: must be at least 1".into()));
        }
        if let FamilySection::Preset { name, .. } = &self.family {
            if preset(name).is_none() {
                return Err(CliError::Config(format!("family.name: unknown preset `{name}`")));
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let from_preset: Option<PresetSpec> = match &self.family {
            FamilySection::Preset { name, .. } => Some(preset(name).ok_or_else(|| CliError::Config(format!("family.name: unknown preset `{name}`")))?),
            _ => None,
        };
        let config = match (&self.config, &from_preset) {
            (Some(c), _) => c.to_config()?,
            (None, Some(p)) => p.config.clone(),
            (None, None) => return Err(CliError::Config("config: section required for this family".into())),
        };
        let alpha = match (&self.direction, &from_preset) {
            (Some(d), _) => d.alpha.clone(),
            (None, Some(p)) => p.direction.clone(),
            (None, None) => return Err(CliError::Config("direction: section required for this family".into())),
        };
        if alpha.len() != config.n() {
            return Err(CliError::Config(format!(
                "direction.alpha: has {} entries but the signature has {}",
                alpha.len(),
                config.n()
            )));
        }
        let default_range = match (&from_preset, &self.family) {
            (Some(p), _) => Some((p.xi_range[0], p.xi_range[1])),
            (None, FamilySection::Spec(FamilySpec::PhaseFlow { span, .. })) => Some((span[0], span[1])),
            _ => None,
        };
        let xi_range = match (self.grid.xi_min, self.grid.xi_max, default_range) {
            (Some(a), Some(b), _) => (a, b),
            (a, b, Some((lo, hi))) => (a.unwrap_or(lo), b.unwrap_or(hi)),
            (_, _, None) => match &self.family {
                FamilySection::External { .. } => (f64::NEG_INFINITY, f64::INFINITY),
                _ => return Err(CliError::Config("grid: xi_min and xi_max are required for this family".into())),
            },
        };
        if !(xi_range.0 < xi_range.1) {
            return Err(CliError::Config(format!("grid: need xi_min < xi_max, got [{}, {}]", xi_range.0, xi_range.1)));
        }
        let family = match (&self.family, from_preset) {
            (FamilySection::Preset { .. }, Some(p)) => ResolvedFamily::Spec { spec: p.family, preset: Some(p.name) },
            (FamilySection::Spec(s), _) => ResolvedFamily::Spec { spec: s.clone(), preset: None },
            (FamilySection::External { path, .. }, _) => ResolvedFamily::External(path.clone()),
            (FamilySection::Preset { .. }, None) => unreachable!("preset resolved above"),
        };
        Ok(Resolved { config, alpha, family, xi_range })
    }

    /// A copy with every default and preset value written out, so it can be re-run on its own.
    pub fn expanded(&self) -> Result<RunConfig, CliError> {
        let r = self.resolve()?;
        let mut out = self.clone();
        out.config = Some(ConfigSection::from_config(&r.config));
        out.direction = Some(DirectionSection { alpha: r.alpha.clone() });
        if r.xi_range.0.is_finite() {
            out.grid.xi_min = Some(r.xi_range.0);
        }
        if r.xi_range.1.is_finite() {
            out.grid.xi_max = Some(r.xi_range.1);
        }
        Ok(out)
    }
}
