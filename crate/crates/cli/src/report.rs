//! Report types. Field order is the serialized key order.

use serde::{Serialize, Serializer};
use warped_soliton::solutions::TruncationReport;
use warped_soliton::CausalType;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyInfo {
    pub kind: String,
    pub preset: Option<String>,
    pub causal_type: CausalType,
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub lambda_f: f64,
    pub alpha: Vec<f64>,
    pub k: Option<f64>,
    pub xi_range: [f64; 2],
    pub truncation: Option<TruncationReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub max_abs: f64,
    pub rms: f64,
    pub worst_xi: Option<f64>,
}

impl Summary {
    pub fn of(samples: &[(f64, f64)]) -> Self {
        let mut worst: Option<(f64, f64)> = None;
        let mut sq = 0.0;
        for &(xi, v) in samples {
            let a = v.abs();
            // NaN counts as the worst value.
            let replace = match worst {
                None => true,
                Some((_, w)) => !w.is_nan() && (a.is_nan() || a > w),
            };
            if replace {
                worst = Some((xi, a));
            }
            sq += v * v;
        }
        let rms = if samples.is_empty() { 0.0 } else { (sq / samples.len() as f64).sqrt() };
        Summary { max_abs: worst.map_or(0.0, |w| w.1), rms, worst_xi: worst.map(|w| w.0) }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_abs <= tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationReport {
    pub name: String,
    pub tolerance: f64,
    #[serde(flatten)]
    pub summary: Summary,
    pub pass: bool,
    /// (ξ, residual) pairs.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PdePoint {
    pub xi: f64,
    pub point: Vec<f64>,
    pub offdiag: f64,
    pub diag: f64,
    pub fiber: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeReport {
    pub tolerance: f64,
    pub seed: u64,
    pub max_offdiag: f64,
    pub max_diag: f64,
    pub max_fiber: f64,
    #[serde(flatten)]
    pub summary: Summary,
    pub pass: bool,
    pub points: Vec<PdePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FittedOrder {
    Order(f64),
    /// Both residuals are at the rounding floor, so no order can be read off.
    Floor,
}

impl Serialize for FittedOrder {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FittedOrder::Order(p) => s.serialize_f64(*p),
            FittedOrder::Floor => s.serialize_str("floor"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleStep {
    pub step: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub scheme_order: u8,
    pub tolerance: f64,
    pub points: Vec<Vec<f64>>,
    pub steps: Vec<OracleStep>,
    /// Observed order between consecutive steps.
    pub fitted_order: Vec<FittedOrder>,
    /// Max over points and components of the extrapolated residual from the two finest steps.
    pub extrapolated: f64,
    /// Max of the closed-form residual at the same points.
    pub closed_form_max: f64,
    /// Max difference between the finest finite-difference residual and the closed form.
    pub closed_form_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainFailure {
    pub xi: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub seed: u64,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub verdict: Verdict,
    pub family: FamilyInfo,
    pub equations: Vec<EquationReport>,
    pub pde: PdeReport,
    pub oracle: Option<OracleReport>,
    pub failures: Vec<DomainFailure>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRunReport {
    pub command: &'static str,
    pub verdict: Verdict,
    pub family: FamilyInfo,
    pub oracle: OracleReport,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub failures: Vec<DomainFailure>,
    pub family: FamilyInfo,
    pub provenance: Provenance,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[(0.0, 3.0), (1.0, -4.0)]);
        assert_eq!(s.max_abs, 4.0);
        assert_eq!(s.worst_xi, Some(1.0));
        assert!((s.rms - 12.5f64.sqrt()).abs() < 1e-15);
        let s = Summary::of(&[(0.0, 1.0), (2.0, f64::NAN), (3.0, 5.0)]);
        assert_eq!(s.worst_xi, Some(2.0));
        assert!(!s.within(1.0));
    }

    #[test]
    fn floor_serializes_as_string() {
        let v = serde_json::to_string(&[FittedOrder::Order(2.0), FittedOrder::Floor]).unwrap();
        assert_eq!(v, "[2.0,\"floor\"]");
    }
}
