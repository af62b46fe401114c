//! The integrator-backed family driven by the non-constant phase variable z = y/x.
//!
//! z is integrated from its first-order equation, x is algebraic in z, and the
//! profiles follow from f'/f = x, φ'/φ = k f'/f and h' = (z + m − k(n−2))x.
//! Only the region z > N₊ (both factors of x positive) is supported.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariant::ray_slopes;
use crate::numerics::{integrate, HermiteTable, OdeOptions, StopReason, Trajectory};
use crate::profile::{Interval, ProfileJet, ProfileTriple, ScalarProfile};
use crate::scalar::Real;

/// Orientation of ξ. `Reversed` negates x and z' (ξ → −ξ); it is experimental.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Printed,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct PhaseFlowParams<T> {
    pub k: T,
    pub c3: T,
    pub z0: T,
    #[serde(default = "zero")]
    pub xi0: T,
    #[serde(default = "one")]
    pub c1: T,
    #[serde(default = "one")]
    pub c2: T,
    /// h(ξ0).
    #[serde(default = "zero")]
    pub h0: T,
    #[serde(default)]
    pub orientation: Orientation,
}

fn one<T: Real>() -> T {
    T::one()
}

fn zero<T: Real>() -> T {
    T::zero()
}

impl<T: Real> PhaseFlowParams<T> {
    pub fn new(k: T, c3: T, z0: T) -> Self {
        Self { k, c3, z0, xi0: T::zero(), c1: T::one(), c2: T::one(), h0: T::zero(), orientation: Orientation::Printed }
    }
}

/// Constants shared by the phase relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseConstants<T> {
    pub k: T,
    pub c3: T,
    /// √(m + k²(n−1)).
    pub s: T,
    /// k / s.
    pub a: T,
    /// m − k(n−2).
    pub c: T,
    pub sign: T,
}

impl<T: Real> PhaseConstants<T> {
    pub fn new(params: &PhaseFlowParams<T>, n: usize, m: usize) -> Self {
        let k = params.k;
        let s = (T::of_usize(m) + k * k * T::of_usize(n - 1)).sqrt();
        let sign = match params.orientation {
            Orientation::Printed => T::one(),
            Orientation::Reversed => -T::one(),
        };
        Self { k, c3: params.c3, s, a: k / s, c: T::of_usize(m) - k * T::of_usize(n - 2), sign }
    }

    /// The root N₊ = −k + s bounding the supported region.
    pub fn root(&self) -> T {
        self.s - self.k
    }

    /// x as a function of z.
    pub fn x_of_z(&self, z: T) -> T {
        let half = T::lit(0.5);
        let lo = z + self.k - self.s;
        let hi = z + self.k + self.s;
        self.sign * self.c3 * lo.powf((self.a - T::one()) * half) * hi.powf(-(self.a + T::one()) * half)
    }

    /// x in terms of the distance e = z − N₊ to the root, free of cancellation.
    pub fn x_of_gap(&self, e: T) -> T {
        let half = T::lit(0.5);
        let hi = e + T::lit(2.0) * self.s;
        self.sign * self.c3 * e.powf((self.a - T::one()) * half) * hi.powf(-(self.a + T::one()) * half)
    }

    /// z' in the closed form with both factors.
    pub fn dz_closed_form(&self, z: T) -> T {
        let half = T::lit(0.5);
        let lo = z + self.k - self.s;
        let hi = z + self.k + self.s;
        -self.sign * self.c3 * lo.powf((self.a + T::one()) * half) * hi.powf(-(self.a - T::one()) * half)
    }

    /// z' = −x (z + k − s)(z + k + s).
    pub fn dz(&self, z: T) -> T {
        -self.x_of_z(z) * (z + self.k - self.s) * (z + self.k + self.s)
    }
}

/// How far the integration reached on each side of ξ0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    pub requested: (f64, f64),
    pub achieved: (f64, f64),
    pub truncated_below: Option<String>,
    pub truncated_above: Option<String>,
}

impl TruncationReport {
    pub fn is_truncated(&self) -> bool {
        self.truncated_below.is_some() || self.truncated_above.is_some()
    }
}

/// Dense solution of the phase flow with state [ln(z − N₊), ln f, h].
#[derive(Debug, Clone)]
pub struct PhaseFlow<T: Real> {
    pub constants: PhaseConstants<T>,
    pub params: PhaseFlowParams<T>,
    table: HermiteTable<T>,
    pub report: TruncationReport,
}

/// Integrator tolerance for the phase flow.
pub const PHASE_FLOW_TOLERANCE: f64 = 1e-10;
/// Largest accepted step, which bounds the interpolation spacing.
pub const PHASE_FLOW_MAX_STEP: f64 = 1e-3;

impl<T: Real> PhaseFlow<T> {
    pub fn z(&self, xi: T) -> Result<T> {
        Ok(self.constants.root() + self.table.eval(xi)?.0[0].exp())
    }

    /// (x, y, z) at ξ with y = xz.
    pub fn phase(&self, xi: T) -> Result<(T, T, T)> {
        let (gap, _, _) = self.state(xi)?;
        let z = self.constants.root() + gap;
        let x = self.constants.x_of_gap(gap);
        Ok((x, x * z, z))
    }

    pub fn domain(&self) -> Interval<T> {
        Interval { lo: self.table.lo(), hi: self.table.hi() }
    }

    pub fn knots(&self) -> &[T] {
        self.table.knots()
    }

    /// (z − N₊, ln f, h) at ξ.
    fn state(&self, xi: T) -> Result<(T, T, T)> {
        let (v, _) = self.table.eval(xi)?;
        Ok((v[0].exp(), v[1], v[2]))
    }

    /// Profiles with derivative channels taken from the defining relations.
    pub fn triple(self: &Arc<Self>) -> ProfileTriple<T> {
        let domain = self.domain();
        let part = |which| -> Arc<dyn ScalarProfile<T>> { Arc::new(PhaseFlowProfile { flow: self.clone(), which }) };
        ProfileTriple::new(part(Part::Phi), part(Part::F), part(Part::H), domain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Phi,
    F,
    H,
}

struct PhaseFlowProfile<T: Real> {
    flow: Arc<PhaseFlow<T>>,
    which: Part,
}

impl<T: Real> ScalarProfile<T> for PhaseFlowProfile<T> {
    fn eval(&self, xi: T) -> Result<ProfileJet<T>> {
        let (gap, lnf, h) = self.flow.state(xi)?;
        let pc = &self.flow.constants;
        let z = pc.root() + gap;
        let x = pc.x_of_gap(gap);
        let x2 = x * x;
        // x' = x²z; the quadratic factor is z' / (−x).
        let quad = gap * (gap + T::lit(2.0) * pc.s);
        Ok(match self.which {
            Part::F => {
                let f = lnf.exp();
                ProfileJet::new(f, x * f, x2 * (z + T::one()) * f)
            }
            Part::Phi => {
                let p = self.flow.params;
                let phi = p.c2 * ((lnf - p.c1.ln()) * pc.k).exp();
                ProfileJet::new(phi, pc.k * x * phi, pc.k * x2 * (z + pc.k) * phi)
            }
            Part::H => ProfileJet::new(h, (z + pc.c) * x, -x2 * quad + (z + pc.c) * x2 * z),
        })
    }

    fn contains(&self, xi: T) -> bool {
        self.flow.domain().contains(xi)
    }
}

/// Integrates the phase flow over `span`, which must contain ξ0.
///
/// Approaching the root z = N₊ ends the run early; the domain is truncated
/// there and the truncation is recorded in the report.
pub fn build_phase_flow<T: Real>(params: &PhaseFlowParams<T>, n: usize, m: usize, span: (T, T)) -> Result<Arc<PhaseFlow<T>>> {
    for (name, v) in [("k", params.k), ("c3", params.c3), ("c1", params.c1), ("c2", params.c2)] {
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if n < 3 || m < 1 {
        return Err(Error::InvalidParameter(format!("need n >= 3 and m >= 1, got n = {n}, m = {m}")));
    }
    let (lo, hi) = span;
    if !(lo <= params.xi0 && params.xi0 <= hi && lo < hi) {
        return Err(Error::InvalidParameter(format!("span ({lo}, {hi}) must contain xi0 = {}", params.xi0)));
    }
    let pc = PhaseConstants::new(params, n, m);
    let (plus, _) = ray_slopes(params.k, n, m);
    let margin = T::lit(1e-9) * T::one().max(pc.s);
    if !(params.z0 - plus > margin) {
        return Err(Error::UnsupportedPhaseRegion { z: params.z0.to_f64_lossy(), root: plus.to_f64_lossy() });
    }

    let two_s = T::lit(2.0) * pc.s;
    let rhs = |_xi: T, y: &[T]| -> Result<Vec<T>> {
        let gap = y[0].exp();
        let x = pc.x_of_gap(gap);
        Ok(vec![-x * (gap + two_s), x, (plus + gap + pc.c) * x])
    };
    let log_margin = margin.ln();
    let admissible = |_xi: T, y: &[T]| y[0] > log_margin;
    let opts = OdeOptions {
        rtol: T::lit(PHASE_FLOW_TOLERANCE),
        atol: T::lit(PHASE_FLOW_TOLERANCE),
        h_max: T::lit(PHASE_FLOW_MAX_STEP),
        h_init: Some(T::lit(1e-4)),
        ..OdeOptions::default()
    };
    let y0 = [(params.z0 - plus).ln(), params.c1.ln(), params.h0];
    let forward = integrate(rhs, params.xi0, &y0, hi, &opts, admissible)?;
    let backward = integrate(rhs, params.xi0, &y0, lo, &opts, admissible)?;

    let describe = |tr: &Trajectory<T>| -> Result<Option<String>> {
        match &tr.stop {
            StopReason::Completed => Ok(None),
            StopReason::Guard { t } => Ok(Some(format!("phase variable reached the root z = {plus} near xi = {t}"))),
            StopReason::RhsFailure { t, reason } => {
                Err(Error::Integrator { last_good_xi: t.to_f64_lossy(), reason: reason.clone() })
            }
        }
    };
    let truncated_above = describe(&forward)?;
    let truncated_below = describe(&backward)?;
    let report = TruncationReport {
        requested: (lo.to_f64_lossy(), hi.to_f64_lossy()),
        achieved: (backward.last().t.to_f64_lossy(), forward.last().t.to_f64_lossy()),
        truncated_below,
        truncated_above,
    };
    let mut knots = backward.records;
    knots.extend(forward.records.into_iter().skip(1));
    let table = HermiteTable::new(knots)?;
    Ok(Arc::new(PhaseFlow { constants: pc, params: *params, table, report }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_are_consistent() {
        let p = PhaseFlowParams::<f64>::new(1.0, 0.7, 3.0);
        let pc = PhaseConstants::new(&p, 3, 2);
        assert_eq!(pc.root(), 1.0);
        for &z in &[1.5, 2.0, 10.0] {
            assert!((pc.dz(z) - pc.dz_closed_form(z)).abs() < 1e-13 * pc.dz(z).abs().max(1.0));
        }
        // dx/dz · z' = x²z
        let z = 2.5;
        let dxdz = (pc.x_of_z(z + 1e-5) - pc.x_of_z(z - 1e-5)) / 2e-5;
        let x = pc.x_of_z(z);
        assert!((dxdz * pc.dz(z) - x * x * z).abs() < 1e-9);
    }

    #[test]
    fn rejects_root_and_lower_regions() {
        for z0 in [1.0, 0.5, -5.0] {
            let r = build_phase_flow(&PhaseFlowParams::new(1.0, 1.0, z0), 3, 2, (-0.1, 0.1));
            assert!(matches!(r, Err(Error::UnsupportedPhaseRegion { .. })), "z0 = {z0}");
        }
        assert!(build_phase_flow(&PhaseFlowParams::new(1.0, 1.0, 3.0), 3, 2, (0.5, 1.0)).is_err());
    }

    #[test]
    fn approach_to_root_truncates() {
        let flow = build_phase_flow(&PhaseFlowParams::new(1.0, 1.0, 1.2), 3, 2, (-0.2, 5.0)).unwrap();
        assert!(flow.report.truncated_above.is_some());
        assert!(flow.report.truncated_below.is_none());
        assert!(flow.report.achieved.1 < 5.0);
        let d = flow.domain();
        assert!(flow.z(d.hi).unwrap() > 1.0);
    }

    #[test]
    fn initial_values_are_reproduced() {
        let p = PhaseFlowParams { c1: 2.0, c2: 3.0, h0: 0.25, ..PhaseFlowParams::<f64>::new(1.0, 1.0, 4.0) };
        let flow = build_phase_flow(&p, 3, 2, (-0.1, 0.1)).unwrap();
        let t = flow.triple();
        let j = t.eval(0.0).unwrap();
        assert!((j.f.value - 2.0).abs() < 1e-14);
        assert!((j.phi.value - 3.0).abs() < 1e-14);
        assert!((j.h.value - 0.25).abs() < 1e-15);
        assert!((flow.z(0.0).unwrap() - 4.0).abs() < 1e-15);
    }
}
