//! Adaptive Dormand–Prince 5(4) integration with per-step records.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Initial step magnitude; chosen from the span when absent.
    pub h_init: Option<T>,
    pub h_max: T,
    pub h_min: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-9),
            atol: T::lit(1e-9),
            h_init: None,
            h_max: T::lit(1e-2),
            h_min: T::lit(1e-12),
            max_steps: 1_000_000,
        }
    }
}

/// State and derivative at an accepted point.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub t: T,
    pub y: Vec<T>,
    pub dy: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason<T> {
    Completed,
    /// The admissibility guard could not be satisfied with any step above `h_min`.
    Guard { t: T },
    /// The right-hand side failed or returned non-finite values.
    RhsFailure { t: T, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub records: Vec<StepRecord<T>>,
    pub stop: StopReason<T>,
    pub rejected: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &StepRecord<T> {
        self.records.last().expect("trajectory always holds the initial point")
    }

    pub fn completed(&self) -> bool {
        self.stop == StopReason::Completed
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy<T: Real>(y: &[T], h: T, ks: &[Vec<T>], row: &[f64]) -> Vec<T> {
    let mut out = y.to_vec();
    for (k, &a) in ks.iter().zip(row) {
        if a != 0.0 {
            let a = T::lit(a) * h;
            for (o, &kv) in out.iter_mut().zip(k) {
                *o = *o + a * kv;
            }
        }
    }
    out
}

/// Integrates y' = rhs(t, y) from t0 to t_end (either direction).
///
/// `admissible` is checked on every stage state; a violation shrinks the step
/// and, below `h_min`, ends the run with [`StopReason::Guard`]. An `Err` from
/// `rhs` is handled the same way but reported as [`StopReason::RhsFailure`].
pub fn integrate<T, F, G>(rhs: F, t0: T, y0: &[T], t_end: T, opts: &OdeOptions<T>, admissible: G) -> Result<Trajectory<T>>
where
    T: Real,
    F: Fn(T, &[T]) -> Result<Vec<T>>,
    G: Fn(T, &[T]) -> bool,
{
    if !(opts.rtol > T::zero() && opts.atol > T::zero() && opts.h_max > T::zero() && opts.h_min > T::zero()) {
        return Err(Error::InvalidParameter("integrator tolerances and step bounds must be positive".into()));
    }
    if !admissible(t0, y0) {
        return Err(Error::Integrator { last_good_xi: t0.to_f64_lossy(), reason: "initial state is not admissible".into() });
    }
    let k0 = rhs(t0, y0)?;
    if k0.len() != y0.len() {
        return Err(Error::DimensionMismatch { expected: y0.len(), found: k0.len() });
    }
    if k0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integrator { last_good_xi: t0.to_f64_lossy(), reason: "non-finite initial derivative".into() });
    }

    let span = t_end - t0;
    let dir = if span < T::zero() { -T::one() } else { T::one() };
    let mut records = vec![StepRecord { t: t0, y: y0.to_vec(), dy: k0.clone() }];
    if span == T::zero() {
        return Ok(Trajectory { records, stop: StopReason::Completed, rejected: 0 });
    }

    let mut h = opts.h_init.unwrap_or(span.abs() * T::lit(1e-3)).min(opts.h_max).max(opts.h_min);
    let (mut t, mut y, mut k1) = (t0, y0.to_vec(), k0);
    let mut rejected = 0;
    let safety = T::lit(0.9);
    let fifth = T::lit(0.2);

    for _ in 0..opts.max_steps {
        let remaining = (t_end - t).abs();
        if remaining <= T::epsilon() * T::one().max(t_end.abs()) {
            return Ok(Trajectory { records, stop: StopReason::Completed, rejected });
        }
        let last_step = h >= remaining;
        let hs = if last_step { remaining } else { h } * dir;

        let mut ks: Vec<Vec<T>> = vec![k1.clone()];
        let mut failure: Option<(bool, String)> = None;
        for stage in 1..7 {
            let ts = t + T::lit(C[stage]) * hs;
            let ys = axpy(&y, hs, &ks, &A[stage][..stage]);
            if !admissible(ts, &ys) {
                failure = Some((true, "stage left the admissible region".into()));
                break;
            }
            match rhs(ts, &ys) {
                Ok(k) if k.iter().all(|v| v.is_finite()) => ks.push(k),
                Ok(_) => {
                    failure = Some((false, "non-finite derivative".into()));
                    break;
                }
                Err(e) => {
                    failure = Some((false, e.to_string()));
                    break;
                }
            }
        }

        let err_norm = if failure.is_none() {
            let y_new = axpy(&y, hs, &ks[..6], &A[6]);
            let mut acc = T::zero();
            for i in 0..y.len() {
                let e: T = (0..7).map(|s| T::lit(E[s]) * ks[s][i]).sum::<T>() * hs;
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                acc = acc + (e / sc) * (e / sc);
            }
            let norm = (acc / T::of_usize(y.len().max(1))).sqrt();
            if norm <= T::one() && norm.is_finite() {
                t = if last_step { t_end } else { t + hs };
                y = y_new;
                k1 = ks.pop().expect("seven stages");
                records.push(StepRecord { t, y: y.clone(), dy: k1.clone() });
                let grow = if norm == T::zero() { T::lit(5.0) } else { (safety * norm.powf(-fifth)).min(T::lit(5.0)) };
                h = (h * grow.max(T::lit(0.2))).min(opts.h_max);
                continue;
            }
            norm
        } else {
            T::nan()
        };

        rejected += 1;
        let shrink = if err_norm.is_finite() { (safety * err_norm.powf(-fifth)).max(T::lit(0.1)) } else { T::lit(0.25) };
        h = h * shrink.min(T::lit(0.9));
        if h < opts.h_min {
            let stop = match failure {
                Some((true, _)) | None => StopReason::Guard { t },
                Some((false, reason)) => StopReason::RhsFailure { t, reason },
            };
            return Ok(Trajectory { records, stop, rejected });
        }
    }
    Err(Error::Integrator { last_good_xi: t.to_f64_lossy(), reason: format!("exceeded {} steps", opts.max_steps) })
}
