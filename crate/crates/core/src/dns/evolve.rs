use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::field::FieldState;
use super::stepper::Stepper;
use super::transform::Transform;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObserverConfig {
    /// Record every `stride` steps (the initial and final states are always recorded).
    pub stride: usize,
    #[serde(default = "default_k0")]
    pub k0: usize,
}

fn default_k0() -> usize {
    1
}

impl Default for ObserverConfig {
    fn default() -> Self {
        Self { stride: 10, k0: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ObserverRecord {
    pub t: f64,
    pub abs_tau_k0: f64,
    pub arg_tau_k0: f64,
    pub abs_tau_k2: f64,
    pub mean_tau: f64,
    pub mean_u: f64,
}

impl ObserverRecord {
    pub fn observe(state: &FieldState, k0: usize, tr: &mut Transform, buf: &mut (Vec<f64>, Vec<f64>)) -> Self {
        let t1 = state.tau_coefficient(k0 as i64);
        let t2 = state.tau_coefficient(2 * k0 as i64);
        tr.state_to_physical(state, &mut buf.0, &mut buf.1);
        Self {
            t: state.time,
            abs_tau_k0: t1.norm(),
            arg_tau_k0: t1.arg(),
            abs_tau_k2: t2.norm(),
            mean_tau: Transform::mean(&buf.0),
            mean_u: Transform::mean(&buf.1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: FieldState,
    pub records: Vec<ObserverRecord>,
}

/// Step `state` forward to `t_end`, calling `visit` after each recorded sample.
///
/// The step size is the stepper's `dt`; a shorter closing step lands exactly on `t_end`.
/// `visit` may stop the run early by returning `ControlFlow::Break`.
pub fn evolve_with<F>(
    mut state: FieldState,
    stepper: &mut Stepper,
    t_end: f64,
    obs: &ObserverConfig,
    mut visit: F,
) -> Result<Evolution>
where
    F: FnMut(&FieldState, &ObserverRecord) -> ControlFlow<()>,
{
    if t_end < state.time {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} precedes the state time {}",
            state.time
        )));
    }
    let dt = stepper.config().dt;
    let stride = obs.stride.max(1);
    let n = state.n();
    let mut tr = Transform::new(n);
    let mut buf = (vec![0.0; n], vec![0.0; n]);
    let mut records = Vec::new();
    let first = ObserverRecord::observe(&state, obs.k0, &mut tr, &mut buf);
    records.push(first);
    if visit(&state, &first).is_break() {
        return Ok(Evolution { state, records });
    }

    let t0 = state.time;
    let span = t_end - t0;
    let full = (span / dt * (1.0 + 1e-12)).floor() as u64;
    let mut last_recorded = true;
    for i in 1..=full {
        stepper.step(&mut state)?;
        // avoid accumulating roundoff in the clock
        state.time = t0 + i as f64 * dt;
        last_recorded = false;
        if i % stride as u64 == 0 {
            let rec = ObserverRecord::observe(&state, obs.k0, &mut tr, &mut buf);
            records.push(rec);
            last_recorded = true;
            if visit(&state, &rec).is_break() {
                return Ok(Evolution { state, records });
            }
        }
    }
    let rest = t_end - state.time;
    if rest > 1e-12 * dt.max(1.0) {
        let mut cfg = *stepper.config();
        cfg.dt = rest;
        let mut closing = Stepper::new(n, stepper.params(), stepper.flux().clone(), cfg)?;
        closing.step(&mut state)?;
        last_recorded = false;
    }
    state.time = t_end.max(state.time);
    if !last_recorded {
        let rec = ObserverRecord::observe(&state, obs.k0, &mut tr, &mut buf);
        records.push(rec);
        let _ = visit(&state, &rec);
    }
    Ok(Evolution { state, records })
}

pub fn evolve(state: FieldState, stepper: &mut Stepper, t_end: f64, obs: &ObserverConfig) -> Result<Evolution> {
    evolve_with(state, stepper, t_end, obs, |_, _| ControlFlow::Continue(()))
}
