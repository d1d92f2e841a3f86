use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use super::experiment::{run_fate, run_to_steady, wrap_angle, Experiment, Fate, FateRun};
use crate::amplitude::truncated_solution;
use crate::dns::{evolve_with, FieldState, ObserverConfig};
use crate::error::{Error, Result};
use crate::reduction::{classify_bifurcation, second_order_correction, BifurcationKind, BifurcationVerdict};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonRow {
    pub mu: f64,
    pub r_predicted: f64,
    pub r_measured: f64,
    pub rel_error: f64,
    pub phase_drift: f64,
    /// Cosine amplitude of the `2 k0` harmonic of `tau`, `2 |C| r^2`.
    pub second_harmonic_predicted: f64,
    /// Measured cosine amplitude `2 |tau_2k0|`.
    pub second_harmonic_measured: f64,
    pub converged: bool,
    pub t_converged: f64,
    /// Truncated amplitude ODE evaluated at `t_converged` from the same initial radius.
    pub r_ode: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonReport {
    pub verdict: BifurcationVerdict,
    pub a_coef: f64,
    pub b_coef: f64,
    pub second_harmonic_coef: f64,
    pub rows: Vec<ComparisonRow>,
    /// Least-squares slope of `log r` against `log |mu|` over converged rows.
    pub exponent: Option<f64>,
    /// Same fit restricted to the three smallest converged `|mu|`.
    pub exponent_small_mu: Option<f64>,
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two distinct points.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn loglog_exponent(rows: &[&ComparisonRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.mu.abs().ln(), r.r_measured.ln())).collect();
    fit_slope(&pts)
}

/// Measured `|Delta arg tau_k0|` over `window` time units starting from `state`.
pub fn phase_drift(exp: &Experiment, mu: f64, state: FieldState, window: f64) -> Result<PhaseDrift> {
    let mut stepper = exp.stepper_for(mu)?;
    let k0 = exp.cfg.k0() as usize;
    let obs = ObserverConfig { stride: 1, k0 };
    let t0 = state.time;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut unwrapped = 0.0;
    let mut last = f64::NAN;
    evolve_with(state, &mut stepper, t0 + window, &obs, |_, rec| {
        if last.is_nan() {
            unwrapped = rec.arg_tau_k0;
        } else {
            unwrapped += wrap_angle(rec.arg_tau_k0 - last);
        }
        last = rec.arg_tau_k0;
        samples.push((rec.t - t0, unwrapped));
        ControlFlow::Continue(())
    })?;
    let (first, end) = (samples[0].1, samples[samples.len() - 1].1);
    let drift = (end - first).abs();
    let slope = fit_slope(&samples).unwrap_or(0.0);
    let mean_t = samples.iter().map(|s| s.0).sum::<f64>() / samples.len() as f64;
    let mean_p = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    let noise_floor = samples
        .iter()
        .map(|s| (s.1 - mean_p - slope * (s.0 - mean_t)).abs())
        .fold(0.0, f64::max);
    Ok(PhaseDrift {
        mu,
        window,
        drift,
        noise_floor,
        counterfactual: mu.abs().powf(2.5) * window,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseDrift {
    pub mu: f64,
    pub window: f64,
    pub drift: f64,
    /// Largest deviation of the phase from its own linear trend over the window.
    pub noise_floor: f64,
    /// Drift a rotating wave with angular speed `|mu|^{5/2}` would accumulate.
    pub counterfactual: f64,
}

fn sweep_row(
    exp: &Experiment,
    verdict: &BifurcationVerdict,
    c: f64,
    a_coef: f64,
    b_coef: f64,
    mu: f64,
) -> Result<ComparisonRow> {
    let r_pred = verdict
        .predicted_amplitude(mu)
        .ok_or(Error::NonBifurcatingSide { mu })?;
    let r0 = exp.tol.initial_amplitude;
    let start = exp.initial_state(r0, 0.0)?;
    let run = run_to_steady(exp, mu, start)?;
    let mut phase = f64::NAN;
    if run.converged {
        if let Some(state) = run.state.clone() {
            phase = phase_drift(exp, mu, state, exp.tol.phase_window)?.drift;
        }
    }
    let r_ode = truncated_solution(a_coef * mu, b_coef, r0, run.t_final).unwrap_or(f64::NAN);
    Ok(ComparisonRow {
        mu,
        r_predicted: r_pred,
        r_measured: run.r,
        rel_error: (run.r - r_pred).abs() / r_pred,
        phase_drift: phase,
        second_harmonic_predicted: 2.0 * c * r_pred * r_pred,
        second_harmonic_measured: 2.0 * run.second_harmonic,
        converged: run.converged,
        t_converged: run.t_final,
        r_ode,
    })
}

/// DNS sweep over the experiment's `mu` list against the predicted branch.
///
/// Every `mu` must lie on the bifurcating side of a supercritical verdict. Runs execute in
/// parallel; rows keep the input order.
pub fn run_bifurcation_sweep(exp: &Experiment) -> Result<ComparisonReport> {
    if exp.mu_list.is_empty() {
        return Err(Error::InvalidParameter("empty mu list".into()));
    }
    let eq = exp.equation()?;
    let verdict = classify_bifurcation(&eq, exp.tol.degeneracy_tol)?;
    if verdict.kind != BifurcationKind::Supercritical {
        return Err(Error::InvalidParameter(
            "sweep requires a supercritical configuration; use run_subcritical_bracket".into(),
        ));
    }
    if let Some(&mu) = exp.mu_list.iter().find(|&&m| verdict.predicted_amplitude(m).is_none()) {
        return Err(Error::NonBifurcatingSide { mu });
    }
    let c = second_order_correction(&exp.cfg, &exp.flux)?.tau_harmonic_ratio().abs();
    let rows = exp
        .mu_list
        .par_iter()
        .map(|&mu| sweep_row(exp, &verdict, c, eq.a_coef, eq.b_coef, mu))
        .collect::<Result<Vec<_>>>()?;
    for r in rows.iter().filter(|r| !r.converged) {
        log::warn!(
            "mu = {} did not reach quasi-steady state by t = {}",
            r.mu,
            r.t_converged
        );
    }
    let mut conv: Vec<&ComparisonRow> = rows.iter().filter(|r| r.converged).collect();
    let exponent = loglog_exponent(&conv);
    conv.sort_by(|a, b| a.mu.abs().total_cmp(&b.mu.abs()));
    conv.truncate(3);
    let exponent_small_mu = loglog_exponent(&conv);
    Ok(ComparisonReport {
        verdict,
        a_coef: eq.a_coef,
        b_coef: eq.b_coef,
        second_harmonic_coef: c,
        rows,
        exponent,
        exponent_small_mu,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BracketReport {
    pub verdict: BifurcationVerdict,
    /// Unstable branch radius on the bifurcating side.
    pub r_unstable: f64,
    pub below: FateRun,
    pub above: FateRun,
    /// Small data on the side where the trivial state is unstable.
    pub small_data_unstable_side: FateRun,
}

impl BracketReport {
    pub fn passed(&self) -> bool {
        self.below.fate == Fate::Decayed
            && self.above.fate == Fate::Escaped
            && self.small_data_unstable_side.fate == Fate::Escaped
    }
}

/// DNS runs bracketing the unstable branch of a subcritical configuration at `mu` (on the bifurcating side).
///
/// Starts at `0.5 r_u` and `1.5 r_u`; the first should decay, the second escape past
/// `escape_factor * r_u`. Small data at `-mu` should escape as well.
pub fn run_subcritical_bracket(exp: &Experiment, mu: f64) -> Result<BracketReport> {
    let eq = exp.equation()?;
    let verdict = classify_bifurcation(&eq, exp.tol.degeneracy_tol)?;
    if verdict.kind != BifurcationKind::Subcritical {
        return Err(Error::InvalidParameter(
            "bracket requires a subcritical configuration".into(),
        ));
    }
    let r_u = verdict
        .predicted_amplitude(mu)
        .ok_or(Error::NonBifurcatingSide { mu })?;
    let escape = exp.tol.escape_factor * r_u;
    let runs: Vec<FateRun> = [(mu, 0.5 * r_u), (mu, 1.5 * r_u), (-mu, exp.tol.initial_amplitude)]
        .par_iter()
        .map(|&(m, r0)| run_fate(exp, m, r0, escape))
        .collect::<Result<_>>()?;
    Ok(BracketReport {
        verdict,
        r_unstable: r_u,
        below: runs[0],
        above: runs[1],
        small_data_unstable_side: runs[2],
    })
}
