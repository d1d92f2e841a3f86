use std::ops::ControlFlow;

use num_complex::Complex64;
use serde::Serialize;

use super::config::{ExperimentConfig, ToleranceBlock};
use crate::dns::{evolve_with, FieldState, ObserverConfig, Stepper, StepperConfig};
use crate::error::{Error, Result};
use crate::model::{FluxModel, NormalizedParameters};
use crate::reduction::{amplitude_equation, AmplitudeEquation};
use crate::spectral::CriticalConfiguration;

/// A certified configuration plus the DNS settings for a family of runs.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub cfg: CriticalConfiguration,
    pub flux: FluxModel,
    pub mu_list: Vec<f64>,
    pub n: usize,
    pub stepper: StepperConfig,
    pub seed: u64,
    pub noise: f64,
    pub tol: ToleranceBlock,
}

impl Experiment {
    pub fn new(
        cfg: CriticalConfiguration,
        flux: FluxModel,
        mu_list: Vec<f64>,
        n: usize,
        stepper: StepperConfig,
        tol: ToleranceBlock,
        allow_large_mu: bool,
    ) -> Result<Self> {
        if let Some(mu) = mu_list
            .iter()
            .find(|m| !m.is_finite() || m.abs() > tol.perturbative_mu_max)
        {
            if !allow_large_mu || !mu.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "mu = {mu} outside the perturbative range |mu| <= {}",
                    tol.perturbative_mu_max
                )));
            }
        }
        FieldState::zeros(n)?;
        if 2 * cfg.k0() as usize > n / 2 - 1 {
            return Err(Error::InvalidParameter(format!(
                "grid n = {n} does not resolve the second harmonic of k0 = {}",
                cfg.k0()
            )));
        }
        Ok(Self {
            cfg,
            flux,
            mu_list,
            n,
            stepper,
            seed: 0,
            noise: 0.0,
            tol,
        })
    }

    pub fn with_seed(mut self, seed: u64, noise: f64) -> Self {
        self.seed = seed;
        self.noise = noise;
        self
    }

    pub fn from_config(c: &ExperimentConfig, tol: ToleranceBlock) -> Result<Self> {
        let flux = FluxModel::try_from(c.flux.clone())?;
        let cfg = c.critical.certify(&flux, &tol)?;
        Ok(Self::new(cfg, flux, c.mu.clone(), c.grid.n, c.stepper, tol, c.allow_large_mu)?.with_seed(c.seed, c.noise))
    }

    pub fn equation(&self) -> Result<AmplitudeEquation> {
        amplitude_equation(&self.cfg, &self.flux)
    }

    /// `(a_c, delta_c + mu / a_c)`: varies `delta` only.
    pub fn params_for(&self, mu: f64) -> NormalizedParameters {
        NormalizedParameters::normalized(self.cfg.a_c(), self.cfg.delta_c() + mu / self.cfg.a_c())
    }

    pub fn stepper_for(&self, mu: f64) -> Result<Stepper> {
        Stepper::new(self.n, self.params_for(mu), self.flux.clone(), self.stepper)
    }

    /// `A xi + c.c.` with `A = r0 e^{i theta}` plus the experiment's seeded noise.
    pub fn initial_state(&self, r0: f64, theta: f64) -> Result<FieldState> {
        let k0 = self.cfg.k0();
        let a = Complex64::from_polar(r0, theta);
        let mut s = FieldState::zeros(self.n)?;
        let xi_u = Complex64::new(0.0, -self.cfg.a_c() * (k0 as f64).powi(3));
        s.set_mode(k0 as usize, a, a * xi_u)?;
        if self.noise > 0.0 {
            s.add_noise(self.seed, self.noise, 4 * k0 as usize);
        }
        Ok(s)
    }
}

/// Wrap an angle difference into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y - two_pi
    } else {
        y
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SteadyRun {
    pub converged: bool,
    pub t_final: f64,
    /// `|tau_k0|`, the one-sided coefficient.
    pub r: f64,
    pub phase: f64,
    /// `|tau_2k0|`, the one-sided coefficient.
    pub second_harmonic: f64,
    /// `|Delta arg tau_k0|` across the last convergence window.
    pub phase_change: f64,
    #[serde(skip)]
    pub state: Option<FieldState>,
}

/// Run to quasi-steady state: `|r(t) - r(t - W)| < rel r(t)` with `W = window_factor / |a mu|`.
pub fn run_to_steady(exp: &Experiment, mu: f64, start: FieldState) -> Result<SteadyRun> {
    let eq = exp.equation()?;
    let rate = (eq.a_coef * mu).abs();
    if rate == 0.0 {
        return Err(Error::InvalidParameter("mu = 0 has no relaxation scale".into()));
    }
    let window = exp.tol.steady_window_factor / rate;
    let t_max = start.time + exp.tol.max_time_factor / rate;
    let dt = exp.stepper.dt;
    // about 50 samples per window
    let stride = ((window / 50.0 / dt).floor() as usize).max(1);
    let sample_dt = stride as f64 * dt;
    let lag = (window / sample_dt).ceil() as usize;
    let mut stepper = exp.stepper_for(mu)?;
    let k0 = exp.cfg.k0() as usize;
    let obs = ObserverConfig { stride, k0 };
    let mut hist: Vec<(f64, f64)> = Vec::new();
    let mut converged = false;
    let mut phase_change = f64::NAN;
    let rel = exp.tol.steady_rel_change;
    let ev = evolve_with(start, &mut stepper, t_max, &obs, |_, rec| {
        hist.push((rec.abs_tau_k0, rec.arg_tau_k0));
        if hist.len() > lag {
            let (r_then, p_then) = hist[hist.len() - 1 - lag];
            let (r_now, p_now) = (rec.abs_tau_k0, rec.arg_tau_k0);
            if r_now > 0.0 && (r_now - r_then).abs() < rel * r_now {
                converged = true;
                phase_change = wrap_angle(p_now - p_then).abs();
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    let s = ev.state;
    let t1 = s.tau_coefficient(k0 as i64);
    Ok(SteadyRun {
        converged,
        t_final: s.time,
        r: t1.norm(),
        phase: t1.arg(),
        second_harmonic: s.tau_coefficient(2 * k0 as i64).norm(),
        phase_change,
        state: Some(s),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Fate {
    Decayed,
    Escaped,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FateRun {
    pub mu: f64,
    pub r0: f64,
    pub fate: Fate,
    pub t_final: f64,
    pub r_final: f64,
}

/// Follow `|tau_k0|` from `A(0) = r0` until it decays below `decay_fraction * r0`
/// or exceeds `escape_radius` (blowup also counts as escape).
pub fn run_fate(exp: &Experiment, mu: f64, r0: f64, escape_radius: f64) -> Result<FateRun> {
    let eq = exp.equation()?;
    let rate = (eq.a_coef * mu).abs();
    let t_max = exp.tol.max_time_factor / rate;
    let mut stepper = exp.stepper_for(mu)?;
    let k0 = exp.cfg.k0() as usize;
    let stride = ((0.1 / rate / exp.stepper.dt).floor() as usize).max(1);
    let obs = ObserverConfig { stride, k0 };
    let mut fate = Fate::Undecided;
    let floor = exp.tol.decay_fraction * r0;
    let start = exp.initial_state(r0, 0.0)?;
    match evolve_with(start, &mut stepper, t_max, &obs, |_, rec| {
        if rec.t > 0.0 && rec.abs_tau_k0 < floor {
            fate = Fate::Decayed;
            return ControlFlow::Break(());
        }
        if rec.abs_tau_k0 > escape_radius {
            fate = Fate::Escaped;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    }) {
        Ok(ev) => Ok(FateRun {
            mu,
            r0,
            fate,
            t_final: ev.state.time,
            r_final: ev.state.tau_coefficient(k0 as i64).norm(),
        }),
        Err(Error::Blowup { time }) => Ok(FateRun {
            mu,
            r0,
            fate: Fate::Escaped,
            t_final: time,
            r_final: f64::INFINITY,
        }),
        Err(e) => Err(e),
    }
}
