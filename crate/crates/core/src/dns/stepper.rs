use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::FieldState;
use super::propagator::ScaledMode;
use super::transform::Transform;
use crate::error::{Error, Result};
use crate::model::{FluxModel, NormalizedParameters};
use crate::spectral::Mat2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Dealias {
    /// Keep `|k| <= n/3`; cubic products alias into the retained band.
    TwoThirds,
    /// Evaluate products on a grid of `2n` points; exact through cubic order.
    #[default]
    ZeroPadDouble,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Scheme {
    #[default]
    Etdrk4,
    StrangSplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default)]
    pub scheme: Scheme,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            dealias: Dealias::default(),
            scheme: Scheme::default(),
        }
    }
}

/// Extra pointwise forcing `g(tau, tau_x)` added directly to the `u` equation.
///
/// Not part of the model; used to build symmetry-breaking negative controls.
pub type ExtraForcing = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Energy above which a run is declared to have escaped to blowup.
pub const DEFAULT_BLOWUP_ENERGY: f64 = 1e8;
/// Relative energy above `n/3` that triggers the resolution warning.
pub const RESOLUTION_WARN_FRACTION: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
struct ModeCoefs {
    e: Mat2,
    e2: Mat2,
    // only the second columns of the phi-type matrices are needed: N has no tau component
    q: [Complex64; 2],
    f1: [Complex64; 2],
    f2: [Complex64; 2],
    f3: [Complex64; 2],
}

fn col1(m: &Mat2, h: f64) -> [Complex64; 2] {
    [m[0][1] * h, m[1][1] * h]
}

fn apply(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// One-step map of the pseudospectral discretization.
///
/// Holds the per-mode exponential coefficients for a fixed `dt` and the transform workspace.
#[derive(Clone)]
pub struct Stepper {
    cfg: StepperConfig,
    params: NormalizedParameters,
    flux: FluxModel,
    n: usize,
    coefs: Vec<ModeCoefs>,
    transform: Transform,
    /// highest mode fed to and kept from the nonlinear product
    k_band: usize,
    extra: Option<ExtraForcing>,
    blowup_energy: f64,
    warned: bool,
    // workspace
    tau_phys: Vec<f64>,
    taux_phys: Vec<f64>,
    prod: Vec<f64>,
    modes: Vec<Complex64>,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("cfg", &self.cfg)
            .field("params", &self.params)
            .field("n", &self.n)
            .finish()
    }
}

impl Stepper {
    pub fn new(n: usize, params: NormalizedParameters, flux: FluxModel, cfg: StepperConfig) -> Result<Self> {
        if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", cfg.dt)));
        }
        let probe = FieldState::zeros(n)?;
        let k_max = probe.k_max();
        let h = cfg.dt;
        let mut coefs = Vec::with_capacity(k_max);
        for k in 1..=k_max as i64 {
            let full = ScaledMode::new(k, params.a(), params.delta(), &flux, h)?;
            let half = ScaledMode::new(k, params.a(), params.delta(), &flux, 0.5 * h)?;
            coefs.push(ModeCoefs {
                e: full.exp(),
                e2: half.exp(),
                q: col1(&half.phi_combination(&[0.0, 1.0]), 0.5 * h),
                f1: col1(&full.phi_combination(&[0.0, 1.0, -3.0, 4.0]), h),
                f2: col1(&full.phi_combination(&[0.0, 0.0, 1.0, -2.0]), h),
                f3: col1(&full.phi_combination(&[0.0, 0.0, -1.0, 4.0]), h),
            });
        }
        let (m, k_band) = match cfg.dealias {
            Dealias::ZeroPadDouble => (2 * n, k_max),
            Dealias::TwoThirds => (n, n / 3),
        };
        Ok(Self {
            cfg,
            params,
            flux,
            n,
            coefs,
            transform: Transform::new(m),
            k_band: k_band.min(k_max),
            extra: None,
            blowup_energy: DEFAULT_BLOWUP_ENERGY,
            warned: false,
            tau_phys: vec![0.0; m],
            taux_phys: vec![0.0; m],
            prod: vec![0.0; m],
            modes: vec![Complex64::new(0.0, 0.0); k_max],
        })
    }

    pub fn with_extra_forcing(mut self, g: ExtraForcing) -> Self {
        self.extra = Some(g);
        self
    }

    pub fn with_blowup_energy(mut self, e: f64) -> Self {
        self.blowup_energy = e;
        self
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn params(&self) -> NormalizedParameters {
        self.params
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn is_linear(&self) -> bool {
        self.flux.is_linear() && self.extra.is_none()
    }

    /// u-slot of `N(tau)`: `ik * FFT[ sigma''/2 tau^2 + sigma'''/6 tau^3 + Gamma(tau) ]`.
    fn nonlinear_into(&mut self, tau: &[Complex64], out: &mut [Complex64]) {
        let band = self.k_band;
        self.modes.fill(Complex64::new(0.0, 0.0));
        self.modes[..band].copy_from_slice(&tau[..band]);
        self.transform.to_physical(&self.modes, &mut self.tau_phys);
        for (p, &t) in self.prod.iter_mut().zip(&self.tau_phys) {
            *p = self.flux.nonlinear_part(t);
        }
        self.transform.to_spectral(&self.prod, out);
        for (j, c) in out.iter_mut().enumerate() {
            let k = (j + 1) as f64;
            *c = if j < band {
                *c * Complex64::new(0.0, k)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        if let Some(g) = self.extra.clone() {
            for (j, m) in self.modes.iter_mut().enumerate() {
                *m *= Complex64::new(0.0, (j + 1) as f64);
            }
            self.transform.to_physical(&self.modes, &mut self.taux_phys);
            for ((p, &t), &tx) in self.prod.iter_mut().zip(&self.tau_phys).zip(&self.taux_phys) {
                *p = g(t, tx);
            }
            let mut extra = vec![Complex64::new(0.0, 0.0); out.len()];
            self.transform.to_spectral(&self.prod, &mut extra);
            for (o, e) in out.iter_mut().zip(extra).take(band) {
                *o += e;
            }
        }
    }

    /// The nonlinear increment `N(U)` as a field (its tau component is zero).
    pub fn nonlinear_term(&mut self, state: &FieldState) -> FieldState {
        assert_eq!(state.n(), self.n, "grid mismatch");
        let mut out = FieldState::zeros(self.n).expect("valid grid");
        let mut buf = vec![Complex64::new(0.0, 0.0); state.k_max()];
        self.nonlinear_into(state.tau_modes(), &mut buf);
        let (_, u) = out.modes_mut();
        u.copy_from_slice(&buf);
        out.time = state.time;
        out
    }

    /// Advance one step of size `dt`.
    pub fn step(&mut self, state: &mut FieldState) -> Result<()> {
        assert_eq!(state.n(), self.n, "grid mismatch");
        let k_max = state.k_max();
        if self.is_linear() {
            let (tau, u) = state.modes_mut();
            for (j, c) in self.coefs.iter().enumerate() {
                let v = apply(&c.e, [tau[j], u[j]]);
                tau[j] = v[0];
                u[j] = v[1];
            }
        } else {
            match self.cfg.scheme {
                Scheme::Etdrk4 => self.etdrk4(state, k_max),
                Scheme::StrangSplit => self.strang(state, k_max),
            }
        }
        state.time += self.cfg.dt;
        self.check_health(state)
    }

    fn etdrk4(&mut self, state: &mut FieldState, k_max: usize) {
        let zero = Complex64::new(0.0, 0.0);
        let mut nu = vec![zero; k_max];
        let mut na = vec![zero; k_max];
        let mut nb = vec![zero; k_max];
        let mut nc = vec![zero; k_max];
        let mut a = vec![[zero; 2]; k_max];
        let mut tmp_tau = vec![zero; k_max];

        let v: Vec<[Complex64; 2]> = state
            .tau_modes()
            .iter()
            .zip(state.u_modes())
            .map(|(&t, &u)| [t, u])
            .collect();
        let ev2: Vec<[Complex64; 2]> = v.iter().zip(&self.coefs).map(|(v, c)| apply(&c.e2, *v)).collect();

        self.nonlinear_into(state.tau_modes(), &mut nu);
        for j in 0..k_max {
            let q = self.coefs[j].q;
            a[j] = [ev2[j][0] + q[0] * nu[j], ev2[j][1] + q[1] * nu[j]];
            tmp_tau[j] = a[j][0];
        }
        self.nonlinear_into(&tmp_tau, &mut na);
        for j in 0..k_max {
            let q = self.coefs[j].q;
            tmp_tau[j] = ev2[j][0] + q[0] * na[j];
        }
        self.nonlinear_into(&tmp_tau, &mut nb);
        for j in 0..k_max {
            let c = &self.coefs[j];
            let ea = apply(&c.e2, a[j]);
            let w = nb[j] * 2.0 - nu[j];
            tmp_tau[j] = ea[0] + c.q[0] * w;
        }
        self.nonlinear_into(&tmp_tau, &mut nc);
        let (tau, u) = state.modes_mut();
        for j in 0..k_max {
            let c = &self.coefs[j];
            let ev = apply(&c.e, v[j]);
            let s = (na[j] + nb[j]) * 2.0;
            tau[j] = ev[0] + c.f1[0] * nu[j] + c.f2[0] * s + c.f3[0] * nc[j];
            u[j] = ev[1] + c.f1[1] * nu[j] + c.f2[1] * s + c.f3[1] * nc[j];
        }
    }

    fn strang(&mut self, state: &mut FieldState, k_max: usize) {
        let mut n = vec![Complex64::new(0.0, 0.0); k_max];
        {
            let (tau, u) = state.modes_mut();
            for (j, c) in self.coefs.iter().enumerate() {
                let v = apply(&c.e2, [tau[j], u[j]]);
                tau[j] = v[0];
                u[j] = v[1];
            }
        }
        // the nonlinear substep leaves tau fixed, so u advances exactly by dt * N(tau)
        self.nonlinear_into(state.tau_modes(), &mut n);
        let dt = self.cfg.dt;
        let (tau, u) = state.modes_mut();
        for (j, c) in self.coefs.iter().enumerate() {
            let v = apply(&c.e2, [tau[j], u[j] + n[j] * dt]);
            tau[j] = v[0];
            u[j] = v[1];
        }
    }

    fn check_health(&mut self, state: &FieldState) -> Result<()> {
        let e = state.energy();
        if !state.is_finite() || !e.is_finite() || e > self.blowup_energy {
            return Err(Error::Blowup { time: state.time });
        }
        if !self.warned && e > 0.0 {
            let hi = state.energy_above(self.n / 3);
            if hi > RESOLUTION_WARN_FRACTION * e {
                log::warn!(
                    "under-resolved: energy fraction {:.2e} above k = n/3 at t = {:.3}",
                    hi / e,
                    state.time
                );
                self.warned = true;
            }
        }
        Ok(())
    }
}

/// Free-function form: one step with a freshly built stepper.
pub fn step(
    state: &FieldState,
    params: NormalizedParameters,
    flux: &FluxModel,
    cfg: StepperConfig,
) -> Result<FieldState> {
    let mut s = Stepper::new(state.n(), params, flux.clone(), cfg)?;
    let mut out = state.clone();
    s.step(&mut out)?;
    Ok(out)
}

/// Free-function form of [`Stepper::nonlinear_term`].
pub fn nonlinear_term(state: &FieldState, flux: &FluxModel, cfg: StepperConfig) -> Result<FieldState> {
    let mut s = Stepper::new(state.n(), NormalizedParameters::normalized(1.0, 0.0), flux.clone(), cfg)?;
    Ok(s.nonlinear_term(state))
}
