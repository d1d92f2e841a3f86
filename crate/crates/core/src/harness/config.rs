use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dns::{Dealias, ObserverConfig, Scheme, StepperConfig};
use crate::error::{Error, Result};
use crate::model::{FluxConfig, FluxModel, NormalizedParameters};
use crate::spectral::{check_admissible, CriticalConfiguration, Rejection, Tolerances, DEFAULT_KMAX};

/// Every tolerance and threshold the harness uses, with their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ToleranceBlock {
    pub equality_tol: f64,
    pub nonzero_tol: f64,
    pub k_max: u32,
    /// Quasi-steady test: relative change of `|tau_k0|` over the window.
    pub steady_rel_change: f64,
    /// Window length in units of `1 / |a mu|`.
    pub steady_window_factor: f64,
    /// Give up after this many `1 / |a mu|`.
    pub max_time_factor: f64,
    pub amplitude_rel_error: f64,
    pub exponent_min: f64,
    pub exponent_max: f64,
    pub second_harmonic_rel_error: f64,
    pub phase_drift_tol: f64,
    pub phase_window: f64,
    pub symmetry_tol: f64,
    pub phase_audit_tol: f64,
    pub perturbative_mu_max: f64,
    /// Escape when `|tau_k0|` exceeds this multiple of the reference radius.
    pub escape_factor: f64,
    /// Decay when `|tau_k0|` falls below this fraction of its initial value.
    pub decay_fraction: f64,
    pub initial_amplitude: f64,
    pub degeneracy_tol: f64,
}

impl Default for ToleranceBlock {
    fn default() -> Self {
        Self {
            equality_tol: 1e-10,
            nonzero_tol: 1e-8,
            k_max: DEFAULT_KMAX,
            steady_rel_change: 1e-8,
            steady_window_factor: 10.0,
            max_time_factor: 400.0,
            amplitude_rel_error: 0.1,
            exponent_min: 0.48,
            exponent_max: 0.52,
            second_harmonic_rel_error: 0.1,
            phase_drift_tol: 1e-4,
            phase_window: 100.0,
            symmetry_tol: 1e-10,
            phase_audit_tol: 1e-9,
            perturbative_mu_max: 0.1,
            escape_factor: 3.0,
            decay_fraction: 1e-2,
            initial_amplitude: 1e-3,
            degeneracy_tol: 1e-12,
        }
    }
}

impl ToleranceBlock {
    pub fn spectral(&self) -> Tolerances {
        Tolerances {
            equality: self.equality_tol,
            nonzero: self.nonzero_tol,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("tolerance block: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalTriple {
    pub k0: u32,
    #[serde(alias = "aC")]
    pub ac: f64,
    #[serde(alias = "deltaC")]
    pub deltac: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<u32>,
}

impl CriticalTriple {
    pub fn certify(
        &self,
        flux: &FluxModel,
        tol: &ToleranceBlock,
    ) -> std::result::Result<CriticalConfiguration, Rejection> {
        let k_max = self.kmax.unwrap_or(tol.k_max).max(2 * self.k0);
        check_admissible(self.k0, self.ac, self.deltac, flux, k_max, tol.spectral())
    }
}

/// Configuration of `reduce` / `predict`: `{k0, ac, deltac, flux, kmax?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReduceConfig {
    #[serde(flatten)]
    pub critical: CriticalTriple,
    pub flux: FluxConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 64 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsConfig {
    pub a: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InitialConfig {
    /// `tau_k0 = amplitude`; `u_k0` is set so the data lies along the center direction when
    /// `alongKernel` is true.
    pub amplitude: f64,
    #[serde(default = "one")]
    pub k0: usize,
    #[serde(default)]
    pub along_kernel: bool,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            amplitude: 1e-3,
            k0: 1,
            along_kernel: false,
            noise: 0.0,
            seed: 0,
        }
    }
}

/// `simulate` input: `{params, flux, grid, stepper, tEnd, observers, initial?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub flux: FluxConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub stepper: StepperConfig,
    pub t_end: f64,
    #[serde(default)]
    pub observers: ObserverConfig,
    #[serde(default)]
    pub initial: InitialConfig,
}

impl RunConfig {
    pub fn params(&self) -> NormalizedParameters {
        NormalizedParameters::normalized(self.params.a, self.params.delta)
    }
}

/// `sweep` / `audit` input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub critical: CriticalTriple,
    pub flux: FluxConfig,
    pub mu: Vec<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_stepper")]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub seed: u64,
    /// Size of the seeded noise added to the initial data.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub allow_large_mu: bool,
}

pub fn default_stepper() -> StepperConfig {
    StepperConfig {
        dt: 0.5,
        dealias: Dealias::ZeroPadDouble,
        scheme: Scheme::Etdrk4,
    }
}
