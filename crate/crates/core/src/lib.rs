//! Bifurcation analysis of the viscous wave system
//!
//! ```text
//! tau_t - u_x = -a tau_xxxx
//! u_t - sigma(tau)_x = -delta u_xx - u_xxxx
//! ```
//!
//! on the periodic domain `[-pi, pi]` with mean-zero data: per-mode spectral
//! admissibility, center-manifold reduction to the cubic amplitude equation,
//! the reduced radial dynamics, and a Fourier pseudospectral simulator that
//! checks the predicted stationary O(2)-equivariant bifurcation.

// `!(x > 0.0)` is used on purpose so that NaN fails parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitude;
pub mod dns;
pub mod error;
pub mod harness;
pub mod model;
pub mod reduction;
pub mod spectral;

pub use amplitude::{equilibria, integrate_radial, truncated_solution};
pub use dns::{FieldState, StepperConfig};
pub use error::{Error, Result};
pub use model::{flux_eval, normalize_domain, FluxConfig, FluxModel, NormalizedParameters, PhysicalParameters, Tail};
pub use num_complex::Complex64;
pub use reduction::{
    amplitude_equation, build_basis, classify_bifurcation, predicted_wave, project_center, second_order_correction,
    AmplitudeEquation, BifurcationVerdict, ReductionBasis, SecondOrderCorrection,
};
pub use spectral::{
    check_admissible, dispersion_roots, mode_matrix, resolvent_norm, spectral_summary, CriticalConfiguration,
    DispersionRoots, ModeMatrix, SpectralSummary,
};
