//! Fourier pseudospectral simulation of the full nonlinear system.
//!
//! The linear part is block-diagonal in Fourier space and is integrated exactly with
//! per-mode 2x2 exponentials; the nonlinearity `(0, d/dx[sigma(tau) - sigma'(0) tau])`
//! is evaluated pseudospectrally with dealiasing and advanced by ETDRK4 or Strang splitting.

mod checkpoint;
mod evolve;
mod field;
mod propagator;
mod stepper;
mod transform;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use evolve::{evolve, evolve_with, Evolution, ObserverConfig, ObserverRecord};
pub use field::FieldState;
pub use propagator::{linear_propagator, mat_mul, phi, phi_divided};
pub use stepper::{nonlinear_term, step, Dealias, ExtraForcing, Scheme, Stepper, StepperConfig, DEFAULT_BLOWUP_ENERGY};
pub use transform::Transform;
