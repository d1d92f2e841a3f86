use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::experiment::{run_to_steady, wrap_angle, Experiment};
use crate::dns::{FieldState, Stepper};
use crate::error::Result;
use crate::reduction::{build_basis, center_field, project_center, second_order_correction};

/// Amplitude of the random state used in the commutation checks.
const AUDIT_STATE_SCALE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditRow {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    /// Negative controls pass when the residual exceeds `tol`.
    pub expect_violation: bool,
    pub passed: bool,
}

impl AuditRow {
    fn new(name: &str, residual: f64, tol: f64, expect_violation: bool) -> Self {
        let within = residual <= tol;
        Self {
            name: name.to_string(),
            residual,
            tol,
            expect_violation,
            passed: within != expect_violation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditTable {
    pub mu: f64,
    pub rows: Vec<AuditRow>,
}

impl AuditTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn row(&self, name: &str) -> Option<&AuditRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// `max |step(T s) - T step(s)|` for a transformation `T`.
pub fn step_commutator(stepper: &mut Stepper, s: &FieldState, t: impl Fn(&FieldState) -> FieldState) -> Result<f64> {
    let mut a = t(s);
    stepper.step(&mut a)?;
    let mut b = s.clone();
    stepper.step(&mut b)?;
    Ok(a.max_diff(&t(&b)))
}

/// Phase offset of two steady runs, the second started from data shifted by `shift`, minus `k0 shift`.
pub fn phase_offset_error(exp: &Experiment, mu: f64, theta0: f64, shift: f64) -> Result<f64> {
    let r0 = exp.tol.initial_amplitude;
    let base = exp.initial_state(r0, theta0)?;
    let moved = base.shifted(shift);
    let a = run_to_steady(exp, mu, base)?;
    let b = run_to_steady(exp, mu, moved)?;
    let k0 = exp.cfg.k0() as f64;
    Ok(wrap_angle(b.phase - a.phase - k0 * shift).abs())
}

/// Shift and reflection commutation for one DNS step, reduced-field equivariance,
/// the DNS phase audit, and a reflection-breaking negative control.
pub fn run_symmetry_audit(exp: &Experiment) -> Result<AuditTable> {
    let mu = exp.mu_list.first().copied().unwrap_or(0.01);
    let tol = exp.tol.symmetry_tol;
    let n = exp.n;
    let mut s = FieldState::zeros(n)?;
    s.add_noise(exp.seed, AUDIT_STATE_SCALE, n / 4);
    let cell = 2.0 * PI / n as f64;
    let mut stepper = exp.stepper_for(mu)?;
    let mut rows = vec![
        AuditRow::new(
            "shiftOneCell",
            step_commutator(&mut stepper, &s, |x| x.shifted(cell))?,
            tol,
            false,
        ),
        AuditRow::new(
            "shiftArbitrary",
            step_commutator(&mut stepper, &s, |x| x.shifted(0.7))?,
            tol,
            false,
        ),
        AuditRow::new(
            "reflection",
            step_commutator(&mut stepper, &s, |x| x.reflected())?,
            tol,
            false,
        ),
    ];

    let basis = build_basis(&exp.cfg)?;
    let corr = second_order_correction(&exp.cfg, &exp.flux)?;
    let k0 = exp.cfg.k0() as f64;
    let amp = Complex64::new(0.3, -0.2);
    let phi = 0.45;
    let rot = Complex64::from_polar(1.0, k0 * phi);
    let mut shift_res = center_field(&basis, amp, n)?
        .shifted(phi)
        .max_diff(&center_field(&basis, amp * rot, n)?);
    shift_res = shift_res.max(corr.field(amp, n)?.shifted(phi).max_diff(&corr.field(amp * rot, n)?));
    let mut refl_res = center_field(&basis, amp, n)?
        .reflected()
        .max_diff(&center_field(&basis, amp.conj(), n)?);
    refl_res = refl_res.max(corr.field(amp, n)?.reflected().max_diff(&corr.field(amp.conj(), n)?));
    let (pa, _) = project_center(&center_field(&basis, amp, n)?.shifted(phi), &basis);
    let proj_res = (pa - amp * rot).norm();
    rows.push(AuditRow::new("reducedShift", shift_res, tol, false));
    rows.push(AuditRow::new("reducedReflection", refl_res, tol, false));
    rows.push(AuditRow::new("projectionShift", proj_res, tol, false));

    let offset = phase_offset_error(exp, mu, 0.3, 0.9)?;
    rows.push(AuditRow::new("phaseOffset", offset, exp.tol.phase_audit_tol, false));

    let mut broken = Stepper::new(n, exp.params_for(mu), exp.flux.clone(), exp.stepper)?
        .with_extra_forcing(Arc::new(|_tau: f64, tau_x: f64| tau_x * tau_x));
    rows.push(AuditRow::new(
        "reflectionNegativeControl",
        step_commutator(&mut broken, &s, |x| x.reflected())?,
        tol,
        true,
    ));
    Ok(AuditTable { mu, rows })
}
