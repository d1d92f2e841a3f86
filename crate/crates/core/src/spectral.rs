//! Per-mode linear analysis of `L(a, delta)`.
//!
//! On the Fourier mode `e^{ikx}` the linearization reduces to the 2x2 matrix
//!
//! ```text
//! M_k = [ -a k^4        i k           ]
//!       [ i s1 k        delta k^2 - k^4 ]
//! ```
//!
//! whose characteristic polynomial is `lambda^2 + B(k) lambda + C(k)` with
//! `B = (a+1)k^4 - delta k^2` and `C = a k^4 (k^4 - delta k^2) + s1 k^2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::FluxModel;

pub type Mat2 = [[Complex64; 2]; 2];

/// Default tolerance for the equality condition (a).
pub const EQUALITY_TOL: f64 = 1e-10;
/// Default tolerance for the non-vanishing conditions.
pub const NONZERO_TOL: f64 = 1e-8;
pub const DEFAULT_KMAX: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMatrix {
    pub k: i64,
    pub entries: Mat2,
}

impl ModeMatrix {
    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        mat_vec(&self.entries, v)
    }
}

pub fn mat_vec(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn mode_matrix(k: i64, a: f64, delta: f64, f: &FluxModel) -> Result<ModeMatrix> {
    if k == 0 {
        return Err(Error::ZeroMode);
    }
    let kf = k as f64;
    let k2 = kf * kf;
    let k4 = k2 * k2;
    Ok(ModeMatrix {
        k,
        entries: [
            [Complex64::new(-a * k4, 0.0), Complex64::new(0.0, kf)],
            [Complex64::new(0.0, f.sigma1 * kf), Complex64::new(delta * k2 - k4, 0.0)],
        ],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionRoots {
    pub k: i64,
    pub b: f64,
    pub c: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

impl DispersionRoots {
    pub fn roots(&self) -> [Complex64; 2] {
        [self.lambda_plus, self.lambda_minus]
    }

    /// `min |Re lambda|` over the two roots.
    pub fn min_abs_re(&self) -> f64 {
        self.lambda_plus.re.abs().min(self.lambda_minus.re.abs())
    }
}

/// `B(k)` and `C(k)`; `k` only enters through `k^2`.
pub fn dispersion_coefficients(k: i64, a: f64, delta: f64, sigma1: f64) -> (f64, f64) {
    let k2 = (k as f64) * (k as f64);
    let k4 = k2 * k2;
    let b = (a + 1.0) * k4 - delta * k2;
    let c = a * k4 * (k4 - delta * k2) + sigma1 * k2;
    (b, c)
}

pub fn dispersion_roots(k: i64, a: f64, delta: f64, f: &FluxModel) -> Result<DispersionRoots> {
    if k == 0 {
        return Err(Error::ZeroMode);
    }
    let (b, c) = dispersion_coefficients(k, a, delta, f.sigma1);
    let k2 = (k as f64) * (k as f64);
    let k4 = k2 * k2;
    // B^2 - 4C rewritten without the k^8 cancellation
    let w = (a - 1.0) * k4 + delta * k2;
    let disc = w * w - 4.0 * f.sigma1 * k2;
    let (lp, lm) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum() * sq);
        if q == 0.0 {
            // B = 0 and disc = 0 force C = 0
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            let r1 = q;
            let r2 = c / q;
            let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
            (Complex64::new(hi, 0.0), Complex64::new(lo, 0.0))
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im))
    };
    Ok(DispersionRoots {
        k,
        b,
        c,
        lambda_plus: lp,
        lambda_minus: lm,
    })
}

/// A validated `(k0, a_c, delta_c)` for a given `sigma'(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalConfiguration {
    k0: u32,
    a_c: f64,
    delta_c: f64,
    sigma1: f64,
    k_max: u32,
    gap: f64,
}

impl CriticalConfiguration {
    pub fn k0(&self) -> u32 {
        self.k0
    }
    pub fn a_c(&self) -> f64 {
        self.a_c
    }
    pub fn delta_c(&self) -> f64 {
        self.delta_c
    }
    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }
    pub fn k_max(&self) -> u32 {
        self.k_max
    }
    pub fn gap(&self) -> f64 {
        self.gap
    }
    /// `(a_c + 1) k0^2 - delta_c`, the non-degeneracy factor of condition (c).
    pub fn nondegeneracy(&self) -> f64 {
        let k0 = self.k0 as f64;
        (self.a_c + 1.0) * k0 * k0 - self.delta_c
    }
}

/// Checked conditions, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Condition {
    /// `a_c k0^4 (k0^2 - delta_c) + sigma'(0) = 0`
    CriticalMode,
    /// no imaginary-axis eigenvalue at `|k| != k0`
    NoOtherCenterModes,
    /// `(a_c + 1) k0^2 - delta_c != 0`
    Nondegenerate,
    /// second harmonic is non-resonant
    SecondHarmonic,
    /// `a_c != 0`
    NonzeroViscosity,
    /// real parts of the scanned spectrum keep growing at the top of the range
    TailMonotone,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionCheck {
    pub condition: Condition,
    pub passed: bool,
    /// Value of the tested expression (or `min |Re lambda|` for the spectral checks).
    pub value: f64,
    /// Witness mode for spectral failures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<i64>,
}

/// Per-condition verdict; `first_failure` is `None` iff the configuration is admissible.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AdmissibilityReport {
    pub k0: u32,
    pub a_c: f64,
    pub delta_c: f64,
    pub sigma1: f64,
    pub k_max: u32,
    pub checks: Vec<ConditionCheck>,
    pub gap: f64,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, c: Condition) -> Option<&ConditionCheck> {
        self.checks.iter().find(|x| x.condition == c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub equality: f64,
    pub nonzero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            equality: EQUALITY_TOL,
            nonzero: NONZERO_TOL,
        }
    }
}

/// Run every admissibility check and report all of them.
pub fn admissibility_report(
    k0: u32,
    a_c: f64,
    delta_c: f64,
    f: &FluxModel,
    k_max: u32,
    tol: Tolerances,
) -> Result<AdmissibilityReport> {
    if k0 == 0 {
        return Err(Error::ZeroMode);
    }
    if k_max < 2 * k0 {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} must be at least 2 k0 = {}",
            2 * k0
        )));
    }
    let s1 = f.sigma1;
    let k0f = k0 as f64;
    let k04 = k0f.powi(4);
    let mut checks = Vec::with_capacity(6);

    let cond_a = a_c * k04 * (k0f * k0f - delta_c) + s1;
    checks.push(ConditionCheck {
        condition: Condition::CriticalMode,
        passed: cond_a.abs() <= tol.equality,
        value: cond_a,
        witness: Some(k0 as i64),
    });

    checks.push(ConditionCheck {
        condition: Condition::NonzeroViscosity,
        passed: a_c.abs() > tol.nonzero,
        value: a_c,
        witness: None,
    });

    let cond_c = (a_c + 1.0) * k0f * k0f - delta_c;
    checks.push(ConditionCheck {
        condition: Condition::Nondegenerate,
        passed: cond_c.abs() > tol.nonzero,
        value: cond_c,
        witness: Some(k0 as i64),
    });

    let k2 = 2.0 * k0f;
    let cond_d = s1 + a_c * k2.powi(4) * (k2 * k2 - delta_c);
    checks.push(ConditionCheck {
        condition: Condition::SecondHarmonic,
        passed: cond_d.abs() > tol.nonzero,
        value: cond_d,
        witness: Some(2 * k0 as i64),
    });

    // spectral meaning of (b), and the gap over every noncenter eigenvalue
    let mut gap = f64::INFINITY;
    let mut b_witness = None;
    let mut min_off = f64::INFINITY;
    let mut profile = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max as i64 {
        let roots = dispersion_roots(k, a_c, delta_c, f)?;
        profile.push(roots.min_abs_re());
        if k == k0 as i64 {
            // the partner of the zero root
            let partner = if roots.lambda_plus.norm() <= roots.lambda_minus.norm() {
                roots.lambda_minus
            } else {
                roots.lambda_plus
            };
            gap = gap.min(partner.re.abs());
            continue;
        }
        let m = roots.min_abs_re();
        if m < min_off {
            min_off = m;
        }
        if m <= tol.nonzero && b_witness.is_none() {
            b_witness = Some(k);
        }
        gap = gap.min(m);
    }
    checks.push(ConditionCheck {
        condition: Condition::NoOtherCenterModes,
        passed: b_witness.is_none(),
        value: min_off,
        witness: b_witness,
    });

    let start = (3 * k_max as usize) / 4;
    let tail_witness = (start.max(1)..profile.len())
        .find(|&i| profile[i] < profile[i - 1])
        .map(|i| i as i64 + 1);
    checks.push(ConditionCheck {
        condition: Condition::TailMonotone,
        passed: tail_witness.is_none() && a_c > 0.0,
        value: profile.last().copied().unwrap_or(0.0),
        witness: tail_witness,
    });

    checks.sort_by_key(|c| c.condition);
    Ok(AdmissibilityReport {
        k0,
        a_c,
        delta_c,
        sigma1: s1,
        k_max,
        checks,
        gap,
    })
}

/// Why a candidate configuration was not certified.
#[derive(Clone, Debug, PartialEq)]
pub enum Rejection {
    /// Inputs outside the domain of the check (`k0 = 0`, `k_max < 2 k0`).
    Invalid(Error),
    /// Some condition failed; the report names the first one and its witness.
    Conditions(AdmissibilityReport),
}

impl Rejection {
    pub fn report(&self) -> Option<&AdmissibilityReport> {
        match self {
            Rejection::Conditions(r) => Some(r),
            Rejection::Invalid(_) => None,
        }
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.report().and_then(|r| r.first_failure())
    }
}

impl From<Rejection> for Error {
    fn from(r: Rejection) -> Self {
        match r {
            Rejection::Invalid(e) => e,
            Rejection::Conditions(rep) => {
                let c = rep.first_failure().expect("rejected report has a failure");
                Error::NotAdmissible(format!("{:?} violated (witness k = {:?})", c.condition, c.witness))
            }
        }
    }
}

/// Verify the admissibility conditions and return the certified configuration.
pub fn check_admissible(
    k0: u32,
    a_c: f64,
    delta_c: f64,
    f: &FluxModel,
    k_max: u32,
    tol: Tolerances,
) -> std::result::Result<CriticalConfiguration, Rejection> {
    let report = admissibility_report(k0, a_c, delta_c, f, k_max, tol).map_err(Rejection::Invalid)?;
    if report.admissible() {
        Ok(CriticalConfiguration {
            k0,
            a_c,
            delta_c,
            sigma1: f.sigma1,
            k_max,
            gap: report.gap,
        })
    } else {
        Err(Rejection::Conditions(report))
    }
}

/// Build an admissible configuration with defaults (`k_max = 128`, default tolerances).
pub fn admissible(k0: u32, a_c: f64, delta_c: f64, f: &FluxModel) -> Result<CriticalConfiguration> {
    Ok(check_admissible(
        k0,
        a_c,
        delta_c,
        f,
        DEFAULT_KMAX.max(2 * k0),
        Tolerances::default(),
    )?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// `(k, lambda)` with `|Re lambda| <= tol`, both signs of `k`.
    pub center_modes: Vec<(i64, Complex64)>,
    pub stable_count: usize,
    pub unstable_count: usize,
    /// `min |Re lambda|` over noncenter eigenvalues.
    pub gap: f64,
}

pub fn spectral_summary(a: f64, delta: f64, f: &FluxModel, k_max: u32, tol: f64) -> Result<SpectralSummary> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let mut out = SpectralSummary {
        center_modes: Vec::new(),
        stable_count: 0,
        unstable_count: 0,
        gap: f64::INFINITY,
    };
    for k in 1..=k_max as i64 {
        let r = dispersion_roots(k, a, delta, f)?;
        for lam in r.roots() {
            for kk in [-k, k] {
                if lam.re.abs() <= tol {
                    out.center_modes.push((kk, lam));
                } else if lam.re < 0.0 {
                    out.stable_count += 1;
                } else {
                    out.unstable_count += 1;
                }
            }
            if lam.re.abs() > tol {
                out.gap = out.gap.min(lam.re.abs());
            }
        }
    }
    out.center_modes.sort_by_key(|(k, _)| *k);
    Ok(out)
}

/// Largest singular value of a 2x2 complex matrix.
fn singular_values(m: &Mat2) -> (f64, f64) {
    let fro2: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = (0.5 * (fro2 + disc)).sqrt();
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    (smax, smin)
}

/// `max_{1<=k<=k_max} || (i omega - M_k)^{-1} ||_2`.
pub fn resolvent_norm(omega: f64, a: f64, delta: f64, f: &FluxModel, k_max: u32, tol: f64) -> Result<f64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::InvalidParameter("omega must be nonzero and finite".into()));
    }
    let iw = Complex64::new(0.0, omega);
    let mut worst: f64 = 0.0;
    for k in 1..=k_max as i64 {
        let roots = dispersion_roots(k, a, delta, f)?;
        if roots.roots().iter().any(|l| (l - iw).norm() <= tol) {
            return Err(Error::Resonance { omega, k });
        }
        let m = mode_matrix(k, a, delta, f)?.entries;
        let shifted = [[iw - m[0][0], -m[0][1]], [-m[1][0], iw - m[1][1]]];
        let (_, smin) = singular_values(&shifted);
        if smin <= 0.0 {
            return Err(Error::Resonance { omega, k });
        }
        worst = worst.max(1.0 / smin);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flux(s1: f64) -> FluxModel {
        FluxModel::new(s1, 0.0, 0.0)
    }

    #[test]
    fn mode_matrix_examples() {
        let m = mode_matrix(1, 1.0, 1.0, &flux(0.0)).unwrap();
        assert_eq!(m.entries, [[c(-1.0, 0.0), c(0.0, 1.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
        let m = mode_matrix(-1, 1.0, 1.0, &flux(0.0)).unwrap();
        assert_eq!(m.entries, [[c(-1.0, 0.0), c(0.0, -1.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
        let m = mode_matrix(2, 1.0, 0.0, &flux(-1.0)).unwrap();
        assert_eq!(m.entries, [[c(-16.0, 0.0), c(0.0, 2.0)], [c(0.0, -2.0), c(-16.0, 0.0)]]);
        assert_eq!(mode_matrix(0, 1.0, 1.0, &flux(0.0)), Err(Error::ZeroMode));
    }

    #[test]
    fn mode_matrix_conjugation() {
        let f = flux(0.7);
        for k in 1..10 {
            let p = mode_matrix(k, 0.3, -1.2, &f).unwrap().entries;
            let m = mode_matrix(-k, 0.3, -1.2, &f).unwrap().entries;
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(m[i][j], p[i][j].conj());
                }
            }
        }
    }

    fn sorted_re(r: &DispersionRoots) -> [f64; 2] {
        let mut v = [r.lambda_plus.re, r.lambda_minus.re];
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn dispersion_examples() {
        let r = dispersion_roots(1, 1.0, 1.0, &flux(0.0)).unwrap();
        assert_eq!(sorted_re(&r), [-1.0, 0.0]);
        let r = dispersion_roots(2, 1.0, 1.0, &flux(0.0)).unwrap();
        // factorization oracle: (lambda + a k^4)(lambda + k^4 - delta k^2)
        assert_eq!(sorted_re(&r), [-16.0, -12.0]);
        let r = dispersion_roots(1, 1.0, 0.0, &flux(-1.0)).unwrap();
        assert_eq!(sorted_re(&r), [-2.0, 0.0]);
        assert!(dispersion_roots(0, 1.0, 0.0, &flux(-1.0)).is_err());
    }

    #[test]
    fn dispersion_even_in_k() {
        let f = flux(1.3);
        for k in 1..50 {
            assert_eq!(
                dispersion_roots(k, 0.4, 2.1, &f).unwrap().roots(),
                dispersion_roots(-k, 0.4, 2.1, &f).unwrap().roots()
            );
        }
    }

    #[test]
    fn trace_matches_minus_b() {
        let f = flux(-0.4);
        for k in 1..40 {
            let m = mode_matrix(k, 2.0, 3.0, &f).unwrap();
            let r = dispersion_roots(k, 2.0, 3.0, &f).unwrap();
            assert!((m.trace().re + r.b).abs() <= 1e-15 * r.b.abs().max(1.0));
            assert_eq!(m.trace().im, 0.0);
            assert!((m.det().re - r.c).abs() <= 1e-14 * r.c.abs().max(1.0));
        }
    }

    #[test]
    fn config_a_admissible_with_unit_gap() {
        let cfg = check_admissible(1, 1.0, 1.0, &flux(0.0), 64, Tolerances::default()).unwrap();
        assert_eq!(cfg.gap(), 1.0);
    }

    #[test]
    fn config_b_admissible() {
        let cfg = check_admissible(1, 1.0, 0.0, &flux(-1.0), 64, Tolerances::default()).unwrap();
        // roots -2 at k0 and -k^4 +- k beyond
        assert_eq!(cfg.gap(), 2.0);
    }

    #[test]
    fn condition_c_rejection() {
        let rep = check_admissible(1, 1.0, 2.0, &flux(1.0), 64, Tolerances::default()).unwrap_err();
        let first = rep.first_failure().unwrap();
        assert_eq!(first.condition, Condition::Nondegenerate);
        assert!(rep.report().unwrap().check(Condition::CriticalMode).unwrap().passed);
    }

    #[test]
    fn condition_a_rejection() {
        let rep = check_admissible(1, 1.0, 1.5, &flux(0.0), 64, Tolerances::default()).unwrap_err();
        assert_eq!(rep.first_failure().unwrap().condition, Condition::CriticalMode);
    }

    #[test]
    fn other_center_mode_rejection() {
        // k0 = 1, s1 = a (delta - 1): C(k) / k^2 = a (k^2 - 1)(k^4 + k^2 + 1 - delta (k^2 + 1)),
        // which vanishes at k = 3 for delta = 9.1
        let rep = check_admissible(1, 1.0, 9.1, &flux(8.1), 64, Tolerances::default()).unwrap_err();
        let fail = rep.first_failure().unwrap();
        assert_eq!(fail.condition, Condition::NoOtherCenterModes);
        assert_eq!(fail.witness, Some(3));

        // delta = 4.2 puts the zero at k = 2 = 2 k0, which is also condition (d)
        let rep = check_admissible(1, 1.0, 4.2, &flux(3.2), 64, Tolerances::default()).unwrap_err();
        let r = rep.report().unwrap();
        assert_eq!(r.check(Condition::NoOtherCenterModes).unwrap().witness, Some(2));
        assert!(!r.check(Condition::SecondHarmonic).unwrap().passed);
    }

    #[test]
    fn kmax_precondition() {
        assert!(admissibility_report(3, 1.0, 1.0, &flux(0.0), 5, Tolerances::default()).is_err());
    }

    #[test]
    fn summary_examples() {
        let f = flux(0.0);
        let s = spectral_summary(1.0, 1.0, &f, 64, 1e-10).unwrap();
        let ks: Vec<i64> = s.center_modes.iter().map(|x| x.0).collect();
        assert_eq!(ks, vec![-1, 1]);
        assert!(s.center_modes.iter().all(|x| x.1 == c(0.0, 0.0)));
        assert_eq!(s.unstable_count, 0);

        let s = spectral_summary(1.0, 1.01, &f, 64, 1e-10).unwrap();
        assert!(s.center_modes.is_empty());
        assert_eq!(s.unstable_count, 2);
        let r = dispersion_roots(1, 1.0, 1.01, &f).unwrap();
        assert!(r.lambda_plus.re > 0.0 && r.c < 0.0);

        let s = spectral_summary(1.0, 0.99, &f, 64, 1e-10).unwrap();
        assert!(s.center_modes.is_empty());
        assert_eq!(s.unstable_count, 0);
    }

    #[test]
    fn resolvent_decays_like_inverse_omega() {
        let f = flux(0.0);
        let v = resolvent_norm(1e3, 1.0, 1.0, &f, 64, 1e-10).unwrap();
        assert!(1e3 * v <= 10.0);
        let v2 = resolvent_norm(1e2, 1.0, 1.0, &f, 64, 1e-10).unwrap() * 1e2;
        let v4 = resolvent_norm(1e4, 1.0, 1.0, &f, 64, 1e-10).unwrap() * 1e4;
        assert!(v2 / v4 < 10.0 && v4 / v2 < 10.0);
    }

    #[test]
    fn resolvent_rejects_resonance() {
        // a = 0, delta = 1, s1 = 1: B(1) = 0, C(1) = 1, lambda = +- i
        let f = flux(1.0);
        let err = resolvent_norm(1.0, 0.0, 1.0, &f, 8, 1e-10).unwrap_err();
        assert_eq!(err, Error::Resonance { omega: 1.0, k: 1 });
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = [[c(3.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -0.5)]];
        let (hi, lo) = singular_values(&m);
        assert!((hi - 3.0).abs() < 1e-15 && (lo - 0.5).abs() < 1e-15);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn vieta_relations(k in 1i64..6, a in -5.0..5.0f64, d in -5.0..5.0f64, s1 in -5.0..5.0f64) {
            let r = dispersion_roots(k, a, d, &flux(s1)).unwrap();
            let sum = r.lambda_plus + r.lambda_minus;
            let prod = r.lambda_plus * r.lambda_minus;
            let scale_b = r.b.abs().max(r.lambda_plus.norm()).max(1e-300);
            let scale_c = r.c.abs().max(r.lambda_plus.norm() * r.lambda_minus.norm()).max(1e-300);
            prop_assert!((sum.re + r.b).abs() <= 1e-10 * scale_b);
            prop_assert!(sum.im.abs() <= 1e-10 * scale_b);
            prop_assert!((prod.re - r.c).abs() <= 1e-10 * scale_c);
            prop_assert!(prod.im.abs() <= 1e-10 * scale_c);
            // closed under conjugation
            let conj_ok = (r.lambda_plus.im == 0.0 && r.lambda_minus.im == 0.0)
                || r.lambda_plus == r.lambda_minus.conj();
            prop_assert!(conj_ok);
        }

        #[test]
        fn roots_solve_the_quadratic(k in 1i64..6, a in -5.0..5.0f64, d in -5.0..5.0f64, s1 in -5.0..5.0f64) {
            let r = dispersion_roots(k, a, d, &flux(s1)).unwrap();
            for l in r.roots() {
                let p = l * l + r.b * l + r.c;
                let scale = (l.norm_sqr() + r.b.abs() * l.norm() + r.c.abs()).max(1.0);
                prop_assert!(p.norm() <= 1e-12 * scale);
            }
        }
    }
}
