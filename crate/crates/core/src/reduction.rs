//! Center-manifold reduction at an admissible configuration.
//!
//! The center space is spanned by `xi = e^{ik0 x}(1, -i a_c k0^3)` and its conjugate. The
//! dual kernel element `eta = kappa e^{ik0 x}(-i k0 (delta_c - k0^2), 1)` is normalized by
//! `<eta, xi> = 1` with the pairing `<U, V> = int_{-pi}^{pi} U1 V1* + U2 V2* dx`, giving
//!
//! ```text
//! kappa = 1 / (2 pi i k0 [(a_c + 1) k0^2 - delta_c])
//! ```
//!
//! The projection onto the center space is `P U = <eta*, U> xi + <eta, U> xi*`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::dns::FieldState;
use crate::error::{Error, Result};
use crate::model::FluxModel;
use crate::spectral::{CriticalConfiguration, Mat2};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{ikx} v`, a single-harmonic vector field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Harmonic {
    pub k: i64,
    pub v: [Complex64; 2],
}

impl Harmonic {
    pub fn conj(&self) -> Self {
        Self {
            k: -self.k,
            v: [self.v[0].conj(), self.v[1].conj()],
        }
    }

    pub fn at(&self, x: f64) -> [Complex64; 2] {
        let e = Complex64::from_polar(1.0, self.k as f64 * x);
        [self.v[0] * e, self.v[1] * e]
    }

    pub fn sample(&self, n: usize) -> Sampled {
        let pts = FieldState::grid(n).into_iter().map(|x| self.at(x)).collect();
        Sampled { pts }
    }
}

/// Complex 2-component samples on the uniform grid of `[-pi, pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    pub pts: Vec<[Complex64; 2]>,
}

impl Sampled {
    pub fn from_field(f: &FieldState, n: usize) -> Self {
        let pts = FieldState::grid(n)
            .into_iter()
            .map(|x| {
                let (t, u) = f.eval(x);
                [c(t, 0.0), c(u, 0.0)]
            })
            .collect();
        Self { pts }
    }

    /// Trapezoidal (exact for trigonometric polynomials below the grid's band)
    /// `<self, other> = int self_1 other_1* + self_2 other_2*`.
    pub fn pair(&self, other: &Sampled) -> Complex64 {
        assert_eq!(self.pts.len(), other.pts.len(), "grid mismatch");
        let w = 2.0 * PI / self.pts.len() as f64;
        self.pts
            .iter()
            .zip(&other.pts)
            .map(|(a, b)| a[0] * b[0].conj() + a[1] * b[1].conj())
            .sum::<Complex64>()
            * w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReductionBasis {
    pub k0: u32,
    pub xi_vec: [Complex64; 2],
    pub eta_vec: [Complex64; 2],
    pub kappa: Complex64,
}

impl ReductionBasis {
    pub fn xi(&self) -> Harmonic {
        Harmonic {
            k: self.k0 as i64,
            v: self.xi_vec,
        }
    }

    pub fn eta(&self) -> Harmonic {
        Harmonic {
            k: self.k0 as i64,
            v: self.eta_vec,
        }
    }

    /// Smallest grid on which every pairing used by the reduction is exact.
    pub fn quadrature_points(&self) -> usize {
        // products reach harmonic 2 k0 at most for these single-harmonic pairings;
        // 4 k0 + 1 also resolves the quadratic terms
        (4 * self.k0 as usize + 1).max(8)
    }

    /// `[<eta, xi>, <eta*, xi*>, <eta*, xi>, <eta, xi*>]`.
    pub fn duality(&self, n: usize) -> [Complex64; 4] {
        let xi = self.xi().sample(n);
        let xis = self.xi().conj().sample(n);
        let eta = self.eta().sample(n);
        let etas = self.eta().conj().sample(n);
        [eta.pair(&xi), etas.pair(&xis), etas.pair(&xi), eta.pair(&xis)]
    }
}

/// Center kernel, dual kernel and normalization at `cfg`.
pub fn build_basis(cfg: &CriticalConfiguration) -> Result<ReductionBasis> {
    let k0 = cfg.k0() as f64;
    let nondeg = cfg.nondegeneracy();
    if nondeg == 0.0 {
        return Err(Error::InvalidParameter(
            "(a_c + 1) k0^2 - delta_c = 0: dual normalization undefined".into(),
        ));
    }
    let kappa = (I * (2.0 * PI * k0 * nondeg)).inv();
    Ok(ReductionBasis {
        k0: cfg.k0(),
        xi_vec: [c(1.0, 0.0), c(0.0, -cfg.a_c() * k0.powi(3))],
        eta_vec: [kappa * c(0.0, -k0 * (cfg.delta_c() - k0 * k0)), kappa],
        kappa,
    })
}

/// Adjoint mode matrix at `k0`: symbol of `L*` on `e^{ik0 x}`.
pub fn adjoint_mode_matrix(cfg: &CriticalConfiguration) -> Mat2 {
    let k = cfg.k0() as f64;
    let (a, d, s1) = (cfg.a_c(), cfg.delta_c(), cfg.sigma1());
    [
        [c(-a * k.powi(4), 0.0), c(0.0, -s1 * k)],
        [c(0.0, -k), c(d * k * k - k.powi(4), 0.0)],
    ]
}

/// Center coordinates `(A, A*)` of a mean-zero field: `A = <eta*, U>`.
pub fn project_center(field: &FieldState, basis: &ReductionBasis) -> (Complex64, Complex64) {
    let n = field.n().max(basis.quadrature_points().next_power_of_two());
    let u = Sampled::from_field(field, n);
    let a = basis.eta().conj().sample(n).pair(&u);
    let a_star = basis.eta().sample(n).pair(&u);
    (a, a_star)
}

/// `A xi + A* xi*` as a field on a grid of size `n`.
pub fn center_field(basis: &ReductionBasis, a: Complex64, n: usize) -> Result<FieldState> {
    let mut s = FieldState::zeros(n)?;
    s.set_mode(basis.k0 as usize, a * basis.xi_vec[0], a * basis.xi_vec[1])?;
    Ok(s)
}

/// Quadratic part `Phi(A, A*) = i (e^{2ik0x} V - e^{-2ik0x} V*)` of the center manifold,
/// with `V = A^2 (phi1, phi2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondOrderCorrection {
    pub k0: u32,
    pub phi1_per_a2: Complex64,
    pub phi2_per_a2: Complex64,
}

impl SecondOrderCorrection {
    /// Coefficient of `e^{2ik0x}` in `(tau, u)` of `Phi` for amplitude `A`.
    pub fn harmonic(&self, a: Complex64) -> [Complex64; 2] {
        let a2 = a * a;
        [I * self.phi1_per_a2 * a2, I * self.phi2_per_a2 * a2]
    }

    /// `C` with `tau_{2k0} = -C A^2`.
    pub fn tau_harmonic_ratio(&self) -> f64 {
        -(I * self.phi1_per_a2).re
    }

    pub fn field(&self, a: Complex64, n: usize) -> Result<FieldState> {
        let mut s = FieldState::zeros(n)?;
        let [t, u] = self.harmonic(a);
        s.set_mode(2 * self.k0 as usize, t, u)?;
        Ok(s)
    }

    /// Residual of the 2x2 system fixing `(phi1, phi2)` for `A = 1`.
    pub fn system_residual(&self, cfg: &CriticalConfiguration, f: &FluxModel) -> f64 {
        let k = cfg.k0() as f64;
        let (a, d, s1) = (cfg.a_c(), cfg.delta_c(), cfg.sigma1());
        let m: Mat2 = [
            [c(16.0 * a * k.powi(4), 0.0), c(0.0, -2.0 * k)],
            [c(0.0, -2.0 * k * s1), c(-4.0 * d * k * k + 16.0 * k.powi(4), 0.0)],
        ];
        let v = [self.phi1_per_a2, self.phi2_per_a2];
        let r0 = m[0][0] * v[0] + m[0][1] * v[1];
        let r1 = m[1][0] * v[0] + m[1][1] * v[1] - k * f.sigma2;
        r0.norm().max(r1.norm())
    }
}

/// `6 a_c k0^4 (21 k0^2 - 5 delta_c)`.
pub fn harmonic_denominator(cfg: &CriticalConfiguration) -> f64 {
    let k = cfg.k0() as f64;
    6.0 * cfg.a_c() * k.powi(4) * (21.0 * k * k - 5.0 * cfg.delta_c())
}

pub fn second_order_correction(cfg: &CriticalConfiguration, f: &FluxModel) -> Result<SecondOrderCorrection> {
    let den = harmonic_denominator(cfg);
    if den == 0.0 {
        return Err(Error::InvalidParameter("second harmonic is resonant".into()));
    }
    let k = cfg.k0() as f64;
    Ok(SecondOrderCorrection {
        k0: cfg.k0(),
        phi1_per_a2: c(0.0, f.sigma2 / den),
        phi2_per_a2: c(8.0 * cfg.a_c() * k.powi(3) * f.sigma2 / den, 0.0),
    })
}

/// `dA/dt = a mu A + b |A|^2 A`, truncated at cubic order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AmplitudeEquation {
    pub a_coef: f64,
    pub b_coef: f64,
    /// `sigma''^2 / (6 a_c k0^4 (21 k0^2 - 5 delta_c)) - sigma'''/2`
    pub bracket: f64,
    /// `(a_c + 1) k0^2 - delta_c`
    pub prefactor_denominator: f64,
    pub k0: u32,
    pub a_c: f64,
    pub delta_c: f64,
}

impl AmplitudeEquation {
    /// `mu = (delta_c - k0^2) nu1 + a_c nu2` for `a = a_c + nu1`, `delta = delta_c + nu2`.
    pub fn mu(&self, nu1: f64, nu2: f64) -> f64 {
        let k = self.k0 as f64;
        (self.delta_c - k * k) * nu1 + self.a_c * nu2
    }

    /// `delta` realizing `mu` with `a = a_c` held fixed.
    pub fn delta_for_mu(&self, mu: f64) -> f64 {
        self.delta_c + mu / self.a_c
    }

    /// Reduced vector field `F(A, A*, mu)`.
    pub fn vector_field(&self, a: Complex64, mu: f64) -> Complex64 {
        a * (self.a_coef * mu) + a * a.norm_sqr() * self.b_coef
    }

    /// Same field written in the independent pair `(A, A*)`.
    pub fn vector_field_pair(&self, a: Complex64, a_star: Complex64, mu: f64) -> Complex64 {
        a * (self.a_coef * mu) + a * a * a_star * self.b_coef
    }
}

pub fn amplitude_equation(cfg: &CriticalConfiguration, f: &FluxModel) -> Result<AmplitudeEquation> {
    let den = harmonic_denominator(cfg);
    if den == 0.0 {
        return Err(Error::InvalidParameter("second harmonic is resonant".into()));
    }
    let nondeg = cfg.nondegeneracy();
    if nondeg == 0.0 {
        return Err(Error::InvalidParameter("(a_c + 1) k0^2 - delta_c = 0".into()));
    }
    let k = cfg.k0() as f64;
    let bracket = f.sigma2 * f.sigma2 / den - 0.5 * f.sigma3;
    Ok(AmplitudeEquation {
        a_coef: k.powi(4) / nondeg,
        b_coef: bracket / nondeg,
        bracket,
        prefactor_denominator: nondeg,
        k0: cfg.k0(),
        a_c: cfg.a_c(),
        delta_c: cfg.delta_c(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum BifurcationKind {
    Supercritical,
    Subcritical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Side {
    MuPositive,
    MuNegative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BifurcationVerdict {
    pub kind: BifurcationKind,
    pub bifurcating_side: Side,
    pub branch_stability: Stability,
    pub trivial_stability_mu_negative: Stability,
    pub trivial_stability_mu_positive: Stability,
    /// Sign of the bracketed cubic expression alone.
    pub bracket_sign: f64,
    /// Sign of `(a_c + 1) k0^2 - delta_c`.
    pub prefactor_sign: f64,
    a_coef: f64,
    b_coef: f64,
}

impl BifurcationVerdict {
    /// `sqrt(-a mu / b)` on the bifurcating side.
    pub fn predicted_amplitude(&self, mu: f64) -> Option<f64> {
        let r2 = -self.a_coef * mu / self.b_coef;
        (r2 > 0.0).then(|| r2.sqrt())
    }

    pub fn trivial_stability(&self, mu: f64) -> Stability {
        if self.a_coef * mu < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }
}

/// Default threshold below which `|b|` is treated as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

pub fn classify_bifurcation(eq: &AmplitudeEquation, tol: f64) -> Result<BifurcationVerdict> {
    if !(eq.b_coef.abs() > tol) {
        return Err(Error::Degenerate { b: eq.b_coef });
    }
    let kind = if eq.b_coef < 0.0 {
        BifurcationKind::Supercritical
    } else {
        BifurcationKind::Subcritical
    };
    // -a mu / b > 0
    let bifurcating_side = if -eq.a_coef / eq.b_coef > 0.0 {
        Side::MuPositive
    } else {
        Side::MuNegative
    };
    let trivial = |mu: f64| {
        if eq.a_coef * mu < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    };
    Ok(BifurcationVerdict {
        kind,
        bifurcating_side,
        branch_stability: if eq.b_coef < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        },
        trivial_stability_mu_negative: trivial(-1.0),
        trivial_stability_mu_positive: trivial(1.0),
        bracket_sign: eq.bracket.signum(),
        prefactor_sign: eq.prefactor_denominator.signum(),
        a_coef: eq.a_coef,
        b_coef: eq.b_coef,
    })
}

/// Leading-order bifurcated wave with `A = r_mu e^{i theta}`, optionally with its second harmonic.
pub fn predicted_wave(
    eq: &AmplitudeEquation,
    basis: &ReductionBasis,
    correction: Option<&SecondOrderCorrection>,
    mu: f64,
    theta: f64,
    n: usize,
) -> Result<FieldState> {
    let r2 = -eq.a_coef * mu / eq.b_coef;
    if !(r2 > 0.0) || !r2.is_finite() {
        return Err(Error::NonBifurcatingSide { mu });
    }
    let a = Complex64::from_polar(r2.sqrt(), theta);
    let mut s = center_field(basis, a, n)?;
    if let Some(corr) = correction {
        s.add_scaled(&corr.field(a, n)?, 1.0);
    }
    Ok(s)
}

/// `(Gamma1, Gamma2)` for a perturbation `nu = (nu1, nu2)` away from `cfg`.
pub fn observational_parameters(cfg: &CriticalConfiguration, nu: (f64, f64)) -> (f64, f64) {
    let k = cfg.k0() as f64;
    let k4 = k.powi(4);
    (k4 * (k * k - cfg.delta_c()) * nu.0, -cfg.a_c() * k4 * nu.1)
}
