//! Flux nonlinearity, physical parameters and the domain/viscosity normalization.
//!
//! The flux is carried as its Taylor data at the reference state `tau = 0`
//! (`sigma(0)` is normalized to zero) plus an optional remainder `Gamma` that
//! vanishes to fourth order:
//!
//! ```text
//! sigma(tau) = s1 tau + s2 tau^2 / 2 + s3 tau^3 / 6 + Gamma(tau)
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Remainder of the flux beyond cubic order.
#[derive(Clone)]
pub enum Tail {
    /// `sum_j c_j tau^j` with the first entry multiplying `tau^4`.
    Polynomial(Vec<f64>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Tail {
    pub fn eval(&self, tau: f64) -> f64 {
        match self {
            Tail::Polynomial(c) => {
                // Horner on c4 + c5 tau + ..., then times tau^4
                let inner = c.iter().rev().fold(0.0, |acc, &cj| acc * tau + cj);
                inner * tau.powi(4)
            }
            Tail::Function(f) => f(tau),
        }
    }

    /// Sampled bound `max |Gamma(tau)| / tau^4` over `0 < |tau| <= 1`.
    pub fn quartic_bound(&self) -> f64 {
        let mut k: f64 = 0.0;
        for j in 1..=200 {
            let t = j as f64 / 200.0;
            for tau in [t, -t] {
                k = k.max(self.eval(tau).abs() / tau.powi(4));
            }
        }
        // geometric approach to zero catches tails that are only O(tau^2) or O(tau^3)
        for j in 1..=40 {
            let tau = 0.5f64.powi(j);
            for tau in [tau, -tau] {
                k = k.max(self.eval(tau).abs() / tau.powi(4));
            }
        }
        k
    }
}

impl fmt::Debug for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Tail::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Largest accepted sampled ratio `|Gamma(tau)| / tau^4` on `|tau| <= 1`.
pub const TAIL_BOUND_LIMIT: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct FluxModel {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    tail: Option<Tail>,
}

impl FluxModel {
    pub fn new(sigma1: f64, sigma2: f64, sigma3: f64) -> Self {
        Self {
            sigma1,
            sigma2,
            sigma3,
            tail: None,
        }
    }

    /// Attach a remainder; rejected unless it vanishes to fourth order on `|tau| <= 1`.
    pub fn with_tail(mut self, tail: Tail) -> Result<Self> {
        let k = tail.quartic_bound();
        if !k.is_finite() || k > TAIL_BOUND_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "flux tail is not O(tau^4) near 0 (sampled ratio {k:.3e})"
            )));
        }
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    /// True when the flux is linear (the DNS is then exact).
    pub fn is_linear(&self) -> bool {
        self.sigma2 == 0.0 && self.sigma3 == 0.0 && self.tail.is_none()
    }

    /// `sigma(tau) - sigma(0)`.
    pub fn eval(&self, tau: f64) -> f64 {
        self.sigma1 * tau + self.nonlinear_part(tau)
    }

    /// The part of the flux that enters the nonlinearity `N(tau, u)`.
    pub fn nonlinear_part(&self, tau: f64) -> f64 {
        let t2 = tau * tau;
        let mut v = 0.5 * self.sigma2 * t2 + self.sigma3 * t2 * tau / 6.0;
        if let Some(t) = &self.tail {
            v += t.eval(tau);
        }
        v
    }
}

/// Free-function form of [`FluxModel::eval`].
pub fn flux_eval(f: &FluxModel, tau: f64) -> f64 {
    f.eval(tau)
}

/// Serialized flux: `{"sigma1": .., "sigma2": .., "sigma3": .., "tail": [c4, c5, ..]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FluxConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<Vec<f64>>,
}

impl TryFrom<FluxConfig> for FluxModel {
    type Error = Error;

    fn try_from(c: FluxConfig) -> Result<Self> {
        let f = FluxModel::new(c.sigma1, c.sigma2, c.sigma3);
        match c.tail {
            Some(coeffs) if !coeffs.is_empty() => f.with_tail(Tail::Polynomial(coeffs)),
            _ => Ok(f),
        }
    }
}

impl From<&FluxModel> for FluxConfig {
    fn from(f: &FluxModel) -> Self {
        let tail = match &f.tail {
            Some(Tail::Polynomial(c)) => Some(c.clone()),
            _ => None,
        };
        FluxConfig {
            sigma1: f.sigma1,
            sigma2: f.sigma2,
            sigma3: f.sigma3,
            tail,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParameters {
    pub a: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub half_period: f64,
}

/// Coefficients on the normalized domain `[-pi, pi]` with unit u-hyperviscosity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalizedParameters {
    a: f64,
    delta: f64,
}

impl NormalizedParameters {
    /// Parameters that are already posed with `epsilon = 1`, `M = pi`.
    pub fn normalized(a: f64, delta: f64) -> Self {
        Self { a, delta }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Rescale `x -> pi x / M` and then time so that `epsilon -> 1`.
///
/// The first scaling maps `(a, delta, epsilon)` to `(pi^3/M^3 a, pi/M delta, pi^3/M^3 epsilon)`;
/// the second divides the two remaining coefficients by the rescaled `epsilon`.
pub fn normalize_domain(p: &PhysicalParameters) -> Result<NormalizedParameters> {
    if !(p.epsilon > 0.0) || !p.epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {}",
            p.epsilon
        )));
    }
    if !(p.half_period > 0.0) || !p.half_period.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "half period M must be positive, got {}",
            p.half_period
        )));
    }
    let ratio = PI / p.half_period;
    let cube = ratio.powi(3);
    let (a_bar, delta_bar, eps_bar) = (cube * p.a, ratio * p.delta, cube * p.epsilon);
    Ok(NormalizedParameters {
        a: a_bar / eps_bar,
        delta: delta_bar / eps_bar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn normalize_identity_at_unit_domain() {
        let p = PhysicalParameters {
            a: 2.0,
            delta: 3.0,
            epsilon: 1.0,
            half_period: PI,
        };
        let n = normalize_domain(&p).unwrap();
        assert!(close(n.a(), 2.0, 1e-15) && close(n.delta(), 3.0, 1e-15));
    }

    #[test]
    fn normalize_epsilon_two() {
        let p = PhysicalParameters {
            a: 1.0,
            delta: 1.0,
            epsilon: 2.0,
            half_period: PI,
        };
        let n = normalize_domain(&p).unwrap();
        assert!(close(n.a(), 0.5, 1e-15) && close(n.delta(), 0.5, 1e-15));
    }

    #[test]
    fn normalize_double_period() {
        let p = PhysicalParameters {
            a: 1.0,
            delta: 1.0,
            epsilon: 1.0,
            half_period: 2.0 * PI,
        };
        let n = normalize_domain(&p).unwrap();
        assert!(close(n.a(), 1.0, 1e-14) && close(n.delta(), 4.0, 1e-14));
    }

    #[test]
    fn normalize_rejects_unphysical() {
        for (eps, m) in [(0.0, PI), (-1.0, PI), (1.0, 0.0), (1.0, -2.0), (f64::NAN, PI)] {
            let p = PhysicalParameters {
                a: 1.0,
                delta: 1.0,
                epsilon: eps,
                half_period: m,
            };
            assert!(normalize_domain(&p).is_err());
        }
    }

    #[test]
    fn flux_taylor_values() {
        let f = FluxModel::new(0.0, 0.0, 2.0);
        assert_eq!(flux_eval(&f, 0.0), 0.0);
        assert!(close(flux_eval(&f, 1.0), 1.0 / 3.0, 1e-15));
        let g = FluxModel::new(-1.0, 1.0, 1.0);
        let expect = -0.1 + 0.005 + 0.001 / 6.0;
        assert!(close(flux_eval(&g, 0.1), expect, 1e-14));
    }

    #[test]
    fn zero_flux_is_zero() {
        let f = FluxModel::new(0.0, 0.0, 0.0);
        for j in -10..=10 {
            assert_eq!(f.eval(j as f64 * 0.37), 0.0);
        }
        assert!(f.is_linear());
    }

    #[test]
    fn polynomial_tail_evaluates() {
        let f = FluxModel::new(0.0, 0.0, 0.0)
            .with_tail(Tail::Polynomial(vec![1.0, 2.0]))
            .unwrap();
        // tau^4 + 2 tau^5 at tau = 0.5
        assert!(close(f.eval(0.5), 0.0625 + 2.0 * 0.03125, 1e-15));
        assert!(!f.is_linear());
    }

    #[test]
    fn tail_must_vanish_to_fourth_order() {
        let bad = Tail::Function(Arc::new(|t: f64| t * t));
        assert!(FluxModel::new(0.0, 1.0, 0.0).with_tail(bad).is_err());
        let ok = Tail::Function(Arc::new(|t: f64| t.powi(5).sin()));
        assert!(FluxModel::new(0.0, 1.0, 0.0).with_tail(ok).is_ok());
    }

    #[test]
    fn config_roundtrip() {
        let json = r#"{"sigma1": -1.0, "sigma2": 1.0, "sigma3": 1.0, "tail": [0.5]}"#;
        let c: FluxConfig = serde_json::from_str(json).unwrap();
        let f = FluxModel::try_from(c.clone()).unwrap();
        assert_eq!(FluxConfig::from(&f), c);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn odd_flux_is_odd(s1 in -5.0..5.0f64, s3 in -5.0..5.0f64, c5 in -2.0..2.0f64, tau in -1.0..1.0f64) {
            // even tail coefficients vanish: c4 = 0, c5 free
            let f = FluxModel::new(s1, 0.0, s3).with_tail(Tail::Polynomial(vec![0.0, c5])).unwrap();
            prop_assert!((f.eval(-tau) + f.eval(tau)).abs() <= 1e-14);
            let g = FluxModel::new(s1, 0.0, s3);
            prop_assert!((g.eval(-tau) + g.eval(tau)).abs() <= 1e-14);
        }

        #[test]
        fn normalization_is_idempotent(a in -10.0..10.0f64, d in -10.0..10.0f64) {
            let p = PhysicalParameters { a, delta: d, epsilon: 1.0, half_period: PI };
            let n = normalize_domain(&p).unwrap();
            prop_assert!((n.a() - a).abs() <= 1e-13 * (1.0 + a.abs()));
            prop_assert!((n.delta() - d).abs() <= 1e-13 * (1.0 + d.abs()));
        }
    }
}
