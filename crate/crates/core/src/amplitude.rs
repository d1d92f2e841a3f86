//! Reduced radial dynamics `dr/dt = a mu r + b r^3`, `dtheta/dt = g(r)`.
//!
//! At cubic order `g` vanishes identically; the angular hook exists so measured phase
//! drift can be compared against a nonzero alternative.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reduction::{AmplitudeEquation, Stability};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmplitudeState {
    r: f64,
    pub theta: f64,
}

impl AmplitudeState {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
        }
        Ok(Self { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Time at which the closed-form cubic solution leaves every bounded set, if it does.
pub fn blowup_time(a_mu: f64, b: f64, r0: f64) -> Option<f64> {
    if r0 == 0.0 || b <= 0.0 {
        return None;
    }
    let br2 = b * r0 * r0;
    if a_mu == 0.0 {
        return Some(1.0 / (2.0 * br2));
    }
    // e^{-2 a mu t*} = b r0^2 / (a mu + b r0^2)
    let q = br2 / (a_mu + br2);
    if q <= 0.0 {
        return None;
    }
    let t = -q.ln() / (2.0 * a_mu);
    (t > 0.0 && t.is_finite()).then_some(t)
}

/// Closed-form `r(t)` of `dr/dt = a mu r + b r^3` from `r(0) = r0`; `t` may be `+inf`.
pub fn truncated_solution(a_mu: f64, b: f64, r0: f64, t: f64) -> Result<f64> {
    if !(r0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("r0 must be nonnegative, got {r0}")));
    }
    if t == 0.0 || r0 == 0.0 {
        return Ok(r0);
    }
    if let Some(tb) = blowup_time(a_mu, b, r0) {
        if t >= tb {
            return Err(Error::Blowup { time: tb });
        }
    }
    let r02 = r0 * r0;
    let r2 = if a_mu == 0.0 {
        if t.is_infinite() {
            0.0
        } else {
            r02 / (1.0 - 2.0 * b * r02 * t)
        }
    } else if a_mu * t > 0.0 {
        // decaying exponential form: e = e^{-2 a mu t} in (0, 1)
        let e = (-2.0 * a_mu * t).exp();
        a_mu * r02 / (a_mu * e + b * r02 * (e - 1.0))
    } else {
        // growing form multiplied through by e^{2 a mu t}
        let g = (2.0 * a_mu * t).exp();
        a_mu * r02 * g / (a_mu + b * r02 * (1.0 - g))
    };
    Ok(r2.max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
}

/// Radius above which an integration is treated as having escaped.
pub const ESCAPE_RADIUS: f64 = 1e6;

/// Classical RK4 on `dr/dt = a mu r + b r^3`, `dtheta/dt = g(r)` (zero unless given).
pub fn integrate_radial_with(
    a_mu: f64,
    b: f64,
    start: AmplitudeState,
    t_end: f64,
    dt: f64,
    angular: Option<&dyn Fn(f64) -> f64>,
) -> Result<Vec<TrajectoryPoint>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_end must be nonnegative, got {t_end}"
        )));
    }
    let f = |r: f64| a_mu * r + b * r * r * r;
    let g = |r: f64| angular.map_or(0.0, |g| g(r));
    let steps = (t_end / dt).round().max(1.0) as usize;
    let h = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut r, mut theta) = (start.r(), start.theta);
    out.push(TrajectoryPoint { t: 0.0, r, theta });
    for i in 1..=steps {
        let k1 = f(r);
        let k2 = f(r + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h * k2);
        let k4 = f(r + h * k3);
        let (j1, j2, j3, j4) = (g(r), g(r + 0.5 * h * k1), g(r + 0.5 * h * k2), g(r + h * k3));
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        theta += h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
        let t = i as f64 * h;
        if !r.is_finite() || r.abs() > ESCAPE_RADIUS {
            return Err(Error::Blowup { time: t });
        }
        out.push(TrajectoryPoint { t, r, theta });
    }
    Ok(out)
}

pub fn integrate_radial(eq: &AmplitudeEquation, mu: f64, r0: f64, t_end: f64, dt: f64) -> Result<Vec<TrajectoryPoint>> {
    integrate_radial_with(
        eq.a_coef * mu,
        eq.b_coef,
        AmplitudeState::new(r0, 0.0)?,
        t_end,
        dt,
        None,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    pub r: f64,
    pub stability: Stability,
}

/// Nonnegative equilibria of the truncated radial equation and their linear stability.
pub fn equilibria_of(a_mu: f64, b: f64) -> Result<Vec<Equilibrium>> {
    if b == 0.0 {
        return Err(Error::Degenerate { b });
    }
    let stab = |d: f64| {
        if d < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    };
    let mut out = vec![Equilibrium {
        r: 0.0,
        stability: stab(a_mu),
    }];
    let r2 = -a_mu / b;
    if r2 > 0.0 {
        // derivative a mu + 3 b r^2 = -2 a mu on the branch
        out.push(Equilibrium {
            r: r2.sqrt(),
            stability: stab(-2.0 * a_mu),
        });
    }
    Ok(out)
}

pub fn equilibria(eq: &AmplitudeEquation, mu: f64) -> Result<Vec<Equilibrium>> {
    equilibria_of(eq.a_coef * mu, eq.b_coef)
}
