//! Exact per-mode linear flow and the matrix `phi`-functions used by ETDRK4.
//!
//! For a 2x2 matrix `M` with eigenvalues `l0`, `l1` and any entire `f`,
//!
//! ```text
//! f(M) = f(l1) I + f[l0, l1] (M - l1 I)
//! ```
//!
//! where `f[l0, l1]` is the first divided difference (equal to `f'(l)` when the roots
//! coincide). The divided differences of `exp` and `phi_j` are evaluated in forms that
//! stay accurate through root collisions, so no separate Jordan branch is needed.

use num_complex::Complex64;

use crate::error::Result;
use crate::model::FluxModel;
use crate::spectral::{dispersion_roots, mode_matrix, Mat2};

const SERIES_TERMS: usize = 40;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `phi_j(z) = sum_m z^m / (m + j)!`, with `phi_0 = exp`.
pub fn phi(j: usize, z: Complex64) -> Complex64 {
    if z.norm() < 1.0 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for m in 0..SERIES_TERMS {
            sum += pow / factorial(m + j);
            pow *= z;
        }
        sum
    } else {
        let mut p = z.exp();
        for i in 0..j {
            p = (p - 1.0 / factorial(i)) / z;
        }
        p
    }
}

fn sinhc(w: Complex64) -> Complex64 {
    if w.norm() < 1.0 {
        // sum w^{2m} / (2m+1)!
        let w2 = w * w;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for m in 0..20 {
            sum += pow / factorial(2 * m + 1);
            pow *= w2;
        }
        sum
    } else {
        w.sinh() / w
    }
}

/// `exp[x0, x1]`.
fn exp_divided(x0: Complex64, x1: Complex64) -> Complex64 {
    let d = x0 - x1;
    if d.norm() < 1.0 {
        ((x0 + x1) * 0.5).exp() * sinhc(d * 0.5)
    } else {
        (x0.exp() - x1.exp()) / d
    }
}

/// Divided differences `phi_j[x0, x1]` for `j = 0..=jmax`.
pub fn phi_divided(jmax: usize, x0: Complex64, x1: Complex64) -> Vec<Complex64> {
    let (x0, x1) = if x0.norm() >= x1.norm() { (x0, x1) } else { (x1, x0) };
    let mut out = Vec::with_capacity(jmax + 1);
    if x0.norm() < 1.0 {
        // both small: termwise divided differences of the power series,
        // (x^m - y^m)/(x - y) = h_{m-1}(x, y)
        for j in 0..=jmax {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut h = Complex64::new(1.0, 0.0);
            let mut ypow = Complex64::new(1.0, 0.0);
            for m in 1..SERIES_TERMS {
                sum += h / factorial(m + j);
                ypow *= x1;
                h = x0 * h + ypow;
            }
            out.push(sum);
        }
    } else {
        // z phi_{j+1}(z) = phi_j(z) - 1/j!  =>  phi_{j+1}[x0,x1] = (phi_j[x0,x1] - phi_{j+1}(x1)) / x0
        let mut d = exp_divided(x0, x1);
        out.push(d);
        for j in 0..jmax {
            d = (d - phi(j + 1, x1)) / x0;
            out.push(d);
        }
    }
    out
}

/// Scaled mode matrix `h M` together with its eigenvalues.
#[derive(Clone, Copy, Debug)]
pub struct ScaledMode {
    pub m: Mat2,
    pub l0: Complex64,
    pub l1: Complex64,
}

impl ScaledMode {
    pub fn new(k: i64, a: f64, delta: f64, f: &FluxModel, h: f64) -> Result<Self> {
        let mut m = mode_matrix(k, a, delta, f)?.entries;
        for row in m.iter_mut() {
            for z in row.iter_mut() {
                *z *= h;
            }
        }
        let r = dispersion_roots(k, a, delta, f)?;
        Ok(Self {
            m,
            l0: r.lambda_plus * h,
            l1: r.lambda_minus * h,
        })
    }

    /// `f(hM)` for `f = sum_j w_j phi_j`.
    pub fn phi_combination(&self, weights: &[f64]) -> Mat2 {
        let jmax = weights.len() - 1;
        let dd = phi_divided(jmax, self.l0, self.l1);
        let mut value = Complex64::new(0.0, 0.0);
        let mut slope = Complex64::new(0.0, 0.0);
        for (j, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                value += phi(j, self.l1) * w;
                slope += dd[j] * w;
            }
        }
        let m = &self.m;
        [
            [value + slope * (m[0][0] - self.l1), slope * m[0][1]],
            [slope * m[1][0], value + slope * (m[1][1] - self.l1)],
        ]
    }

    pub fn exp(&self) -> Mat2 {
        self.phi_combination(&[1.0])
    }
}

/// `exp(dt M_k)`, the exact linear flow of mode `k` over `dt`.
pub fn linear_propagator(k: i64, a: f64, delta: f64, f: &FluxModel, dt: f64) -> Result<Mat2> {
    Ok(ScaledMode::new(k, a, delta, f, dt)?.exp())
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Truncated Taylor series with scaling and squaring; independent of the eigen route.
    fn exp_series(m: &Mat2) -> Mat2 {
        let norm: f64 = m.iter().flatten().map(|z| z.norm()).sum();
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scale = 0.5f64.powi(s);
        let ms: Mat2 = [[m[0][0] * scale, m[0][1] * scale], [m[1][0] * scale, m[1][1] * scale]];
        let mut sum: Mat2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let mut term = sum;
        for n in 1..30 {
            term = mat_mul(&term, &ms);
            for row in term.iter_mut() {
                for z in row.iter_mut() {
                    *z /= n as f64;
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..s {
            sum = mat_mul(&sum, &sum);
        }
        sum
    }

    fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((a[i][j] - b[i][j]).norm());
            }
        }
        d
    }

    #[test]
    fn zero_step_is_identity() {
        let f = FluxModel::new(0.0, 0.0, 0.0);
        let p = linear_propagator(3, 1.0, 1.0, &f, 0.0).unwrap();
        assert_eq!(p, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    }

    #[test]
    fn config_a_unit_step() {
        let f = FluxModel::new(0.0, 0.0, 0.0);
        let p = linear_propagator(1, 1.0, 1.0, &f, 1.0).unwrap();
        let e = (-1.0f64).exp();
        let expect = [[c(e, 0.0), c(0.0, 1.0 - e)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(max_diff(&p, &expect) < 1e-15);
        let m = mode_matrix(1, 1.0, 1.0, &f).unwrap().entries;
        assert!(max_diff(&exp_series(&m), &expect) < 1e-14);
    }

    #[test]
    fn agrees_with_series_oracle() {
        for (a, d, s1) in [
            (1.0, 1.0, 0.0),
            (1.0, 0.0, -1.0),
            (0.3, 2.0, 1.5),
            (2.0, -1.0, 0.7),
            (1.0, 0.5, 0.0),
        ] {
            let f = FluxModel::new(s1, 0.0, 0.0);
            for k in [1i64, 2, 3] {
                for dt in [0.01, 0.1, 0.37] {
                    let p = linear_propagator(k, a, d, &f, dt).unwrap();
                    let m = mode_matrix(k, a, d, &f).unwrap().entries;
                    let dm: Mat2 = [[m[0][0] * dt, m[0][1] * dt], [m[1][0] * dt, m[1][1] * dt]];
                    let q = exp_series(&dm);
                    assert!(max_diff(&p, &q) < 1e-12, "a={a} d={d} s1={s1} k={k} dt={dt}");
                }
            }
        }
    }

    #[test]
    fn jordan_block_limit() {
        // a = 1, delta = 0, s1 = 0: M_k = [[-k^4, ik], [0, -k^4]] has a double root
        let f = FluxModel::new(0.0, 0.0, 0.0);
        let dt = 0.05;
        let p = linear_propagator(1, 1.0, 0.0, &f, dt).unwrap();
        let e = (-dt).exp();
        let expect = [[c(e, 0.0), c(0.0, dt * e)], [c(0.0, 0.0), c(e, 0.0)]];
        assert!(max_diff(&p, &expect) < 1e-15);
    }

    #[test]
    fn semigroup() {
        let f = FluxModel::new(-1.0, 0.0, 0.0);
        for k in [1i64, 2, 5] {
            let p1 = linear_propagator(k, 1.0, 0.0, &f, 0.013).unwrap();
            let p2 = linear_propagator(k, 1.0, 0.0, &f, 0.029).unwrap();
            let p12 = linear_propagator(k, 1.0, 0.0, &f, 0.042).unwrap();
            assert!(max_diff(&mat_mul(&p1, &p2), &p12) < 1e-12);
        }
    }

    #[test]
    fn phi_functions_match_definition() {
        // phi_1(z) = (e^z - 1)/z, phi_2 = (e^z - 1 - z)/z^2, phi_3 = (e^z - 1 - z - z^2/2)/z^3
        for z in [c(2.0, 0.0), c(-3.0, 1.0), c(0.0, 5.0), c(-40.0, 0.0)] {
            let e = z.exp();
            assert!((phi(1, z) - (e - 1.0) / z).norm() < 1e-14 * (1.0 + phi(1, z).norm()));
            assert!((phi(2, z) - (e - 1.0 - z) / (z * z)).norm() < 1e-13);
            assert!((phi(3, z) - (e - 1.0 - z - z * z / 2.0) / (z * z * z)).norm() < 1e-13);
        }
        assert!((phi(3, c(0.0, 0.0)) - 1.0 / 6.0).norm() < 1e-16);
    }

    #[test]
    fn divided_differences_match_quotients() {
        for (x, y) in [
            (c(-3.0, 0.0), c(-1.5, 0.0)),
            (c(0.2, 0.3), c(-0.4, 0.1)),
            (c(-2.0, 1.0), c(-2.0, -1.0)),
            (c(-50.0, 0.0), c(0.3, 0.0)),
        ] {
            let dd = phi_divided(3, x, y);
            for (j, dj) in dd.iter().enumerate() {
                let q = (phi(j, x) - phi(j, y)) / (x - y);
                assert!((dj - q).norm() < 1e-12 * (1.0 + q.norm()), "j={j} x={x} y={y}");
            }
        }
        // coincident roots give the derivative phi_j' = phi_j - j phi_{j+1}
        for x in [c(-2.5, 0.0), c(0.3, 0.0), c(-0.9, 0.2)] {
            let dd = phi_divided(3, x, x);
            for (j, dj) in dd.iter().enumerate() {
                let d = phi(j, x) - phi(j + 1, x) * j as f64;
                assert!((dj - d).norm() < 1e-13, "j={j} x={x}");
            }
        }
    }
}
