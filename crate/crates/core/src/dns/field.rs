use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Mean-zero real periodic pair `(tau, u)` held as truncated Fourier coefficients.
///
/// Coefficients follow `tau(x) = sum_k tau_k e^{ikx}` for `k = -n/2+1 ..= n/2`. Only the
/// modes `1 ..= n/2 - 1` are stored; `k = 0` and the Nyquist mode are identically zero and
/// negative modes are the complex conjugates of the positive ones, so the zero-mean and
/// Hermitian invariants hold by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    n: usize,
    pub time: f64,
    tau: Vec<Complex64>,
    u: Vec<Complex64>,
}

impl FieldState {
    pub fn zeros(n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        let m = n / 2 - 1;
        Ok(Self {
            n,
            time: 0.0,
            tau: vec![Complex64::new(0.0, 0.0); m],
            u: vec![Complex64::new(0.0, 0.0); m],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest stored wavenumber, `n/2 - 1`.
    pub fn k_max(&self) -> usize {
        self.n / 2 - 1
    }

    /// Positive-mode coefficients; index `k - 1`.
    pub fn tau_modes(&self) -> &[Complex64] {
        &self.tau
    }

    pub fn u_modes(&self) -> &[Complex64] {
        &self.u
    }

    pub fn modes_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.tau, &mut self.u)
    }

    /// Set `(tau_k, u_k)` for `1 <= k <= n/2 - 1`; the `-k` coefficients follow by conjugation.
    pub fn set_mode(&mut self, k: usize, tau: Complex64, u: Complex64) -> Result<()> {
        if k == 0 || k > self.k_max() {
            return Err(Error::InvalidParameter(format!(
                "mode {k} outside 1..={}",
                self.k_max()
            )));
        }
        self.tau[k - 1] = tau;
        self.u[k - 1] = u;
        Ok(())
    }

    /// Coefficient pair at any `k` in `-n/2+1 ..= n/2`; zero outside the stored band.
    pub fn coefficient(&self, k: i64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let ka = k.unsigned_abs() as usize;
        if k == 0 || ka > self.k_max() {
            return (zero, zero);
        }
        let (t, u) = (self.tau[ka - 1], self.u[ka - 1]);
        if k > 0 {
            (t, u)
        } else {
            (t.conj(), u.conj())
        }
    }

    pub fn tau_coefficient(&self, k: i64) -> Complex64 {
        self.coefficient(k).0
    }

    pub fn u_coefficient(&self, k: i64) -> Complex64 {
        self.coefficient(k).1
    }

    /// Evaluate both fields at `x` directly from the coefficients.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let mut t = 0.0;
        let mut u = 0.0;
        for (j, (a, b)) in self.tau.iter().zip(&self.u).enumerate() {
            let e = Complex64::from_polar(1.0, (j + 1) as f64 * x);
            t += 2.0 * (a * e).re;
            u += 2.0 * (b * e).re;
        }
        (t, u)
    }

    /// Uniform grid `x_j = -pi + 2 pi j / m`.
    pub fn grid(m: usize) -> Vec<f64> {
        (0..m).map(|j| -PI + 2.0 * PI * j as f64 / m as f64).collect()
    }

    /// `R_phi U (x) = U(x + phi)`.
    pub fn shifted(&self, phi: f64) -> Self {
        let mut out = self.clone();
        for (j, (t, u)) in out.tau.iter_mut().zip(out.u.iter_mut()).enumerate() {
            let e = Complex64::from_polar(1.0, (j + 1) as f64 * phi);
            *t *= e;
            *u *= e;
        }
        out
    }

    /// `S (tau, u)(x) = (tau(-x), -u(-x))`.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        for t in out.tau.iter_mut() {
            *t = t.conj();
        }
        for u in out.u.iter_mut() {
            *u = -u.conj();
        }
        out
    }

    pub fn add_scaled(&mut self, other: &FieldState, s: f64) {
        assert_eq!(self.n, other.n, "grid mismatch");
        for (a, b) in self.tau.iter_mut().zip(&other.tau) {
            *a += b * s;
        }
        for (a, b) in self.u.iter_mut().zip(&other.u) {
            *a += b * s;
        }
    }

    /// `max_k max(|tau_k - tau'_k|, |u_k - u'_k|)`.
    pub fn max_diff(&self, other: &FieldState) -> f64 {
        assert_eq!(self.n, other.n, "grid mismatch");
        self.tau
            .iter()
            .zip(&other.tau)
            .chain(self.u.iter().zip(&other.u))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `sum_k |tau_k|^2 + |u_k|^2` over both signs of `k`.
    pub fn energy(&self) -> f64 {
        2.0 * self.tau.iter().chain(&self.u).map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Energy in the modes with `|k| > k_cut`.
    pub fn energy_above(&self, k_cut: usize) -> f64 {
        let from = k_cut.min(self.tau.len());
        2.0 * self.tau[from..]
            .iter()
            .chain(&self.u[from..])
            .map(|z| z.norm_sqr())
            .sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.tau
            .iter()
            .chain(&self.u)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Seeded complex noise of size `scale` on the modes `1..=k_noise` of both fields.
    pub fn add_noise(&mut self, seed: u64, scale: f64, k_noise: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top = k_noise.min(self.k_max());
        for k in 0..top {
            for slot in [&mut self.tau[k], &mut self.u[k]] {
                let re: f64 = rng.random_range(-1.0..1.0);
                let im: f64 = rng.random_range(-1.0..1.0);
                *slot += Complex64::new(re, im) * scale;
            }
        }
    }
}
