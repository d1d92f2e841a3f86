use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::FieldState;

/// Forward/inverse FFT pair of a fixed length with owned scratch space.
///
/// Physical samples live on `x_j = -pi + 2 pi j / m`, so the coefficient of `e^{ikx}`
/// picks up the factor `(-1)^k` against the FFT's `[0, 2 pi)` convention.
pub struct Transform {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("m", &self.m).finish()
    }
}

impl Clone for Transform {
    fn clone(&self) -> Self {
        Transform::new(self.m)
    }
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl Transform {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            m,
            forward,
            inverse,
            buf: vec![Complex64::new(0.0, 0.0); m],
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Samples of the real field with positive-mode coefficients `modes[k-1]`.
    pub fn to_physical(&mut self, modes: &[Complex64], out: &mut [f64]) {
        assert!(2 * modes.len() < self.m, "transform too short for the band");
        assert_eq!(out.len(), self.m);
        self.buf.fill(Complex64::new(0.0, 0.0));
        for (j, &c) in modes.iter().enumerate() {
            let k = j + 1;
            let c = c * sign(k);
            self.buf[k] = c;
            self.buf[self.m - k] = c.conj();
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (o, v) in out.iter_mut().zip(&self.buf) {
            *o = v.re;
        }
    }

    /// Positive-mode coefficients `1..=modes.len()` of real samples.
    pub fn to_spectral(&mut self, samples: &[f64], modes: &mut [Complex64]) {
        assert_eq!(samples.len(), self.m);
        for (b, &s) in self.buf.iter_mut().zip(samples) {
            *b = Complex64::new(s, 0.0);
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        let norm = 1.0 / self.m as f64;
        for (j, c) in modes.iter_mut().enumerate() {
            let k = j + 1;
            *c = if k < self.m / 2 {
                self.buf[k] * (norm * sign(k))
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }

    /// Mean of real samples via the zero mode.
    pub fn mean(samples: &[f64]) -> f64 {
        samples.iter().sum::<f64>() / samples.len() as f64
    }

    /// Both fields of a state on this grid.
    pub fn state_to_physical(&mut self, s: &FieldState, tau: &mut [f64], u: &mut [f64]) {
        self.to_physical(s.tau_modes(), tau);
        self.to_physical(s.u_modes(), u);
    }
}
