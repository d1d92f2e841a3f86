//! Binary checkpoint of a [`FieldState`].
//!
//! All values little-endian:
//!
//! | offset | type  | content                                   |
//! |--------|-------|-------------------------------------------|
//! | 0      | `u64` | grid size `n`                             |
//! | 8      | `f64` | time                                      |
//! | 16     | `f64` x 4n | for `k = -n/2+1 ..= n/2`: `Re tau_k, Im tau_k, Re u_k, Im u_k` |
//!
//! Total length `16 + 32 n` bytes. Reading rejects files whose coefficients violate the
//! zero-mean, Hermitian or band (Nyquist = 0) invariants.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::field::FieldState;
use crate::error::{Error, Result};

pub fn write_checkpoint<W: Write>(state: &FieldState, mut w: W) -> Result<()> {
    let n = state.n();
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&state.time.to_le_bytes())?;
    let half = (n / 2) as i64;
    for k in (-half + 1)..=half {
        let (t, u) = state.coefficient(k);
        for v in [t.re, t.im, u.re, u.im] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<FieldState> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let n = u64::from_le_bytes(b);
    if n > (1 << 26) {
        return Err(Error::Checkpoint(format!("implausible grid size {n}")));
    }
    let n = n as usize;
    let mut state = FieldState::zeros(n).map_err(|e| Error::Checkpoint(e.to_string()))?;
    state.time = read_f64(&mut r)?;
    let half = (n / 2) as i64;
    let mut coeffs = Vec::with_capacity(n);
    for _ in 0..n {
        let tr = read_f64(&mut r)?;
        let ti = read_f64(&mut r)?;
        let ur = read_f64(&mut r)?;
        let ui = read_f64(&mut r)?;
        coeffs.push((Complex64::new(tr, ti), Complex64::new(ur, ui)));
    }
    let at = |k: i64| coeffs[(k + half - 1) as usize];
    let zero = Complex64::new(0.0, 0.0);
    if at(0) != (zero, zero) {
        return Err(Error::Checkpoint("nonzero mean mode".into()));
    }
    if at(half) != (zero, zero) {
        return Err(Error::Checkpoint("nonzero Nyquist mode".into()));
    }
    for k in 1..half {
        let (tp, up) = at(k);
        let (tm, um) = at(-k);
        if tm != tp.conj() || um != up.conj() {
            return Err(Error::Checkpoint(format!("mode {k} is not Hermitian")));
        }
        state.set_mode(k as usize, tp, up)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_byte_exact() {
        let mut s = FieldState::zeros(16).unwrap();
        s.time = 2.5;
        s.set_mode(1, Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25))
            .unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&s, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 32 * 16);
        assert_eq!(&bytes[0..8], &16u64.to_le_bytes());
        assert_eq!(&bytes[8..16], &2.5f64.to_le_bytes());
        // k = -7 is the first entry; k = 1 sits at index 7 + 1 = 8, k = -1 at index 6
        let entry = |i: usize, j: usize| {
            let off = 16 + 32 * i + 8 * j;
            f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap())
        };
        assert_eq!(
            [entry(8, 0), entry(8, 1), entry(8, 2), entry(8, 3)],
            [1.0, -2.0, 0.5, 0.25]
        );
        assert_eq!(
            [entry(6, 0), entry(6, 1), entry(6, 2), entry(6, 3)],
            [1.0, 2.0, 0.5, -0.25]
        );
        assert_eq!([entry(7, 0), entry(7, 1)], [0.0, 0.0]);
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_broken_invariants() {
        let s = FieldState::zeros(16).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&s, &mut bytes).unwrap();
        let mut mean = bytes.clone();
        let off = 16 + 32 * 7;
        mean[off..off + 8].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(read_checkpoint(mean.as_slice()), Err(Error::Checkpoint(_))));
        let mut herm = bytes.clone();
        let off = 16 + 32 * 9 + 8;
        herm[off..off + 8].copy_from_slice(&0.5f64.to_le_bytes());
        assert!(matches!(read_checkpoint(herm.as_slice()), Err(Error::Checkpoint(_))));
        assert!(read_checkpoint(&bytes[..100]).is_err());
    }
}
