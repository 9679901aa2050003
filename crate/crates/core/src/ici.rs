//! Intercarrier interference coefficient profiles.
//!
//! A profile holds `S_i` for every subcarrier offset `i` in `1-K ..= K-1`.
//! Two constructions exist and are never mixed in one run:
//!
//! - [`cfo_profile`]: the physical leakage caused by a carrier frequency
//!   offset `epsilon` (in units of the subcarrier spacing).
//! - [`scalar_profile`]: a single leakage magnitude `S` applied to every
//!   off-diagonal offset, with `|S_0| = 1`. This is the knob swept in the
//!   experiments. It leaks to *all* offsets, not only adjacent subcarriers,
//!   and `S_0` is not reduced as `S` grows.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Real};

/// Below this `|sin(pi (i + eps) / K)|` the removable singularity is taken
/// by its limit.
const SINGULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum IciMode {
    None,
    Cfo { epsilon: f64 },
    Scalar { s: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IciProfile<T> {
    k: usize,
    // coeffs[i + K - 1] = S_i
    coeffs: Vec<Complex<T>>,
    mode: IciMode,
}

impl<T: Real> IciProfile<T> {
    /// Builds the profile described by `mode` for `k` subcarriers.
    pub fn from_mode(k: usize, mode: IciMode) -> Result<Self> {
        match mode {
            IciMode::None => none_profile(k),
            IciMode::Cfo { epsilon } => cfo_profile(k, epsilon),
            IciMode::Scalar { s } => scalar_profile(k, s),
        }
    }

    pub fn num_subcarriers(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> IciMode {
        self.mode
    }

    /// `S_offset`; panics when `|offset| >= K`.
    #[inline]
    pub fn coefficient(&self, offset: isize) -> Complex<T> {
        self.coeffs[self.slot(offset)]
    }

    /// `|S_offset|^2`, the leakage power weight.
    #[inline]
    pub fn weight(&self, offset: isize) -> T {
        norm_sqr(self.coeffs[self.slot(offset)])
    }

    /// `(i, S_i)` for every offset in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (isize, Complex<T>)> + '_ {
        let lo = 1 - self.k as isize;
        self.coeffs.iter().enumerate().map(move |(n, s)| (lo + n as isize, *s))
    }

    /// Writes `i,re,im,abs` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,re,im,abs")?;
        for (i, s) in self.iter() {
            writeln!(out, "{i},{:e},{:e},{:e}", s.re.to_f64_lossy(), s.im.to_f64_lossy(), s.norm().to_f64_lossy())?;
        }
        Ok(())
    }

    #[inline]
    fn slot(&self, offset: isize) -> usize {
        let slot = offset + self.k as isize - 1;
        assert!(
            slot >= 0 && (slot as usize) < self.coeffs.len(),
            "ICI offset {offset} outside 1-K..=K-1 for K = {}",
            self.k
        );
        slot as usize
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("K", "need at least one subcarrier"));
    }
    Ok(())
}

/// Unit impulse: `S_0 = 1`, every other offset zero.
pub fn none_profile<T: Real>(k: usize) -> Result<IciProfile<T>> {
    check_k(k)?;
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); 2 * k - 1];
    coeffs[k - 1] = Complex::new(T::one(), T::zero());
    Ok(IciProfile { k, coeffs, mode: IciMode::None })
}

/// Leakage produced by a normalized carrier frequency offset `epsilon`:
///
/// `S_i = sin(pi (i+eps)) / (K sin(pi (i+eps) / K)) * exp(j pi (1 - 1/K) (i+eps))`
///
/// `epsilon` is usually in `[0, 1)`; any finite value is accepted.
pub fn cfo_profile<T: Real>(k: usize, epsilon: f64) -> Result<IciProfile<T>> {
    check_k(k)?;
    if !epsilon.is_finite() {
        return Err(Error::invalid("epsilon", "must be finite"));
    }
    let kf = k as f64;
    let lo = 1 - k as isize;
    let coeffs = (0..2 * k - 1)
        .map(|n| {
            let x = (lo + n as isize) as f64 + epsilon;
            let den = (PI * x / kf).sin();
            let ratio = if den.abs() < SINGULAR_THRESHOLD {
                // x = mK: ratio -> cos(pi x) / cos(pi x / K) = (-1)^(m(K-1))
                let m = (x / kf).round();
                if ((m * (kf - 1.0)) as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 }
            } else {
                (PI * x).sin() / (kf * den)
            };
            let phase = PI * (1.0 - 1.0 / kf) * x;
            Complex::new(T::lit(ratio * phase.cos()), T::lit(ratio * phase.sin()))
        })
        .collect();
    Ok(IciProfile { k, coeffs, mode: IciMode::Cfo { epsilon } })
}

/// Uniform leakage magnitude `S` on every nonzero offset, `S_0 = 1`, zero
/// phases (only `|S_i|^2` enters the rate and interference formulas).
pub fn scalar_profile<T: Real>(k: usize, s: f64) -> Result<IciProfile<T>> {
    check_k(k)?;
    if !(0.0..1.0).contains(&s) {
        return Err(Error::invalid("S", format!("leakage magnitude must lie in [0, 1), got {s}")));
    }
    let mut coeffs = vec![Complex::new(T::lit(s), T::zero()); 2 * k - 1];
    coeffs[k - 1] = Complex::new(T::one(), T::zero());
    Ok(IciProfile { k, coeffs, mode: IciMode::Scalar { s } })
}
