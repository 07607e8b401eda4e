//! Spectral phase of the broadband field, expanded about a reference frequency.
//!
//! `phi(w) = sum_n C_n (w - w_ref)^n`. Frequencies are wavenumbers (cm^-1), so
//! `C_1` is in cm and `C_2` in cm^2. The polynomial is entire, which lets the
//! closed-form coefficients evaluate it at the complex pole positions
//! `w_alpha -/+ i gamma_alpha`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::{re, Real};

/// Speed of light in cm per femtosecond.
pub const SPEED_OF_LIGHT_CM_PER_FS: f64 = 2.997_924_58e-5;

/// Which shaping model produced a profile. Only used to guard operations
/// that are meaningful for one model (the chirp residue).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Constant,
    Delay,
    Chirp,
    Polynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile<T> {
    pub kind: PhaseKind,
    /// Expansion point `w_ref` in cm^-1.
    pub reference: T,
    /// `coeffs[n]` multiplies `(w - w_ref)^n`.
    pub coeffs: Vec<T>,
}

impl<T: Real> PhaseProfile<T> {
    /// Flat phase, `phi(w) = c0`.
    pub fn constant(c0: T) -> Self {
        Self { kind: PhaseKind::Constant, reference: T::zero(), coeffs: vec![c0] }
    }

    /// Linear phase `phi(w) = w T` for a delay given in femtoseconds.
    pub fn delay_fs(delay_fs: T) -> Self {
        let slope = T::TAU() * T::lit(SPEED_OF_LIGHT_CM_PER_FS) * delay_fs;
        Self { kind: PhaseKind::Delay, reference: T::zero(), coeffs: vec![T::zero(), slope] }
    }

    /// Linear chirp `phi(w) = c2 (w - w_ref)^2`, `c2` in (cm^-1)^-2.
    pub fn chirp(c2: T, reference: T) -> Self {
        Self { kind: PhaseKind::Chirp, reference, coeffs: vec![T::zero(), T::zero(), c2] }
    }

    pub fn polynomial(reference: T, coeffs: Vec<T>) -> Self {
        Self { kind: PhaseKind::Polynomial, reference, coeffs }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).copied().unwrap_or_else(T::zero)
    }

    /// Chirp rate `C_2`.
    pub fn c2(&self) -> T {
        self.coeff(2)
    }

    /// Same profile with `C_2` replaced.
    pub fn with_c2(&self, c2: T) -> Self {
        let mut out = self.clone();
        if out.coeffs.len() < 3 {
            out.coeffs.resize(3, T::zero());
        }
        out.coeffs[2] = c2;
        out
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let x = z - re(self.reference);
        self.coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * x + re(c))
    }

    pub fn eval_real(&self, w: T) -> T {
        self.eval(re(w)).re
    }

    /// `d phi / d w` at a complex argument.
    pub fn derivative(&self, z: Complex<T>) -> Complex<T> {
        let x = z - re(self.reference);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (n, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + re(c * T::from_usize(n).unwrap());
        }
        acc
    }

    /// Sign of the highest-order non-constant coefficient: +1, -1 or 0.
    pub fn dominant_sign(&self) -> i8 {
        for &c in self.coeffs.iter().skip(1).rev() {
            if c > T::zero() {
                return 1;
            }
            if c < T::zero() {
                return -1;
            }
        }
        0
    }

    pub fn is_finite(&self) -> bool {
        self.reference.is_finite() && self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Evaluates a phase profile at a (possibly complex) frequency.
pub fn phase_eval<T: Real>(profile: &PhaseProfile<T>, omega: Complex<T>) -> Complex<T> {
    profile.eval(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn constant_model_is_flat() {
        let p = PhaseProfile::constant(std::f64::consts::PI);
        for w in [0.0, 1000.0, 13000.0] {
            assert_eq!(p.eval_real(w), std::f64::consts::PI);
        }
        assert_eq!(p.derivative(cplx(5.0, 1.0)), cplx(0.0, 0.0));
    }

    #[test]
    fn chirp_vanishes_at_vertex() {
        let p = PhaseProfile::<f64>::chirp(5e-9, 12000.0);
        assert_eq!(p.eval_real(12000.0), 0.0);
        assert!((p.eval_real(13000.0) - 5e-3).abs() < 1e-15);
    }

    #[test]
    fn delay_17_fs_at_13000() {
        let p = PhaseProfile::delay_fs(17.0);
        let expected = 2.0 * std::f64::consts::PI * 2.99792458e-5 * 17.0 * 13000.0;
        assert!((p.eval_real(13000.0) - expected).abs() < 1e-12);
        assert!((expected - 41.63).abs() < 0.01);
    }

    #[test]
    fn derivative_matches_complex_step() {
        let p = PhaseProfile::<f64>::polynomial(12000.0, vec![0.3, 1e-3, 5e-9, -2e-12]);
        let z = cplx(13000.0, -200.0);
        let h = 1e-3;
        let fd = (p.eval(z + cplx(h, 0.0)) - p.eval(z - cplx(h, 0.0))) / (2.0 * h);
        let d = p.derivative(z);
        assert!((fd - d).norm() < 1e-9 * d.norm().max(1.0));
    }

    #[test]
    fn dominant_sign_follows_highest_order() {
        assert_eq!(PhaseProfile::<f64>::zero().dominant_sign(), 0);
        assert_eq!(PhaseProfile::delay_fs(33.0).dominant_sign(), 1);
        assert_eq!(PhaseProfile::chirp(-5e-9, 0.0).dominant_sign(), -1);
    }
}
