//! Lorentzian Green's functions of the pair.
//!
//! Retarded: `G(w) = i / (w - w0 + i g0)`, pole at `w0 - i g0`.
//! Advanced (dagger): `G^dag(w) = -i / (w - w0 - i g0)`, pole at `w0 + i g0`;
//! at real `w` it is the complex conjugate of the retarded one.
//!
//! Every function accepts complex frequencies.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{PairSystem, Site, TwoLevelAtom};
use crate::scalar::{cplx, Real};

/// Relative pole-proximity threshold (in units of the width).
pub const POLE_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreenKind {
    Single(Site),
    SingleDagger(Site),
    Sum,
    SumDagger,
    /// Two-photon (sum-frequency) pole at `w_a + w_b`.
    Tpa(Site, Site),
    TpaDagger(Site, Site),
    /// Raman (difference-frequency) pole at `w_a - w_b`.
    Raman(Site, Site),
    RamanDagger(Site, Site),
}

impl GreenKind {
    pub fn is_advanced(self) -> bool {
        matches!(
            self,
            GreenKind::SingleDagger(_) | GreenKind::SumDagger | GreenKind::TpaDagger(..) | GreenKind::RamanDagger(..)
        )
    }

    /// Real part and width of the pole, for single-pole kinds. `None` for sums.
    pub fn pole<T: Real>(self, sys: &PairSystem<T>) -> Option<(T, T)> {
        let at = |s: Site| sys.atom(s);
        match self {
            GreenKind::Single(s) | GreenKind::SingleDagger(s) => Some((at(s).omega, at(s).gamma)),
            GreenKind::Tpa(a, b) | GreenKind::TpaDagger(a, b) => {
                Some((at(a).omega + at(b).omega, at(a).gamma + at(b).gamma))
            }
            GreenKind::Raman(a, b) | GreenKind::RamanDagger(a, b) => {
                Some((at(a).omega - at(b).omega, at(a).gamma + at(b).gamma))
            }
            GreenKind::Sum | GreenKind::SumDagger => None,
        }
    }

    pub fn eval<T: Real>(self, sys: &PairSystem<T>, z: Complex<T>) -> Result<Complex<T>> {
        match self {
            GreenKind::Sum => g_sum(sys, z),
            GreenKind::SumDagger => g_sum_dag(sys, z),
            k => {
                let (w0, g0) = k.pole(sys).expect("single-pole kind");
                if k.is_advanced() {
                    advanced(w0, g0, z)
                } else {
                    retarded(w0, g0, z)
                }
            }
        }
    }
}

/// `i / (z - w0 + i g0)`.
#[inline]
pub fn retarded<T: Real>(w0: T, g0: T, z: Complex<T>) -> Result<Complex<T>> {
    let d = z - cplx(w0, -g0);
    guard(d, g0, "retarded propagator")?;
    Ok(cplx(T::zero(), T::one()) / d)
}

/// `-i / (z - w0 - i g0)`.
#[inline]
pub fn advanced<T: Real>(w0: T, g0: T, z: Complex<T>) -> Result<Complex<T>> {
    let d = z - cplx(w0, g0);
    guard(d, g0, "advanced propagator")?;
    Ok(cplx(T::zero(), -T::one()) / d)
}

#[inline]
fn guard<T: Real>(d: Complex<T>, g0: T, what: &'static str) -> Result<()> {
    let dist = d.norm();
    if dist < T::lit(POLE_GUARD) * g0.abs() || !dist.is_finite() {
        return Err(Error::PoleHit { what, distance: dist.as_f64() });
    }
    Ok(())
}

/// `G_alpha(w) = i / (w - w_alpha + i gamma_alpha)`.
pub fn g_single<T: Real>(atom: &TwoLevelAtom<T>, z: Complex<T>) -> Result<Complex<T>> {
    retarded(atom.omega, atom.gamma, z)
}

pub fn g_single_dag<T: Real>(atom: &TwoLevelAtom<T>, z: Complex<T>) -> Result<Complex<T>> {
    advanced(atom.omega, atom.gamma, z)
}

/// `G_s = G_a + G_b`.
pub fn g_sum<T: Real>(sys: &PairSystem<T>, z: Complex<T>) -> Result<Complex<T>> {
    Ok(g_single(&sys.atoms[0], z)? + g_single(&sys.atoms[1], z)?)
}

pub fn g_sum_dag<T: Real>(sys: &PairSystem<T>, z: Complex<T>) -> Result<Complex<T>> {
    Ok(g_single_dag(&sys.atoms[0], z)? + g_single_dag(&sys.atoms[1], z)?)
}

/// Collective two-photon propagator `G^(+)_{ab}`.
pub fn g_tpa<T: Real>(sys: &PairSystem<T>, a: Site, b: Site, z: Complex<T>) -> Result<Complex<T>> {
    GreenKind::Tpa(a, b).eval(sys, z)
}

pub fn g_tpa_dag<T: Real>(sys: &PairSystem<T>, a: Site, b: Site, z: Complex<T>) -> Result<Complex<T>> {
    GreenKind::TpaDagger(a, b).eval(sys, z)
}

/// Collective Raman propagator `G^(-)_{ab}`.
pub fn g_raman<T: Real>(sys: &PairSystem<T>, a: Site, b: Site, z: Complex<T>) -> Result<Complex<T>> {
    GreenKind::Raman(a, b).eval(sys, z)
}

pub fn g_raman_dag<T: Real>(sys: &PairSystem<T>, a: Site, b: Site, z: Complex<T>) -> Result<Complex<T>> {
    GreenKind::RamanDagger(a, b).eval(sys, z)
}

/// Propagators bound to one system; shorthand used by the coefficient code.
#[derive(Clone, Copy)]
pub struct Propagators<'a, T> {
    pub sys: &'a PairSystem<T>,
}

impl<'a, T: Real> Propagators<'a, T> {
    pub fn new(sys: &'a PairSystem<T>) -> Self {
        Self { sys }
    }

    #[inline]
    pub fn g(&self, s: Site, z: Complex<T>) -> Result<Complex<T>> {
        g_single(self.sys.atom(s), z)
    }

    #[inline]
    pub fn gd(&self, s: Site, z: Complex<T>) -> Result<Complex<T>> {
        g_single_dag(self.sys.atom(s), z)
    }

    #[inline]
    pub fn gs(&self, z: Complex<T>) -> Result<Complex<T>> {
        g_sum(self.sys, z)
    }

    #[inline]
    pub fn gsd(&self, z: Complex<T>) -> Result<Complex<T>> {
        g_sum_dag(self.sys, z)
    }

    #[inline]
    pub fn tpa(&self, a: Site, b: Site, z: Complex<T>) -> Result<Complex<T>> {
        g_tpa(self.sys, a, b, z)
    }

    #[inline]
    pub fn raman(&self, a: Site, b: Site, z: Complex<T>) -> Result<Complex<T>> {
        g_raman(self.sys, a, b, z)
    }

    #[inline]
    pub fn raman_dag(&self, a: Site, b: Site, z: Complex<T>) -> Result<Complex<T>> {
        g_raman_dag(self.sys, a, b, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    fn atom(w: f64, g: f64) -> TwoLevelAtom<f64> {
        TwoLevelAtom::new(w, g, 1.0)
    }

    fn reference() -> PairSystem<f64> {
        PairSystem::new(atom(13000.0, 200.0), TwoLevelAtom::new(11000.0, 200.0, 0.99), 1e-6)
    }

    #[test]
    fn single_resonance_and_decay() {
        let a = atom(13000.0, 200.0);
        let g = g_single(&a, re(13000.0)).unwrap();
        assert!((g - cplx(1.0 / 200.0, 0.0)).norm() < 1e-18);
        assert!(g_single(&a, re(1e12)).unwrap().norm() < 1e-11);
    }

    #[test]
    fn single_off_resonance_value() {
        // i / (200 + 200 i) = (1 + i) / 400
        let g = g_single(&atom(13000.0, 200.0), re(13200.0)).unwrap();
        assert!((g - cplx(0.0025, 0.0025)).norm() < 1e-17);
    }

    #[test]
    fn dagger_is_conjugate_on_real_axis() {
        let b = atom(11000.0, 200.0);
        for w in [10800.0, 11000.0, -3000.0, 25000.0] {
            let d = g_single_dag(&b, re(w)).unwrap() - g_single(&b, re(w)).unwrap().conj();
            assert!(d.norm() < 1e-18);
        }
        assert!((g_single_dag(&b, re(11000.0)).unwrap() - cplx(1.0 / 200.0, 0.0)).norm() < 1e-18);
    }

    #[test]
    fn pole_hit_is_an_error() {
        let a = atom(13000.0, 200.0);
        assert!(matches!(g_single(&a, cplx(13000.0, -200.0)), Err(Error::PoleHit { .. })));
        assert!(matches!(g_single_dag(&a, cplx(13000.0, 200.0)), Err(Error::PoleHit { .. })));
        assert!(g_single(&a, cplx(13000.0, 200.0)).is_ok());
    }

    #[test]
    fn sum_of_identical_atoms_doubles() {
        let s = PairSystem::new(atom(13000.0, 200.0), atom(13000.0, 200.0), 1e-6);
        for w in [12000.0, 13000.0, 14100.0] {
            let d = g_sum(&s, re(w)).unwrap() - g_single(&s.atoms[0], re(w)).unwrap() * 2.0;
            assert!(d.norm() < 1e-18);
        }
    }

    #[test]
    fn sum_midway_is_real() {
        let s = reference();
        let g = g_sum(&s, re(12000.0)).unwrap();
        assert!(g.im.abs() < 1e-18, "{g}");
        let oracle = cplx(0.0, 1.0) / cplx(-1000.0, 200.0) + cplx(0.0, 1.0) / cplx(1000.0, 200.0);
        assert!((g - oracle).norm() < 1e-18);
    }

    #[test]
    fn collective_resonances() {
        let s = reference();
        let tpa = g_tpa(&s, Site::A, Site::B, re(24000.0)).unwrap();
        assert!((tpa - cplx(1.0 / 400.0, 0.0)).norm() < 1e-18);
        let ram = g_raman(&s, Site::A, Site::B, re(2000.0)).unwrap();
        assert!((ram - cplx(1.0 / 400.0, 0.0)).norm() < 1e-18);
        assert_eq!(GreenKind::Tpa(Site::A, Site::A).pole(&s), Some((26000.0, 400.0)));
        assert_eq!(GreenKind::Raman(Site::B, Site::B).pole(&s), Some((0.0, 400.0)));
    }

    #[test]
    fn raman_swap_is_conjugate() {
        // i/(w - d + i g) versus i/(-w + d + i g) = -i/(w - d - i g)
        let s = reference();
        let mut w = -6000.0;
        while w <= 6000.0 {
            let p = g_raman(&s, Site::A, Site::B, re(w)).unwrap();
            let q = g_raman(&s, Site::B, Site::A, re(-w)).unwrap();
            assert!((p - q.conj()).norm() < 1e-17, "w={w}");
            assert!((p + q.conj()).norm() > 1e-6);
            w += 250.0;
        }
    }
}
