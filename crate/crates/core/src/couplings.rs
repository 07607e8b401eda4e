//! Vacuum-mediated couplings between the two emitters.
//!
//! All geometric dependence enters through the orientation-averaged kernel
//! `K(w, r) = (2/3) k^2 exp(i k r) / r` with `k = 2 pi w`, which is what the
//! transverse tensor `(-grad^2 delta + grad grad) exp(ikr)/r` reduces to once
//! `R_mu R_nu` is replaced by `delta_mu_nu / 3`. With
//! `N = g0 mu_a mu_b (3/2) / (2 pi)^3`:
//!
//! * `L_ab(w) = N [K(w) - K(-w)] / 2i = g0 mu_a mu_b w^3 sin(x)/x`, `x = 2 pi w r`
//! * `M_ab(w) = (N/2) i K(-w) = (g0 mu_a mu_b w^3 / 2) [i cos(x) + sin(x)] / x`
//!
//! Diagonal terms do not depend on `r`: `L_aa(w) = g0 mu_a^2 w^3`. The
//! diagonal `M_aa` keeps only its decay half, `L_aa / 2`; the divergent
//! self-shift is taken to be absorbed in the renormalised transition
//! frequency.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{PairSystem, Site};
use crate::scalar::{cplx, i_unit, re, Real};

/// Orientation-averaged dipole-dipole kernel `(2/3) k^2 e^{ikr}/r`, `k = 2 pi w`.
pub fn dd_tensor_avg<T: Real>(omega: Complex<T>, r: T) -> Result<Complex<T>> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::Domain(format!("dipole kernel needs r > 0, got {}", r)));
    }
    let k = omega * T::TAU();
    let phase = (i_unit::<T>() * k * r).exp();
    Ok(k * k * phase * (T::lit(2.0) / (T::lit(3.0) * r)))
}

/// Couplings of one validated pair.
#[derive(Clone, Copy, Debug)]
pub struct CouplingContext<'a, T> {
    pub system: &'a PairSystem<T>,
    pub r_ab: T,
}

impl<'a, T: Real> CouplingContext<'a, T> {
    pub fn new(system: &'a PairSystem<T>) -> Result<Self> {
        system.validate()?;
        Ok(Self::unchecked(system))
    }

    /// Skips validation; for callers that already validated the system.
    pub fn unchecked(system: &'a PairSystem<T>) -> Self {
        Self { system, r_ab: system.distance() }
    }

    #[inline]
    fn mu(&self, s: Site) -> T {
        self.system.atom(s).mu_rel
    }

    /// Constant relating the kernel to the couplings.
    fn kernel_norm(&self, a: Site, b: Site) -> T {
        let tau = T::TAU();
        self.system.coupling_scale * self.mu(a) * self.mu(b) * T::lit(1.5) / (tau * tau * tau)
    }

    /// Cooperative decay rate `L_ab(w)`, analytically continued in `w`.
    pub fn coupling_l(&self, a: Site, b: Site, w: Complex<T>) -> Result<Complex<T>> {
        if a == b {
            return Ok(w * w * w * (self.system.coupling_scale * self.mu(a) * self.mu(a)));
        }
        let kp = dd_tensor_avg(w, self.r_ab)?;
        let km = dd_tensor_avg(-w, self.r_ab)?;
        Ok((kp - km) / cplx(T::zero(), T::lit(2.0)) * self.kernel_norm(a, b))
    }

    /// Complex coupling `M_ab(w)`: dipole-dipole shift plus half the cooperative rate.
    pub fn coupling_m(&self, a: Site, b: Site, w: Complex<T>) -> Result<Complex<T>> {
        if a == b {
            return Ok(self.coupling_l(a, a, w)? * T::lit(0.5));
        }
        let km = dd_tensor_avg(-w, self.r_ab)?;
        Ok(i_unit::<T>() * km * (self.kernel_norm(a, b) * T::lit(0.5)))
    }

    /// `d L_ab / dw`, used for double-pole residues.
    pub fn coupling_l_derivative(&self, a: Site, b: Site, w: Complex<T>) -> Result<Complex<T>> {
        let g = self.system.coupling_scale * self.mu(a) * self.mu(b);
        if a == b {
            return Ok(w * w * (g * T::lit(3.0)));
        }
        // L = g w^2 sin(kw)/k with k = 2 pi r
        let k = T::TAU() * self.r_ab;
        let kw = w * k;
        Ok((w * kw.sin() * T::lit(2.0) + w * w * kw.cos() * k) * (g / k))
    }

    fn ratio(&self, a: Site, b: Site) -> Result<T> {
        let ma = self.mu(a);
        if ma == T::zero() {
            return Err(Error::Domain("tilde coupling needs a non-zero dipole on the first index".into()));
        }
        let mb = self.mu(b);
        Ok(mb * mb / (ma * ma))
    }

    /// `d L~_ab / dw`.
    pub fn coupling_l_tilde_derivative(&self, a: Site, b: Site, w: Complex<T>) -> Result<Complex<T>> {
        Ok(self.coupling_l_derivative(a, b, w)? * self.ratio(a, b)?)
    }

    /// `L~_ab = L_ab |mu_b|^2 / |mu_a|^2`.
    pub fn coupling_l_tilde(&self, a: Site, b: Site, w: Complex<T>) -> Result<Complex<T>> {
        Ok(self.coupling_l(a, b, w)? * self.ratio(a, b)?)
    }

    /// `M~_ab = M_ab |mu_b|^2 / |mu_a|^2`.
    pub fn coupling_m_tilde(&self, a: Site, b: Site, w: Complex<T>) -> Result<Complex<T>> {
        Ok(self.coupling_m(a, b, w)? * self.ratio(a, b)?)
    }

    /// Two-photon coupling `L_s(W) = sum_alpha L_aa(W - w_abar + i gamma_abar)`:
    /// the frequency integral over the cubic kernel closed on the pole of
    /// `G_abar(W - w')`.
    pub fn coupling_ls(&self, omega_sum: Complex<T>) -> Result<Complex<T>> {
        let mut acc = re(T::zero());
        for s in Site::ALL {
            let other = self.system.atom(s.bar());
            acc = acc + self.coupling_l(s, s, omega_sum - cplx(other.omega, -other.gamma))?;
        }
        Ok(acc)
    }
}
