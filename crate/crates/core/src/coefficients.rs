//! Closed-form pulse-shaped coefficients `A1..A9` (effective-coupling part)
//! and `B1..B9` (vacuum-field part) as complex functions of `(w, w_p)`.
//!
//! Notation used below: `z-(a) = w_a - i g_a`, `z+(a) = w_a + i g_a`,
//! `e(a,b)` is the propagation phase of the pair, `phi` the broadband phase and
//! `xi` the narrowband phase.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::couplings::CouplingContext;
use crate::error::{Error, Result};
use crate::model::{PairSystem, PulseConfig, Site};
use crate::propagators::Propagators;
use crate::quad::{closed_line_integral, HalfPlane, QuadSettings};
use crate::scalar::{cplx, i_unit, re, Real};

/// Half-plane used for the dangling `w2` integral inside `A1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourRule {
    /// Always close below, picking up the retarded poles of `G_a G_b`.
    #[default]
    Retarded,
    /// Close above for a positive leading phase coefficient, below otherwise.
    ChirpSign,
}

/// How the dangling integral is evaluated once the half-plane is fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DanglingMethod {
    #[default]
    Residue,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientOptions {
    pub contour: ContourRule,
    pub dangling: DanglingMethod,
    pub quad_rel_tol: f64,
    /// Maximum memoised grid points; 0 disables the cache.
    pub cache_capacity: usize,
}

impl Default for CoefficientOptions {
    fn default() -> Self {
        Self {
            contour: ContourRule::Retarded,
            dangling: DanglingMethod::Residue,
            quad_rel_tol: 1e-11,
            cache_capacity: 4096,
        }
    }
}

/// Every coefficient at one `(w, w_p)`.
///
/// Superscripted coefficients are indexed by atom: `a3[alpha]`,
/// `a4[alpha][beta][delta]`, `b5[alpha][beta]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientSet<T> {
    pub a1: Complex<T>,
    pub a2: Complex<T>,
    pub a3: [Complex<T>; 2],
    pub a4: [[[Complex<T>; 2]; 2]; 2],
    pub a5: [[[Complex<T>; 2]; 2]; 2],
    pub a6: Complex<T>,
    pub a7: Complex<T>,
    pub a8: Complex<T>,
    pub a9: Complex<T>,
    pub b1: Complex<T>,
    pub b2: Complex<T>,
    pub b3: Complex<T>,
    pub b4: Complex<T>,
    pub b5: [[Complex<T>; 2]; 2],
    pub b6: [[Complex<T>; 2]; 2],
    pub b7: [[Complex<T>; 2]; 2],
    pub b8: Complex<T>,
    pub b9: Complex<T>,
    /// The dangling `w2` integral of `A1`, kept for diagnostics.
    pub dangling: Complex<T>,
}

impl<T: Real> CoefficientSet<T> {
    /// Every coefficient in a fixed order: A1..A9 then B1..B9, superscripts
    /// expanded lexicographically.
    pub fn flat(&self) -> Vec<Complex<T>> {
        let mut v = vec![self.a1, self.a2];
        v.extend(self.a3);
        v.extend(self.a4.iter().flatten().flatten());
        v.extend(self.a5.iter().flatten().flatten());
        v.extend([self.a6, self.a7, self.a8, self.a9, self.b1, self.b2, self.b3, self.b4]);
        for m in [&self.b5, &self.b6, &self.b7] {
            v.extend(m.iter().flatten());
        }
        v.extend([self.b8, self.b9]);
        v
    }
}

type Key = (u64, u64);

/// Coefficients of one system and pulse, memoised per grid point.
#[derive(Debug)]
pub struct CoefficientTable<T> {
    system: PairSystem<T>,
    pulse: PulseConfig<T>,
    options: CoefficientOptions,
    cache: RwLock<HashMap<Key, Arc<CoefficientSet<T>>>>,
}

impl<T: Real> Clone for CoefficientTable<T> {
    fn clone(&self) -> Self {
        Self::with_options(self.system.clone(), self.pulse.clone(), self.options)
    }
}

impl<T: Real> CoefficientTable<T> {
    pub fn new(system: PairSystem<T>, pulse: PulseConfig<T>) -> Result<Self> {
        system.validate()?;
        pulse.validate()?;
        Ok(Self::with_options(system, pulse, CoefficientOptions::default()))
    }

    /// Builds a table without validating; see [`CoefficientTable::new`].
    pub fn with_options(system: PairSystem<T>, pulse: PulseConfig<T>, options: CoefficientOptions) -> Self {
        Self { system, pulse, options, cache: RwLock::new(HashMap::new()) }
    }

    pub fn options(mut self, options: CoefficientOptions) -> Self {
        self.options = options;
        self.cache = RwLock::new(HashMap::new());
        self
    }

    pub fn system(&self) -> &PairSystem<T> {
        &self.system
    }

    pub fn pulse(&self) -> &PulseConfig<T> {
        &self.pulse
    }

    pub fn settings(&self) -> &CoefficientOptions {
        &self.options
    }

    /// All coefficients at `(w, w_p)`, from the cache when available.
    pub fn evaluate(&self, omega: T, omega_p: T) -> Result<Arc<CoefficientSet<T>>> {
        let key = (omega.as_f64().to_bits(), omega_p.as_f64().to_bits());
        if self.options.cache_capacity > 0 {
            if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
                return Ok(hit.clone());
            }
        }
        let set = Arc::new(Eval::new(self, omega, omega_p).all()?);
        if self.options.cache_capacity > 0 {
            let mut w = self.cache.write().expect("cache lock");
            if w.len() >= self.options.cache_capacity {
                w.clear();
            }
            w.entry(key).or_insert_with(|| set.clone());
        }
        Ok(set)
    }

    pub fn cached_points(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// `A_j`, with `indices` holding the atom superscripts (`A3`: one, `A4`/`A5`: three).
    pub fn coeff_a(&self, j: usize, indices: &[Site], omega: T, omega_p: T) -> Result<Complex<T>> {
        let arity = match j {
            3 => 1,
            4 | 5 => 3,
            1..=9 => 0,
            _ => return Err(Error::Domain(format!("no coefficient A{j}"))),
        };
        check_arity('A', j, indices, arity)?;
        let s = self.evaluate(omega, omega_p)?;
        let ix = |k: usize| indices[k].index();
        Ok(match j {
            1 => s.a1,
            2 => s.a2,
            3 => s.a3[ix(0)],
            4 => s.a4[ix(0)][ix(1)][ix(2)],
            5 => s.a5[ix(0)][ix(1)][ix(2)],
            6 => s.a6,
            7 => s.a7,
            8 => s.a8,
            _ => s.a9,
        })
    }

    /// `B_j`, with `indices` holding the atom superscripts (`B5`..`B7`: two).
    pub fn coeff_b(&self, j: usize, indices: &[Site], omega: T, omega_p: T) -> Result<Complex<T>> {
        let arity = match j {
            5..=7 => 2,
            1..=9 => 0,
            _ => return Err(Error::Domain(format!("no coefficient B{j}"))),
        };
        check_arity('B', j, indices, arity)?;
        let s = self.evaluate(omega, omega_p)?;
        let ix = |k: usize| indices[k].index();
        Ok(match j {
            1 => s.b1,
            2 => s.b2,
            3 => s.b3,
            4 => s.b4,
            5 => s.b5[ix(0)][ix(1)],
            6 => s.b6[ix(0)][ix(1)],
            7 => s.b7[ix(0)][ix(1)],
            8 => s.b8,
            _ => s.b9,
        })
    }
}

fn check_arity(family: char, j: usize, indices: &[Site], arity: usize) -> Result<()> {
    if indices.len() != arity {
        return Err(Error::Domain(format!("{family}{j} takes {arity} atom indices, got {}", indices.len())));
    }
    Ok(())
}

/// Evaluation context at one grid point.
struct Eval<'a, T: Real> {
    table: &'a CoefficientTable<T>,
    g: Propagators<'a, T>,
    c: CouplingContext<'a, T>,
    w: Complex<T>,
    wp: Complex<T>,
    xi: T,
    two_pi: T,
}

const SITES: [Site; 2] = Site::ALL;

impl<'a, T: Real> Eval<'a, T> {
    fn new(table: &'a CoefficientTable<T>, omega: T, omega_p: T) -> Self {
        Self {
            table,
            g: Propagators::new(&table.system),
            c: CouplingContext::unchecked(&table.system),
            w: re(omega),
            wp: re(omega_p),
            xi: table.pulse.xi,
            two_pi: T::TAU(),
        }
    }

    fn phi(&self, z: Complex<T>) -> Complex<T> {
        self.table.pulse.phase.eval(z)
    }

    fn eiphase(&self, x: Complex<T>) -> Complex<T> {
        (i_unit::<T>() * x).exp()
    }

    fn e(&self, a: Site, b: Site) -> Complex<T> {
        self.table.system.geometry_phase(a, b)
    }

    fn zm(&self, a: Site) -> Complex<T> {
        let at = self.table.system.atom(a);
        cplx(at.omega, -at.gamma)
    }

    fn zp(&self, a: Site) -> Complex<T> {
        let at = self.table.system.atom(a);
        cplx(at.omega, at.gamma)
    }

    /// `phi(w + w_p - z) + phi(z) - phi(w) - xi`
    fn pd(&self, z: Complex<T>) -> Complex<T> {
        self.phi(self.w + self.wp - z) + self.phi(z) - self.phi(self.w) - self.xi
    }

    fn pd_prime(&self, z: Complex<T>) -> Complex<T> {
        let ph = &self.table.pulse.phase;
        ph.derivative(z) - ph.derivative(self.w + self.wp - z)
    }

    /// `exp i[phi(w - w_p + z+(a)) + xi - phi(z+(a)) - phi(w)]`
    fn q(&self, a: Site) -> Complex<T> {
        let z = self.zp(a);
        self.eiphase(self.phi(self.w - self.wp + z) + self.xi - self.phi(z) - self.phi(self.w))
    }

    /// Same as [`Eval::q`] at `z-(a)`.
    fn q_prime(&self, a: Site) -> Complex<T> {
        let z = self.zm(a);
        self.eiphase(self.phi(self.w - self.wp + z) + self.xi - self.phi(self.w) - self.phi(z))
    }

    /// `exp i[-phi(w_p - w + z-(a)) + xi + phi(z-(a)) - phi(w)]`
    fn r(&self, a: Site) -> Complex<T> {
        let z = self.zm(a);
        self.eiphase(-self.phi(self.wp - self.w + z) + self.xi + self.phi(z) - self.phi(self.w))
    }

    /// `exp i[2 xi - phi(w) - phi(2 w_p - w)]`
    fn t(&self) -> Complex<T> {
        let two = T::lit(2.0);
        self.eiphase(re(two * self.xi) - self.phi(self.w) - self.phi(self.wp * two - self.w))
    }

    /// `sum_ab L~_ab(x) e(a,b) G_a(x) G_b(x)`
    fn sum_lt_gg(&self, x: Complex<T>) -> Result<Complex<T>> {
        let mut acc = re(T::zero());
        for a in SITES {
            for b in SITES {
                acc = acc + self.c.coupling_l_tilde(a, b, x)? * self.e(a, b) * self.g.g(a, x)? * self.g.g(b, x)?;
            }
        }
        Ok(acc)
    }

    /// `sum_ab L_ab(x) e(a,b) G_a(x) G_b(x)`
    fn sum_l_gg(&self, x: Complex<T>) -> Result<Complex<T>> {
        let mut acc = re(T::zero());
        for a in SITES {
            for b in SITES {
                acc = acc + self.c.coupling_l(a, b, x)? * self.e(a, b) * self.g.g(a, x)? * self.g.g(b, x)?;
            }
        }
        Ok(acc)
    }

    /// `sum_ab L_ab(x) e(a,b) G+_a(x) G+_b(x)` with daggered propagators.
    fn sum_l_gdgd(&self, x: Complex<T>) -> Result<Complex<T>> {
        let mut acc = re(T::zero());
        for a in SITES {
            for b in SITES {
                acc = acc + self.c.coupling_l(a, b, x)? * self.e(a, b) * self.g.gd(a, x)? * self.g.gd(b, x)?;
            }
        }
        Ok(acc)
    }

    /// `sum_a exp(i P_d(z-(a)))`
    fn sum_pd_poles(&self) -> Complex<T> {
        SITES.iter().fold(re(T::zero()), |acc, &a| acc + self.eiphase(self.pd(self.zm(a))))
    }

    /// Dangling integral `int dw2 exp(i P_d(w2)) sum_ab L~_ab(w2) e(a,b) G_a(w2) G_b(w2)`.
    fn dangling(&self) -> Result<Complex<T>> {
        let half = match self.table.options.contour {
            ContourRule::Retarded => HalfPlane::Lower,
            ContourRule::ChirpSign => {
                if self.table.pulse.phase.dominant_sign() > 0 {
                    HalfPlane::Upper
                } else {
                    HalfPlane::Lower
                }
            }
        };
        // every pole of G_a G_b is retarded
        if half == HalfPlane::Upper {
            return Ok(re(T::zero()));
        }
        match self.table.options.dangling {
            DanglingMethod::Residue => self.dangling_residue(),
            DanglingMethod::Quadrature => self.dangling_quadrature(),
        }
    }

    fn dangling_integrand(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.eiphase(self.pd(z)) * self.sum_lt_gg(z)?)
    }

    /// Lower closure: `-2 pi i sum Res`. For a pair with
    /// `G_a G_b = -1/((z - z_a)(z - z_b))` the residues add up to minus the
    /// divided difference of the smooth factor.
    fn dangling_residue(&self) -> Result<Complex<T>> {
        let mut acc = re(T::zero());
        for a in SITES {
            for b in SITES {
                let (za, zb) = (self.zm(a), self.zm(b));
                let f = |z: Complex<T>| -> Result<Complex<T>> {
                    Ok(self.eiphase(self.pd(z)) * self.c.coupling_l_tilde(a, b, z)? * self.e(a, b))
                };
                let width = self.table.system.atom(a).gamma + self.table.system.atom(b).gamma;
                let dd = if (za - zb).norm() <= T::lit(1e-7) * width {
                    let z = (za + zb) * T::lit(0.5);
                    let lt = self.c.coupling_l_tilde(a, b, z)?;
                    let dlt = self.c.coupling_l_tilde_derivative(a, b, z)?;
                    self.eiphase(self.pd(z)) * (i_unit::<T>() * self.pd_prime(z) * lt + dlt) * self.e(a, b)
                } else {
                    (f(za)? - f(zb)?) / (za - zb)
                };
                acc = acc + dd;
            }
        }
        Ok(acc * i_unit::<T>() * self.two_pi)
    }

    fn dangling_quadrature(&self) -> Result<Complex<T>> {
        let poles: Vec<Complex<T>> = SITES.iter().map(|&a| self.zm(a)).collect();
        let gmin = SITES.iter().map(|&a| self.table.system.atom(a).gamma).fold(T::infinity(), T::min);
        let settings = QuadSettings { rel_tol: self.table.options.quad_rel_tol, ..QuadSettings::default() };
        let q = closed_line_integral(
            |z| self.dangling_integrand(z),
            &poles,
            HalfPlane::Lower,
            gmin * T::lit(0.05),
            &settings,
        )?;
        Ok(q.value)
    }

    fn all(&self) -> Result<CoefficientSet<T>> {
        let (w, wp) = (self.w, self.wp);
        let two = T::lit(2.0);
        let tp = self.two_pi;
        let w1c = wp * two - w;
        let t = self.t();
        let gs_w = self.g.gs(w)?;
        let gs_wp = self.g.gs(wp)?;
        let gsd_wp = self.g.gsd(wp)?;
        let bracket = gsd_wp - gs_w;
        let ls_sum = self.c.coupling_ls(w + wp)?;
        let pd_poles = self.sum_pd_poles();
        let one = re(T::one());

        let dangling = self.dangling()?;
        let a1 = bracket * dangling - pd_poles * (self.sum_l_gg(w)? - self.sum_l_gdgd(wp)?) * tp;
        let a2 = bracket * pd_poles * ls_sum * tp;

        let mut a3 = [re(T::zero()); 2];
        let mut a4 = [[[re(T::zero()); 2]; 2]; 2];
        let mut a5 = [[[re(T::zero()); 2]; 2]; 2];
        for a in SITES {
            let ab = a.bar();
            let gbar_w = self.g.g(ab, w)?;
            let gbar_wp = self.g.g(ab, wp)?;
            let q = self.q(a);
            let r = self.r(a);
            a3[a.index()] = q * gbar_w * gbar_w * self.c.coupling_ls(w + self.zp(a))? * tp;
            for b in SITES {
                for d in SITES {
                    let m4 = self.c.coupling_m(b, d, w - wp + self.zp(a))?;
                    let m5 = self.c.coupling_m(b, d, wp - w + self.zm(a))?;
                    a4[a.index()][b.index()][d.index()] = q * gbar_w * m4 * self.e(b, d) * tp;
                    a5[a.index()][b.index()][d.index()] = r * gbar_wp * m5 * self.e(b, d) * tp;
                }
            }
        }

        let lt_gg_w = self.sum_lt_gg(w)?;
        let a6 = bracket * lt_gg_w + (gs_w + gs_wp) * (self.sum_l_gdgd(wp)? - one);
        let gs_c = self.g.gs(w1c)?;
        let gsd_c = self.g.gsd(w1c)?;
        let a7 = t * (gsd_c - gs_w) * lt_gg_w + t * gs_c * (self.sum_l_gdgd(w1c)? - one);
        let a8 = bracket * (gs_w + gs_wp) * ls_sum;
        let a9 = (gsd_c - gs_w) * gs_c * self.c.coupling_ls(wp * two)? * t;

        let mut b1 = re(T::zero());
        for a in SITES {
            let ph = self.eiphase(self.pd(self.zm(a)));
            for b in SITES {
                for d in SITES {
                    let db = d.bar();
                    let inner = self.g.g(b, w)? * self.g.g(db, wp)? + self.g.gd(b, wp)? * self.g.g(db, w)?;
                    b1 = b1 - ph * self.c.coupling_l(b, d, w)? * self.e(b, d) * inner * tp;
                }
            }
        }
        let mut b2 = re(T::zero());
        for a in SITES {
            let z = self.zm(a);
            b2 = b2 + self.c.coupling_l_tilde(a, a, z)? * self.eiphase(self.pd(z));
        }
        let b2 = bracket * b2 * tp;
        let (sa, sb) = (Site::A, Site::B);
        let za = self.zm(sa);
        let zb = self.zm(sb);
        let b3 = bracket * self.c.coupling_m_tilde(sb, sa, za)? * self.e(sb, sa) * self.eiphase(self.pd(za)) * tp;
        let b4 = bracket * self.c.coupling_m_tilde(sa, sb, zb)? * self.e(sa, sb) * self.eiphase(self.pd(zb)) * tp;

        let mut b5 = [[re(T::zero()); 2]; 2];
        let mut b6 = [[re(T::zero()); 2]; 2];
        let mut b7 = [[re(T::zero()); 2]; 2];
        for a in SITES {
            let ab = a.bar();
            let gbar_w = self.g.g(ab, w)?;
            let gbar_wp = self.g.g(ab, wp)?;
            let q = self.q(a);
            let qp = self.q_prime(a);
            let r = self.r(a);
            let xq = w - wp + self.zp(a);
            let xr = wp - w + self.zm(a);
            let tail5 = gbar_w
                * qp
                * (self.c.coupling_l(ab, ab, w)? * gbar_w + self.c.coupling_l(a, ab, w)? * self.g.g(a, w)?)
                * tp;
            for b in SITES {
                let bb = b.bar();
                let first =
                    (self.c.coupling_l_tilde(bb, bb, wp)? + self.c.coupling_m_tilde(b, b, xq)?) * self.g.g(bb, wp)?;
                let second = (self.c.coupling_l_tilde(bb, b, wp)?
                    + self.c.coupling_m_tilde(bb, b, xq)? * self.e(bb, b))
                    * self.g.g(b, wp)?;
                b5[a.index()][b.index()] = gbar_w * q * (first + second) * tp - tail5;

                let l6 = self.c.coupling_l(bb, bb, w)? * self.g.g(bb, w)?
                    + self.c.coupling_l(b, bb, w)? * self.e(b, bb) * self.g.g(b, w)?;
                b6[a.index()][b.index()] = -(gbar_wp * r * l6 * tp);

                let m7 = self.c.coupling_m(b, b, xr)? * self.g.g(bb, w)?
                    + self.c.coupling_m(b, bb, xr)? * self.e(b, bb) * self.g.g(b, w)?;
                b7[a.index()][b.index()] = -(gbar_wp * r * m7 * tp);
            }
        }

        let mut s1 = re(T::zero());
        let mut s2 = re(T::zero());
        for a in SITES {
            for b in SITES {
                let e = self.e(a, b);
                // the two-index propagator of the second term is read as G_abar
                s1 = s1
                    + (self.c.coupling_l_tilde(a, b, w)? * self.g.g(a, w)? * self.g.g(b.bar(), wp)?
                        + self.c.coupling_l_tilde(a, b, wp)? * self.g.g(a.bar(), w)? * self.g.g(b, wp)?)
                        * e;
                s2 = s2
                    + (self.c.coupling_l(a, b, w)? * self.g.g(a, w)? * self.g.g(b.bar(), wp)?
                        + self.c.coupling_l(a, b, wp)? * self.g.gd(a, wp)? * self.g.g(b.bar(), w)?)
                        * e;
            }
        }
        let b8 = bracket * s1 - (gs_wp + gs_w) * s2;

        let mut s1 = re(T::zero());
        let mut s2 = re(T::zero());
        for a in SITES {
            for b in SITES {
                let e = self.e(a, b);
                s1 = s1 + self.c.coupling_l_tilde(a, b, w)? * e * self.g.g(a.bar(), w1c)? * self.g.g(b, w)?;
                s2 = s2
                    + (self.c.coupling_l(a, b, w)? * self.g.g(a, w)? * self.g.g(b.bar(), w1c)?
                        + self.c.coupling_l(a, b, w1c)? * self.g.gd(a, w1c)? * self.g.g(b.bar(), w)?)
                        * e;
            }
        }
        let b9 = t * ((gsd_c - gs_w) * s1 - gs_c * s2);

        Ok(CoefficientSet { a1, a2, a3, a4, a5, a6, a7, a8, a9, b1, b2, b3, b4, b5, b6, b7, b8, b9, dangling })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TwoLevelAtom;
    use crate::phase::PhaseProfile;

    fn system(r_over_lambda: f64) -> PairSystem<f64> {
        PairSystem::new(
            TwoLevelAtom::new(13000.0, 200.0, 1.0),
            TwoLevelAtom::new(11000.0, 200.0, 0.99),
            r_over_lambda / 13000.0,
        )
    }

    fn table(sys: PairSystem<f64>, phase: PhaseProfile<f64>) -> CoefficientTable<f64> {
        CoefficientTable::new(sys, PulseConfig::new(4000.0, phase)).unwrap()
    }

    fn close(a: Complex<f64>, b: Complex<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn zero_coupling_leaves_only_background() {
        let sys = system(0.01).with_coupling_scale(0.0);
        let t = table(sys, PhaseProfile::chirp(5e-9, 12000.0));
        let s = t.evaluate(17000.0, 4000.0).unwrap();
        let zero = Complex::new(0.0, 0.0);
        for v in [s.a1, s.a2, s.a8, s.a9, s.b1, s.b2, s.b3, s.b4, s.b8, s.b9] {
            assert_eq!(v, zero);
        }
        assert!(s.a3.iter().all(|v| *v == zero));
        assert!(s.a4.iter().flatten().flatten().all(|v| *v == zero));
        assert!(s.a5.iter().flatten().flatten().all(|v| *v == zero));
        assert!(s.b5.iter().chain(s.b6.iter()).chain(s.b7.iter()).flatten().all(|v| *v == zero));
        assert!(s.a6.norm() > 0.0 && s.a7.norm() > 0.0);
    }

    #[test]
    fn a7_picks_up_twice_the_narrowband_phase() {
        let sys = system(0.01);
        let base = CoefficientTable::new(sys.clone(), PulseConfig::new(4000.0, PhaseProfile::delay_fs(33.0))).unwrap();
        let d = 0.37;
        let shifted =
            CoefficientTable::new(sys, PulseConfig::new(4000.0, PhaseProfile::delay_fs(33.0)).with_xi(d)).unwrap();
        for (w, wp) in [(17000.0, 4000.0), (9000.0, 5200.0)] {
            let a = base.evaluate(w, wp).unwrap();
            let b = shifted.evaluate(w, wp).unwrap();
            assert!(close(b.a7, a.a7 * Complex::from_polar(1.0, 2.0 * d), 1e-13));
            assert!(close(b.a9, a.a9 * Complex::from_polar(1.0, 2.0 * d), 1e-13));
            assert!(close(b.b9, a.b9 * Complex::from_polar(1.0, 2.0 * d), 1e-13));
            assert!(close(b.a1, a.a1 * Complex::from_polar(1.0, -d), 1e-13));
            assert!(close(b.a6, a.a6, 1e-15));
            assert!(close(b.b8, a.b8, 1e-15));
            assert!(close(b.a2, a.a2 * Complex::from_polar(1.0, -d), 1e-13));
            assert!(close(b.a3[0], a.a3[0] * Complex::from_polar(1.0, d), 1e-13));
            assert!(close(b.b6[1][0], a.b6[1][0] * Complex::from_polar(1.0, d), 1e-13));
        }
    }

    #[test]
    fn joint_shift_of_xi_and_c0_is_a_gauge() {
        // every printed exponent has as many +phi as -phi terms beyond the xi
        // terms, balanced so that C0 and xi enter with opposite signs
        let sys = system(0.01);
        let d = 0.81;
        let p0 = PhaseProfile::polynomial(12000.0, vec![0.2, 0.0, 5e-9]);
        let p1 = PhaseProfile::polynomial(12000.0, vec![0.2 + d, 0.0, 5e-9]);
        let t0 = CoefficientTable::new(sys.clone(), PulseConfig::new(4000.0, p0)).unwrap();
        let t1 = CoefficientTable::new(sys, PulseConfig::new(4000.0, p1).with_xi(d)).unwrap();
        let a = t0.evaluate(16500.0, 4100.0).unwrap().flat();
        let b = t1.evaluate(16500.0, 4100.0).unwrap().flat();
        assert_eq!(a.len(), 2 + 2 + 16 + 4 + 4 + 12 + 2);
        for (x, y) in a.iter().zip(&b) {
            assert!(close(*x, *y, 1e-12), "{x} {y}");
        }
    }

    #[test]
    fn b2_symmetric_collapse() {
        let mut sys = system(0.01);
        sys.atoms[1].omega = 13000.0;
        sys.atoms[1].mu_rel = 1.0;
        let phase = PhaseProfile::chirp(5e-9, 12000.0);
        let t = table(sys.clone(), phase.clone());
        let (w, wp) = (15000.0, 4000.0);
        let b2 = t.coeff_b(2, &[], w, wp).unwrap();
        let g = Propagators::new(&sys);
        let c = CouplingContext::unchecked(&sys);
        let z = cplx(13000.0, -200.0);
        let ph = |x: Complex<f64>| phase.eval(x);
        let pd = ph(re(w + wp) - z) + ph(z) - ph(re(w));
        let bracket = g.gsd(re(wp)).unwrap() - g.gs(re(w)).unwrap();
        let expect = bracket
            * c.coupling_l_tilde(Site::A, Site::A, z).unwrap()
            * (Complex::<f64>::i() * pd).exp()
            * 2.0
            * std::f64::consts::TAU;
        assert!(close(b2, expect, 1e-13));
    }

    #[test]
    fn b3_grows_as_inverse_distance() {
        let (w, wp) = (18000.0, 4000.0);
        let mut prev: Option<f64> = None;
        for r in [1e-4, 1e-3, 1e-2] {
            let t = table(system(r), PhaseProfile::zero());
            let b3 = t.coeff_b(3, &[], w, wp).unwrap().norm();
            if let Some(p) = prev {
                let ratio = p / b3;
                assert!((ratio - 10.0).abs() < 0.05, "ratio {ratio}");
            }
            prev = Some(b3);
        }
    }

    #[test]
    fn residue_and_quadrature_agree_on_dangling_integral() {
        for phase in [
            PhaseProfile::chirp(5e-9, 12000.0),
            PhaseProfile::chirp(-5e-9, 12000.0),
            PhaseProfile::delay_fs(33.0),
            PhaseProfile::constant(std::f64::consts::FRAC_PI_2),
        ] {
            let a = table(system(0.01), phase.clone());
            let b = table(system(0.01), phase)
                .options(CoefficientOptions { dangling: DanglingMethod::Quadrature, ..Default::default() });
            for (w, wp) in [(20000.0, 4000.0), (9000.0, 12000.0), (2600.0, 14000.0)] {
                let x = a.evaluate(w, wp).unwrap().dangling;
                let y = b.evaluate(w, wp).unwrap().dangling;
                assert!(close(x, y, 1e-6), "{x} {y}");
            }
        }
    }

    #[test]
    fn dangling_residue_handles_identical_atoms() {
        let mut sys = system(0.01);
        sys.atoms[1] = sys.atoms[0].clone().at([0.01 / 13000.0, 0.0, 0.0]);
        let phase = PhaseProfile::chirp(5e-9, 12000.0);
        let a = table(sys.clone(), phase.clone());
        let b = table(sys, phase)
            .options(CoefficientOptions { dangling: DanglingMethod::Quadrature, ..Default::default() });
        let x = a.evaluate(13500.0, 12500.0).unwrap().dangling;
        let y = b.evaluate(13500.0, 12500.0).unwrap().dangling;
        assert!(close(x, y, 1e-7), "{x} {y}");
    }

    #[test]
    fn chirp_sign_rule_closes_above_for_positive_chirp() {
        let opts = CoefficientOptions { contour: ContourRule::ChirpSign, ..Default::default() };
        let up = table(system(0.01), PhaseProfile::chirp(5e-9, 12000.0)).options(opts);
        assert_eq!(up.evaluate(20000.0, 4000.0).unwrap().dangling, Complex::new(0.0, 0.0));
        let down = table(system(0.01), PhaseProfile::chirp(-5e-9, 12000.0)).options(opts);
        assert!(down.evaluate(20000.0, 4000.0).unwrap().dangling.norm() > 0.0);
    }

    #[test]
    fn linewidth_doubling_halves_resonant_peak() {
        // B6(b, .) carries G_a(w_p); at w_p = w_a and far-detuned w the other
        // factors barely depend on the widths
        let sys = system(0.01).with_coupling_scale(1e-10);
        let mut wide = sys.clone();
        wide.atoms[0].gamma = 400.0;
        wide.atoms[1].gamma = 400.0;
        let (w, wp) = (25000.0, 13000.0);
        for b in [Site::A, Site::B] {
            let x = table(sys.clone(), PhaseProfile::zero()).coeff_b(6, &[Site::B, b], w, wp).unwrap().norm();
            let y = table(wide.clone(), PhaseProfile::zero()).coeff_b(6, &[Site::B, b], w, wp).unwrap().norm();
            assert!((x / y - 2.0).abs() < 0.02, "{}", x / y);
        }
    }

    #[test]
    fn cache_returns_identical_values() {
        let t = table(system(0.01), PhaseProfile::chirp(5e-9, 12000.0));
        let a = t.evaluate(17000.0, 4000.0).unwrap();
        assert_eq!(t.cached_points(), 1);
        let b = t.evaluate(17000.0, 4000.0).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let fresh = table(system(0.01), PhaseProfile::chirp(5e-9, 12000.0))
            .options(CoefficientOptions { cache_capacity: 0, ..Default::default() });
        assert_eq!(*fresh.evaluate(17000.0, 4000.0).unwrap(), *a);
        assert_eq!(fresh.cached_points(), 0);
    }

    #[test]
    fn index_arity_is_checked() {
        let t = table(system(0.01), PhaseProfile::zero());
        assert!(t.coeff_a(3, &[], 1.0e4, 4.0e3).is_err());
        assert!(t.coeff_a(4, &[Site::A, Site::B, Site::A], 1.0e4, 4.0e3).is_ok());
        assert!(t.coeff_b(5, &[Site::A], 1.0e4, 4.0e3).is_err());
        assert!(t.coeff_a(10, &[], 1.0e4, 4.0e3).is_err());
    }
}
