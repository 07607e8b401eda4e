//! Brute-force evaluator of the signal built directly from the frequency-domain
//! susceptibilities and the shaped-field correlation, with every remaining
//! frequency integral done by adaptive contour quadrature.
//!
//! The susceptibility `chi(w, w1, w2)` has an effective-coupling part made of
//! four terms (`j = 1, 2, 3, 7`) and a vacuum-field part of three terms
//! (`j = 1, 2, 6`) whose ground-state line is collapsed to a delta function.
//! The shaped field selects six branches of `(w1, w2)`:
//!
//! | branch | `w1`            | `w2`             | weight        | group      |
//! |--------|-----------------|------------------|---------------|------------|
//! | a      | `w_p`           | `w`              | 1             | `E2^2E1^2` |
//! | b      | `w_p`           | `w_p`            | 1             | `E2^2E1^2` |
//! | c      | `2w_p - w`      | `w`              | `T`           | `E2^2E1^2` |
//! | d      | `w_p`           | `v` (integrated) | `exp(i P_d)`  | `E2^3E1`   |
//! | e      | `v`             | `w_p`            | `exp(i P_e)`  | `E2^3E1`   |
//! | f      | `v`             | `w + v - w_p`    | `exp(i P_e)`  | `E2^3E1`   |
//!
//! Integrals over `v` are closed in a fixed half-plane per term and evaluated
//! numerically on small loops around the enclosed poles.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSet, CoefficientTable};
use crate::couplings::CouplingContext;
use crate::error::{Error, Result};
use crate::model::{PairSystem, PulseConfig, Site};
use crate::propagators::Propagators;
use crate::quad::{integrate, HalfPlane, Path, PoleLoops, QuadSettings};
use crate::scalar::{cplx, i_unit, re, Real};
use crate::signal::{Include, SignalModel, SignalRequest};

const SITES: [Site; 2] = Site::ALL;

/// Susceptibility terms of the effective-coupling part.
pub const CHI_I_TERMS: [usize; 4] = [1, 2, 3, 7];
/// Susceptibility terms of the vacuum-field part.
pub const CHI_II_TERMS: [usize; 3] = [1, 2, 6];

/// Quadrature controls of the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Smallest distance kept between a contour and a pole, cm^-1;
    /// `None` means a tenth of the narrowest line width.
    pub contour_offset: Option<f64>,
    /// Real-axis bounds `(lo, hi)` for real-line integrals, cm^-1; `None`
    /// derives them from the pole positions.
    pub window: Option<(f64, f64)>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 0.0, rel_tol: 1e-10, max_subdivisions: 4000, contour_offset: None, window: None }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 || self.abs_tol > 0.0) || self.rel_tol < 0.0 || self.abs_tol < 0.0 {
            return Err(Error::Config("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be at least 1".into()));
        }
        if let Some(c) = self.contour_offset {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config("contour_offset must be positive".into()));
            }
        }
        if let Some((lo, hi)) = self.window {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config("integration window must be a finite, increasing interval".into()));
            }
        }
        Ok(())
    }

    fn settings(&self) -> QuadSettings {
        QuadSettings { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_subdivisions: self.max_subdivisions }
    }
}

/// Value with an accumulated error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: Complex<T>,
    pub error: f64,
}

impl<T: Real> Estimate<T> {
    fn exact(value: Complex<T>) -> Self {
        Self { value, error: 0.0 }
    }

    fn add(self, o: Self) -> Self {
        Self { value: self.value + o.value, error: self.error + o.error }
    }
}

/// Bracketed sums of one signal part, as produced by the oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleBrackets<T> {
    pub e2_cubed: Estimate<T>,
    pub e2_squared: Estimate<T>,
}

/// Brute-force signal at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSignal<T> {
    pub omega: T,
    pub omega_p: T,
    pub s_i: T,
    pub s_ii: T,
    pub total: T,
    /// Bound on the quadrature error of `total`.
    pub error_estimate: f64,
}

/// Part of the signal a term belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    SI,
    SII,
}

/// Field branch of the correlation function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Branch {
    pub const ALL: [Branch; 6] = [Branch::A, Branch::B, Branch::C, Branch::D, Branch::E, Branch::F];

    pub fn is_integrated(self) -> bool {
        matches!(self, Branch::D | Branch::E | Branch::F)
    }
}

/// Closed-form terms grouped so that each group has a direct oracle
/// counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermGroup {
    /// `G+ A1 + G+^2 A2` against branch d of the effective-coupling part.
    A1A2,
    /// `A3`, `A4`, `A5` terms against branches e and f.
    A3A5,
    /// `G+ A6 + G+(2w_p) A7` against branches a, b, c without term 3.
    A6A7,
    /// `G+^2 A8` against term 3 in branches a and b.
    A8,
    /// `G+(2w_p)^2 A9` against term 3 in branch c.
    A9,
    /// `B1..B4` terms against branch d of the vacuum-field part.
    B1B4,
    /// `B5..B7` terms against branches e and f.
    B5B7,
    /// `B8`, `B9` terms against branches a, b, c.
    B8B9,
}

impl TermGroup {
    pub const ALL: [TermGroup; 8] = [
        TermGroup::A1A2,
        TermGroup::A3A5,
        TermGroup::A6A7,
        TermGroup::A8,
        TermGroup::A9,
        TermGroup::B1B4,
        TermGroup::B5B7,
        TermGroup::B8B9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TermGroup::A1A2 => "a1_a2",
            TermGroup::A3A5 => "a3_a5",
            TermGroup::A6A7 => "a6_a7",
            TermGroup::A8 => "a8",
            TermGroup::A9 => "a9",
            TermGroup::B1B4 => "b1_b4",
            TermGroup::B5B7 => "b5_b7",
            TermGroup::B8B9 => "b8_b9",
        }
    }
}

/// Closed-form and oracle value of one term group at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupComparison<T> {
    pub group: TermGroup,
    pub closed_form: Complex<T>,
    pub quadrature: Estimate<T>,
}

impl<T: Real> GroupComparison<T> {
    pub fn abs_diff(&self) -> T {
        (self.closed_form - self.quadrature.value).norm()
    }
}

/// One row of a closed-form versus quadrature report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub omega: f64,
    pub omega_p: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub est_error: f64,
}

/// Brute-force evaluator for one system and pulse.
#[derive(Clone, Debug)]
pub struct Oracle<T> {
    system: PairSystem<T>,
    pulse: PulseConfig<T>,
    spec: QuadratureSpec,
}

/// Terms of one susceptibility part that are integrated together.
#[derive(Clone, Copy)]
struct TermSet<'a> {
    part: Part,
    terms: &'a [usize],
}

impl<T: Real> Oracle<T> {
    pub fn new(system: PairSystem<T>, pulse: PulseConfig<T>, spec: QuadratureSpec) -> Result<Self> {
        system.validate()?;
        pulse.validate()?;
        spec.validate()?;
        Ok(Self { system, pulse, spec })
    }

    pub fn system(&self) -> &PairSystem<T> {
        &self.system
    }

    pub fn pulse(&self) -> &PulseConfig<T> {
        &self.pulse
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    fn g(&self) -> Propagators<'_, T> {
        Propagators::new(&self.system)
    }

    fn c(&self) -> CouplingContext<'_, T> {
        CouplingContext::unchecked(&self.system)
    }

    fn e(&self, a: Site, b: Site) -> Complex<T> {
        self.system.geometry_phase(a, b)
    }

    fn phi(&self, z: Complex<T>) -> Complex<T> {
        self.pulse.phase.eval(z)
    }

    fn eiphase(x: Complex<T>) -> Complex<T> {
        (i_unit::<T>() * x).exp()
    }

    fn gmin(&self) -> T {
        SITES.iter().map(|&s| self.system.atom(s).gamma).fold(T::infinity(), T::min)
    }

    fn gmax(&self) -> T {
        SITES.iter().map(|&s| self.system.atom(s).gamma).fold(T::zero(), T::max)
    }

    fn offset(&self) -> T {
        self.spec.contour_offset.map(T::lit).unwrap_or(self.gmin() / T::lit(10.0))
    }

    fn zm(&self, a: Site) -> Complex<T> {
        let at = self.system.atom(a);
        cplx(at.omega, -at.gamma)
    }

    fn zp(&self, a: Site) -> Complex<T> {
        self.zm(a).conj()
    }

    /// Effective-coupling susceptibility term `j` in `{1, 2, 3, 7}`.
    pub fn chi3i_term(&self, j: usize, w: Complex<T>, w1: Complex<T>, w2: Complex<T>) -> Result<Complex<T>> {
        let g = self.g();
        let c = self.c();
        let gp = g.tpa(Site::A, Site::B, w + w1)?;
        let mut sum = re(T::zero());
        Ok(match j {
            1 => {
                for a in SITES {
                    for b in SITES {
                        sum = sum + c.coupling_l_tilde(a, b, w2)? * self.e(a, b) * g.g(a, w2)? * g.g(b, w2)?;
                    }
                }
                gp * (g.gsd(w1)? - g.gs(w)?) * sum
            }
            3 => gp * gp * (g.gsd(w1)? - g.gs(w)?) * c.coupling_ls(w + w1)? * g.gs(w + w1 - w2)?,
            2 => {
                for a in SITES {
                    for b in SITES {
                        sum = sum + c.coupling_l(a, b, w)? * self.e(a, b) * g.g(a, w)? * g.g(b, w)?;
                    }
                }
                -(gp * g.gs(w + w1 - w2)? * sum)
            }
            7 => {
                for a in SITES {
                    for b in SITES {
                        sum = sum + c.coupling_l(a, b, w1)? * self.e(a, b) * g.gd(a, w1)? * g.gd(b, w1)?;
                    }
                }
                gp * g.gs(w + w1 - w2)? * sum
            }
            _ => return Err(Error::Domain(format!("no effective-coupling term {j}"))),
        })
    }

    /// Orientation-averaged `mu_a mu_b D_ab(w)`, normalised so that the
    /// delta-collapsed frequency integral reproduces `L_ab`.
    pub fn field_tensor(&self, a: Site, b: Site, w: Complex<T>) -> Result<Complex<T>> {
        Ok(self.c().coupling_l(a, b, w)? * T::TAU())
    }

    /// Argument `x` of the ground-state line `G_g(x - w')` in vacuum-field term `j`.
    pub fn ground_argument(&self, j: usize, w: Complex<T>, w1: Complex<T>, w2: Complex<T>) -> Result<Complex<T>> {
        match j {
            1 => Ok(w2),
            2 => Ok(w),
            6 => Ok(w1),
            _ => Err(Error::Domain(format!("no vacuum-field term {j}"))),
        }
    }

    /// Vacuum-field term `j` in `{1, 2, 6}` with the ground-state line
    /// removed: the integrand `F(w')` of `int dw'/(2 pi) G_g(x - w') F(w')`.
    pub fn chi5ii_kernel(
        &self,
        j: usize,
        w: Complex<T>,
        w1: Complex<T>,
        wq: Complex<T>,
        w2: Complex<T>,
    ) -> Result<Complex<T>> {
        let g = self.g();
        let c = self.c();
        let gp = g.tpa(Site::A, Site::B, w + w1)?;
        let mut sum = re(T::zero());
        Ok(match j {
            1 => {
                for a in SITES {
                    for b in SITES {
                        sum = sum + self.e(a, b) * self.field_tensor(b, a, wq)? * g.g(a, w2)? * g.g(b, w + w1 - wq)?;
                    }
                }
                gp * (g.gsd(w1)? - g.gs(w)?) * sum
            }
            2 => {
                for a in SITES {
                    for b in SITES {
                        sum = sum
                            + self.e(a, b)
                                * self.field_tensor(a, b, wq)?
                                * c.coupling_l(a, b, w)?
                                * g.g(a, w)?
                                * g.g(b, w + w1 - wq)?;
                    }
                }
                -(gp * g.gs(w + w1 - w2)? * sum)
            }
            6 => {
                for a in SITES {
                    for b in SITES {
                        sum = sum + self.e(a, b) * self.field_tensor(a, b, wq)? * g.gd(a, w1)? * g.g(b, w + w1 - wq)?;
                    }
                }
                -(gp * g.gs(w2)? * sum)
            }
            _ => return Err(Error::Domain(format!("no vacuum-field term {j}"))),
        })
    }

    /// Vacuum-field term `j` with `G_g` collapsed to a delta function.
    pub fn chi5ii_term(&self, j: usize, w: Complex<T>, w1: Complex<T>, w2: Complex<T>) -> Result<Complex<T>> {
        let x = self.ground_argument(j, w, w1, w2)?;
        Ok(self.chi5ii_kernel(j, w, w1, x, w2)? / T::TAU())
    }

    /// Vacuum-field term `j` with `G_g` replaced by a normalised Lorentzian
    /// of half width `gamma_g`, integrated along the real `w'` axis over the
    /// spec window. Tends to [`Oracle::chi5ii_term`] as `gamma_g -> 0`.
    pub fn chi5ii_lorentzian(&self, j: usize, w: T, w1: T, w2: T, gamma_g: T) -> Result<Estimate<T>> {
        let (w, w1, w2) = (re(w), re(w1), re(w2));
        let x = self.ground_argument(j, w, w1, w2)?.re;
        let (lo, hi) = self.window_around(&[x, w.re, w1.re, w2.re]);
        let f = |wq: Complex<T>| -> Result<Complex<T>> {
            let u = x - wq.re;
            let kernel = gamma_g / (T::PI() * (u * u + gamma_g * gamma_g));
            Ok(self.chi5ii_kernel(j, w, w1, wq, w2)? / T::TAU() * kernel)
        };
        let s = gamma_g * T::lit(40.0);
        let mut cuts = vec![lo, x - s, x + s, hi];
        cuts.retain(|&v| v >= lo && v <= hi);
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cut"));
        let settings = self.spec.settings();
        let mut out = Estimate::exact(re(T::zero()));
        for k in cuts.windows(2) {
            if k[1] > k[0] {
                let q = integrate(&Path::Segment { from: re(k[0]), to: re(k[1]) }, f, &settings)?;
                out = out.add(Estimate { value: q.value, error: q.error });
            }
        }
        Ok(out)
    }

    /// Real-axis window: the spec window, or every relevant frequency and
    /// pole padded by `50 gamma`.
    fn window_around(&self, extra: &[T]) -> (T, T) {
        if let Some((lo, hi)) = self.spec.window {
            return (T::lit(lo), T::lit(hi));
        }
        let pad = self.gmax() * T::lit(50.0);
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for &v in extra.iter().chain(SITES.iter().map(|&s| &self.system.atom(s).omega)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo - pad, hi + pad)
    }

    fn term(&self, part: Part, j: usize, w: Complex<T>, w1: Complex<T>, w2: Complex<T>) -> Result<Complex<T>> {
        match part {
            Part::SI => self.chi3i_term(j, w, w1, w2),
            Part::SII => self.chi5ii_term(j, w, w1, w2),
        }
    }

    fn sum_terms(&self, set: TermSet, w: Complex<T>, w1: Complex<T>, w2: Complex<T>) -> Result<Complex<T>> {
        let mut acc = re(T::zero());
        for &j in set.terms {
            acc = acc + self.term(set.part, j, w, w1, w2)?;
        }
        Ok(acc)
    }

    /// `exp i[phi(w + w_p - v) + phi(v) - phi(w) - xi]`
    fn weight_d(&self, w: Complex<T>, wp: Complex<T>, v: Complex<T>) -> Complex<T> {
        Self::eiphase(self.phi(w + wp - v) + self.phi(v) - self.phi(w) - self.pulse.xi)
    }

    /// `exp i[phi(w + v - w_p) + xi - phi(w) - phi(v)]`
    fn weight_e(&self, w: Complex<T>, wp: Complex<T>, v: Complex<T>) -> Complex<T> {
        Self::eiphase(self.phi(w + v - wp) + self.pulse.xi - self.phi(w) - self.phi(v))
    }

    /// `exp i[2 xi - phi(w) - phi(2 w_p - w)]`
    fn weight_c(&self, w: Complex<T>, wp: Complex<T>) -> Complex<T> {
        let two = T::lit(2.0);
        Self::eiphase(re(two * self.pulse.xi) - self.phi(w) - self.phi(wp * two - w))
    }

    /// Sum of loop integrals, oriented for closure in `half`.
    fn closed<F>(&self, f: F, inside: &[Complex<T>], outside: &[Complex<T>], half: HalfPlane) -> Result<Estimate<T>>
    where
        F: FnMut(Complex<T>) -> Result<Complex<T>>,
    {
        for z in inside {
            if !half.contains(*z) {
                return Err(Error::Domain(format!("pole {z} is not in the {half:?} half-plane")));
            }
        }
        let re_parts: Vec<T> = inside.iter().map(|z| z.re).collect();
        let (lo, hi) = self.window_around(&re_parts);
        for z in inside {
            if z.re < lo || z.re > hi {
                return Err(Error::Config(format!("pole {z} lies outside the integration window")));
            }
        }
        let loops = PoleLoops::new(inside, outside, self.offset())?;
        let q = loops.integrate(f, &self.spec.settings())?;
        Ok(Estimate { value: q.value * half.orientation::<T>(), error: q.error })
    }

    /// Value of one branch for a set of terms that share a closure.
    fn branch_terms(&self, set: TermSet, branch: Branch, omega: T, omega_p: T, half: HalfPlane) -> Result<Estimate<T>> {
        let (w, wp) = (re(omega), re(omega_p));
        let two = T::lit(2.0);
        match branch {
            Branch::A => Ok(Estimate::exact(self.sum_terms(set, w, wp, w)?)),
            Branch::B => Ok(Estimate::exact(self.sum_terms(set, w, wp, wp)?)),
            Branch::C => {
                let w1 = wp * two - w;
                Ok(Estimate::exact(self.sum_terms(set, w, w1, w)? * self.weight_c(w, wp)))
            }
            Branch::D => {
                // retarded poles of G(v) at z-, advanced-looking poles of G(w + w_p - v)
                let lower: Vec<_> = SITES.iter().map(|&a| self.zm(a)).collect();
                let upper: Vec<_> = SITES.iter().map(|&a| w + wp - self.zm(a)).collect();
                let (inside, outside) = split(half, &lower, &upper);
                self.closed(|v| Ok(self.sum_terms(set, w, wp, v)? * self.weight_d(w, wp, v)), &inside, &outside, half)
            }
            Branch::E | Branch::F => {
                let upper: Vec<_> = SITES.iter().map(|&a| self.zp(a)).collect();
                let mut lower: Vec<_> = SITES.iter().map(|&a| wp - w + self.zm(a)).collect();
                lower.extend(SITES.iter().map(|&a| self.zm(a)));
                lower.push(
                    re(self.system.atom(Site::A).omega + self.system.atom(Site::B).omega)
                        - w
                        - cplx(T::zero(), self.system.atom(Site::A).gamma + self.system.atom(Site::B).gamma),
                );
                let (inside, outside) = split(half, &lower, &upper);
                let f = |v: Complex<T>| -> Result<Complex<T>> {
                    let w2 = if branch == Branch::E { wp } else { w + v - wp };
                    Ok(self.sum_terms(set, w, v, w2)? * self.weight_e(w, wp, v))
                };
                self.closed(f, &inside, &outside, half)
            }
        }
    }

    /// Half-plane each term's dangling integral is closed in.
    fn closures(part: Part, branch: Branch) -> Vec<(TermSet<'static>, HalfPlane)> {
        match (part, branch) {
            (Part::SI, Branch::D) => vec![
                (TermSet { part, terms: &[1] }, HalfPlane::Lower),
                (TermSet { part, terms: &[2, 3, 7] }, HalfPlane::Upper),
            ],
            (Part::SII, Branch::D) => vec![
                (TermSet { part, terms: &[1, 6] }, HalfPlane::Lower),
                (TermSet { part, terms: &[2] }, HalfPlane::Upper),
            ],
            (Part::SI, _) => vec![(TermSet { part, terms: &CHI_I_TERMS }, HalfPlane::Upper)],
            (Part::SII, _) => vec![(TermSet { part, terms: &CHI_II_TERMS }, HalfPlane::Upper)],
        }
    }

    /// One branch of one part, every term included.
    pub fn branch(&self, part: Part, branch: Branch, omega: T, omega_p: T) -> Result<Estimate<T>> {
        let mut out = Estimate::exact(re(T::zero()));
        for (set, half) in Self::closures(part, branch) {
            out = out.add(self.branch_terms(set, branch, omega, omega_p, half)?);
        }
        Ok(out)
    }

    /// One branch restricted to the terms in `terms`.
    pub fn branch_subset(
        &self,
        part: Part,
        branch: Branch,
        terms: &[usize],
        omega: T,
        omega_p: T,
    ) -> Result<Estimate<T>> {
        let mut out = Estimate::exact(re(T::zero()));
        for (set, half) in Self::closures(part, branch) {
            let keep: Vec<usize> = set.terms.iter().copied().filter(|j| terms.contains(j)).collect();
            if keep.is_empty() {
                continue;
            }
            out = out.add(self.branch_terms(TermSet { part, terms: &keep }, branch, omega, omega_p, half)?);
        }
        Ok(out)
    }

    /// `X3`, `X2` of one part.
    pub fn brackets(&self, part: Part, omega: T, omega_p: T) -> Result<OracleBrackets<T>> {
        let mut cubed = Estimate::exact(re(T::zero()));
        for b in [Branch::D, Branch::E, Branch::F] {
            cubed = cubed.add(self.branch(part, b, omega, omega_p)?);
        }
        let mut squared = Estimate::exact(re(T::zero()));
        for b in [Branch::A, Branch::B, Branch::C] {
            squared = squared.add(self.branch(part, b, omega, omega_p)?);
        }
        Ok(OracleBrackets { e2_cubed: cubed, e2_squared: squared })
    }

    fn combine(&self, b: &OracleBrackets<T>) -> (T, f64) {
        let (e1, e2) = (self.pulse.amp_narrow, self.pulse.amp_broad);
        let k3 = e2 * e2 * e2 * e1;
        let k2 = e2 * e2 * e1 * e1;
        let x = b.e2_cubed.value * k3 + b.e2_squared.value * k2;
        let scale = self.system.scale();
        let err =
            scale.abs().as_f64() * (b.e2_cubed.error * k3.abs().as_f64() + b.e2_squared.error * k2.abs().as_f64());
        // Im(i * scale * x)
        (scale * x.re, err)
    }

    /// `S_I`, `S_II` and their sum at `(w, w_p)`.
    pub fn signal(&self, omega: T, omega_p: T) -> Result<QuadSignal<T>> {
        let (s_i, e_i) = self.combine(&self.brackets(Part::SI, omega, omega_p)?);
        let (s_ii, e_ii) = self.combine(&self.brackets(Part::SII, omega, omega_p)?);
        Ok(QuadSignal { omega, omega_p, s_i, s_ii, total: s_i + s_ii, error_estimate: e_i + e_ii })
    }

    /// Oracle value of one closed-form term group.
    pub fn group(&self, group: TermGroup, omega: T, omega_p: T) -> Result<Estimate<T>> {
        let mut out = Estimate::exact(re(T::zero()));
        let mut add = |part: Part, branches: &[Branch], terms: &[usize]| -> Result<()> {
            for &b in branches {
                out = out.add(self.branch_subset(part, b, terms, omega, omega_p)?);
            }
            Ok(())
        };
        let (abc, ef) = ([Branch::A, Branch::B, Branch::C], [Branch::E, Branch::F]);
        match group {
            TermGroup::A1A2 => add(Part::SI, &[Branch::D], &CHI_I_TERMS)?,
            TermGroup::A3A5 => add(Part::SI, &ef, &CHI_I_TERMS)?,
            TermGroup::A6A7 => add(Part::SI, &abc, &[1, 2, 7])?,
            TermGroup::A8 => add(Part::SI, &[Branch::A, Branch::B], &[3])?,
            TermGroup::A9 => add(Part::SI, &[Branch::C], &[3])?,
            TermGroup::B1B4 => add(Part::SII, &[Branch::D], &CHI_II_TERMS)?,
            TermGroup::B5B7 => add(Part::SII, &ef, &CHI_II_TERMS)?,
            TermGroup::B8B9 => add(Part::SII, &abc, &CHI_II_TERMS)?,
        }
        Ok(out)
    }

    /// Closed-form value of one term group.
    pub fn closed_group(
        &self,
        table: &CoefficientTable<T>,
        group: TermGroup,
        omega: T,
        omega_p: T,
    ) -> Result<Complex<T>> {
        let set = table.evaluate(omega, omega_p)?;
        let c: &CoefficientSet<T> = &set;
        let g = self.g();
        let (w, wp) = (re(omega), re(omega_p));
        let (sa, sb) = (Site::A, Site::B);
        let gp = g.tpa(sa, sb, w + wp)?;
        let gp2 = g.tpa(sa, sb, wp * T::lit(2.0))?;
        Ok(match group {
            TermGroup::A1A2 => gp * c.a1 + gp * gp * c.a2,
            TermGroup::A3A5 => {
                let mut x = re(T::zero());
                for a in SITES {
                    let i = a.index();
                    for b in SITES {
                        let gm = g.raman(b, a, w - wp)?;
                        let gmd = g.raman_dag(b, a, wp - w)?;
                        x = x + gm * c.a3[i];
                        for d in SITES {
                            x = x
                                + gm * g.raman(d, a, w - wp)? * c.a4[i][b.index()][d.index()]
                                + gmd * g.raman_dag(d, a, wp - w)? * c.a5[i][b.index()][d.index()];
                        }
                    }
                }
                x
            }
            TermGroup::A6A7 => gp * c.a6 + gp2 * c.a7,
            TermGroup::A8 => gp * gp * c.a8,
            TermGroup::A9 => gp2 * gp2 * c.a9,
            TermGroup::B1B4 => {
                gp * c.b1 + gp * (gp * c.b2 + g.tpa(sa, sa, w + wp)? * c.b3 + g.tpa(sb, sb, w + wp)? * c.b4)
            }
            TermGroup::B5B7 => {
                let mut x = re(T::zero());
                for a in SITES {
                    for b in SITES {
                        let (i, j) = (a.index(), b.index());
                        x = x
                            + g.raman(b, a, w - wp)? * c.b5[i][j]
                            + g.raman(b, a, wp - w)? * c.b6[i][j]
                            + g.raman_dag(b, a, wp - w)? * c.b7[i][j];
                    }
                }
                x
            }
            TermGroup::B8B9 => gp * c.b8 + gp2 * c.b9,
        })
    }

    /// Every term group at one point, closed form next to oracle.
    pub fn compare_groups(&self, table: &CoefficientTable<T>, omega: T, omega_p: T) -> Result<Vec<GroupComparison<T>>> {
        TermGroup::ALL
            .iter()
            .map(|&group| {
                Ok(GroupComparison {
                    group,
                    closed_form: self.closed_group(table, group, omega, omega_p)?,
                    quadrature: self.group(group, omega, omega_p)?,
                })
            })
            .collect()
    }
}

fn split<T: Real>(half: HalfPlane, lower: &[Complex<T>], upper: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    match half {
        HalfPlane::Lower => (lower.to_vec(), upper.to_vec()),
        HalfPlane::Upper => (upper.to_vec(), lower.to_vec()),
    }
}

/// Brute-force signal for a request; `include` selects which parts enter
/// `total`.
pub fn quad_signal<T: Real>(req: &SignalRequest<T>, spec: &QuadratureSpec) -> Result<QuadSignal<T>> {
    let oracle = Oracle::new(req.system.clone(), req.pulse.clone(), *spec)?;
    let mut s = oracle.signal(req.omega, req.pulse.omega_p)?;
    match req.include {
        Include::SI => s.s_ii = T::zero(),
        Include::SII => s.s_i = T::zero(),
        Include::Both => {}
    }
    s.total = s.s_i + s.s_ii;
    Ok(s)
}

/// Frequencies, in `w` at fixed `w_p`, where some propagator of the signal
/// has the real part of its pole.
pub fn pole_lines<T: Real>(system: &PairSystem<T>, omega_p: T) -> Vec<T> {
    let two = T::lit(2.0);
    let (wa, wb) = (system.atom(Site::A).omega, system.atom(Site::B).omega);
    let mut v = vec![wa, wb, wa + wb - omega_p];
    for (x, y) in [(wa, wa), (wb, wb), (wa, wb), (wb, wa)] {
        v.push(omega_p + x - y);
        v.push(x + y - omega_p);
    }
    for x in [wa, wb] {
        v.push(omega_p * two - x);
    }
    v
}

/// Frequencies in `w_p` alone that put a propagator on its pole.
pub fn pump_pole_lines<T: Real>(system: &PairSystem<T>) -> Vec<T> {
    let (wa, wb) = (system.atom(Site::A).omega, system.atom(Site::B).omega);
    vec![wa, wb, (wa + wb) * T::lit(0.5)]
}

/// `n` reproducible points in the box `omega x omega_p`, each at least
/// `clearance` from every pole line.
pub fn comparison_points<T: Real>(
    system: &PairSystem<T>,
    n: usize,
    omega: (f64, f64),
    omega_p: (f64, f64),
    clearance: f64,
    seed: u64,
) -> Result<Vec<(T, T)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    let clear = T::lit(clearance);
    while out.len() < n {
        tries += 1;
        if tries > 1000 * n.max(1) {
            return Err(Error::Config("no pole-free comparison points in the requested box".into()));
        }
        let w = T::lit(rng.random_range(omega.0..omega.1));
        let wp = T::lit(rng.random_range(omega_p.0..omega_p.1));
        let near = pole_lines(system, wp).into_iter().any(|x| (w - x).abs() < clear)
            || pump_pole_lines(system).into_iter().any(|x| (wp - x).abs() < clear);
        if !near {
            out.push((w, wp));
        }
    }
    Ok(out)
}

/// Closed form against quadrature at every point; one row per point for
/// the selected part.
pub fn compare_signal<T: Real>(
    model: &SignalModel<T>,
    spec: &QuadratureSpec,
    points: &[(T, T)],
    include: Include,
) -> Result<Vec<ReportRow>> {
    use rayon::prelude::*;
    let oracle = Oracle::new(model.system().clone(), model.pulse().clone(), *spec)?;
    let mut rows = points
        .par_iter()
        .map(|&(w, wp)| {
            let s = model.sample_at(w, wp)?;
            let q = oracle.signal(w, wp)?;
            let (closed, quad) = match include {
                Include::SI => (s.s_i, q.s_i),
                Include::SII => (s.s_ii, q.s_ii),
                Include::Both => (s.s_total, q.total),
            };
            let (closed_form, quadrature) = (closed.as_f64(), quad.as_f64());
            let abs_diff = (closed_form - quadrature).abs();
            Ok(ReportRow {
                omega: w.as_f64(),
                omega_p: wp.as_f64(),
                closed_form,
                quadrature,
                abs_diff,
                rel_diff: abs_diff,
                est_error: q.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = rows.iter().map(|r| r.closed_form.abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        for r in &mut rows {
            r.rel_diff = r.abs_diff / scale;
        }
    }
    Ok(rows)
}

/// Largest `rel_diff` of a report.
pub fn worst_relative(rows: &[ReportRow]) -> f64 {
    rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max)
}

/// Limit `gamma_g -> 0` of a sequence computed at widths shrinking by a
/// constant factor, by repeated Richardson elimination of the leading
/// linear, quadratic, ... error terms.
pub fn richardson<T: Real>(values: &[Complex<T>], ratio: T) -> Complex<T> {
    let mut v = values.to_vec();
    let mut factor = ratio;
    while v.len() > 1 {
        v = v.windows(2).map(|p| (p[1] * factor - p[0]) / (factor - T::one())).collect();
        factor = factor * ratio;
    }
    v[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TwoLevelAtom;
    use crate::phase::PhaseProfile;
    use std::f64::consts::FRAC_PI_2;

    fn system() -> PairSystem<f64> {
        PairSystem::new(TwoLevelAtom::new(13000.0, 200.0, 1.0), TwoLevelAtom::new(11000.0, 200.0, 0.99), 0.01 / 13000.0)
    }

    fn oracle(sys: PairSystem<f64>, phase: PhaseProfile<f64>) -> Oracle<f64> {
        Oracle::new(sys, PulseConfig::new(4000.0, phase), QuadratureSpec::default()).unwrap()
    }

    fn phases() -> Vec<PhaseProfile<f64>> {
        vec![PhaseProfile::constant(FRAC_PI_2), PhaseProfile::delay_fs(33.0), PhaseProfile::chirp(5e-9, 12000.0)]
    }

    #[test]
    fn ground_line_collapse_limit() {
        let o = oracle(system(), PhaseProfile::zero());
        for j in CHI_II_TERMS {
            for (w, w1, w2) in [(17300.0, 4000.0, 9500.0), (8200.0, 5100.0, 12500.0)] {
                let seq: Vec<Complex<f64>> =
                    [10.0, 1.0, 0.1].iter().map(|&g| o.chi5ii_lorentzian(j, w, w1, w2, g).unwrap().value).collect();
                let limit = richardson(&seq, 10.0);
                let exact = o.chi5ii_term(j, re(w), re(w1), re(w2)).unwrap();
                let rel = (limit - exact).norm() / exact.norm();
                assert!(rel < 1e-6, "term {j}: {limit} vs {exact} ({rel:e})");
            }
        }
    }

    #[test]
    fn zero_coupling_gives_zero_terms_and_signal() {
        let sys = system().with_coupling_scale(0.0);
        let o = oracle(sys, PhaseProfile::chirp(5e-9, 12000.0));
        let (w, w1, w2) = (re(17000.0), re(4000.0), re(9000.0));
        for j in CHI_I_TERMS {
            assert_eq!(o.chi3i_term(j, w, w1, w2).unwrap(), re(0.0));
        }
        for j in CHI_II_TERMS {
            assert_eq!(o.chi5ii_term(j, w, w1, w2).unwrap(), re(0.0));
        }
        let s = o.signal(17000.0, 4000.0).unwrap();
        assert_eq!((s.s_i, s.s_ii), (0.0, 0.0));
    }

    #[test]
    fn unknown_terms_are_rejected() {
        let o = oracle(system(), PhaseProfile::zero());
        assert!(o.chi3i_term(4, re(1.0), re(2.0), re(3.0)).is_err());
        assert!(o.chi5ii_term(3, re(1.0), re(2.0), re(3.0)).is_err());
    }

    #[test]
    fn two_photon_term_resonance_height() {
        let o = oracle(system(), PhaseProfile::zero());
        let (w, w2) = (20000.0, 2000.0);
        let gab = 400.0;
        let at = |w1: f64| o.chi3i_term(2, re(w), re(w1), re(w2)).unwrap().norm();
        let best = (-300..=300).map(|k| 4000.0 + k as f64).max_by(|x, y| at(*x).total_cmp(&at(*y))).unwrap();
        assert!((best - 4000.0).abs() <= gab / 10.0, "{best}");
        // Lorentzian of half width gamma_ab; the geometric mean cancels the linear slope of the other factors
        let peak = at(4000.0);
        let mean = (at(4000.0 - gab) * at(4000.0 + gab)).sqrt() / peak;
        assert!((mean - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.01, "{mean}");
    }

    #[test]
    fn bracket_cancels_on_two_photon_line_for_equal_widths() {
        let o = oracle(system(), PhaseProfile::zero());
        let x = o.chi3i_term(1, re(20000.0), re(4000.0), re(9000.0)).unwrap();
        let y = o.chi3i_term(1, re(20000.0), re(3990.0), re(9000.0)).unwrap();
        assert!(x.norm() <= 1e-12 * y.norm());
    }

    /// Independent re-typing of the effective-coupling terms with bare
    /// Lorentzians and couplings.
    fn retyped(sys: &PairSystem<f64>, j: usize, w: f64, w1: f64, w2: f64) -> Complex<f64> {
        let i = Complex::new(0.0, 1.0);
        let at = |s: Site| sys.atom(s).clone();
        let gr = |s: Site, x: f64| i / (x - at(s).omega + i * at(s).gamma);
        let ga = |s: Site, x: f64| -i / (x - at(s).omega - i * at(s).gamma);
        let gs = |x: f64| gr(Site::A, x) + gr(Site::B, x);
        let gsd = |x: f64| ga(Site::A, x) + ga(Site::B, x);
        let (wa, wb) = (at(Site::A).omega, at(Site::B).omega);
        let gab = at(Site::A).gamma + at(Site::B).gamma;
        let gp = i / (w + w1 - wa - wb + i * gab);
        let r = sys.distance();
        let g0 = sys.coupling_scale;
        let mu = |s: Site| at(s).mu_rel;
        let l = |a: Site, b: Site, x: f64| -> f64 {
            if a == b {
                g0 * mu(a) * mu(a) * x * x * x
            } else {
                let kx = std::f64::consts::TAU * x * r;
                g0 * mu(a) * mu(b) * x * x * x * kx.sin() / kx
            }
        };
        let lt = |a: Site, b: Site, x: f64| l(a, b, x) * mu(b) * mu(b) / (mu(a) * mu(a));
        let e = |a: Site, b: Site| sys.geometry_phase(a, b);
        let ls = |x: Complex<f64>| -> Complex<f64> {
            let mut acc = Complex::new(0.0, 0.0);
            for s in Site::ALL {
                let o = at(s.bar());
                let y = x - Complex::new(o.omega, -o.gamma);
                acc += y * y * y * (g0 * mu(s) * mu(s));
            }
            acc
        };
        let mut sum = Complex::new(0.0, 0.0);
        for a in Site::ALL {
            for b in Site::ALL {
                sum += match j {
                    1 => lt(a, b, w2) * e(a, b) * gr(a, w2) * gr(b, w2),
                    2 => l(a, b, w) * e(a, b) * gr(a, w) * gr(b, w),
                    7 => l(a, b, w1) * e(a, b) * ga(a, w1) * ga(b, w1),
                    _ => Complex::new(0.0, 0.0),
                };
            }
        }
        match j {
            1 => gp * (gsd(w1) - gs(w)) * sum,
            2 => -gp * gs(w + w1 - w2) * sum,
            3 => gp * gp * (gsd(w1) - gs(w)) * ls(Complex::new(w + w1, 0.0)) * gs(w + w1 - w2),
            _ => gp * gs(w + w1 - w2) * sum,
        }
    }

    #[test]
    fn effective_coupling_terms_match_retyped_expressions() {
        let sys = system();
        let o = oracle(sys.clone(), PhaseProfile::zero());
        for (w, w1, w2) in [(17300.0, 4000.0, 9500.0), (8200.0, 5100.0, 12500.0), (23950.0, 2050.0, 11020.0)] {
            for j in CHI_I_TERMS {
                let x = o.chi3i_term(j, re(w), re(w1), re(w2)).unwrap();
                let y = retyped(&sys, j, w, w1, w2);
                assert!((x - y).norm() <= 1e-12 * y.norm(), "term {j}: {x} {y}");
            }
        }
    }

    #[test]
    fn consistent_groups_agree_with_closed_form() {
        let sys = system();
        let pts = comparison_points(&sys, 8, (1000.0, 27000.0), (2000.0, 16000.0), 200.0, 7).unwrap();
        for phase in phases() {
            let o = oracle(sys.clone(), phase.clone());
            let table = CoefficientTable::new(sys.clone(), PulseConfig::new(4000.0, phase)).unwrap();
            for &(w, wp) in &pts {
                for g in [TermGroup::A1A2, TermGroup::A8, TermGroup::A9] {
                    let closed = o.closed_group(&table, g, w, wp).unwrap();
                    let quad = o.group(g, w, wp).unwrap().value;
                    assert!((closed - quad).norm() <= 1e-8 * closed.norm(), "{g:?} at ({w}, {wp}): {closed} {quad}");
                }
            }
        }
    }

    #[test]
    fn broadband_amplitude_off_silences_every_term() {
        let pulse = PulseConfig::new(4000.0, PhaseProfile::delay_fs(33.0)).with_amplitudes(1.0, 0.0);
        let o = Oracle::new(system(), pulse, QuadratureSpec::default()).unwrap();
        let s = o.signal(17000.0, 4000.0).unwrap();
        assert_eq!((s.s_i, s.s_ii), (0.0, 0.0));
    }

    #[test]
    fn window_doubling_leaves_result_unchanged() {
        let pulse = PulseConfig::new(4000.0, PhaseProfile::chirp(5e-9, 12000.0));
        let a = Oracle::new(system(), pulse.clone(), QuadratureSpec::default()).unwrap();
        let spec = QuadratureSpec { window: Some((-60000.0, 80000.0)), ..Default::default() };
        let b = Oracle::new(system(), pulse.clone(), spec).unwrap();
        let spec2 = QuadratureSpec { window: Some((-130000.0, 150000.0)), ..Default::default() };
        let c = Oracle::new(system(), pulse, spec2).unwrap();
        let (x, y, z) = (
            a.signal(15500.0, 4300.0).unwrap(),
            b.signal(15500.0, 4300.0).unwrap(),
            c.signal(15500.0, 4300.0).unwrap(),
        );
        assert!((x.total - y.total).abs() <= 1e-10 * x.total.abs());
        assert!((y.total - z.total).abs() <= 1e-10 * y.total.abs());
    }

    #[test]
    fn narrow_window_is_rejected() {
        let pulse = PulseConfig::new(4000.0, PhaseProfile::zero());
        let spec = QuadratureSpec { window: Some((12000.0, 14000.0)), ..Default::default() };
        let o = Oracle::new(system(), pulse, spec).unwrap();
        assert!(matches!(o.signal(15500.0, 4300.0), Err(Error::Config(_))));
    }

    #[test]
    fn error_estimate_bounds_tolerance_halving() {
        let pulse = PulseConfig::new(4000.0, PhaseProfile::chirp(5e-9, 12000.0));
        let loose = QuadratureSpec { rel_tol: 1e-6, ..Default::default() };
        let tight = QuadratureSpec { rel_tol: 5e-7, ..Default::default() };
        for (w, wp) in [(15500.0, 4300.0), (7100.0, 9000.0)] {
            let a = Oracle::new(system(), pulse.clone(), loose).unwrap().signal(w, wp).unwrap();
            let b = Oracle::new(system(), pulse.clone(), tight).unwrap().signal(w, wp).unwrap();
            assert!(
                (a.total - b.total).abs() <= a.error_estimate,
                "{} > {}",
                (a.total - b.total).abs(),
                a.error_estimate
            );
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        let bad = [
            QuadratureSpec { rel_tol: 0.0, abs_tol: 0.0, ..Default::default() },
            QuadratureSpec { max_subdivisions: 0, ..Default::default() },
            QuadratureSpec { contour_offset: Some(-1.0), ..Default::default() },
            QuadratureSpec { window: Some((5.0, 1.0)), ..Default::default() },
        ];
        for spec in bad {
            assert!(spec.validate().is_err());
        }
    }

    #[test]
    fn comparison_points_keep_clear_of_poles() {
        let sys = system();
        let pts = comparison_points(&sys, 50, (1000.0, 27000.0), (2000.0, 16000.0), 400.0, 1).unwrap();
        assert_eq!(pts.len(), 50);
        for (w, wp) in &pts {
            assert!(pole_lines(&sys, *wp).iter().all(|x| (w - x).abs() >= 400.0));
            assert!(pump_pole_lines(&sys).iter().all(|x| (wp - x).abs() >= 400.0));
        }
        let again = comparison_points(&sys, 50, (1000.0, 27000.0), (2000.0, 16000.0), 400.0, 1).unwrap();
        assert_eq!(pts, again);
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let f = |h: f64| Complex::new(3.0 + 2.0 * h - 5.0 * h * h, -1.0 + h);
        let v: Vec<_> = [1.0, 0.1, 0.01].iter().map(|&h| f(h)).collect();
        let x = richardson(&v, 10.0);
        assert!((x - Complex::new(3.0, -1.0)).norm() < 1e-12);
    }
}
