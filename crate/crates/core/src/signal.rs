//! Transmission signal of the shaped pulse: the effective-coupling part
//! `S_I`, the vacuum-field part `S_II`, their sum, and the chirp residue.
//!
//! Each part is `Im{ i * scale * (E2^3 E1 X3 + E2^2 E1^2 X2) }`, where `X3`
//! and `X2` are the bracketed sums of propagators times coefficients.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientOptions, CoefficientSet, CoefficientTable};
use crate::error::{Error, Result};
use crate::model::{PairSystem, PulseConfig, SignalSample, Site};
use crate::phase::PhaseKind;
use crate::propagators::Propagators;
use crate::scalar::{re, Real};

/// Which part of the signal to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Include {
    SI,
    SII,
    #[default]
    Both,
}

/// Summation range of the `A3` term, whose coefficient carries a single
/// superscript under a triple sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A3Convention {
    /// Sum over the indices `A3` and its propagator actually carry.
    #[default]
    Arity,
    /// Sum over all three indices, counting each `A3` term twice.
    Literal,
}

/// Intensity groups to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermGroups {
    /// Terms scaling as `E2^3 E1`.
    pub e2_cubed: bool,
    /// Terms scaling as `E2^2 E1^2`.
    pub e2_squared: bool,
}

impl Default for TermGroups {
    fn default() -> Self {
        Self { e2_cubed: true, e2_squared: true }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalOptions {
    pub include: Include,
    pub groups: TermGroups,
    pub a3: A3Convention,
    pub coefficients: CoefficientOptions,
}

/// Bracketed sums of one signal part, before amplitudes and prefactor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Brackets<T> {
    pub e2_cubed: Complex<T>,
    pub e2_squared: Complex<T>,
}

impl<T: Real> Brackets<T> {
    fn zero() -> Self {
        Self { e2_cubed: re(T::zero()), e2_squared: re(T::zero()) }
    }

    /// Real signal contributions `(cubed, squared)` per unit amplitude.
    pub fn real_parts(&self, scale: T) -> (T, T) {
        // Im(i z) = Re z
        (scale * self.e2_cubed.re, scale * self.e2_squared.re)
    }
}

/// Signal evaluator for one system and pulse.
#[derive(Debug)]
pub struct SignalModel<T> {
    table: CoefficientTable<T>,
    options: SignalOptions,
}

impl<T: Real> Clone for SignalModel<T> {
    fn clone(&self) -> Self {
        Self { table: self.table.clone(), options: self.options }
    }
}

impl<T: Real> SignalModel<T> {
    pub fn new(system: PairSystem<T>, pulse: PulseConfig<T>) -> Result<Self> {
        Self::with_options(system, pulse, SignalOptions::default())
    }

    pub fn with_options(system: PairSystem<T>, pulse: PulseConfig<T>, options: SignalOptions) -> Result<Self> {
        system.validate()?;
        pulse.validate()?;
        Ok(Self { table: CoefficientTable::with_options(system, pulse, options.coefficients), options })
    }

    pub fn system(&self) -> &PairSystem<T> {
        self.table.system()
    }

    pub fn pulse(&self) -> &PulseConfig<T> {
        self.table.pulse()
    }

    pub fn options(&self) -> &SignalOptions {
        &self.options
    }

    pub fn table(&self) -> &CoefficientTable<T> {
        &self.table
    }

    fn props(&self) -> Propagators<'_, T> {
        Propagators::new(self.table.system())
    }

    /// `X3`, `X2` of `S_I`.
    pub fn brackets_si(&self, omega: T, omega_p: T) -> Result<Brackets<T>> {
        let c = self.table.evaluate(omega, omega_p)?;
        self.assemble_si(&c, omega, omega_p)
    }

    /// `X3`, `X2` of `S_II`.
    pub fn brackets_sii(&self, omega: T, omega_p: T) -> Result<Brackets<T>> {
        let c = self.table.evaluate(omega, omega_p)?;
        self.assemble_sii(&c, omega, omega_p)
    }

    fn assemble_si(&self, c: &CoefficientSet<T>, omega: T, omega_p: T) -> Result<Brackets<T>> {
        let g = self.props();
        let (w, wp) = (re(omega), re(omega_p));
        let two = T::lit(2.0);
        let mut out = Brackets::zero();
        let gp = g.tpa(Site::A, Site::B, w + wp)?;
        let gp2 = g.tpa(Site::A, Site::B, wp * two)?;
        if self.options.groups.e2_cubed {
            let mult = match self.options.a3 {
                A3Convention::Arity => T::one(),
                A3Convention::Literal => two,
            };
            let mut x = gp * c.a1 + gp * gp * c.a2;
            for a in Site::ALL {
                let i = a.index();
                for b in Site::ALL {
                    let gm = g.raman(b, a, w - wp)?;
                    let gmd = g.raman_dag(b, a, wp - w)?;
                    x = x + gm * c.a3[i] * mult;
                    for d in Site::ALL {
                        let j = (b.index(), d.index());
                        x = x
                            + gm * g.raman(d, a, w - wp)? * c.a4[i][j.0][j.1]
                            + gmd * g.raman_dag(d, a, wp - w)? * c.a5[i][j.0][j.1];
                    }
                }
            }
            out.e2_cubed = x;
        }
        if self.options.groups.e2_squared {
            out.e2_squared = gp * c.a6 + gp2 * c.a7 + gp * gp * c.a8 + gp2 * gp2 * c.a9;
        }
        Ok(out)
    }

    fn assemble_sii(&self, c: &CoefficientSet<T>, omega: T, omega_p: T) -> Result<Brackets<T>> {
        let g = self.props();
        let (w, wp) = (re(omega), re(omega_p));
        let (sa, sb) = (Site::A, Site::B);
        let mut out = Brackets::zero();
        let gp = g.tpa(sa, sb, w + wp)?;
        if self.options.groups.e2_cubed {
            let mut x = gp * c.b1 + gp * (gp * c.b2 + g.tpa(sa, sa, w + wp)? * c.b3 + g.tpa(sb, sb, w + wp)? * c.b4);
            for a in Site::ALL {
                for b in Site::ALL {
                    let (i, j) = (a.index(), b.index());
                    x = x
                        + g.raman(b, a, w - wp)? * c.b5[i][j]
                        + g.raman(b, a, wp - w)? * c.b6[i][j]
                        + g.raman_dag(b, a, wp - w)? * c.b7[i][j];
                }
            }
            out.e2_cubed = x;
        }
        if self.options.groups.e2_squared {
            out.e2_squared = gp * c.b8 + g.tpa(sa, sb, wp * T::lit(2.0))? * c.b9;
        }
        Ok(out)
    }

    fn combine(&self, b: &Brackets<T>) -> T {
        let p = self.table.pulse();
        let (e1, e2) = (p.amp_narrow, p.amp_broad);
        let x = b.e2_cubed * (e2 * e2 * e2 * e1) + b.e2_squared * (e2 * e2 * e1 * e1);
        // Im(i * scale * x)
        self.table.system().scale() * x.re
    }

    pub fn s_i(&self, omega: T, omega_p: T) -> Result<T> {
        Ok(self.combine(&self.brackets_si(omega, omega_p)?))
    }

    pub fn s_ii(&self, omega: T, omega_p: T) -> Result<T> {
        Ok(self.combine(&self.brackets_sii(omega, omega_p)?))
    }

    /// `(S_I, S_II, S)` at `(w, w_p)`; excluded parts are reported as zero.
    pub fn sample_at(&self, omega: T, omega_p: T) -> Result<SignalSample<T>> {
        let c = self.table.evaluate(omega, omega_p)?;
        let si = match self.options.include {
            Include::SII => T::zero(),
            _ => self.combine(&self.assemble_si(&c, omega, omega_p)?),
        };
        let sii = match self.options.include {
            Include::SI => T::zero(),
            _ => self.combine(&self.assemble_sii(&c, omega, omega_p)?),
        };
        Ok(SignalSample::new(omega, si, sii))
    }

    /// Sample at the pulse's own narrowband frequency.
    pub fn sample(&self, omega: T) -> Result<SignalSample<T>> {
        self.sample_at(omega, self.table.pulse().omega_p)
    }

    /// Same model with the chirp rate replaced.
    pub fn with_c2(&self, c2: T) -> Self {
        let mut pulse = self.table.pulse().clone();
        pulse.phase = pulse.phase.with_c2(c2);
        Self {
            table: CoefficientTable::with_options(self.table.system().clone(), pulse, self.options.coefficients),
            options: self.options,
        }
    }

    /// `S(C2) - S(-C2)` of the selected part; needs a chirped pulse.
    pub fn residue_at(&self, omega: T, omega_p: T, c2: T) -> Result<T> {
        residue_model_check(self.table.pulse())?;
        let plus = self.with_c2(c2).sample_at(omega, omega_p)?;
        let minus = self.with_c2(-c2).sample_at(omega, omega_p)?;
        Ok(plus.s_total - minus.s_total)
    }
}

fn residue_model_check<T: Real>(pulse: &PulseConfig<T>) -> Result<()> {
    if pulse.phase.kind != PhaseKind::Chirp {
        return Err(Error::Config(format!("residue signal needs a chirp phase profile, got {:?}", pulse.phase.kind)));
    }
    Ok(())
}

/// One-point request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalRequest<T> {
    pub system: PairSystem<T>,
    pub pulse: PulseConfig<T>,
    pub omega: T,
    pub include: Include,
}

impl<T: Real> SignalRequest<T> {
    pub fn new(system: PairSystem<T>, pulse: PulseConfig<T>, omega: T) -> Self {
        Self { system, pulse, omega, include: Include::Both }
    }

    fn model(&self) -> Result<SignalModel<T>> {
        if !(self.omega > T::zero()) {
            return Err(Error::Domain(format!("signal frequency must be positive, got {}", self.omega)));
        }
        let options = SignalOptions { include: self.include, ..SignalOptions::default() };
        SignalModel::with_options(self.system.clone(), self.pulse.clone(), options)
    }
}

pub fn signal_si<T: Real>(req: &SignalRequest<T>) -> Result<T> {
    let m = req.model()?;
    m.s_i(req.omega, req.pulse.omega_p)
}

pub fn signal_sii<T: Real>(req: &SignalRequest<T>) -> Result<T> {
    let m = req.model()?;
    m.s_ii(req.omega, req.pulse.omega_p)
}

pub fn signal_total<T: Real>(req: &SignalRequest<T>) -> Result<SignalSample<T>> {
    req.model()?.sample(req.omega)
}

/// `S(w, w_p, C2) - S(w, w_p, -C2)`.
pub fn residue_signal<T: Real>(req: &SignalRequest<T>, c2: T) -> Result<T> {
    residue_model_check(&req.pulse)?;
    req.model()?.residue_at(req.omega, req.pulse.omega_p, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TwoLevelAtom;
    use crate::phase::PhaseProfile;

    fn system() -> PairSystem<f64> {
        PairSystem::new(TwoLevelAtom::new(13000.0, 200.0, 1.0), TwoLevelAtom::new(11000.0, 200.0, 0.99), 0.01 / 13000.0)
    }

    fn chirped() -> PulseConfig<f64> {
        PulseConfig::new(4000.0, PhaseProfile::chirp(5e-9, 12000.0))
    }

    #[test]
    fn total_is_sum_of_parts() {
        let m = SignalModel::new(system(), chirped()).unwrap();
        for w in [2100.0, 9000.0, 17777.0, 24500.0] {
            let s = m.sample(w).unwrap();
            assert_eq!(s.s_total, s.s_i + s.s_ii);
            assert_eq!(s.s_i, m.s_i(w, 4000.0).unwrap());
            assert_eq!(s.s_ii, m.s_ii(w, 4000.0).unwrap());
        }
    }

    #[test]
    fn residue_vanishes_without_chirp_and_is_odd() {
        let req = SignalRequest::new(system(), chirped(), 20000.0);
        assert_eq!(residue_signal(&req, 0.0).unwrap(), 0.0);
        let p = residue_signal(&req, 5e-9).unwrap();
        let n = residue_signal(&req, -5e-9).unwrap();
        assert_eq!(p, -n);
        assert!(p != 0.0);
    }

    #[test]
    fn residue_needs_chirp_model() {
        let req = SignalRequest::new(system(), PulseConfig::new(4000.0, PhaseProfile::delay_fs(33.0)), 20000.0);
        assert!(matches!(residue_signal(&req, 5e-9), Err(Error::Config(_))));
    }

    #[test]
    fn linear_in_pair_count() {
        let a = SignalModel::new(system(), chirped()).unwrap();
        let b = SignalModel::new(system().with_n_pairs(2.0), chirped()).unwrap();
        for w in [3000.0, 12000.0, 22000.0] {
            let (x, y) = (a.sample(w).unwrap(), b.sample(w).unwrap());
            assert!((y.s_i - 2.0 * x.s_i).abs() <= 1e-14 * x.s_i.abs());
            assert!((y.s_ii - 2.0 * x.s_ii).abs() <= 1e-14 * x.s_ii.abs());
        }
    }

    #[test]
    fn zero_coupling_kills_vacuum_part() {
        let m = SignalModel::new(system().with_coupling_scale(0.0), chirped()).unwrap();
        for w in [3000.0, 18000.0, 22000.0] {
            assert_eq!(m.s_ii(w, 4000.0).unwrap(), 0.0);
            assert!(m.s_i(w, 4000.0).unwrap() != 0.0);
        }
    }

    #[test]
    fn literal_a3_doubles_its_term() {
        let opts =
            |a3| SignalOptions { a3, groups: TermGroups { e2_cubed: true, e2_squared: false }, ..Default::default() };
        let arity = SignalModel::with_options(system(), chirped(), opts(A3Convention::Arity)).unwrap();
        let literal = SignalModel::with_options(system(), chirped(), opts(A3Convention::Literal)).unwrap();
        let c = arity.table().evaluate(5000.0, 4000.0).unwrap();
        let g = Propagators::new(arity.system());
        let mut a3 = re(0.0);
        for a in Site::ALL {
            for b in Site::ALL {
                a3 += g.raman(b, a, re(1000.0)).unwrap() * c.a3[a.index()];
            }
        }
        let d =
            literal.brackets_si(5000.0, 4000.0).unwrap().e2_cubed - arity.brackets_si(5000.0, 4000.0).unwrap().e2_cubed;
        assert!((d - a3).norm() <= 1e-12 * a3.norm());
    }

    #[test]
    fn amplitude_grading() {
        let m = SignalModel::new(system(), chirped()).unwrap();
        let (c3, c2) = m.brackets_si(17000.0, 4000.0).unwrap().real_parts(m.system().scale());
        for e1 in [1.0, 2.0, 4.0] {
            let p = chirped().with_amplitudes(e1, 1.5);
            let s = SignalModel::new(system(), p).unwrap().s_i(17000.0, 4000.0).unwrap();
            let expect = c3 * 1.5f64.powi(3) * e1 + c2 * 1.5f64.powi(2) * e1 * e1;
            assert!((s - expect).abs() <= 1e-13 * expect.abs().max(1e-300));
        }
    }

    #[test]
    fn f32_evaluation_tracks_f64() {
        let s64 = SignalModel::new(system(), chirped()).unwrap().sample(20000.0).unwrap();
        let sys32 = PairSystem::new(
            TwoLevelAtom::new(13000.0f32, 200.0, 1.0),
            TwoLevelAtom::new(11000.0f32, 200.0, 0.99),
            0.01 / 13000.0,
        );
        let p32 = PulseConfig::new(4000.0f32, PhaseProfile::chirp(5e-9, 12000.0));
        let s32 = SignalModel::new(sys32, p32).unwrap().sample(20000.0).unwrap();
        assert!(((s32.s_total as f64) - s64.s_total).abs() <= 1e-2 * s64.s_total.abs());
    }
}
