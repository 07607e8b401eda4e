//! Domain types: the two emitters, their geometry, the shaped pulse and the
//! per-frequency signal sample.
//!
//! Units: frequencies and linewidths are wavenumbers (cm^-1), positions are in
//! cm, and the dimensionless retardation argument is `2 pi nu r`. Dipoles are
//! relative magnitudes; absolute prefactors are folded into `coupling_scale`
//! and the signal scale `n_pairs * mu_a^2 * mu_b^2`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::phase::PhaseProfile;
use crate::scalar::Real;

/// Closest admissible interatomic distance in cm. Below it the dipole-dipole
/// coupling is outside the model.
pub const MIN_DISTANCE_CM: f64 = 1e-9;

/// Atom label. The complement (`bar`) of `A` is `B` and vice versa.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    A,
    B,
}

impl Site {
    pub const ALL: [Site; 2] = [Site::A, Site::B];

    #[inline]
    pub fn bar(self) -> Site {
        match self {
            Site::A => Site::B,
            Site::B => Site::A,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Site> {
        match i {
            0 => Some(Site::A),
            1 => Some(Site::B),
            _ => None,
        }
    }
}

/// The other atom of the pair.
#[inline]
pub fn complement(site: Site) -> Site {
    site.bar()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelAtom<T> {
    /// Transition frequency, cm^-1.
    pub omega: T,
    /// Linewidth (half width), cm^-1.
    pub gamma: T,
    /// Dipole magnitude relative to a common reference.
    pub mu_rel: T,
    /// Position, cm.
    pub position: [T; 3],
}

impl<T: Real> TwoLevelAtom<T> {
    pub fn new(omega: T, gamma: T, mu_rel: T) -> Self {
        Self { omega, gamma, mu_rel, position: [T::zero(); 3] }
    }

    pub fn at(mut self, position: [T; 3]) -> Self {
        self.position = position;
        self
    }

    fn check(&self, name: &str, out: &mut Vec<Violation>) {
        if !(self.omega > T::zero()) {
            out.push(Violation::new(format!("{name}.omega"), "omega must be positive"));
        }
        if !(self.gamma > T::zero()) {
            out.push(Violation::new(format!("{name}.gamma"), "gamma must be positive"));
        }
        if !(self.mu_rel > T::zero()) {
            out.push(Violation::new(format!("{name}.mu_rel"), "mu_rel must be positive"));
        }
        if !self.position.iter().all(|x| x.is_finite()) {
            out.push(Violation::new(format!("{name}.position"), "position must be finite"));
        }
    }
}

/// Two atoms, their arrangement relative to the pulse wave vector, the number
/// of pairs and the vacuum coupling scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSystem<T> {
    pub atoms: [TwoLevelAtom<T>; 2],
    pub n_pairs: T,
    /// `g0` such that `L_aa(w) = g0 mu_a^2 w^3`.
    pub coupling_scale: T,
    /// Unit propagation direction of the (paraxial) pulse.
    pub k0_direction: [T; 3],
    /// |k0| in rad/cm.
    pub k0_magnitude: T,
}

impl<T: Real> PairSystem<T> {
    /// Places atom `b` at distance `r` (cm) along x from atom `a`, with the
    /// pulse propagating along z. Coupling scale is calibrated so that
    /// `L_aa(w_a) = gamma_a`, and `|k0| = 2 pi (w_a + w_b) / 2`.
    pub fn new(a: TwoLevelAtom<T>, b: TwoLevelAtom<T>, r: T) -> Self {
        let z = T::zero();
        let a = a.at([z, z, z]);
        let b = b.at([r, z, z]);
        let k0 = T::PI() * (a.omega + b.omega);
        let mut sys = Self {
            atoms: [a, b],
            n_pairs: T::one(),
            coupling_scale: T::zero(),
            k0_direction: [z, z, T::one()],
            k0_magnitude: k0,
        };
        sys.coupling_scale = sys.auto_coupling_scale();
        sys
    }

    /// `g0 = gamma_a / (mu_a^2 w_a^3)`, i.e. the diagonal decay rate equals the
    /// linewidth of atom `a` at its own resonance.
    pub fn auto_coupling_scale(&self) -> T {
        let a = &self.atoms[0];
        a.gamma / (a.mu_rel * a.mu_rel * a.omega.powi(3))
    }

    pub fn with_n_pairs(mut self, n: T) -> Self {
        self.n_pairs = n;
        self
    }

    pub fn with_coupling_scale(mut self, g0: T) -> Self {
        self.coupling_scale = g0;
        self
    }

    /// Moves atom `b` so the pair separation is `r` along the current
    /// separation direction (x if the atoms coincide).
    pub fn with_distance(mut self, r: T) -> Self {
        let d = self.separation();
        let n = norm3(d);
        let dir = if n > T::zero() { [d[0] / n, d[1] / n, d[2] / n] } else { [T::one(), T::zero(), T::zero()] };
        let pa = self.atoms[0].position;
        self.atoms[1].position = [pa[0] + r * dir[0], pa[1] + r * dir[1], pa[2] + r * dir[2]];
        self
    }

    #[inline]
    pub fn atom(&self, s: Site) -> &TwoLevelAtom<T> {
        &self.atoms[s.index()]
    }

    #[inline]
    pub fn atom_mut(&mut self, s: Site) -> &mut TwoLevelAtom<T> {
        &mut self.atoms[s.index()]
    }

    /// `r_b - r_a`.
    pub fn separation(&self) -> [T; 3] {
        let (a, b) = (self.atoms[0].position, self.atoms[1].position);
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
    }

    /// Interatomic distance `r_ab` in cm.
    pub fn distance(&self) -> T {
        norm3(self.separation())
    }

    /// Overall signal prefactor `N mu_a^2 mu_b^2`.
    pub fn scale(&self) -> T {
        let (a, b) = (&self.atoms[0], &self.atoms[1]);
        self.n_pairs * a.mu_rel * a.mu_rel * b.mu_rel * b.mu_rel
    }

    /// Propagation phase `exp(-i k0 . (r_from - r_to))`.
    pub fn geometry_phase(&self, from: Site, to: Site) -> Complex<T> {
        if from == to {
            return Complex::new(T::one(), T::zero());
        }
        let (p, q) = (self.atom(from).position, self.atom(to).position);
        let d = &self.k0_direction;
        let proj = d[0] * (p[0] - q[0]) + d[1] * (p[1] - q[1]) + d[2] * (p[2] - q[2]);
        Complex::from_polar(T::one(), -self.k0_magnitude * proj)
    }

    /// Collects every invariant violation rather than stopping at the first.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.atoms[0].check("atoms[0]", &mut out);
        self.atoms[1].check("atoms[1]", &mut out);
        let r = self.distance();
        if !(r > T::zero()) {
            out.push(Violation::new("distance", "interatomic distance must be positive"));
        } else if r < T::lit(MIN_DISTANCE_CM) {
            out.push(Violation::new(
                "distance",
                format!("interatomic distance must be at least {MIN_DISTANCE_CM:e} cm"),
            ));
        }
        if !(self.n_pairs > T::zero()) {
            out.push(Violation::new("n_pairs", "n_pairs must be positive"));
        }
        if !(self.coupling_scale >= T::zero()) || !self.coupling_scale.is_finite() {
            out.push(Violation::new("coupling_scale", "coupling_scale must be finite and non-negative"));
        }
        let dn = norm3(self.k0_direction);
        if !((dn - T::one()).abs() < T::lit(1e-6)) {
            out.push(Violation::new("k0.direction", "k0 direction must be a unit vector"));
        }
        if !self.k0_magnitude.is_finite() || self.k0_magnitude < T::zero() {
            out.push(Violation::new("k0.magnitude", "k0 magnitude must be finite and non-negative"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }
}

/// Validates a pair system, reporting every violated rule.
pub fn validate<T: Real>(system: &PairSystem<T>) -> Result<()> {
    system.validate()
}

fn norm3<T: Real>(v: [T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Narrowband (amplitude `amp_narrow`, frequency `omega_p`, phase `xi`) plus
/// broadband (amplitude `amp_broad`, spectral phase `phase`) field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig<T> {
    pub amp_narrow: T,
    pub amp_broad: T,
    pub omega_p: T,
    pub xi: T,
    pub phase: PhaseProfile<T>,
}

impl<T: Real> PulseConfig<T> {
    pub fn new(omega_p: T, phase: PhaseProfile<T>) -> Self {
        Self { amp_narrow: T::one(), amp_broad: T::one(), omega_p, xi: T::zero(), phase }
    }

    pub fn with_amplitudes(mut self, narrow: T, broad: T) -> Self {
        self.amp_narrow = narrow;
        self.amp_broad = broad;
        self
    }

    pub fn with_omega_p(mut self, omega_p: T) -> Self {
        self.omega_p = omega_p;
        self
    }

    pub fn with_xi(mut self, xi: T) -> Self {
        self.xi = xi;
        self
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.amp_narrow >= T::zero()) {
            out.push(Violation::new("pulse.amp_narrow", "amplitudes must be non-negative"));
        }
        if !(self.amp_broad >= T::zero()) {
            out.push(Violation::new("pulse.amp_broad", "amplitudes must be non-negative"));
        }
        if !(self.omega_p > T::zero()) {
            out.push(Violation::new("pulse.omega_p", "omega_p must be positive"));
        }
        if !self.xi.is_finite() {
            out.push(Violation::new("pulse.xi", "xi must be finite"));
        }
        if !self.phase.is_finite() {
            out.push(Violation::new("pulse.phase", "phase coefficients must be finite"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }
}

/// Signal at one broadband frequency. `s_total == s_i + s_ii`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSample<T> {
    pub omega: T,
    pub s_i: T,
    pub s_ii: T,
    pub s_total: T,
}

impl<T: Real> SignalSample<T> {
    pub fn new(omega: T, s_i: T, s_ii: T) -> Self {
        Self { omega, s_i, s_ii, s_total: s_i + s_ii }
    }

    /// Placeholder for a grid node where evaluation failed.
    pub fn flagged(omega: T) -> Self {
        let nan = T::nan();
        Self { omega, s_i: nan, s_ii: nan, s_total: nan }
    }

    pub fn is_flagged(&self) -> bool {
        self.s_total.is_nan()
    }
}
