//! Parameter sets of the reference simulations: the A/B pair and its
//! single-species variants, the pulse shapes of the 1D phase, delay and chirp
//! scans, the residue-map grids and the distance series.

use serde::{Deserialize, Serialize};

use crate::model::{PairSystem, PulseConfig, TwoLevelAtom};
use crate::phase::PhaseProfile;
use crate::scan::{arange, linspace, RowAxis, ScanGrid};

pub const OMEGA_A: f64 = 13000.0;
pub const OMEGA_B: f64 = 11000.0;
pub const GAMMA: f64 = 200.0;
/// `mu_B / mu_A`.
pub const MU_B_REL: f64 = 0.99;
pub const OMEGA_P: f64 = 4000.0;
/// Chirp rate of the residue maps, (cm^-1)^-2.
pub const RESIDUE_C2: f64 = 5e-9;
/// Expansion point of chirped phases: midway between the two transitions.
pub const CHIRP_REFERENCE: f64 = 12000.0;
/// `r / lambda_a` of the 1D scans unless stated otherwise.
pub const DEFAULT_R_OVER_LAMBDA: f64 = 0.001;

pub const CONSTANT_PHASES: [f64; 4] =
    [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 3.0 * std::f64::consts::FRAC_PI_2];
pub const DELAYS_FS: [f64; 4] = [17.0, 33.0, 330.0, 3300.0];
/// Chirp rates of the chirp row. The largest rate appears with both signs
/// because the sign of the last panel is ambiguous.
pub const CHIRP_RATES: [f64; 5] = [5e-9, 1e-8, 2.5e-8, 5e-8, -5e-8];
pub const DISTANCES: [f64; 4] = [0.001, 0.005, 0.01, 0.1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    /// Atom A at 13000 and atom B at 11000.
    #[serde(rename = "A/B")]
    AB,
    /// Two A-type atoms.
    #[serde(rename = "A/A")]
    AA,
    /// Two B-type atoms.
    #[serde(rename = "B/B")]
    BB,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::AB, Species::AA, Species::BB];

    pub fn label(self) -> &'static str {
        match self {
            Species::AB => "A/B",
            Species::AA => "A/A",
            Species::BB => "B/B",
        }
    }

    /// Transition frequencies of the two atoms.
    pub fn frequencies(self) -> (f64, f64) {
        match self {
            Species::AB => (OMEGA_A, OMEGA_B),
            Species::AA => (OMEGA_A, OMEGA_A),
            Species::BB => (OMEGA_B, OMEGA_B),
        }
    }
}

/// Pair of the given species `r_over_lambda * lambda_a` apart, with
/// `lambda_a = 1 / w_a` of the first atom. The second dipole is
/// [`MU_B_REL`] times the first for every species.
pub fn pair(species: Species, r_over_lambda: f64) -> PairSystem<f64> {
    let (w1, w2) = species.frequencies();
    let a = TwoLevelAtom::new(w1, GAMMA, 1.0);
    let b = TwoLevelAtom::new(w2, GAMMA, MU_B_REL);
    PairSystem::new(a, b, r_over_lambda / w1)
}

pub fn reference_pair() -> PairSystem<f64> {
    pair(Species::AB, DEFAULT_R_OVER_LAMBDA)
}

/// Narrowband at [`OMEGA_P`] with broadband phase `phase`.
pub fn pulse(phase: PhaseProfile<f64>) -> PulseConfig<f64> {
    PulseConfig::new(OMEGA_P, phase)
}

pub fn chirped_pulse(c2: f64) -> PulseConfig<f64> {
    pulse(PhaseProfile::chirp(c2, CHIRP_REFERENCE))
}

/// `w` from 1000 to 27000 cm^-1 at narrowband [`OMEGA_P`].
pub fn line_grid(step: f64) -> ScanGrid<f64> {
    ScanGrid::one_d(arange(1000.0, 27000.0, step), OMEGA_P)
}

/// Residue map over `w` in [6000, 16000] with rows `w + w_p` in
/// [17000, 31000] (two-photon lines horizontal) or `w - w_p` in
/// [-5000, 5000] (Raman lines horizontal); `n x n` cells.
pub fn residue_grid(rows: RowAxis, n: usize) -> ScanGrid<f64> {
    let (lo, hi) = match rows {
        RowAxis::Sum => (17000.0, 31000.0),
        RowAxis::Difference => (-5000.0, 5000.0),
        RowAxis::Pump => (6000.0, 16000.0),
    };
    ScanGrid::two_d(linspace(6000.0, 16000.0, n), linspace(lo, hi, n)).with_rows(rows).residue(RESIDUE_C2)
}
