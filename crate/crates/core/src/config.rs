//! JSON description of a pair system and its driving pulse.
//!
//! ```json
//! {
//!   "atoms": [{"omega": 13000, "gamma": 200, "mu_rel": 1, "position": [0, 0, 0]}, ...],
//!   "n_pairs": 1,
//!   "coupling_scale": "auto",
//!   "k0": {"direction": [0, 0, 1], "magnitude": "auto"},
//!   "pulse": {"amp_narrow": 1, "amp_broad": 1, "omega_p": 4000, "xi": 0,
//!             "phase": {"model": "chirp", "reference": 12000, "params": [5e-9]}}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PairSystem, PulseConfig, TwoLevelAtom};
use crate::phase::{PhaseKind, PhaseProfile};

/// A number or the word `"auto"`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr {
    Value(f64),
    #[default]
    #[serde(with = "auto_word")]
    Auto,
}

mod auto_word {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let w = String::deserialize(d)?;
        if w == "auto" {
            Ok(())
        } else {
            Err(de::Error::custom(format!("expected a number or \"auto\", got \"{w}\"")))
        }
    }
}

impl AutoOr {
    fn or(self, auto: f64) -> f64 {
        match self {
            AutoOr::Value(v) => v,
            AutoOr::Auto => auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub omega: f64,
    pub gamma: f64,
    #[serde(default = "one")]
    pub mu_rel: f64,
    #[serde(default)]
    pub position: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct K0Config {
    #[serde(default = "z_axis")]
    pub direction: [f64; 3],
    #[serde(default)]
    pub magnitude: AutoOr,
}

impl Default for K0Config {
    fn default() -> Self {
        Self { direction: z_axis(), magnitude: AutoOr::Auto }
    }
}

/// Spectral phase: `constant` takes `[c0]`, `delay` takes `[T_fs]`, `chirp`
/// takes `[C2]` and `polynomial` takes `[C0, C1, ...]` about `reference`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub model: PhaseKind,
    #[serde(default)]
    pub reference: f64,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl PhaseConfig {
    pub fn build(&self) -> Result<PhaseProfile<f64>> {
        let one = |name: &str| -> Result<f64> {
            match self.params.as_slice() {
                [x] => Ok(*x),
                _ => Err(Error::Config(format!("phase model {name} takes exactly one parameter"))),
            }
        };
        Ok(match self.model {
            PhaseKind::Constant => PhaseProfile::constant(one("constant")?),
            PhaseKind::Delay => PhaseProfile::delay_fs(one("delay")?),
            PhaseKind::Chirp => PhaseProfile::chirp(one("chirp")?, self.reference),
            PhaseKind::Polynomial => PhaseProfile::polynomial(self.reference, self.params.clone()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(default = "one")]
    pub amp_narrow: f64,
    #[serde(default = "one")]
    pub amp_broad: f64,
    pub omega_p: f64,
    #[serde(default)]
    pub xi: f64,
    pub phase: PhaseConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub atoms: [AtomConfig; 2],
    #[serde(default = "one")]
    pub n_pairs: f64,
    #[serde(default)]
    pub coupling_scale: AutoOr,
    #[serde(default)]
    pub k0: K0Config,
    pub pulse: PulseSection,
}

fn one() -> f64 {
    1.0
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validated model. `"auto"` coupling makes `L_aa(w_a) = gamma_a`;
    /// `"auto"` wave number is `2 pi (w_a + w_b) / 2`.
    pub fn build(&self) -> Result<(PairSystem<f64>, PulseConfig<f64>)> {
        let atom = |a: &AtomConfig| TwoLevelAtom::new(a.omega, a.gamma, a.mu_rel);
        let [a, b] = &self.atoms;
        let mut sys = PairSystem::new(atom(a), atom(b), 0.0);
        sys.atoms[0].position = a.position;
        sys.atoms[1].position = b.position;
        sys.n_pairs = self.n_pairs;
        sys.coupling_scale = self.coupling_scale.or(sys.auto_coupling_scale());
        sys.k0_direction = self.k0.direction;
        sys.k0_magnitude = self.k0.magnitude.or(sys.k0_magnitude);
        let p = &self.pulse;
        let pulse =
            PulseConfig::new(p.omega_p, p.phase.build()?).with_amplitudes(p.amp_narrow, p.amp_broad).with_xi(p.xi);
        let mut violations = sys.violations();
        violations.extend(pulse.violations());
        if violations.is_empty() {
            Ok((sys, pulse))
        } else {
            Err(Error::Invalid(violations))
        }
    }
}
