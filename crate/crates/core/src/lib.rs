//! Two-dimensional electronic spectroscopy of a collectively coupled pair of
//! two-level emitters driven by a narrowband and a shaped broadband pulse.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod config;
pub mod couplings;
pub mod error;
pub mod model;
pub mod oracle;
pub mod phase;
pub mod propagators;
pub mod quad;
pub mod scalar;
pub mod scan;
pub mod setups;
pub mod signal;

pub use coefficients::{CoefficientOptions, CoefficientSet, CoefficientTable, ContourRule, DanglingMethod};
pub use config::{AutoOr, Config};
pub use couplings::{dd_tensor_avg, CouplingContext};
pub use error::{Error, Result, Violation};
pub use model::{complement, validate, PairSystem, PulseConfig, SignalSample, Site, TwoLevelAtom};
pub use oracle::{quad_signal, Oracle, QuadSignal, QuadratureSpec};
pub use phase::{phase_eval, PhaseKind, PhaseProfile};
pub use propagators::{GreenKind, Propagators};
pub use scalar::Real;
pub use scan::{
    distance_sweep, find_extrema, ridge_detect, ridge_detect_matrix, scan_1d, scan_2d, ExtremaOptions, Extremum,
    ExtremumKind, MapAxes, Ridge, RidgeKind, RidgeOptions, RidgeReport, RowAxis, ScanGrid, ScanMode, SignalMatrix,
};
pub use signal::{
    residue_signal, signal_si, signal_sii, signal_total, A3Convention, Brackets, Include, SignalModel, SignalOptions,
    SignalRequest, TermGroups,
};

pub type C64 = num_complex::Complex<f64>;
pub type Atom = TwoLevelAtom<f64>;
pub type System = PairSystem<f64>;
pub type Pulse = PulseConfig<f64>;
pub type Phase = PhaseProfile<f64>;
pub type Sample = SignalSample<f64>;
