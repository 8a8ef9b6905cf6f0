//! Truncated Fock-space simulation of heralded photon addition and
//! subtraction schemes built from two-mode squeezers, beam splitters and
//! photodetectors.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for everyday use.

pub mod circuit;
pub mod detectors;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod linalg;
pub mod metrics;
pub mod optics;
pub mod scalar;
pub mod schemes;

pub use circuit::{Circuit, Gate};
pub use detectors::{
    herald_evolved, herald_exact, herald_mixed, herald_on_off, povm_no_click_weight, DetectorKind,
    DetectorModel, HeraldOutcome, HeraldSpec, Heralded,
};
pub use error::{Error, Result};
pub use fock::{Ensemble, MixedState, ModeLayout, PureState, Truncated};
pub use linalg::CMatrix;
pub use metrics::{
    best_phase_sensitivity, entanglement_entropy, epr_sum, fidelity, optimize_r, parity_phase_scan,
    phase_sensitivity, Objective, Optimum, Order, ParitySignal,
};
pub use optics::{
    apply_beam_splitter, apply_beam_splitter_5050, apply_squeezer_factored,
    apply_two_mode_squeezer, tmss_state, BeamSplitterParam, SqueezeParam,
};
pub use scalar::{Real, C};

pub type State = PureState<f64>;
pub type State32 = PureState<f32>;
pub type Mixed = MixedState<f64>;
pub type Mixed32 = MixedState<f32>;
pub type Complex64 = C<f64>;
pub type Complex32 = C<f32>;
pub type Herald = HeraldSpec<f64>;
pub type Detector = DetectorModel<f64>;
pub type BeamSplitter = BeamSplitterParam<f64>;
pub type Squeeze = SqueezeParam<f64>;
