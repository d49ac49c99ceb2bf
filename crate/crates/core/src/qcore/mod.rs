//! States, observables, channels and experiment statistics.

pub mod channel;
pub mod experiment;
pub mod linalg;
pub mod observable;
pub mod random;
pub mod state;
pub mod tol;

pub use channel::{ChannelKraus, ChoiMatrix};
pub use experiment::{statistics_of, statistics_of_with_tol, Experiment, MultipartyExperiment, Statistics};
pub use linalg::{CMatrix, CVector, C64};
pub use observable::{Observable, Povm, SpectrumKind};
pub use state::{fidelity, fidelity_pure, schmidt, trace_distance, DensityOperator, PureState, Schmidt};
pub use tol::Tolerances;
