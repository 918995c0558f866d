//! Simulated distributed rounds, experiments and output.

pub mod experiment;
pub mod output;
pub mod topology;
pub mod verify;

pub use experiment::{figure1_preset, run_experiment, ExperimentResult, QuantileCurve, RunConfig};
pub use topology::{MessageCount, RoundTopology, ShiftBank, TopologyMode};
