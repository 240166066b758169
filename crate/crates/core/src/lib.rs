#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod circuit;
pub mod code;
pub mod decoder;
pub mod layout;
pub mod montecarlo;
pub mod noise;
pub mod pauli;
pub mod tableau;

pub use circuit::{
    compile_to_ms, simple_circuit, simple_circuit_in, syndrome_round, Circuit, CnotOrder, LocatedOp, LogicalBasis,
    OpKind, Record,
};
pub use code::{baconshor, surface17, CheckType, CodeError, CodeFamily, CodeSpec, Syndrome};
pub use decoder::{ft_check, Decoder, Experiment, FtReport, LookupTable, QecSession, TrialOutcome};
pub use layout::{
    anneal, avg_2q_time, reference_arrangement, schedule, shuttle_meas_cost, simple_times, timed_simple_circuit,
    AnnealParams, Annealed, Arrangement, LayoutError, Mode, Objective, ScheduleResult, TimingParams,
};
pub use montecarlo::{
    crossover_rounds, pseudothreshold, run_direct, run_importance, Executor, ImportanceParams, McError,
    RoundComparison, Serial, SimResult, Stratum, Threshold, UniformStrata,
};
pub use noise::{enumerate_locations, Channel, DepolarizingParams, Fault, FaultLocation, IonTrapParams, NoiseModel};
pub use pauli::{Pauli, PauliString};
pub use tableau::{Basis, Gate, Measurement, SimError, Tableau};
