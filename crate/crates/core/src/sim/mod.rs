//! Deterministic multi-client simulation, order-exhaustive checks, latency
//! probes and conformance vectors.

mod ddmin;
mod degradation;
mod engine;
mod fuzz;
mod interleave;
mod script;
pub mod vectors;

pub use ddmin::ddmin;
pub use degradation::{measure_degradation, workload};
pub use engine::{client_uuid, run_raw, run_simulation, Schedule, SimError, SimReport};
pub use fuzz::Generator;
pub use interleave::{
    check_interleavings, exhaustive_interleavings, first_disagreement, graph_op_universe,
    physical_interleavings, Counterexample,
};
pub use script::{Action, Script, ScriptError, Step};
