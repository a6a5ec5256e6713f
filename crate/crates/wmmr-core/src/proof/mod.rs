//! The incorrectness-logic proof engine: local proof outlines over flow
//! event structures, whole-program reachability via interference-free
//! configurations, and replay of operational traces into the calculus.

pub mod outline;
pub mod reach;
pub mod replay;

pub use outline::{
    derive_outlines, read_menu, OutlineSet, ProofBounds, ProofOutline, ProofStep, ReadMenu,
};
pub use reach::{
    check_reachable, enumerate_valuations, ReachWitness, ReachabilityResult, Verdict,
};
pub use replay::{
    outline_from_trace, trace_configuration, validate_well_formed, ReplayError,
};
