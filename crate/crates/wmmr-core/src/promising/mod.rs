//! The operational engine: view-based promising semantics (Fig. 2) with
//! exhaustive promises-first exploration.

pub mod certify;
pub mod explore;
pub mod state;
pub mod step;

pub use certify::certifiable;
pub use explore::{
    check_outcome, explore, explore_unrestricted, satisfies, ExploreBounds, ExploreResult,
    FinalState, OpVerdict,
};
pub use state::{
    bexpeval, expeval, format_trace, Memory, ProgState, TState, Timestamp, Trace,
    TransitionLabel, WriteMessage,
};
pub use step::{may_terminate, normalize, thread_step, StepCtx, Successor};
