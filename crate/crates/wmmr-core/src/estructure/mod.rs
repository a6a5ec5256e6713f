//! Location-coloured flow event structures: the assertion language of the
//! proof engine. Local structures are grown by the ⊕-operators, combined by
//! synchronising parallel composition, and queried for interference-free
//! configurations.

pub mod compose;
pub mod config;
pub mod label;
pub mod structure;

pub use compose::{parallel_compose, slot_of, sync_tuples, synchronizable};
pub use config::{
    find_interference_free, find_interference_free_all, is_configuration, linearizations,
    linearize, validate_interference_free, InterferenceFreeWitness,
};
pub use label::ActionLabel;
pub use structure::{ini_structure, EventData, EventId, EventStructure, ExtendItem, StructureError};
