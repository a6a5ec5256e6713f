//! wmmr-core: a dual-engine reachability checker for concurrent programs
//! under a promising weak-memory semantics.
//!
//! The operational engine ([`promising`]) exhaustively interprets programs
//! under the view-based promising semantics; the proof engine ([`proof`])
//! enumerates incorrectness-logic proof outlines over location-coloured flow
//! event structures ([`estructure`], [`assertion`]) and decides outcome
//! reachability through interference-free configurations. The two engines
//! are independent implementations and cross-validate each other
//! ([`crosscheck`]).

pub mod litmus;
pub mod promising;
pub mod estructure;
pub mod assertion;
pub mod proof;
pub mod crosscheck;
