//! The assertion semantics connecting event structures to machine states:
//! timestamp mappings, induced thread views, register semantics, the
//! "matches" relation and canonical final states.

pub mod psi;
pub mod views;

pub use psi::{enumerate_psi, validate_psi, PsiMapping};
pub use views::{
    bexpr_semantics, expr_semantics, final_states, matches, reg_semantics, register_values,
    states_equal, views_from,
};
