//! Litmus-test frontend: AST, `.lit` parser, iteration unrolling, value
//! universe, and the built-in corpus.

pub mod ast;
pub mod corpus;
pub mod elaborate;
pub mod parse;

pub use ast::*;
pub use corpus::{builtin, builtin_corpus, CORPUS};
pub use elaborate::{elaborate, value_universe, UniverseError, DEFAULT_UNIVERSE_CAP};
pub use parse::{parse_litmus, pretty, ParseError};
