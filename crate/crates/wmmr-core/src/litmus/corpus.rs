//! The built-in litmus corpus with its expected verdicts.

use super::ast::LitmusTest;
use super::parse::parse_litmus;

pub const CORPUS: &[(&str, &str)] = &[
    ("LB", include_str!("../../corpus/LB.lit")),
    ("LB+dmb", include_str!("../../corpus/LB+dmb.lit")),
    ("MP", include_str!("../../corpus/MP.lit")),
    ("MP+dmb", include_str!("../../corpus/MP+dmb.lit")),
    ("SB", include_str!("../../corpus/SB.lit")),
    ("IRIW", include_str!("../../corpus/IRIW.lit")),
    ("WRC", include_str!("../../corpus/WRC.lit")),
    ("RRC", include_str!("../../corpus/RRC.lit")),
];

/// Parse the whole built-in corpus. The sources are compiled in, so this
/// cannot fail outside of a build mistake.
pub fn builtin_corpus() -> Vec<LitmusTest> {
    CORPUS
        .iter()
        .map(|(name, src)| {
            parse_litmus(src).unwrap_or_else(|e| panic!("built-in test {name}: {e}"))
        })
        .collect()
}

/// Look up one built-in test by name.
pub fn builtin(name: &str) -> Option<LitmusTest> {
    CORPUS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_litmus(src).expect("built-in test parses"))
}
