//! Iteration unrolling and the finite value universe used to bound search.

use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::*;

/// Replace every `iterate(S)` by the choice over `S^0 .. S^unroll`,
/// where `S^0 = skip` and `S^n = S; S^(n-1)`.
pub fn elaborate(test: &LitmusTest, unroll: u32) -> LitmusTest {
    let mut out = test.clone();
    for (_, s) in &mut out.threads {
        *s = elaborate_stmt(s, unroll);
    }
    out
}

fn elaborate_stmt(s: &Statement, unroll: u32) -> Statement {
    match s {
        Statement::Seq(a, b) => {
            Statement::seq(elaborate_stmt(a, unroll), elaborate_stmt(b, unroll))
        }
        Statement::Choice(a, b) => {
            Statement::choice(elaborate_stmt(a, unroll), elaborate_stmt(b, unroll))
        }
        Statement::Iterate(body) => {
            let body = elaborate_stmt(body, unroll);
            if unroll == 0 {
                return Statement::Skip;
            }
            // choice(S^0, choice(S^1, ... S^unroll)), outermost branch first
            let mut acc = power(&body, unroll);
            for n in (0..unroll).rev() {
                acc = Statement::choice(power(&body, n), acc);
            }
            acc
        }
        other => other.clone(),
    }
}

fn power(s: &Statement, n: u32) -> Statement {
    match n {
        0 => Statement::Skip,
        1 => s.clone(),
        _ => Statement::seq(s.clone(), power(s, n - 1)),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UniverseError {
    #[error("value universe overflow: more than {cap} values within the bound")]
    Overflow { cap: usize },
}

pub const DEFAULT_UNIVERSE_CAP: usize = 256;

/// The finite set of values any bounded execution of `test` can store:
/// `{0}`, every program constant, and the closure of those under the
/// program's arithmetic operators, iterated `unroll + total operator count`
/// times. Exceeding `cap` is an error, never a silent truncation.
pub fn value_universe(
    test: &LitmusTest,
    unroll: u32,
    cap: usize,
) -> Result<BTreeSet<Val>, UniverseError> {
    let mut values: BTreeSet<Val> = BTreeSet::new();
    values.insert(0);
    values.extend(test.all_constants());

    let ops: BTreeSet<BinOp> =
        test.threads.iter().flat_map(|(_, s)| s.operators()).collect();
    if ops.is_empty() {
        if values.len() > cap {
            return Err(UniverseError::Overflow { cap });
        }
        return Ok(values);
    }

    let op_count: usize = test.threads.iter().map(|(_, s)| s.op_count()).sum();
    let rounds = unroll as usize + op_count;
    for _ in 0..rounds {
        let snapshot: Vec<Val> = values.iter().copied().collect();
        let before = values.len();
        for op in &ops {
            for &a in &snapshot {
                for &b in &snapshot {
                    values.insert(op.apply(a, b));
                    if values.len() > cap {
                        return Err(UniverseError::Overflow { cap });
                    }
                }
            }
        }
        if values.len() == before {
            break; // closed
        }
    }
    Ok(values)
}
