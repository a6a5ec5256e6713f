//! Certification: can a thread locally discharge all of its open promises?

use std::collections::HashSet;

use crate::litmus::ast::*;

use super::state::*;
use super::step::{thread_step, StepCtx};

/// Search cap for the local certification run.
pub const CERT_MAX_STATES: usize = 100_000;

/// True iff some finite thread-local run from `(stmt, ts)` reaches an empty
/// promise set. Promise steps are allowed (per the definition) but memory
/// growth is bounded by the remaining store capacity of the statement;
/// beyond the state cap the search conservatively reports false.
pub fn certifiable(
    tid: ThreadId,
    stmt: &Statement,
    ts: &TState,
    memory: &Memory,
    locs: &[Loc],
    values: &[Val],
) -> bool {
    if ts.prom.is_empty() {
        return true;
    }
    let ctx = StepCtx {
        locs: locs.to_vec(),
        values: values.to_vec(),
        allow_promise: true,
        max_memory: memory.len() + stmt.path_max_stores_total(),
    };
    let mut seen: HashSet<(Statement, TState, Memory)> = HashSet::new();
    let mut stack = vec![(stmt.clone(), ts.clone(), memory.clone())];
    let mut budget = CERT_MAX_STATES;
    while let Some((s, t, m)) = stack.pop() {
        if budget == 0 {
            return false;
        }
        budget -= 1;
        if !seen.insert((s.clone(), t.clone(), m.clone())) {
            continue;
        }
        for succ in thread_step(tid, &s, &t, &m, &ctx) {
            if succ.ts.prom.is_empty() {
                return true;
            }
            let mut m2 = m.clone();
            if let Some(w) = succ.append {
                m2.push(w);
            }
            stack.push((succ.stmt, succ.ts, m2));
        }
    }
    false
}
