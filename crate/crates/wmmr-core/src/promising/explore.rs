//! Exhaustive final-state enumeration under the promises-first strategy:
//! pick a candidate memory up front (all promises at the beginning of the
//! trace), then interleave the non-promise steps of all threads to
//! completion. Only complete traces — every thread reduced to skip with an
//! empty promise set — contribute final states, which subsumes per-step
//! certification.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::litmus::ast::*;
use crate::litmus::elaborate::{value_universe, UniverseError, DEFAULT_UNIVERSE_CAP};

use super::certify::certifiable;
use super::state::*;
use super::step::{may_terminate, thread_step, StepCtx};

#[derive(Debug, Clone)]
pub struct ExploreBounds {
    /// Cap on memory length (number of non-ini messages). Defaults to the
    /// total store count of the elaborated program, which is exact for
    /// loop-free elaborated programs.
    pub max_memory: Option<usize>,
    /// Global cap on visited states before giving up with
    /// `bounded_incomplete`.
    pub max_states: usize,
    /// Check view monotonicity on every explored transition.
    pub check_monotonicity: bool,
    pub universe_cap: usize,
}

impl Default for ExploreBounds {
    fn default() -> Self {
        ExploreBounds {
            max_memory: None,
            max_states: 2_000_000,
            check_monotonicity: true,
            universe_cap: DEFAULT_UNIVERSE_CAP,
        }
    }
}

/// A complete execution's observable outcome.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FinalState {
    /// Register valuation, flattened across threads (register sets are
    /// disjoint); every register of the program is present, defaulting to 0.
    pub regs: BTreeMap<Reg, Val>,
    pub memory: Memory,
}

#[derive(Debug, Clone, Default)]
pub struct ExploreResult {
    /// Final states with one witness trace each (first found in the
    /// deterministic search order).
    pub finals: BTreeMap<FinalState, Trace>,
    pub bounded_incomplete: bool,
    pub monotonicity_violations: usize,
    pub states_visited: usize,
}

impl ExploreResult {
    /// The distinct register valuations reached.
    pub fn valuations(&self) -> BTreeSet<BTreeMap<Reg, Val>> {
        self.finals.keys().map(|f| f.regs.clone()).collect()
    }
}

/// Syntactic per-thread write capabilities, used to prune candidate
/// memories: an accepted memory contains only fulfilled promises.
struct WriteProfile {
    /// (thread index, loc) → max stores along any path.
    caps: BTreeMap<(usize, Loc), usize>,
    /// (thread index, loc) → values a store can write.
    values: BTreeMap<(usize, Loc), Vec<Val>>,
    total_cap: usize,
}

fn write_profile(test: &LitmusTest, universe: &BTreeSet<Val>) -> WriteProfile {
    let mut caps = BTreeMap::new();
    let mut values = BTreeMap::new();
    let mut total_cap = 0;
    for (i, (_, stmt)) in test.threads.iter().enumerate() {
        total_cap += stmt.path_max_stores_total();
        for x in &test.locations {
            let cap = stmt.path_max_stores(x);
            if cap == 0 {
                continue;
            }
            let (consts, from_reg) = stmt.storable(x);
            let vals: Vec<Val> = if from_reg {
                universe.iter().copied().collect()
            } else {
                consts.into_iter().collect()
            };
            caps.insert((i, x.clone()), cap);
            values.insert((i, x.clone()), vals);
        }
    }
    WriteProfile { caps, values, total_cap }
}

/// Promises-first exhaustive exploration of an elaborated test.
pub fn explore(test: &LitmusTest, bounds: &ExploreBounds) -> Result<ExploreResult, UniverseError> {
    let universe = value_universe(test, 0, bounds.universe_cap)?;
    let profile = write_profile(test, &universe);
    let mem_cap = bounds.max_memory.unwrap_or(profile.total_cap);

    let mut result = ExploreResult::default();
    let mut candidate = Vec::new();
    let mut counts: BTreeMap<(usize, Loc), usize> = BTreeMap::new();
    enumerate_memories(
        test,
        &profile,
        mem_cap,
        bounds,
        &mut candidate,
        &mut counts,
        &mut result,
    );
    Ok(result)
}

/// Depth-first enumeration of candidate memories (sequences of fulfillable
/// write messages); every prefix is itself a candidate and is searched
/// before being extended.
fn enumerate_memories(
    test: &LitmusTest,
    profile: &WriteProfile,
    mem_cap: usize,
    bounds: &ExploreBounds,
    candidate: &mut Vec<WriteMessage>,
    counts: &mut BTreeMap<(usize, Loc), usize>,
    result: &mut ExploreResult,
) {
    if result.bounded_incomplete {
        return;
    }
    search_interleavings(test, candidate, bounds, result);
    if candidate.len() >= mem_cap {
        return;
    }
    for ((ti, x), cap) in &profile.caps {
        let used = counts.get(&(*ti, x.clone())).copied().unwrap_or(0);
        if used >= *cap {
            continue;
        }
        for &k in &profile.values[&(*ti, x.clone())] {
            counts.insert((*ti, x.clone()), used + 1);
            candidate.push(WriteMessage::Write {
                loc: x.clone(),
                val: k,
                tid: ThreadId(*ti as u32 + 1),
            });
            enumerate_memories(test, profile, mem_cap, bounds, candidate, counts, result);
            candidate.pop();
            counts.insert((*ti, x.clone()), used);
        }
    }
}

/// Phase 2: with the candidate memory fixed, interleave non-promise steps of
/// all threads and record every complete outcome.
fn search_interleavings(
    test: &LitmusTest,
    candidate: &[WriteMessage],
    bounds: &ExploreBounds,
    result: &mut ExploreResult,
) {
    let mut memory = Memory::new();
    for w in candidate {
        memory.push(w.clone());
    }
    let mut threads: Vec<(Statement, TState)> = Vec::new();
    for (i, (_, stmt)) in test.threads.iter().enumerate() {
        let mut ts = TState::initial();
        ts.prom = memory.owned_by(ThreadId(i as u32 + 1));
        threads.push((stmt.clone(), ts));
    }

    let ctx = StepCtx::no_promises();
    let mut seen: HashSet<Vec<(Statement, TState)>> = HashSet::new();
    let mut trace: Trace = candidate
        .iter()
        .enumerate()
        .map(|(i, w)| match w {
            WriteMessage::Write { loc, val, tid } => TransitionLabel::Prm {
                tid: *tid,
                loc: loc.clone(),
                val: *val,
                ts: Timestamp(i + 1),
            },
            WriteMessage::Ini => unreachable!(),
        })
        .collect();
    dfs(test, &memory, &ctx, threads, &mut seen, &mut trace, bounds, result);
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    test: &LitmusTest,
    memory: &Memory,
    ctx: &StepCtx,
    threads: Vec<(Statement, TState)>,
    seen: &mut HashSet<Vec<(Statement, TState)>>,
    trace: &mut Trace,
    bounds: &ExploreBounds,
    result: &mut ExploreResult,
) {
    if result.bounded_incomplete {
        return;
    }
    if !seen.insert(threads.clone()) {
        return;
    }
    result.states_visited += 1;
    if result.states_visited > bounds.max_states {
        result.bounded_incomplete = true;
        return;
    }

    if threads
        .iter()
        .all(|(s, ts)| may_terminate(s) && ts.prom.is_empty())
    {
        let mut regs: BTreeMap<Reg, Val> = BTreeMap::new();
        for tid in test.thread_ids() {
            for a in test.registers_of(tid) {
                regs.insert(a, 0);
            }
        }
        for (_, ts) in &threads {
            for (a, (v, _)) in &ts.regs {
                regs.insert(a.clone(), *v);
            }
        }
        let fs = FinalState { regs, memory: memory.clone() };
        result.finals.entry(fs).or_insert_with(|| trace.clone());
        // completed states may still have runnable branches; fall through
    }

    for (i, (stmt, ts)) in threads.iter().enumerate() {
        let tid = ThreadId(i as u32 + 1);
        for succ in thread_step(tid, stmt, ts, memory, ctx) {
            debug_assert!(succ.append.is_none());
            if bounds.check_monotonicity && !ts.views_le(&succ.ts) {
                result.monotonicity_violations += 1;
            }
            let mut next = threads.clone();
            next[i] = (succ.stmt, succ.ts);
            trace.push(succ.label);
            dfs(test, memory, ctx, next, seen, trace, bounds, result);
            trace.pop();
        }
    }
}

/// Reference scheduler for the promises-first lemma: promises may occur
/// anywhere, each program step requires the stepped thread to remain
/// certifiable. Used by the cross-check suite as an independent oracle.
pub fn explore_unrestricted(
    test: &LitmusTest,
    bounds: &ExploreBounds,
) -> Result<ExploreResult, UniverseError> {
    let universe = value_universe(test, 0, bounds.universe_cap)?;
    let profile = write_profile(test, &universe);
    let mem_cap = bounds.max_memory.unwrap_or(profile.total_cap);
    let locs: Vec<Loc> = test.locations.iter().cloned().collect();
    let values: Vec<Val> = universe.iter().copied().collect();

    let mut result = ExploreResult::default();
    let mut seen: HashSet<ProgState> = HashSet::new();
    let mut stack = vec![ProgState::initial(test)];
    while let Some(state) = stack.pop() {
        if !seen.insert(state.clone()) {
            continue;
        }
        result.states_visited += 1;
        if result.states_visited > bounds.max_states {
            result.bounded_incomplete = true;
            break;
        }
        if state
            .threads
            .iter()
            .all(|(s, ts)| may_terminate(s) && ts.prom.is_empty())
        {
            let mut regs: BTreeMap<Reg, Val> = BTreeMap::new();
            for tid in test.thread_ids() {
                for a in test.registers_of(tid) {
                    regs.insert(a, 0);
                }
            }
            for (_, ts) in &state.threads {
                for (a, (v, _)) in &ts.regs {
                    regs.insert(a.clone(), *v);
                }
            }
            result
                .finals
                .entry(FinalState { regs, memory: state.memory.clone() })
                .or_insert_with(Vec::new);
        }
        for (i, (stmt, ts)) in state.threads.iter().enumerate() {
            let tid = ThreadId(i as u32 + 1);
            let ctx = StepCtx {
                locs: locs.clone(),
                values: values.clone(),
                allow_promise: true,
                max_memory: mem_cap + 1, // +1: memory length includes ini
            };
            for succ in thread_step(tid, stmt, ts, &state.memory, &ctx) {
                if bounds.check_monotonicity && !ts.views_le(&succ.ts) {
                    result.monotonicity_violations += 1;
                }
                let mut memory = state.memory.clone();
                if let Some(w) = succ.append {
                    memory.push(w);
                }
                // Program Step: the stepped thread must stay certifiable.
                if !certifiable(tid, &succ.stmt, &succ.ts, &memory, &locs, &values) {
                    continue;
                }
                let mut threads = state.threads.clone();
                threads[i] = (succ.stmt, succ.ts);
                stack.push(ProgState { threads, memory });
            }
        }
    }
    Ok(result)
}

/// Operational verdict for an outcome predicate over a result set.
#[derive(Debug, Clone)]
pub struct OpVerdict {
    pub reachable: bool,
    pub witness: Option<Trace>,
}

pub fn check_outcome(result: &ExploreResult, outcome: &OutcomePredicate) -> OpVerdict {
    for (fs, trace) in &result.finals {
        if satisfies(fs, outcome) {
            return OpVerdict { reachable: true, witness: Some(trace.clone()) };
        }
    }
    OpVerdict { reachable: false, witness: None }
}

pub fn satisfies(fs: &FinalState, outcome: &OutcomePredicate) -> bool {
    outcome.clauses.iter().all(|c| match c {
        OutcomeClause::Reg(a, k) => fs.regs.get(a).copied().unwrap_or(0) == *k,
        OutcomeClause::Mem(x, k) => fs.memory.last_value(x) == *k,
    })
}
