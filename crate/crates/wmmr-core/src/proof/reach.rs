//! Whole-program reachability through the proof engine: enumerate per-thread
//! outline tuples in increasing event count, compose the final structures,
//! and search each composition for an interference-free configuration whose
//! induced final state satisfies the outcome.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};

use crate::assertion::{final_states, register_values};
use crate::estructure::{
    find_interference_free, find_interference_free_all, linearizations, parallel_compose,
    synchronizable, EventStructure, InterferenceFreeWitness,
};
use crate::litmus::ast::{LitmusTest, OutcomeClause, Reg, Val};
use crate::litmus::value_universe;
use crate::promising::{satisfies, FinalState, Memory, TState};

use super::outline::{derive_outlines, read_menu, ProofBounds, ProofOutline};

/// The proof engine's answer on an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Reachable,
    Unreachable,
    /// Some bound truncated the search before a witness was found;
    /// unreachability cannot be concluded.
    BoundedUnknown,
}

/// Everything backing a Reachable verdict.
#[derive(Debug, Clone)]
pub struct ReachWitness {
    /// One outline per thread, index i for thread i+1.
    pub outlines: Vec<ProofOutline>,
    pub composition: EventStructure,
    pub witness: InterferenceFreeWitness,
    pub states: Vec<TState>,
    pub memory: Memory,
    pub valuation: BTreeMap<Reg, Val>,
}

#[derive(Debug, Clone)]
pub struct ReachabilityResult {
    pub verdict: Verdict,
    pub witness: Option<Box<ReachWitness>>,
    pub tuples_checked: usize,
}

/// All registers of the program, for zero-defaulting valuations.
fn all_registers(test: &LitmusTest) -> BTreeSet<Reg> {
    test.threads.iter().flat_map(|(_, s)| s.registers()).collect()
}

fn full_valuation(test: &LitmusTest, states: &[TState]) -> BTreeMap<Reg, Val> {
    let mut val: BTreeMap<Reg, Val> = all_registers(test).into_iter().map(|a| (a, 0)).collect();
    val.extend(register_values(states));
    val
}

/// Per-thread outlines with duplicate final structures removed, sorted by
/// event count for the ascending tuple enumeration.
struct ThreadOutlines {
    outlines: Vec<ProofOutline>,
    bound_hit: bool,
}

fn thread_outlines(test: &LitmusTest, bounds: &ProofBounds) -> Result<Vec<ThreadOutlines>, ()> {
    let universe = match value_universe(test, 0, bounds.universe_cap) {
        Ok(u) => u,
        Err(_) => return Err(()),
    };
    let mut out = Vec::new();
    for (tid, stmt) in &test.threads {
        let menu = read_menu(test, *tid, &universe);
        let set = derive_outlines(*tid, stmt, &menu, bounds);
        let mut seen: HashSet<String> = HashSet::new();
        let mut uniq: Vec<ProofOutline> = Vec::new();
        for o in set.outlines {
            if seen.insert(format!("{:?}", o.final_structure)) {
                uniq.push(o);
            }
        }
        uniq.sort_by_key(|o| o.final_structure.events.len());
        out.push(ThreadOutlines { outlines: uniq, bound_hit: set.bound_hit });
    }
    Ok(out)
}

/// Enumerate outline tuples in increasing total event count, calling `visit`
/// on each until it returns true (stop early) or `max_tuples` is exhausted.
/// Returns (tuples visited, stopped early).
fn for_each_tuple(
    threads: &[ThreadOutlines],
    max_tuples: usize,
    mut visit: impl FnMut(&[&ProofOutline]) -> bool,
) -> (usize, bool) {
    if threads.iter().any(|t| t.outlines.is_empty()) {
        return (0, false);
    }
    let size = |idxs: &[usize]| -> usize {
        idxs.iter()
            .zip(threads)
            .map(|(&k, t)| t.outlines[k].final_structure.events.len())
            .sum()
    };
    let mut heap: BinaryHeap<Reverse<(usize, Vec<usize>)>> = BinaryHeap::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let first = vec![0; threads.len()];
    heap.push(Reverse((size(&first), first.clone())));
    seen.insert(first);
    let mut visited = 0;
    while let Some(Reverse((_, idxs))) = heap.pop() {
        if visited >= max_tuples {
            return (visited, false);
        }
        visited += 1;
        let tuple: Vec<&ProofOutline> = idxs
            .iter()
            .zip(threads)
            .map(|(&k, t)| &t.outlines[k])
            .collect();
        if visit(&tuple) {
            return (visited, true);
        }
        for i in 0..idxs.len() {
            if idxs[i] + 1 < threads[i].outlines.len() {
                let mut next = idxs.clone();
                next[i] += 1;
                if seen.insert(next.clone()) {
                    heap.push(Reverse((size(&next), next)));
                }
            }
        }
    }
    (visited, true) // exhausted: every tuple was visited
}

/// Decide reachability of the test's outcome predicate with the proof
/// engine. `Unreachable` is only reported when the search was exhaustive
/// (no bound was hit).
pub fn check_reachable(test: &LitmusTest, bounds: &ProofBounds) -> ReachabilityResult {
    assert!(
        test.threads.iter().all(|(_, s)| !s.contains_iterate()),
        "check_reachable requires an elaborated test"
    );
    let Ok(threads) = thread_outlines(test, bounds) else {
        return ReachabilityResult {
            verdict: Verdict::BoundedUnknown,
            witness: None,
            tuples_checked: 0,
        };
    };
    let mut bound_hit = threads.iter().any(|t| t.bound_hit);
    let has_mem = test
        .outcome
        .clauses
        .iter()
        .any(|c| matches!(c, OutcomeClause::Mem(..)));

    let mut witness: Option<Box<ReachWitness>> = None;
    let (tuples_checked, complete) = for_each_tuple(&threads, bounds.max_tuples, |tuple| {
        let locals: Vec<EventStructure> =
            tuple.iter().map(|o| o.final_structure.clone()).collect();
        if !synchronizable(&locals) {
            return false;
        }
        let comp = parallel_compose(&locals);
        // Register values depend only on the local structures, so for
        // register-only outcomes any witness settles the tuple. Location
        // clauses depend on the order of the final memory, so those need
        // every configuration and every linearization.
        let candidates: Vec<InterferenceFreeWitness> = if has_mem {
            let configs = find_interference_free_all(&comp, &locals, bounds.max_witnesses);
            if configs.len() >= bounds.max_witnesses {
                bound_hit = true;
            }
            let mut ws = Vec::new();
            for c in configs {
                let orders = linearizations(&comp, &c.config, bounds.max_witnesses);
                if orders.len() >= bounds.max_witnesses {
                    bound_hit = true;
                }
                for order in orders {
                    ws.push(InterferenceFreeWitness { config: c.config.clone(), order });
                }
            }
            ws
        } else {
            find_interference_free(&comp, &locals).into_iter().collect()
        };
        for w in candidates {
            let Some((states, memory)) = final_states(&locals, &comp, &w) else {
                continue;
            };
            let valuation = full_valuation(test, &states);
            let fs = FinalState { regs: valuation.clone(), memory: memory.clone() };
            if satisfies(&fs, &test.outcome) {
                witness = Some(Box::new(ReachWitness {
                    outlines: tuple.iter().map(|o| (*o).clone()).collect(),
                    composition: comp,
                    witness: w,
                    states,
                    memory,
                    valuation,
                }));
                return true;
            }
        }
        false
    });
    if !complete {
        bound_hit = true;
    }
    let verdict = match (&witness, bound_hit) {
        (Some(_), _) => Verdict::Reachable,
        (None, false) => Verdict::Unreachable,
        (None, true) => Verdict::BoundedUnknown,
    };
    ReachabilityResult { verdict, witness, tuples_checked }
}

/// All register valuations the proof engine can justify, zero-defaulted over
/// every program register. The flag reports whether the enumeration was
/// exhaustive.
pub fn enumerate_valuations(
    test: &LitmusTest,
    bounds: &ProofBounds,
) -> (BTreeSet<BTreeMap<Reg, Val>>, bool) {
    assert!(
        test.threads.iter().all(|(_, s)| !s.contains_iterate()),
        "enumerate_valuations requires an elaborated test"
    );
    let Ok(threads) = thread_outlines(test, bounds) else {
        return (BTreeSet::new(), false);
    };
    let mut bound_hit = threads.iter().any(|t| t.bound_hit);
    let mut vals = BTreeSet::new();
    let (_, complete) = for_each_tuple(&threads, bounds.max_tuples, |tuple| {
        let locals: Vec<EventStructure> =
            tuple.iter().map(|o| o.final_structure.clone()).collect();
        if !synchronizable(&locals) {
            return false;
        }
        let comp = parallel_compose(&locals);
        if let Some(w) = find_interference_free(&comp, &locals) {
            if let Some((states, _)) = final_states(&locals, &comp, &w) {
                vals.insert(full_valuation(test, &states));
            }
        }
        false
    });
    if !complete {
        bound_hit = true;
    }
    (vals, !bound_hit)
}
