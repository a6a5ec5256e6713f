//! Synchronising parallel composition of thread-local event structures.
//! Reads from promises synchronise with the complementary fulfill of the
//! promising thread; lifted copies of local events fill in the rest, with
//! conflicts preventing an event from occurring twice in a configuration.

use std::collections::{BTreeMap, BTreeSet};

use crate::litmus::ast::ThreadId;

use super::label::ActionLabel;
use super::structure::{EventData, EventId, EventStructure};

/// A composite event before id assignment: one slot per thread, `None` = ⋆.
type Slots = Vec<Option<EventId>>;

/// The synchronising tuples of the local structures: one fulfill slot plus,
/// in any non-empty subset of the other threads, a read with the
/// complementary label — and the all-ini tuple.
pub fn sync_tuples(locals: &[EventStructure]) -> Vec<Slots> {
    let n = locals.len();
    let mut out: BTreeSet<Slots> = BTreeSet::new();
    out.insert(locals.iter().map(|es| Some(es.ini_event())).collect());
    for (i, es) in locals.iter().enumerate() {
        for e in es.event_ids().filter(|&e| es.label(e).is_fulfill()) {
            // Per other thread, the reads that can synchronise with e.
            let mut options: Vec<Vec<Option<EventId>>> = Vec::new();
            for (j, other) in locals.iter().enumerate() {
                if j == i {
                    options.push(vec![Some(e)]);
                    continue;
                }
                let mut opts: Vec<Option<EventId>> = vec![None];
                for r in other.event_ids() {
                    if other.label(r).is_read() && es.label(e).complements(other.label(r)) {
                        opts.push(Some(r));
                    }
                }
                options.push(opts);
            }
            let mut tuple: Slots = vec![None; n];
            fill(&options, 0, &mut tuple, i, &mut out);
        }
    }
    out.into_iter().collect()
}

fn fill(
    options: &[Vec<Option<EventId>>],
    k: usize,
    tuple: &mut Slots,
    ff_slot: usize,
    out: &mut BTreeSet<Slots>,
) {
    if k == options.len() {
        if tuple.iter().enumerate().any(|(j, s)| j != ff_slot && s.is_some()) {
            out.insert(tuple.clone());
        }
        return;
    }
    for opt in &options[k] {
        tuple[k] = *opt;
        fill(options, k + 1, tuple, ff_slot, out);
    }
}

/// Whether every read of every local structure has at least one
/// synchronisation partner (the side condition of rule Parallel).
pub fn synchronizable(locals: &[EventStructure]) -> bool {
    locals.iter().enumerate().all(|(i, es)| {
        es.event_ids().filter(|&e| es.label(e).is_read()).all(|r| {
            locals.iter().enumerate().any(|(j, other)| {
                j != i
                    && other.event_ids().any(|f| {
                        other.label(f).is_fulfill() && other.label(f).complements(es.label(r))
                    })
            })
        })
    })
}

/// Parallel composition per Def. 3. Events are the sync tuples plus lifted
/// singletons (local ini events excluded); flow, restrictions and labels are
/// inherited slot-wise; two events conflict when they share a slot but are
/// not the same tuple.
pub fn parallel_compose(locals: &[EventStructure]) -> EventStructure {
    let n = locals.len();
    debug_assert!(locals.iter().all(|es| es.conflict.is_empty()));
    let mut tuples: Vec<Slots> = sync_tuples(locals);
    let sync_count = tuples.len();
    for (i, es) in locals.iter().enumerate() {
        let ini = es.ini_event();
        for e in es.event_ids().filter(|&e| e != ini) {
            let mut t: Slots = vec![None; n];
            t[i] = Some(e);
            tuples.push(t);
        }
    }
    let sync_set: BTreeSet<&Slots> = tuples[..sync_count].iter().collect();
    let all_ini: Slots = locals.iter().map(|es| Some(es.ini_event())).collect();

    let mut tuples_sorted = tuples.clone();
    tuples_sorted.sort();
    tuples_sorted.dedup();

    let mut events = Vec::with_capacity(tuples_sorted.len());
    for t in &tuples_sorted {
        let occupied = || {
            t.iter()
                .enumerate()
                .filter_map(|(i, s)| s.map(|e| (i, e)))
        };
        let label = if *t == all_ini {
            ActionLabel::Ini
        } else if sync_set.contains(t) {
            // the fulfill slot determines the label of a sync tuple
            let (i, e) = occupied()
                .find(|&(i, e)| locals[i].label(e).is_fulfill())
                .expect("sync tuple without a fulfill slot");
            locals[i].label(e).clone()
        } else {
            let (i, e) = occupied().next().expect("empty tuple");
            locals[i].label(e).clone()
        };
        events.push(EventData { label, slots: Some(t.clone()) });
    }

    let mut flow = BTreeSet::new();
    let mut lambda: BTreeMap<(EventId, EventId), BTreeSet<_>> = BTreeMap::new();
    for (a, ta) in tuples_sorted.iter().enumerate() {
        for (b, tb) in tuples_sorted.iter().enumerate() {
            if a == b {
                continue;
            }
            let mut edge = false;
            let mut lam = BTreeSet::new();
            for i in 0..n {
                if let (Some(ea), Some(eb)) = (ta[i], tb[i]) {
                    if locals[i].flow.contains(&(ea, eb)) {
                        edge = true;
                        lam.extend(locals[i].restriction(ea, eb));
                    }
                }
            }
            if edge {
                flow.insert((a, b));
                if !lam.is_empty() {
                    lambda.insert((a, b), lam);
                }
            }
        }
    }

    let mut conflict = BTreeSet::new();
    for (a, ta) in tuples_sorted.iter().enumerate() {
        for (b, tb) in tuples_sorted.iter().enumerate().skip(a + 1) {
            let shares = (0..n).any(|i| ta[i].is_some() && ta[i] == tb[i]);
            if shares && ta != tb {
                conflict.insert((a, b));
            }
        }
    }

    EventStructure { events, flow, lambda, conflict }
}

/// The slot of a composite event for thread `tid` (threads are numbered
/// 1..n in local-structure order).
pub fn slot_of(es: &EventStructure, e: EventId, tid: ThreadId) -> Option<EventId> {
    es.events[e]
        .slots
        .as_ref()
        .and_then(|s| s[(tid.0 - 1) as usize])
}
