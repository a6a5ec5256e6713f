//! Configurations (Def. 2) and the interference-freedom search (Def. 4):
//! pick, for every read, the fulfill it synchronises with, then check the
//! resulting configuration for flow cycles and for a memory-consistent
//! linearization honouring all location restrictions.

use std::collections::{BTreeMap, BTreeSet};

use crate::litmus::ast::Loc;

use super::label::ActionLabel;
use super::structure::{EventId, EventStructure};

/// Def. 2: cycle-free, conflict-free, left-closed up to conflicts.
pub fn is_configuration(es: &EventStructure, c: &BTreeSet<EventId>) -> bool {
    if has_cycle(es, c) {
        return false;
    }
    for &a in c {
        for &b in c {
            if a < b && es.in_conflict(a, b) {
                return false;
            }
        }
    }
    // left-closed up to conflicts
    for &e in c {
        for d in es.event_ids() {
            if es.flow.contains(&(d, e)) && !c.contains(&d) {
                let excused = c
                    .iter()
                    .any(|&f| es.in_conflict(d, f) && es.flow.contains(&(f, e)));
                if !excused {
                    return false;
                }
            }
        }
    }
    true
}

fn has_cycle(es: &EventStructure, c: &BTreeSet<EventId>) -> bool {
    // Kahn's algorithm on the induced subgraph.
    let mut indeg: BTreeMap<EventId, usize> = c.iter().map(|&e| (e, 0)).collect();
    for &(a, b) in &es.flow {
        if c.contains(&a) && c.contains(&b) {
            *indeg.get_mut(&b).unwrap() += 1;
        }
    }
    let mut queue: Vec<EventId> =
        indeg.iter().filter(|(_, &d)| d == 0).map(|(&e, _)| e).collect();
    let mut seen = 0;
    while let Some(e) = queue.pop() {
        seen += 1;
        for &(a, b) in &es.flow {
            if a == e && c.contains(&b) {
                let d = indeg.get_mut(&b).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push(b);
                }
            }
        }
    }
    seen != c.len()
}

/// Flow-reachability restricted to the events of `c`.
fn reach_within(es: &EventStructure, c: &BTreeSet<EventId>, from: EventId) -> BTreeSet<EventId> {
    let mut out = BTreeSet::new();
    let mut stack = vec![from];
    while let Some(d) = stack.pop() {
        for &(a, b) in &es.flow {
            if a == d && c.contains(&b) && out.insert(b) {
                stack.push(b);
            }
        }
    }
    out
}

fn loc_in(label: &ActionLabel, l: &BTreeSet<Loc>) -> bool {
    match label {
        ActionLabel::Ini => !l.is_empty(),
        _ => label.loc().is_some_and(|x| l.contains(x)),
    }
}

/// Search for a total order over the memory events of `c` extending flow⁺
/// and honouring every location restriction; lexicographically least by
/// event id. `None` when no such order exists.
pub fn linearize(es: &EventStructure, c: &BTreeSet<EventId>) -> Option<Vec<EventId>> {
    let mem: Vec<EventId> = c
        .iter()
        .copied()
        .filter(|&e| es.label(e).is_memory())
        .collect();
    // precedence among memory events: flow paths within c
    let mut preds: BTreeMap<EventId, BTreeSet<EventId>> =
        mem.iter().map(|&e| (e, BTreeSet::new())).collect();
    for &d in &mem {
        for r in reach_within(es, c, d) {
            if let Some(p) = preds.get_mut(&r) {
                p.insert(d);
            }
        }
    }
    // restricted edges with both endpoints memory events of c
    let restricted: Vec<(EventId, EventId, &BTreeSet<Loc>)> = es
        .lambda
        .iter()
        .filter(|((d, f), _)| {
            c.contains(d) && c.contains(f) && es.label(*d).is_memory() && es.label(*f).is_memory()
        })
        .map(|(&(d, f), l)| (d, f, l))
        .collect();

    let mut order = Vec::with_capacity(mem.len());
    let mut placed = BTreeSet::new();
    if backtrack(es, &mem, &preds, &restricted, &mut order, &mut placed) {
        Some(order)
    } else {
        None
    }
}

fn backtrack(
    es: &EventStructure,
    mem: &[EventId],
    preds: &BTreeMap<EventId, BTreeSet<EventId>>,
    restricted: &[(EventId, EventId, &BTreeSet<Loc>)],
    order: &mut Vec<EventId>,
    placed: &mut BTreeSet<EventId>,
) -> bool {
    if order.len() == mem.len() {
        return true;
    }
    for &e in mem {
        if placed.contains(&e) {
            continue;
        }
        if !preds[&e].iter().all(|p| placed.contains(p) || *p == e) {
            continue;
        }
        // e may not fall inside any open restricted interval
        let blocked = restricted.iter().any(|&(d, f, l)| {
            d != e && f != e && placed.contains(&d) && !placed.contains(&f)
                && loc_in(es.label(e), l)
        });
        if blocked {
            continue;
        }
        order.push(e);
        placed.insert(e);
        if backtrack(es, mem, preds, restricted, order, placed) {
            return true;
        }
        order.pop();
        placed.remove(&e);
    }
    false
}

/// Every total order over the memory events of `c` extending flow⁺ and
/// honouring the location restrictions, in lexicographic order by event id,
/// up to `limit` orders.
pub fn linearizations(
    es: &EventStructure,
    c: &BTreeSet<EventId>,
    limit: usize,
) -> Vec<Vec<EventId>> {
    let mem: Vec<EventId> = c
        .iter()
        .copied()
        .filter(|&e| es.label(e).is_memory())
        .collect();
    let mut preds: BTreeMap<EventId, BTreeSet<EventId>> =
        mem.iter().map(|&e| (e, BTreeSet::new())).collect();
    for &d in &mem {
        for r in reach_within(es, c, d) {
            if let Some(p) = preds.get_mut(&r) {
                p.insert(d);
            }
        }
    }
    let restricted: Vec<(EventId, EventId, &BTreeSet<Loc>)> = es
        .lambda
        .iter()
        .filter(|((d, f), _)| {
            c.contains(d) && c.contains(f) && es.label(*d).is_memory() && es.label(*f).is_memory()
        })
        .map(|(&(d, f), l)| (d, f, l))
        .collect();
    let mut out = Vec::new();
    let mut order = Vec::with_capacity(mem.len());
    let mut placed = BTreeSet::new();
    collect_orders(es, &mem, &preds, &restricted, &mut order, &mut placed, limit, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn collect_orders(
    es: &EventStructure,
    mem: &[EventId],
    preds: &BTreeMap<EventId, BTreeSet<EventId>>,
    restricted: &[(EventId, EventId, &BTreeSet<Loc>)],
    order: &mut Vec<EventId>,
    placed: &mut BTreeSet<EventId>,
    limit: usize,
    out: &mut Vec<Vec<EventId>>,
) {
    if out.len() >= limit {
        return;
    }
    if order.len() == mem.len() {
        out.push(order.clone());
        return;
    }
    for &e in mem {
        if placed.contains(&e) {
            continue;
        }
        if !preds[&e].iter().all(|p| placed.contains(p) || *p == e) {
            continue;
        }
        let blocked = restricted.iter().any(|&(d, f, l)| {
            d != e && f != e && placed.contains(&d) && !placed.contains(&f)
                && loc_in(es.label(e), l)
        });
        if blocked {
            continue;
        }
        order.push(e);
        placed.insert(e);
        collect_orders(es, mem, preds, restricted, order, placed, limit, out);
        order.pop();
        placed.remove(&e);
    }
}

/// An interference-free configuration together with its witness order over
/// memory events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceFreeWitness {
    pub config: BTreeSet<EventId>,
    pub order: Vec<EventId>,
}

/// Search the composition for an interference-free configuration (Def. 4).
/// Thread-covering and the no-unsynchronised-reads condition force the
/// shape of every candidate up to the choice of which fulfill each read
/// synchronises with; enumerate those choices and check the rest.
pub fn find_interference_free(
    comp: &EventStructure,
    locals: &[EventStructure],
) -> Option<InterferenceFreeWitness> {
    let n = locals.len();
    let by_slots: BTreeMap<&Vec<Option<EventId>>, EventId> = comp
        .events
        .iter()
        .enumerate()
        .map(|(k, d)| (d.slots.as_ref().expect("composite event without slots"), k))
        .collect();

    let mut base: BTreeSet<EventId> = BTreeSet::new();
    base.insert(comp.ini_event());
    for (i, es) in locals.iter().enumerate() {
        for e in es.event_ids() {
            if e != es.ini_event() && !es.label(e).is_memory() {
                let mut t = vec![None; n];
                t[i] = Some(e);
                base.insert(by_slots[&t]);
            }
        }
    }

    // all reads, in deterministic order, with their candidate fulfills
    let mut reads: Vec<(usize, EventId, Vec<(usize, EventId)>)> = Vec::new();
    for (i, es) in locals.iter().enumerate() {
        for r in es.event_ids().filter(|&r| es.label(r).is_read()) {
            let mut cands = Vec::new();
            for (j, other) in locals.iter().enumerate() {
                if j == i {
                    continue;
                }
                for f in other.event_ids() {
                    if other.label(f).is_fulfill()
                        && other.label(f).complements(es.label(r))
                    {
                        cands.push((j, f));
                    }
                }
            }
            if cands.is_empty() {
                return None; // unsynchronisable read
            }
            reads.push((i, r, cands));
        }
    }

    let mut assignment: Vec<(usize, EventId)> = Vec::with_capacity(reads.len());
    assign(comp, locals, &by_slots, &base, &reads, &mut assignment)
}

/// All interference-free configurations reachable by distinct read-to-fulfill
/// assignments, each with its least linearization, up to `limit`.
pub fn find_interference_free_all(
    comp: &EventStructure,
    locals: &[EventStructure],
    limit: usize,
) -> Vec<InterferenceFreeWitness> {
    let n = locals.len();
    let by_slots: BTreeMap<&Vec<Option<EventId>>, EventId> = comp
        .events
        .iter()
        .enumerate()
        .map(|(k, d)| (d.slots.as_ref().expect("composite event without slots"), k))
        .collect();

    let mut base: BTreeSet<EventId> = BTreeSet::new();
    base.insert(comp.ini_event());
    for (i, es) in locals.iter().enumerate() {
        for e in es.event_ids() {
            if e != es.ini_event() && !es.label(e).is_memory() {
                let mut t = vec![None; n];
                t[i] = Some(e);
                base.insert(by_slots[&t]);
            }
        }
    }

    let mut reads: Vec<(usize, EventId, Vec<(usize, EventId)>)> = Vec::new();
    for (i, es) in locals.iter().enumerate() {
        for r in es.event_ids().filter(|&r| es.label(r).is_read()) {
            let mut cands = Vec::new();
            for (j, other) in locals.iter().enumerate() {
                if j == i {
                    continue;
                }
                for f in other.event_ids() {
                    if other.label(f).is_fulfill()
                        && other.label(f).complements(es.label(r))
                    {
                        cands.push((j, f));
                    }
                }
            }
            if cands.is_empty() {
                return Vec::new();
            }
            reads.push((i, r, cands));
        }
    }

    let mut out = Vec::new();
    let mut assignment: Vec<(usize, EventId)> = Vec::with_capacity(reads.len());
    assign_all(comp, locals, &by_slots, &base, &reads, &mut assignment, limit, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn assign_all(
    comp: &EventStructure,
    locals: &[EventStructure],
    by_slots: &BTreeMap<&Vec<Option<EventId>>, EventId>,
    base: &BTreeSet<EventId>,
    reads: &[(usize, EventId, Vec<(usize, EventId)>)],
    assignment: &mut Vec<(usize, EventId)>,
    limit: usize,
    out: &mut Vec<InterferenceFreeWitness>,
) {
    if out.len() >= limit {
        return;
    }
    let k = assignment.len();
    if k == reads.len() {
        if let Some(w) = check_candidate(comp, locals, by_slots, base, reads, assignment) {
            out.push(w);
        }
        return;
    }
    let (i, _, cands) = &reads[k];
    'cand: for &(j, f) in cands {
        for (k2, &(j2, f2)) in assignment.iter().enumerate() {
            if (j2, f2) == (j, f) && reads[k2].0 == *i {
                continue 'cand;
            }
        }
        assignment.push((j, f));
        assign_all(comp, locals, by_slots, base, reads, assignment, limit, out);
        assignment.pop();
    }
}

fn assign(
    comp: &EventStructure,
    locals: &[EventStructure],
    by_slots: &BTreeMap<&Vec<Option<EventId>>, EventId>,
    base: &BTreeSet<EventId>,
    reads: &[(usize, EventId, Vec<(usize, EventId)>)],
    assignment: &mut Vec<(usize, EventId)>,
) -> Option<InterferenceFreeWitness> {
    let k = assignment.len();
    if k == reads.len() {
        return check_candidate(comp, locals, by_slots, base, reads, assignment);
    }
    let (i, _, cands) = &reads[k];
    'cand: for &(j, f) in cands {
        // a fulfill can carry at most one read per reader thread
        for (k2, &(j2, f2)) in assignment.iter().enumerate() {
            if (j2, f2) == (j, f) && reads[k2].0 == *i {
                continue 'cand;
            }
        }
        assignment.push((j, f));
        if let Some(w) = assign(comp, locals, by_slots, base, reads, assignment) {
            return Some(w);
        }
        assignment.pop();
    }
    None
}

fn check_candidate(
    comp: &EventStructure,
    locals: &[EventStructure],
    by_slots: &BTreeMap<&Vec<Option<EventId>>, EventId>,
    base: &BTreeSet<EventId>,
    reads: &[(usize, EventId, Vec<(usize, EventId)>)],
    assignment: &[(usize, EventId)],
) -> Option<InterferenceFreeWitness> {
    let n = locals.len();
    let mut c = base.clone();
    // group reads by their assigned fulfill into sync tuples
    let mut groups: BTreeMap<(usize, EventId), Vec<(usize, EventId)>> = BTreeMap::new();
    for (k, &(j, f)) in assignment.iter().enumerate() {
        groups.entry((j, f)).or_default().push((reads[k].0, reads[k].1));
    }
    for (i, es) in locals.iter().enumerate() {
        for f in es.event_ids().filter(|&f| es.label(f).is_fulfill()) {
            let mut t = vec![None; n];
            t[i] = Some(f);
            if let Some(rs) = groups.get(&(i, f)) {
                for &(ri, re) in rs {
                    t[ri] = Some(re);
                }
            }
            c.insert(by_slots[&t]);
        }
    }
    if has_cycle(comp, &c) {
        return None;
    }
    let order = linearize(comp, &c)?;
    debug_assert!(is_configuration(comp, &c));
    Some(InterferenceFreeWitness { config: c, order })
}

/// Independent re-check of a witness: Def. 2 on the configuration, the
/// three conditions of Def. 4, and the order's consistency with flow and
/// restrictions. Used to validate engine output.
pub fn validate_interference_free(
    comp: &EventStructure,
    locals: &[EventStructure],
    w: &InterferenceFreeWitness,
) -> Result<(), String> {
    let c = &w.config;
    if !is_configuration(comp, c) {
        return Err("not a configuration".into());
    }
    // thread-covering
    for (i, es) in locals.iter().enumerate() {
        let covered: BTreeSet<EventId> = c
            .iter()
            .filter_map(|&e| comp.events[e].slots.as_ref().and_then(|s| s[i]))
            .collect();
        let all: BTreeSet<EventId> = es.event_ids().collect();
        if covered != all {
            return Err(format!("not thread-covering for thread {}", i + 1));
        }
    }
    // no unsynchronised reads
    for &e in c {
        let slots = comp.events[e].slots.as_ref().unwrap();
        let occ: Vec<(usize, EventId)> =
            slots.iter().enumerate().filter_map(|(i, s)| s.map(|x| (i, x))).collect();
        if occ.len() == 1 && locals[occ[0].0].label(occ[0].1).is_read() {
            return Err("unsynchronised read".into());
        }
    }
    // the order covers exactly the memory events
    let mem: BTreeSet<EventId> =
        c.iter().copied().filter(|&e| comp.label(e).is_memory()).collect();
    let in_order: BTreeSet<EventId> = w.order.iter().copied().collect();
    if mem != in_order || in_order.len() != w.order.len() {
        return Err("order is not a permutation of the memory events".into());
    }
    let pos: BTreeMap<EventId, usize> =
        w.order.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    // extends flow⁺ restricted to memory events
    for &d in &mem {
        for r in reach_within(comp, c, d) {
            if mem.contains(&r) && pos[&d] >= pos[&r] {
                return Err("order contradicts flow".into());
            }
        }
    }
    // location restrictions
    for (&(d, f), l) in &comp.lambda {
        if !(c.contains(&d) && c.contains(&f)) {
            continue;
        }
        let (Some(&pd), Some(&pf)) = (pos.get(&d), pos.get(&f)) else {
            continue;
        };
        for &e in &mem {
            let pe = pos[&e];
            if pd < pe && pe < pf && loc_in(comp.label(e), l) {
                return Err("order violates a location restriction".into());
            }
        }
    }
    Ok(())
}
