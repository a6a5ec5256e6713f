//! Timestamp mappings ψ from the memory events of an event structure into a
//! memory: the heart of the "matches" relation. A mapping must respect event
//! contents, flow order, per-thread store order and every location
//! restriction; all such mappings are enumerated by backtracking.

use std::collections::{BTreeMap, BTreeSet};

use crate::estructure::{ActionLabel, EventId, EventStructure};
use crate::litmus::ast::{Loc, ThreadId};
use crate::promising::{Memory, Timestamp, WriteMessage};

/// A total mapping from the memory events of a structure to timestamps.
pub type PsiMapping = BTreeMap<EventId, Timestamp>;

/// Whether the label of an event is compatible with the message at `t`:
/// ini maps to 0, a read or fulfill to a write with the same thread,
/// location and value. A timestamp annotation on the label pins `t`.
fn content_ok(label: &ActionLabel, t: Timestamp, memory: &Memory) -> bool {
    if let Some(pinned) = label.timestamp() {
        if pinned != t {
            return false;
        }
    }
    match (label, memory.get(t)) {
        (ActionLabel::Ini, WriteMessage::Ini) => true,
        (
            ActionLabel::Prm { tid, loc, val, .. } | ActionLabel::Ff { tid, loc, val, .. },
            WriteMessage::Write { loc: l, val: v, tid: t2 },
        ) => tid == t2 && loc == l && val == v,
        _ => false,
    }
}

/// Per-thread store order: for every fulfill mapped to `t`, every earlier
/// write of the same thread to the same location must also be the image of
/// a fulfill.
fn stores_consecutive(es: &EventStructure, memory: &Memory, psi: &PsiMapping) -> bool {
    let mut mapped: BTreeMap<(ThreadId, &Loc), BTreeSet<Timestamp>> = BTreeMap::new();
    for (&e, &t) in psi {
        if let ActionLabel::Ff { tid, loc, .. } = es.label(e) {
            mapped.entry((*tid, loc)).or_default().insert(t);
        }
    }
    for ((tid, loc), ts) in &mapped {
        let hi = *ts.iter().next_back().unwrap();
        for t in memory.timestamps() {
            if t < hi && !ts.contains(&t) {
                if let WriteMessage::Write { loc: l, tid: t2, .. } = memory.get(t) {
                    if l == *loc && t2 == tid {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Location restrictions: for every edge d ↠_L f between mapped events, no
/// message strictly between their timestamps writes a location of L.
fn restrictions_ok(es: &EventStructure, memory: &Memory, psi: &PsiMapping) -> bool {
    for ((d, f), l) in &es.lambda {
        let (Some(&td), Some(&tf)) = (psi.get(d), psi.get(f)) else {
            continue;
        };
        for t in memory.timestamps() {
            if td < t && t < tf {
                if let WriteMessage::Write { loc, .. } = memory.get(t) {
                    if l.contains(loc) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// All mappings ψ under which `memory` is consistent with `es`, in
/// deterministic order. Empty when the memory does not match.
pub fn enumerate_psi(es: &EventStructure, memory: &Memory) -> Vec<PsiMapping> {
    let mem_events: Vec<EventId> = es
        .event_ids()
        .filter(|&e| es.label(e).is_memory())
        .collect();
    // flow-order constraints among memory events (paths through any events)
    let mut after: BTreeMap<EventId, BTreeSet<EventId>> = BTreeMap::new();
    for &e in &mem_events {
        let succ = es.flow_successors(e);
        after.insert(e, mem_events.iter().copied().filter(|d| succ.contains(d)).collect());
    }

    let mut out = Vec::new();
    let mut psi = PsiMapping::new();
    search(es, memory, &mem_events, &after, &mut psi, &mut out);
    out
}

fn search(
    es: &EventStructure,
    memory: &Memory,
    mem_events: &[EventId],
    after: &BTreeMap<EventId, BTreeSet<EventId>>,
    psi: &mut PsiMapping,
    out: &mut Vec<PsiMapping>,
) {
    let k = psi.len();
    if k == mem_events.len() {
        if stores_consecutive(es, memory, psi) && restrictions_ok(es, memory, psi) {
            out.push(psi.clone());
        }
        return;
    }
    let e = mem_events[k];
    'cand: for t in memory.timestamps() {
        if !content_ok(es.label(e), t, memory) {
            continue;
        }
        for (&d, &td) in psi.iter() {
            if after[&d].contains(&e) && td >= t {
                continue 'cand;
            }
            if after[&e].contains(&d) && t >= td {
                continue 'cand;
            }
        }
        psi.insert(e, t);
        search(es, memory, mem_events, after, psi, out);
        psi.remove(&e);
    }
}

/// Independent re-check of a mapping: totality over the memory events plus
/// the five consistency conditions. Used to validate enumeration output.
pub fn validate_psi(
    es: &EventStructure,
    memory: &Memory,
    psi: &PsiMapping,
) -> Result<(), String> {
    let mem_events: BTreeSet<EventId> = es
        .event_ids()
        .filter(|&e| es.label(e).is_memory())
        .collect();
    let dom: BTreeSet<EventId> = psi.keys().copied().collect();
    if dom != mem_events {
        return Err("domain is not the set of memory events".into());
    }
    for (&e, &t) in psi {
        if t.0 >= memory.len() {
            return Err(format!("timestamp {} out of range", t));
        }
        if matches!(es.label(e), ActionLabel::Ini) && t != Timestamp::ZERO {
            return Err("ini not mapped to 0".into());
        }
        if !content_ok(es.label(e), t, memory) {
            return Err(format!("event {} maps to an incompatible message", e));
        }
    }
    for &d in &mem_events {
        for &e in &mem_events {
            if d != e && es.flow_before(d, e) && psi[&d] >= psi[&e] {
                return Err(format!("flow between {} and {} not preserved", d, e));
            }
        }
    }
    if !stores_consecutive(es, memory, psi) {
        return Err("per-thread store order violated".into());
    }
    if !restrictions_ok(es, memory, psi) {
        return Err("a location restriction is violated".into());
    }
    Ok(())
}
