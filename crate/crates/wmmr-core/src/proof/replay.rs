//! Replaying operational traces into the proof calculus: every accepted
//! trace of the interpreter induces per-thread proof outlines (with
//! timestamp-annotated events) and an interference-free configuration of
//! their composition whose canonical final state reproduces the trace's.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::estructure::{
    ini_structure, ActionLabel, EventId, EventStructure, ExtendItem, InterferenceFreeWitness,
    StructureError,
};
use crate::litmus::ast::ThreadId;
use crate::promising::{Memory, Timestamp, Trace, TransitionLabel, WriteMessage};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("trace is not promises-first")]
    NotPromisesFirst,
    #[error("promise timestamps are not consecutive from 1")]
    BadPromiseOrder,
    #[error("fulfill at t={0} does not match the promised message")]
    MismatchedFulfill(usize),
    #[error("timestamp t={0} fulfilled twice")]
    DoubleFulfill(usize),
    #[error("promise at t={0} is never fulfilled")]
    Unfulfilled(usize),
    #[error("read at t={0} does not match the message there")]
    BadRead(usize),
    #[error("thread id {0} outside the program")]
    BadThread(u32),
    #[error("read at t={0} would take the thread's own unfulfilled promise")]
    ReadOwnPromise(usize),
    #[error("read at t={0}: earlier future reads are missing from the structure")]
    NonSuffixChain(usize),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// The memory a promises-first trace commits to up front, and the index of
/// the first non-promise operation.
fn trace_memory(trace: &Trace) -> Result<(Memory, usize), ReplayError> {
    let split = trace
        .iter()
        .position(|l| !matches!(l, TransitionLabel::Prm { .. }))
        .unwrap_or(trace.len());
    if trace[split..].iter().any(|l| matches!(l, TransitionLabel::Prm { .. })) {
        return Err(ReplayError::NotPromisesFirst);
    }
    let mut memory = Memory::new();
    for l in &trace[..split] {
        let TransitionLabel::Prm { tid, loc, val, ts } = l else { unreachable!() };
        if *ts != memory.next_timestamp() {
            return Err(ReplayError::BadPromiseOrder);
        }
        memory.push(WriteMessage::Write { loc: loc.clone(), val: *val, tid: *tid });
    }
    Ok((memory, split))
}

/// Timestamps annotated on the memory events of a structure.
fn annotations(es: &EventStructure) -> BTreeSet<Timestamp> {
    es.event_ids()
        .filter(|&e| es.label(e).is_memory())
        .filter_map(|e| es.label(e).timestamp())
        .collect()
}

/// Replay an accepted promises-first trace of an `n_threads`-thread program
/// into one proof outline per thread, returning the final structures with
/// timestamp annotations on every memory event.
pub fn outline_from_trace(
    trace: &Trace,
    n_threads: usize,
) -> Result<Vec<EventStructure>, ReplayError> {
    let (memory, split) = trace_memory(trace)?;

    // every promise must be fulfilled exactly once, by its owner
    let mut fulfilled: BTreeSet<Timestamp> = BTreeSet::new();
    let mut ff_of: BTreeMap<ThreadId, BTreeSet<Timestamp>> = BTreeMap::new();
    for l in &trace[split..] {
        if let TransitionLabel::Ff { tid, loc, val, ts, .. } = l {
            match memory.get(*ts) {
                WriteMessage::Write { loc: ml, val: mv, tid: mt }
                    if ml == loc && mv == val && mt == tid => {}
                _ => return Err(ReplayError::MismatchedFulfill(ts.0)),
            }
            if !fulfilled.insert(*ts) {
                return Err(ReplayError::DoubleFulfill(ts.0));
            }
            ff_of.entry(*tid).or_default().insert(*ts);
        }
    }
    for t in memory.timestamps().skip(1) {
        if !fulfilled.contains(&t) {
            return Err(ReplayError::Unfulfilled(t.0));
        }
    }

    // per-thread read positions, for the future-read sets of the read case
    let reads: Vec<Vec<(usize, Timestamp)>> = (0..n_threads)
        .map(|i| {
            trace[split..]
                .iter()
                .enumerate()
                .filter_map(|(k, l)| match l {
                    TransitionLabel::Rd { tid, ts, .. } if tid.0 as usize == i + 1 => {
                        Some((k, *ts))
                    }
                    _ => None,
                })
                .collect()
        })
        .collect();

    let mut structures: Vec<EventStructure> = vec![ini_structure(); n_threads];
    for (k, l) in trace[split..].iter().enumerate() {
        let tid = l.tid();
        let i = tid.0 as usize - 1;
        if i >= n_threads {
            return Err(ReplayError::BadThread(tid.0));
        }
        let es = &structures[i];
        let next = match l {
            TransitionLabel::Prm { .. } => unreachable!(),
            TransitionLabel::Fnc { .. } => es.extend(ExtendItem::Fnc { tid }),
            TransitionLabel::Lst { reg, expr, .. } => es.extend(ExtendItem::BarExp {
                tid,
                reg: reg.clone(),
                exp: expr.clone(),
            }),
            TransitionLabel::Asm { cond, .. } => {
                es.extend(ExtendItem::Tst { tid, cond: cond.clone() })
            }
            TransitionLabel::Ff { via, loc, val, ts, .. } => {
                let item = match via {
                    Some(a) => ExtendItem::FfViaReg {
                        reg: a.clone(),
                        tid,
                        loc: loc.clone(),
                        val: *val,
                        ts: Some(*ts),
                    },
                    None => ExtendItem::Ff { tid, loc: loc.clone(), val: *val, ts: Some(*ts) },
                };
                es.extend(item)
            }
            TransitionLabel::Rd { reg, loc, val, ts: t, .. } => {
                match memory.get(*t) {
                    WriteMessage::Ini if *val == 0 => {}
                    WriteMessage::Write { loc: ml, val: mv, .. } if ml == loc && mv == val => {}
                    _ => return Err(ReplayError::BadRead(t.0)),
                }
                let bar = ExtendItem::BarLoc { tid, reg: reg.clone(), loc: loc.clone() };
                let present = annotations(es);
                if present.contains(t) {
                    // the event is already in the structure: an exhibited read
                    let e: EventId = es
                        .event_ids()
                        .find(|&e| {
                            es.label(e).is_memory() && es.label(e).timestamp() == Some(*t)
                        })
                        .expect("annotation without event");
                    es.extend(bar).restrict(e, loc, tid)
                } else {
                    // a fresh chain: the thread's future reads up to t that
                    // it does not fulfil itself and has not yet seen
                    let own_ff = ff_of.get(&tid).cloned().unwrap_or_default();
                    let t_le: BTreeSet<Timestamp> = reads[i]
                        .iter()
                        .filter(|(pos, ts)| *pos >= k && *ts <= *t && !own_ff.contains(ts))
                        .map(|(_, ts)| *ts)
                        .collect();
                    let missing: Vec<Timestamp> =
                        t_le.iter().copied().filter(|ts| !present.contains(ts)).collect();
                    let have_max = t_le
                        .iter()
                        .copied()
                        .filter(|ts| present.contains(ts))
                        .max()
                        .unwrap_or(Timestamp::ZERO);
                    if missing.iter().any(|ts| *ts < have_max)
                        || missing.last() != Some(t)
                    {
                        return Err(ReplayError::NonSuffixChain(t.0));
                    }
                    let mut chain = Vec::with_capacity(missing.len());
                    for tm in &missing {
                        let WriteMessage::Write { loc: ml, val: mv, tid: mt } = memory.get(*tm)
                        else {
                            return Err(ReplayError::BadRead(tm.0));
                        };
                        if *mt == tid {
                            return Err(ReplayError::ReadOwnPromise(tm.0));
                        }
                        chain.push(ActionLabel::Prm {
                            tid: *mt,
                            loc: ml.clone(),
                            val: *mv,
                            ts: Some(*tm),
                        });
                    }
                    es.append_read_chain(&chain)?.extend(bar)
                }
            }
        };
        structures[i] = next;
    }
    Ok(structures)
}

/// Structural well-formedness of a replayed (timestamp-annotated) outline:
/// annotations are distinct, flow respects timestamp order, modification
/// order is total per location, and every read chain ends in a bar.
pub fn validate_well_formed(es: &EventStructure) -> Result<(), String> {
    let mem: Vec<EventId> =
        es.event_ids().filter(|&e| es.label(e).is_memory()).collect();
    let mut seen: BTreeSet<Timestamp> = BTreeSet::new();
    for &e in &mem {
        let Some(t) = es.label(e).timestamp() else {
            return Err(format!("memory event {} lacks a timestamp", es.event_name(e)));
        };
        if !seen.insert(t) {
            return Err(format!("duplicate timestamp t={}", t.0));
        }
    }
    for &d in &mem {
        for &e in &mem {
            if es.flow_before(d, e)
                && es.label(d).timestamp() >= es.label(e).timestamp()
            {
                return Err(format!(
                    "flow edge {} -> {} against timestamp order",
                    es.event_name(d),
                    es.event_name(e)
                ));
            }
        }
    }
    for &d in &mem {
        for &e in &mem {
            if d == e {
                continue;
            }
            let (ld, le) = (es.label(d), es.label(e));
            let same_loc = match (ld.loc(), le.loc()) {
                (Some(a), Some(b)) => a == b,
                // ini acts on every location
                _ => matches!(ld, ActionLabel::Ini) || matches!(le, ActionLabel::Ini),
            };
            if same_loc && !es.flow_before(d, e) && !es.flow_before(e, d) {
                return Err(format!(
                    "modification order not total: {} vs {}",
                    es.event_name(d),
                    es.event_name(e)
                ));
            }
        }
    }
    for &e in &mem {
        if let ActionLabel::Prm { loc, .. } = es.label(e) {
            let barred = es.event_ids().any(|b| {
                es.flow.contains(&(e, b))
                    && matches!(es.label(b), ActionLabel::BarLoc { loc: l, .. } if l == loc)
            });
            let continued = es.event_ids().any(|b| {
                es.flow.contains(&(e, b)) && matches!(es.label(b), ActionLabel::Prm { .. })
            });
            if !barred && !continued {
                return Err(format!("read chain does not end in a bar at {}", es.event_name(e)));
            }
        }
    }
    Ok(())
}

/// The configuration an accepted trace induces on the composition of its
/// replayed outlines: the ini tuple, one tuple per timestamp (the owner's
/// fulfill synchronised with every reader's annotated read), and the lifted
/// non-memory events, ordered by timestamp.
pub fn trace_configuration(
    comp: &EventStructure,
    locals: &[EventStructure],
    memory: &Memory,
) -> Option<InterferenceFreeWitness> {
    let n = locals.len();
    let by_slots: BTreeMap<&Vec<Option<EventId>>, EventId> = comp
        .events
        .iter()
        .enumerate()
        .map(|(k, d)| (d.slots.as_ref().expect("composite event without slots"), k))
        .collect();

    let mut order: Vec<EventId> = vec![comp.ini_event()];
    for t in memory.timestamps().skip(1) {
        let WriteMessage::Write { tid, .. } = memory.get(t) else { continue };
        let mut slots: Vec<Option<EventId>> = vec![None; n];
        for (i, es) in locals.iter().enumerate() {
            let want_ff = tid.0 as usize == i + 1;
            let found = es.event_ids().find(|&e| {
                es.label(e).timestamp() == Some(t)
                    && (if want_ff {
                        es.label(e).is_fulfill()
                    } else {
                        es.label(e).is_read()
                    })
            });
            if want_ff && found.is_none() {
                return None; // the owner never fulfilled in the replay
            }
            slots[i] = found;
        }
        order.push(*by_slots.get(&slots)?);
    }

    let mut config: BTreeSet<EventId> = order.iter().copied().collect();
    for (i, es) in locals.iter().enumerate() {
        for e in es.event_ids() {
            if e != es.ini_event() && !es.label(e).is_memory() {
                let mut slots: Vec<Option<EventId>> = vec![None; n];
                slots[i] = Some(e);
                config.insert(*by_slots.get(&slots)?);
            }
        }
    }
    Some(InterferenceFreeWitness { config, order })
}
