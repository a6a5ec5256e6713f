//! Assertion semantics: register values determined by an event structure,
//! thread views induced by a timestamp mapping, the "matches" relation
//! between machine states and assertions, and the canonical final states of
//! an interference-free configuration.

use std::collections::{BTreeMap, BTreeSet};

use crate::estructure::{ActionLabel, EventId, EventStructure, InterferenceFreeWitness};
use crate::litmus::ast::{BExpr, Expr, Loc, Reg, ThreadId, Val};
use crate::promising::{Memory, TState, Timestamp, WriteMessage};

use super::psi::{enumerate_psi, PsiMapping};

/// The flow-maximal event of a set, when one dominates all others.
/// Falls back to the largest id for determinism; structures built by the
/// proof rules keep same-register bars and same-location events totally
/// ordered, so the fallback is not hit in practice.
fn flow_max(es: &EventStructure, cands: &[EventId]) -> Option<EventId> {
    cands
        .iter()
        .copied()
        .find(|&e| cands.iter().all(|&d| d == e || es.flow_before(d, e)))
        .or_else(|| cands.iter().copied().max())
}

/// The last bar event on register `a`, optionally restricted to events
/// strictly flow-before `before`.
fn last_bar_on(es: &EventStructure, a: &Reg, before: Option<EventId>) -> Option<EventId> {
    let cands: Vec<EventId> = es
        .event_ids()
        .filter(|&d| {
            es.label(d).bar_reg() == Some(a)
                && before.is_none_or(|b| es.flow_before(d, b))
        })
        .collect();
    flow_max(es, &cands)
}

/// The value recorded by a bar event: for a load bar, the value of the
/// flow-maximal memory event on its location in the bar's flow prefix (0
/// when that is the ini event); for an assignment bar, its expression
/// evaluated against the bars strictly flow-before it.
fn eval_bar(es: &EventStructure, b: EventId) -> Val {
    match es.label(b).clone() {
        ActionLabel::BarLoc { loc, .. } => {
            let cands: Vec<EventId> = es
                .event_ids()
                .filter(|&d| {
                    es.flow_before(d, b)
                        && es.label(d).is_memory()
                        && es.label(d).acts_on(&loc)
                })
                .collect();
            match flow_max(es, &cands) {
                None => 0,
                Some(e) => match es.label(e) {
                    ActionLabel::Ini => 0,
                    ActionLabel::Prm { val, .. } | ActionLabel::Ff { val, .. } => *val,
                    _ => unreachable!("non-memory event in Act^x"),
                },
            }
        }
        ActionLabel::BarExp { exp, .. } => eval_expr_at(es, &exp, b),
        _ => unreachable!("eval_bar on a non-bar event"),
    }
}

fn eval_expr_at(es: &EventStructure, exp: &Expr, at: EventId) -> Val {
    match exp {
        Expr::Const(k) => *k,
        Expr::Reg(r) => match last_bar_on(es, r, Some(at)) {
            None => 0,
            Some(b) => eval_bar(es, b),
        },
        Expr::Bin(op, l, r) => {
            op.apply(eval_expr_at(es, l, at), eval_expr_at(es, r, at))
        }
    }
}

/// ⟦a⟧_ℰ: the value of register `a` determined by the structure — 0 when no
/// bar on `a` exists, otherwise the value of its last bar.
pub fn reg_semantics(es: &EventStructure, a: &Reg) -> Val {
    match last_bar_on(es, a, None) {
        None => 0,
        Some(b) => eval_bar(es, b),
    }
}

/// ⟦η⟧_ℰ: an expression evaluated with registers given by [`reg_semantics`].
pub fn expr_semantics(es: &EventStructure, exp: &Expr) -> Val {
    match exp {
        Expr::Const(k) => *k,
        Expr::Reg(r) => reg_semantics(es, r),
        Expr::Bin(op, l, r) => op.apply(expr_semantics(es, l), expr_semantics(es, r)),
    }
}

/// ⟦β⟧_ℰ: a boolean expression over [`reg_semantics`] values.
pub fn bexpr_semantics(es: &EventStructure, cond: &BExpr) -> bool {
    match cond {
        BExpr::Cmp(op, l, r) => op.apply(expr_semantics(es, l), expr_semantics(es, r)),
        BExpr::And(l, r) => bexpr_semantics(es, l) && bexpr_semantics(es, r),
        BExpr::Or(l, r) => bexpr_semantics(es, l) || bexpr_semantics(es, r),
        BExpr::Not(l) => !bexpr_semantics(es, l),
    }
}

/// The thread state of `tid` induced by a timestamp mapping: each view is
/// the join of ψ over its prior set, promises are the thread's messages not
/// covered by a fulfill, registers carry their ⟦·⟧_ℰ value at the view of
/// their last bar.
pub fn views_from(
    es: &EventStructure,
    psi: &PsiMapping,
    memory: &Memory,
    tid: ThreadId,
) -> TState {
    let jn = |set: &BTreeSet<EventId>| {
        set.iter().map(|e| psi[e]).fold(Timestamp::ZERO, Timestamp::join)
    };
    let ff_tau: BTreeSet<EventId> = es
        .event_ids()
        .filter(|&e| matches!(es.label(e), ActionLabel::Ff { tid: t, .. } if *t == tid))
        .collect();
    let pr_fnc = es.pr_fnc(tid);
    let pr_bar = es.pr_bar_thread(tid);

    let mut prom: BTreeSet<Timestamp> = memory.owned_by(tid);
    for e in &ff_tau {
        prom.remove(&psi[e]);
    }

    let mut coh = BTreeMap::new();
    let locs: BTreeSet<Loc> = es
        .events
        .iter()
        .filter_map(|d| match &d.label {
            ActionLabel::Prm { loc, .. }
            | ActionLabel::Ff { loc, .. }
            | ActionLabel::BarLoc { loc, .. } => Some(loc.clone()),
            _ => None,
        })
        .collect();
    for x in locs {
        let mut set: BTreeSet<EventId> = ff_tau
            .iter()
            .copied()
            .filter(|&e| es.label(e).loc() == Some(&x))
            .collect();
        set.extend(es.pr_bar_loc(tid, &x));
        let t = jn(&set);
        if t != Timestamp::ZERO {
            coh.insert(x, t);
        }
    }

    let mut regs = BTreeMap::new();
    let bar_regs: BTreeSet<Reg> = es
        .events
        .iter()
        .filter(|d| d.label.tid() == Some(tid))
        .filter_map(|d| d.label.bar_reg().cloned())
        .collect();
    for a in bar_regs {
        regs.insert(a.clone(), (reg_semantics(es, &a), jn(&es.pr_bar_reg(&a))));
    }

    let fnc_and_ff: BTreeSet<EventId> = pr_fnc.intersection(&ff_tau).copied().collect();
    TState {
        prom,
        coh,
        regs,
        v_read: jn(&fnc_and_ff.union(&pr_bar).copied().collect()),
        v_w_old: jn(&ff_tau),
        v_w_new: jn(&pr_fnc
            .iter()
            .copied()
            .filter(|e| ff_tau.contains(e) || pr_bar.contains(e))
            .collect()),
        v_ctrl: jn(&es.pr_tst(tid)),
    }
}

/// Semantic thread-state equality: absent coherence or register entries
/// count as their zero defaults.
pub fn states_equal(a: &TState, b: &TState) -> bool {
    if a.prom != b.prom
        || a.v_read != b.v_read
        || a.v_w_old != b.v_w_old
        || a.v_w_new != b.v_w_new
        || a.v_ctrl != b.v_ctrl
    {
        return false;
    }
    let locs: BTreeSet<&Loc> = a.coh.keys().chain(b.coh.keys()).collect();
    if locs.iter().any(|x| a.coh(x) != b.coh(x)) {
        return false;
    }
    let regs: BTreeSet<&Reg> = a.regs.keys().chain(b.regs.keys()).collect();
    regs.iter().all(|r| a.reg(r) == b.reg(r))
}

/// Whether a machine state matches an assertion: some mapping ψ makes the
/// memory consistent with the structure and induces exactly the given
/// thread states (thread i+1 at index i).
pub fn matches(es: &EventStructure, states: &[TState], memory: &Memory) -> bool {
    enumerate_psi(es, memory).iter().any(|psi| {
        states.iter().enumerate().all(|(i, ts)| {
            states_equal(&views_from(es, psi, memory, ThreadId(i as u32 + 1)), ts)
        })
    })
}

/// The canonical final machine state of an interference-free configuration:
/// the memory lists the fulfilled writes in witness order, and each thread
/// state is induced on the thread's local structure by the position of its
/// events' covering tuples. `None` when a thread would retain an
/// outstanding promise.
pub fn final_states(
    locals: &[EventStructure],
    comp: &EventStructure,
    w: &InterferenceFreeWitness,
) -> Option<(Vec<TState>, Memory)> {
    debug_assert_eq!(comp.label(w.order[0]), &ActionLabel::Ini);
    let mut memory = Memory::new();
    for &e in &w.order[1..] {
        match comp.label(e) {
            ActionLabel::Ff { tid, loc, val, .. } => {
                memory.push(WriteMessage::Write { loc: loc.clone(), val: *val, tid: *tid });
            }
            _ => return None,
        }
    }
    let pos: BTreeMap<EventId, usize> =
        w.order.iter().enumerate().map(|(k, &e)| (e, k)).collect();

    let mut states = Vec::with_capacity(locals.len());
    for (i, es) in locals.iter().enumerate() {
        let tid = ThreadId(i as u32 + 1);
        let mut psi = PsiMapping::new();
        for e in es.event_ids().filter(|&e| es.label(e).is_memory()) {
            let cover = w.config.iter().copied().find(|&c| {
                comp.events[c].slots.as_ref().is_some_and(|s| s[i] == Some(e))
            })?;
            psi.insert(e, Timestamp(*pos.get(&cover)?));
        }
        let ts = views_from(es, &psi, &memory, tid);
        if !ts.prom.is_empty() {
            return None;
        }
        states.push(ts);
    }
    Some((states, memory))
}

/// Final register valuation of a set of thread states. Register names are
/// globally unique, so the maps merge without collision.
pub fn register_values(states: &[TState]) -> BTreeMap<Reg, Val> {
    states
        .iter()
        .flat_map(|ts| ts.regs.iter().map(|(a, (v, _))| (a.clone(), *v)))
        .collect()
}
