use std::collections::BTreeSet;

use wmmr_core::estructure::*;
use wmmr_core::litmus::{Loc, Reg, ThreadId};

fn loc(s: &str) -> Loc {
    Loc::new(s)
}

fn reg(s: &str) -> Reg {
    Reg::new(s)
}

fn prm(tid: u32, x: &str, v: i64) -> ActionLabel {
    ActionLabel::Prm { tid: ThreadId(tid), loc: loc(x), val: v, ts: None }
}

fn ff(tid: u32, x: &str, v: i64) -> ActionLabel {
    ActionLabel::Ff { tid: ThreadId(tid), loc: loc(x), val: v, ts: None }
}

fn add_ff(es: &EventStructure, tid: u32, x: &str, v: i64) -> EventStructure {
    es.extend(ExtendItem::Ff { tid: ThreadId(tid), loc: loc(x), val: v, ts: None })
}

fn add_bar(es: &EventStructure, tid: u32, a: &str, x: &str) -> EventStructure {
    es.extend(ExtendItem::BarLoc { tid: ThreadId(tid), reg: reg(a), loc: loc(x) })
}

fn add_fnc(es: &EventStructure, tid: u32) -> EventStructure {
    es.extend(ExtendItem::Fnc { tid: ThreadId(tid) })
}

fn event(es: &EventStructure, label: &ActionLabel) -> EventId {
    es.event_ids()
        .find(|&e| es.label(e) == label)
        .unwrap_or_else(|| panic!("no event labelled {label}"))
}

/// LB thread 1 without fences: a := y (reading 1 from thread 2), x := 1.
fn lb_thread1() -> EventStructure {
    let es = ini_structure().append_read_chain(&[prm(2, "y", 1)]).unwrap();
    add_ff(&add_bar(&es, 1, "a", "y"), 1, "x", 1)
}

/// LB thread 2 without fences, symmetric.
fn lb_thread2() -> EventStructure {
    let es = ini_structure().append_read_chain(&[prm(1, "x", 1)]).unwrap();
    add_ff(&add_bar(&es, 2, "b", "x"), 2, "y", 1)
}

/// LB+dmb thread: read, bar, fence, fulfill.
fn lb_dmb_thread(tid: u32, read_tid: u32, rx: &str, a: &str, wx: &str) -> EventStructure {
    let es = ini_structure().append_read_chain(&[prm(read_tid, rx, 1)]).unwrap();
    add_ff(&add_fnc(&add_bar(&es, tid, a, rx), tid), tid, wx, 1)
}

#[test]
fn ini_structure_shape() {
    let es = ini_structure();
    assert_eq!(es.events.len(), 1);
    assert!(es.flow.is_empty() && es.lambda.is_empty() && es.conflict.is_empty());
    assert_eq!(es.last_exact(&ActionLabel::Ini), Some(0));
    assert_eq!(es.last_exact(&prm(1, "x", 1)), None);
    assert!(is_configuration(&es, &[0].into_iter().collect()));
}

#[test]
fn last_on_lb_thread() {
    let es = lb_thread1();
    let last_ff = es.last_matching(|l| {
        matches!(l, ActionLabel::Ff { tid: ThreadId(1), loc: x, .. } if *x == loc("x"))
    });
    assert_eq!(last_ff, [event(&es, &ff(1, "x", 1))].into_iter().collect());
}

#[test]
fn last_act_y_excludes_bars() {
    // chain prm(2,y,1) ↠ bar(a,y): the bar is not in Act^y.
    let es = ini_structure().append_read_chain(&[prm(2, "y", 1)]).unwrap();
    let es = add_bar(&es, 1, "a", "y");
    let lasts = es.last_matching(|l| l.acts_on(&loc("y")));
    let expect: BTreeSet<EventId> =
        [es.ini_event(), event(&es, &prm(2, "y", 1))].into_iter().collect();
    assert_eq!(lasts, expect);
}

#[test]
fn extend_ff_from_ini() {
    let es = add_ff(&ini_structure(), 1, "x", 5);
    assert_eq!(es.events.len(), 2);
    assert_eq!(es.flow, [(0, 1)].into_iter().collect());
    assert_eq!(*es.label(1), ff(1, "x", 5));
}

#[test]
fn extend_fnc_after_chain() {
    let es = ini_structure().append_read_chain(&[prm(2, "y", 1)]).unwrap();
    let es = add_fnc(&add_bar(&es, 1, "a", "y"), 1);
    let fnc = event(&es, &ActionLabel::Fnc { tid: ThreadId(1) });
    let bar =
        event(&es, &ActionLabel::BarLoc { tid: ThreadId(1), reg: reg("a"), loc: loc("y") });
    assert!(es.flow_before(bar, fnc));
    assert!(es.flow_before(event(&es, &prm(2, "y", 1)), fnc));
}

#[test]
fn extend_ff_different_location_from_ini_only() {
    let es = add_ff(&add_ff(&ini_structure(), 1, "x", 5), 1, "y", 1);
    let fy = event(&es, &ff(1, "y", 1));
    let preds: BTreeSet<EventId> =
        es.flow.iter().filter(|(_, b)| *b == fy).map(|(a, _)| *a).collect();
    assert_eq!(preds, [es.ini_event()].into_iter().collect());
}

#[test]
fn read_chain_mp_reader() {
    let es = ini_structure()
        .append_read_chain(&[prm(1, "x", 5), prm(1, "y", 1)])
        .unwrap();
    let px = event(&es, &prm(1, "x", 5));
    let py = event(&es, &prm(1, "y", 1));
    assert!(es.flow.contains(&(es.ini_event(), px)));
    assert!(es.flow.contains(&(px, py)));
}

#[test]
fn read_chain_after_own_fulfill() {
    let es = add_ff(&ini_structure(), 1, "x", 5);
    let es2 = es.append_read_chain(&[prm(2, "x", 7)]).unwrap();
    let fx = event(&es2, &ff(1, "x", 5));
    let p = event(&es2, &prm(2, "x", 7));
    assert!(es2.flow.contains(&(fx, p)));
    // empty chain leaves the structure unchanged
    assert_eq!(es.append_read_chain(&[]).unwrap(), es);
}

#[test]
fn restrict_marks_ini_edge() {
    let es = ini_structure().append_read_chain(&[prm(1, "y", 1)]).unwrap();
    let es = add_bar(&es, 2, "a", "y");
    let p = event(&es, &prm(1, "y", 1));
    let restricted = es.restrict(es.ini_event(), &loc("x"), ThreadId(2));
    assert_eq!(
        restricted.restriction(es.ini_event(), p),
        [loc("x")].into_iter().collect()
    );
    // idempotent, and restricting with no matching edges changes nothing
    assert_eq!(restricted.restrict(es.ini_event(), &loc("x"), ThreadId(2)), restricted);
    assert_eq!(es.restrict(p, &loc("z"), ThreadId(1)).lambda, es.lambda);
}

#[test]
fn compose_lb_sync_events_and_conflicts() {
    let (e1, e2) = (lb_thread1(), lb_thread2());
    let comp = parallel_compose(&[e1.clone(), e2.clone()]);
    let py = event(&e1, &prm(2, "y", 1));
    let fy = event(&e2, &ff(2, "y", 1));
    let sync_id = comp
        .event_ids()
        .find(|&k| comp.events[k].slots == Some(vec![Some(py), Some(fy)]))
        .expect("missing sync tuple");
    assert_eq!(*comp.label(sync_id), ff(2, "y", 1));
    let lifted_read = comp
        .event_ids()
        .find(|&k| comp.events[k].slots == Some(vec![Some(py), None]))
        .unwrap();
    let lifted_ff = comp
        .event_ids()
        .find(|&k| comp.events[k].slots == Some(vec![None, Some(fy)]))
        .unwrap();
    assert!(comp.in_conflict(sync_id, lifted_read));
    assert!(comp.in_conflict(sync_id, lifted_ff));
    assert!(!is_configuration(
        &comp,
        &[sync_id, lifted_read].into_iter().collect()
    ));
}

#[test]
fn compose_single_local_is_isomorphic() {
    let es = add_ff(&add_ff(&ini_structure(), 1, "x", 1), 1, "y", 2);
    let comp = parallel_compose(std::slice::from_ref(&es));
    assert_eq!(comp.events.len(), es.events.len());
    assert_eq!(comp.conflict.len(), 0);
    for (a, b) in &es.flow {
        let ca = comp
            .event_ids()
            .find(|&k| comp.events[k].slots == Some(vec![Some(*a)]))
            .unwrap();
        let cb = comp
            .event_ids()
            .find(|&k| comp.events[k].slots == Some(vec![Some(*b)]))
            .unwrap();
        assert!(comp.flow.contains(&(ca, cb)));
    }
}

/// MP+dmb locals of Example 1: writer ini↠ff(1,x,5)↠fnc↠ff(1,y,1); reader
/// with the {x} restriction on the ini edge.
fn mp_dmb_locals() -> (EventStructure, EventStructure) {
    let writer = add_ff(&add_fnc(&add_ff(&ini_structure(), 1, "x", 5), 1), 1, "y", 1);
    let r = ini_structure().append_read_chain(&[prm(1, "y", 1)]).unwrap();
    let r = add_bar(&r, 2, "a", "y");
    let r = add_bar(&r, 2, "b", "x");
    let r = r.restrict(r.ini_event(), &loc("x"), ThreadId(2));
    (writer, r)
}

#[test]
fn compose_mp_example() {
    let (w, r) = mp_dmb_locals();
    let comp = parallel_compose(&[w.clone(), r.clone()]);
    let fy = event(&w, &ff(1, "y", 1));
    let py = event(&r, &prm(1, "y", 1));
    let sync_id = comp
        .event_ids()
        .find(|&k| comp.events[k].slots == Some(vec![Some(fy), Some(py)]))
        .expect("missing sync tuple");
    assert_eq!(*comp.label(sync_id), ff(1, "y", 1));
    // the reader's {x} restriction is inherited on the ini edge
    assert_eq!(
        comp.restriction(comp.ini_event(), sync_id),
        [loc("x")].into_iter().collect()
    );
}

#[test]
fn lb_plain_has_interference_free_configuration() {
    let locals = [lb_thread1(), lb_thread2()];
    assert!(synchronizable(&locals));
    let comp = parallel_compose(&locals);
    let w = find_interference_free(&comp, &locals).expect("LB must have a configuration");
    validate_interference_free(&comp, &locals, &w).unwrap();
}

#[test]
fn lb_dmb_has_none_and_forced_set_is_cyclic() {
    let locals = [
        lb_dmb_thread(1, 2, "y", "a", "x"),
        lb_dmb_thread(2, 1, "x", "b", "y"),
    ];
    assert!(synchronizable(&locals));
    let comp = parallel_compose(&locals);
    assert_eq!(find_interference_free(&comp, &locals), None);

    // The forced candidate (both reads synchronised) contains a flow cycle.
    let slots_of = |s: Vec<Option<EventId>>| {
        comp.event_ids()
            .find(|&k| comp.events[k].slots == Some(s.clone()))
            .unwrap()
    };
    let (t1, t2) = (&locals[0], &locals[1]);
    let c: BTreeSet<EventId> = [
        comp.ini_event(),
        slots_of(vec![Some(event(t1, &prm(2, "y", 1))), Some(event(t2, &ff(2, "y", 1)))]),
        slots_of(vec![Some(event(t1, &ff(1, "x", 1))), Some(event(t2, &prm(1, "x", 1)))]),
        slots_of(vec![
            Some(event(t1, &ActionLabel::BarLoc { tid: ThreadId(1), reg: reg("a"), loc: loc("y") })),
            None,
        ]),
        slots_of(vec![Some(event(t1, &ActionLabel::Fnc { tid: ThreadId(1) })), None]),
        slots_of(vec![
            None,
            Some(event(t2, &ActionLabel::BarLoc { tid: ThreadId(2), reg: reg("b"), loc: loc("x") })),
        ]),
        slots_of(vec![None, Some(event(t2, &ActionLabel::Fnc { tid: ThreadId(2) }))]),
    ]
    .into_iter()
    .collect();
    assert!(!is_configuration(&comp, &c));
}

#[test]
fn mp_dmb_has_no_interference_free_configuration() {
    let locals = mp_dmb_locals();
    let locals = [locals.0, locals.1];
    assert!(synchronizable(&locals));
    let comp = parallel_compose(&locals);
    assert_eq!(find_interference_free(&comp, &locals), None);
}

#[test]
fn single_thread_interference_freedom() {
    // no reads: succeeds
    let es = add_ff(&add_ff(&ini_structure(), 1, "x", 1), 1, "x", 2);
    let locals = [es];
    let comp = parallel_compose(&locals);
    let w = find_interference_free(&comp, &locals).unwrap();
    validate_interference_free(&comp, &locals, &w).unwrap();
    assert_eq!(w.order.len(), 3);

    // an (unsynchronisable) read: fails
    let es = ini_structure().append_read_chain(&[prm(2, "x", 1)]).unwrap();
    let locals = [add_bar(&es, 1, "a", "x")];
    let comp = parallel_compose(&locals);
    assert_eq!(find_interference_free(&comp, &locals), None);
}

#[test]
fn ini_acts_on_every_location() {
    assert!(ActionLabel::Ini.acts_on(&loc("x")));
    assert!(ActionLabel::Ini.acts_on(&loc("anything")));
    // a restriction interval around ini-adjacent writes: the WRC-style check
    // that ini participates in every Act^x set
    let es = ini_structure().append_read_chain(&[prm(1, "y", 1)]).unwrap();
    let es = add_bar(&es, 2, "a", "y");
    // no bar on x exists, so the prior set for x is empty ...
    assert!(es.pr_bar_loc(ThreadId(2), &loc("x")).is_empty());
    // ... while the bar on y collects its whole memory prefix, ini included
    let expect: BTreeSet<EventId> =
        [es.ini_event(), event(&es, &prm(1, "y", 1))].into_iter().collect();
    assert_eq!(es.pr_bar_loc(ThreadId(2), &loc("y")), expect);
}

#[test]
fn linearize_respects_restrictions() {
    // ini ↠_{x} f(y-write), ini ↠ e(x-write): e may not sit between.
    let mut es = add_ff(&add_ff(&ini_structure(), 2, "x", 1), 1, "y", 1);
    let e = event(&es, &ff(2, "x", 1));
    let f = event(&es, &ff(1, "y", 1));
    es.lambda.insert((es.ini_event(), f), [loc("x")].into_iter().collect());
    let c: BTreeSet<EventId> = es.event_ids().collect();
    let order = linearize(&es, &c).unwrap();
    assert_eq!(order, vec![es.ini_event(), f, e]);
}

#[test]
fn dot_export_mentions_labels_and_restrictions() {
    let (_, r) = mp_dmb_locals();
    let dot = r.to_dot(None);
    assert!(dot.contains("prm(1,y,1)"));
    assert!(dot.contains("{x}"));
    assert!(dot.starts_with("digraph"));
}
