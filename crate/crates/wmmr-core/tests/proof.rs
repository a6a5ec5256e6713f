use std::collections::{BTreeMap, BTreeSet};

use wmmr_core::assertion::final_states;
use wmmr_core::estructure::*;
use wmmr_core::litmus::*;
use wmmr_core::promising::*;
use wmmr_core::proof::*;

fn loc(s: &str) -> Loc {
    Loc::new(s)
}

fn reg(s: &str) -> Reg {
    Reg::new(s)
}

fn prm(tid: u32, l: &str, v: Val) -> ActionLabel {
    ActionLabel::Prm { tid: ThreadId(tid), loc: loc(l), val: v, ts: None }
}

fn universe_of(test: &LitmusTest) -> BTreeSet<Val> {
    value_universe(test, 0, DEFAULT_UNIVERSE_CAP).unwrap()
}

fn outlines_for(test: &LitmusTest, tid: u32) -> OutlineSet {
    let menu = read_menu(test, ThreadId(tid), &universe_of(test));
    derive_outlines(ThreadId(tid), test.thread(ThreadId(tid)), &menu, &ProofBounds::default())
}

#[test]
fn skip_thread_has_exactly_the_ini_outline() {
    let test = parse_litmus(
        "name: one\nlocations: x\nthread 1:\n  skip\nexists (x=0)\n",
    )
    .unwrap();
    let set = outlines_for(&test, 1);
    assert!(!set.bound_hit);
    assert_eq!(set.outlines.len(), 1);
    assert_eq!(set.outlines[0].final_structure, ini_structure());
}

#[test]
fn lb_thread1_outline_reads_the_promise() {
    let lb = builtin("LB").unwrap();
    let set = outlines_for(&lb, 1);
    assert!(!set.bound_hit);
    // ini -> prm(2,y,1) -> bar(a,y), plus ini -> ff(1,x,1)
    let expect = ini_structure()
        .append_read_chain(&[prm(2, "y", 1)])
        .unwrap()
        .extend(ExtendItem::BarLoc { tid: ThreadId(1), reg: reg("a"), loc: loc("y") })
        .extend(ExtendItem::Ff { tid: ThreadId(1), loc: loc("x"), val: 1, ts: None });
    assert!(
        set.outlines.iter().any(|o| o.final_structure == expect),
        "expected LB thread-1 outline missing"
    );
    // every outline starts from Ini and has one step per discharged statement
    for o in &set.outlines {
        assert_eq!(o.steps.last().unwrap().post, o.final_structure);
    }
}

#[test]
fn mp_reader_chain_then_exhibited_read() {
    let mp = builtin("MP").unwrap();
    let set = outlines_for(&mp, 2);
    assert!(!set.bound_hit);
    // first load: chain [prm(1,x,5), prm(1,y,1)]; second load: exhibited
    // read of the chain's x event
    let after_first = ini_structure()
        .append_read_chain(&[prm(1, "x", 5), prm(1, "y", 1)])
        .unwrap()
        .extend(ExtendItem::BarLoc { tid: ThreadId(2), reg: reg("a"), loc: loc("y") });
    let x_event = after_first
        .event_ids()
        .find(|&e| matches!(after_first.label(e), ActionLabel::Prm { loc, .. } if *loc == loc2("x")))
        .unwrap();
    let expect = after_first
        .extend(ExtendItem::BarLoc { tid: ThreadId(2), reg: reg("b"), loc: loc("x") })
        .restrict(x_event, &loc("x"), ThreadId(2));
    assert!(set.outlines.iter().any(|o| o.steps[0].post == after_first));
    assert!(set.outlines.iter().any(|o| o.final_structure == expect));
}

fn loc2(s: &str) -> Loc {
    loc(s)
}

#[test]
fn outlines_never_leave_unconsumed_promises() {
    for test in builtin_corpus() {
        for (tid, _) in &test.threads {
            let set = outlines_for(&test, tid.0);
            for o in &set.outlines {
                let es = &o.final_structure;
                for e in es.event_ids() {
                    if let ActionLabel::Prm { loc: l, .. } = es.label(e) {
                        assert!(
                            es.event_ids().any(|b| es.flow.contains(&(e, b))
                                && matches!(es.label(b),
                                            ActionLabel::BarLoc { loc: bl, .. } if bl == l)),
                            "{}: dangling read in outline",
                            test.name
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn corpus_verdicts_proof_engine() {
    for test in builtin_corpus() {
        let t = elaborate(&test, 2);
        let r = check_reachable(&t, &ProofBounds::default());
        let expect = match t.expected {
            Expected::Reachable => Verdict::Reachable,
            Expected::Unreachable => Verdict::Unreachable,
            Expected::Unspecified => continue,
        };
        assert_eq!(r.verdict, expect, "{}", t.name);
        if r.verdict == Verdict::Reachable {
            let w = r.witness.expect("reachable without witness");
            let locals: Vec<EventStructure> =
                w.outlines.iter().map(|o| o.final_structure.clone()).collect();
            validate_interference_free(&w.composition, &locals, &w.witness).unwrap();
        }
    }
}

#[test]
fn valuation_sets_match_operational_on_two_thread_corpus() {
    for name in ["LB", "LB+dmb", "MP", "MP+dmb", "SB"] {
        let t = elaborate(&builtin(name).unwrap(), 2);
        let (vals, complete) = enumerate_valuations(&t, &ProofBounds::default());
        assert!(complete, "{name}");
        let op = explore(&t, &ExploreBounds::default()).unwrap();
        assert!(!op.bounded_incomplete);
        assert_eq!(vals, op.valuations(), "{name}");
    }
}

#[test]
fn single_store_trace_replays_to_annotated_fulfill() {
    let trace: Trace = vec![
        TransitionLabel::Prm { tid: ThreadId(1), loc: loc("x"), val: 1, ts: Timestamp(1) },
        TransitionLabel::Ff {
            tid: ThreadId(1),
            via: None,
            loc: loc("x"),
            val: 1,
            ts: Timestamp(1),
        },
    ];
    let out = outline_from_trace(&trace, 1).unwrap();
    assert_eq!(out.len(), 1);
    let expect = ini_structure().extend(ExtendItem::Ff {
        tid: ThreadId(1),
        loc: loc("x"),
        val: 1,
        ts: Some(Timestamp(1)),
    });
    assert_eq!(out[0], expect);
    validate_well_formed(&out[0]).unwrap();
}

#[test]
fn non_promises_first_trace_rejected() {
    let trace: Trace = vec![
        TransitionLabel::Fnc { tid: ThreadId(1) },
        TransitionLabel::Prm { tid: ThreadId(1), loc: loc("x"), val: 1, ts: Timestamp(1) },
    ];
    assert!(matches!(
        outline_from_trace(&trace, 1),
        Err(ReplayError::NotPromisesFirst)
    ));
}

#[test]
fn unfulfilled_promise_rejected() {
    let trace: Trace = vec![TransitionLabel::Prm {
        tid: ThreadId(1),
        loc: loc("x"),
        val: 1,
        ts: Timestamp(1),
    }];
    assert!(matches!(outline_from_trace(&trace, 1), Err(ReplayError::Unfulfilled(1))));
}

#[test]
fn mp_weak_trace_replays_with_two_read_chain() {
    // find an accepted MP trace reading y=1 before x=5
    let t = elaborate(&builtin("MP").unwrap(), 2);
    let r = explore(&t, &ExploreBounds::default()).unwrap();
    let (fs, trace) = r
        .finals
        .iter()
        .find(|(fs, _)| fs.regs[&reg("a")] == 1 && fs.regs[&reg("b")] == 5)
        .expect("MP outcome a=1, b=5 not found operationally");
    let outlines = outline_from_trace(trace, 2).unwrap();
    for es in &outlines {
        validate_well_formed(es).unwrap();
    }
    // the reader assumed both writes at once: a chain of two annotated reads
    let reader = &outlines[1];
    let chain: Vec<_> = reader
        .event_ids()
        .filter(|&e| matches!(reader.label(e), ActionLabel::Prm { .. }))
        .collect();
    assert_eq!(chain.len(), 2);
    assert!(reader.flow_before(chain[0], chain[1]) || reader.flow_before(chain[1], chain[0]));
    let comp = parallel_compose(&outlines);
    let w = trace_configuration(&comp, &outlines, &fs.memory).unwrap();
    validate_interference_free(&comp, &outlines, &w).unwrap();
}

#[test]
fn theorem2_roundtrip_on_corpus() {
    for test in builtin_corpus() {
        let t = elaborate(&test, 2);
        let n = t.threads.len();
        let all_regs: BTreeSet<Reg> =
            t.threads.iter().flat_map(|(_, s)| s.registers()).collect();
        let r = explore(&t, &ExploreBounds::default()).unwrap();
        assert!(!r.bounded_incomplete, "{}", t.name);
        for (fs, trace) in &r.finals {
            let outlines = outline_from_trace(trace, n)
                .unwrap_or_else(|e| panic!("{}: {e}", t.name));
            for es in &outlines {
                validate_well_formed(es).unwrap_or_else(|e| panic!("{}: {e}", t.name));
            }
            assert!(synchronizable(&outlines), "{}", t.name);
            let comp = parallel_compose(&outlines);
            let w = trace_configuration(&comp, &outlines, &fs.memory)
                .unwrap_or_else(|| panic!("{}: no trace configuration", t.name));
            validate_interference_free(&comp, &outlines, &w)
                .unwrap_or_else(|e| panic!("{}: {e}", t.name));
            let (states, memory) = final_states(&outlines, &comp, &w)
                .unwrap_or_else(|| panic!("{}: no final state", t.name));
            assert_eq!(memory, fs.memory, "{}", t.name);
            let mut vals: BTreeMap<Reg, Val> =
                all_regs.iter().map(|a| (a.clone(), 0)).collect();
            vals.extend(wmmr_core::assertion::register_values(&states));
            assert_eq!(vals, fs.regs, "{}", t.name);
        }
    }
}

#[test]
fn theorem1_proof_valuations_contained_in_operational() {
    for test in builtin_corpus() {
        let t = elaborate(&test, 2);
        let (vals, _) = enumerate_valuations(&t, &ProofBounds::default());
        let op = explore(&t, &ExploreBounds::default()).unwrap().valuations();
        for v in &vals {
            assert!(op.contains(v), "{}: proof-only valuation {v:?}", t.name);
        }
    }
}
