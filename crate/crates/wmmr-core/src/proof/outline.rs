//! Local proof outlines: depth-first enumeration of the per-thread proof
//! rules, producing every final assertion a thread can justify. Reads either
//! take an existing memory event (with a location restriction recording the
//! read-rule side condition) or assume a fresh chain of promises from the
//! read menu.

use std::collections::{BTreeMap, BTreeSet};

use crate::assertion::{bexpr_semantics, reg_semantics};
use crate::estructure::{ini_structure, ActionLabel, EventId, EventStructure, ExtendItem};
use crate::litmus::ast::{LitmusTest, Loc, Statement, StoreRv, ThreadId, Val};

/// Search bounds for the proof engine.
#[derive(Debug, Clone)]
pub struct ProofBounds {
    /// Cap on outlines kept per thread.
    pub max_outlines_per_thread: usize,
    /// Cap on events per local structure.
    pub max_events: usize,
    /// Cap on outline tuples composed and checked.
    pub max_tuples: usize,
    /// Cap on interference-free witnesses and linearizations enumerated per
    /// composition (only relevant for location outcome clauses).
    pub max_witnesses: usize,
    pub universe_cap: usize,
}

impl Default for ProofBounds {
    fn default() -> Self {
        ProofBounds {
            max_outlines_per_thread: 20_000,
            max_events: 48,
            max_tuples: 200_000,
            max_witnesses: 512,
            universe_cap: crate::litmus::DEFAULT_UNIVERSE_CAP,
        }
    }
}

/// One rule application: the atomic statement and its post-assertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub stmt: Statement,
    pub post: EventStructure,
}

/// A complete local proof outline `[Ini] S [ℰ]` for one thread.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofOutline {
    pub tid: ThreadId,
    pub program: Statement,
    pub steps: Vec<ProofStep>,
    pub final_structure: EventStructure,
}

/// Result of outline enumeration; `bound_hit` is set when any cap truncated
/// the search.
#[derive(Debug, Clone, Default)]
pub struct OutlineSet {
    pub outlines: Vec<ProofOutline>,
    pub bound_hit: bool,
}

/// The promises a thread may assume: for every other thread and location it
/// syntactically stores to, the storable values, with a cap on how many
/// promises that thread can fulfil there along one path.
#[derive(Debug, Clone)]
pub struct ReadMenu {
    pub labels: Vec<(ThreadId, Loc, Val)>,
    pub caps: BTreeMap<(ThreadId, Loc), usize>,
}

pub fn read_menu(test: &LitmusTest, tid: ThreadId, universe: &BTreeSet<Val>) -> ReadMenu {
    let mut labels = Vec::new();
    let mut caps = BTreeMap::new();
    for (other, stmt) in &test.threads {
        if *other == tid {
            continue;
        }
        for x in &test.locations {
            let cap = stmt.path_max_stores(x);
            if cap == 0 {
                continue;
            }
            caps.insert((*other, x.clone()), cap);
            let (consts, from_reg) = stmt.storable(x);
            let vals: Vec<Val> = if from_reg {
                universe.iter().copied().collect()
            } else {
                consts.into_iter().collect()
            };
            for v in vals {
                labels.push((*other, x.clone(), v));
            }
        }
    }
    ReadMenu { labels, caps }
}

struct Search<'a> {
    tid: ThreadId,
    menu: &'a ReadMenu,
    bounds: &'a ProofBounds,
    program: &'a Statement,
    out: OutlineSet,
}

/// Enumerate all local proof outlines of an elaborated thread program.
pub fn derive_outlines(
    tid: ThreadId,
    program: &Statement,
    menu: &ReadMenu,
    bounds: &ProofBounds,
) -> OutlineSet {
    assert!(!program.contains_iterate(), "derive_outlines requires an elaborated program");
    let mut s = Search { tid, menu, bounds, program, out: OutlineSet::default() };
    s.go(program, &[], &ini_structure(), &[]);
    s.out
}

impl Search<'_> {
    fn full(&self) -> bool {
        self.out.outlines.len() >= self.bounds.max_outlines_per_thread
    }

    /// Continue after `cur` has been discharged with post-structure `pre`.
    fn advance(&mut self, rest: &[&Statement], pre: &EventStructure, steps: &[ProofStep]) {
        if self.full() {
            self.out.bound_hit = true;
            return;
        }
        match rest.split_first() {
            Some((next, tail)) => self.go(next, tail, pre, steps),
            None => {
                // completeness never needs outlines with dangling reads:
                // every assumed promise is eventually consumed by a load
                if unbarred_reads(pre).is_empty() {
                    self.out.outlines.push(ProofOutline {
                        tid: self.tid,
                        program: self.program.clone(),
                        steps: steps.to_vec(),
                        final_structure: pre.clone(),
                    });
                }
            }
        }
    }

    fn step(
        &mut self,
        stmt: &Statement,
        rest: &[&Statement],
        steps: &[ProofStep],
        post: EventStructure,
    ) {
        if post.events.len() > self.bounds.max_events {
            self.out.bound_hit = true;
            return;
        }
        let mut steps2 = steps.to_vec();
        steps2.push(ProofStep { stmt: stmt.clone(), post: post.clone() });
        self.advance(rest, &post, &steps2);
    }

    fn go(
        &mut self,
        cur: &Statement,
        rest: &[&Statement],
        pre: &EventStructure,
        steps: &[ProofStep],
    ) {
        if self.full() {
            self.out.bound_hit = true;
            return;
        }
        match cur {
            Statement::Skip => self.advance(rest, pre, steps),
            Statement::Seq(a, b) => {
                let mut rest2: Vec<&Statement> = Vec::with_capacity(rest.len() + 1);
                rest2.push(b);
                rest2.extend_from_slice(rest);
                self.go(a, &rest2, pre, steps);
            }
            Statement::Choice(a, b) => {
                self.go(a, rest, pre, steps);
                self.go(b, rest, pre, steps);
            }
            Statement::Iterate(_) => panic!("iterate must be elaborated"),
            Statement::Store(x, rv) => {
                let item = match rv {
                    StoreRv::Const(k) => ExtendItem::Ff {
                        tid: self.tid,
                        loc: x.clone(),
                        val: *k,
                        ts: None,
                    },
                    StoreRv::Reg(a) => ExtendItem::FfViaReg {
                        reg: a.clone(),
                        tid: self.tid,
                        loc: x.clone(),
                        val: reg_semantics(pre, a),
                        ts: None,
                    },
                };
                self.step(cur, rest, steps, pre.extend(item));
            }
            Statement::Dmb => {
                self.step(cur, rest, steps, pre.extend(ExtendItem::Fnc { tid: self.tid }));
            }
            Statement::RegAssign(a, e) => {
                let item = ExtendItem::BarExp {
                    tid: self.tid,
                    reg: a.clone(),
                    exp: e.clone(),
                };
                self.step(cur, rest, steps, pre.extend(item));
            }
            Statement::Asm(b) => {
                if bexpr_semantics(pre, b) {
                    let item = ExtendItem::Tst { tid: self.tid, cond: b.clone() };
                    self.step(cur, rest, steps, pre.extend(item));
                }
                // false condition: the branch is dead, no outline
            }
            Statement::Load(a, x) => {
                let bar = ExtendItem::BarLoc {
                    tid: self.tid,
                    reg: a.clone(),
                    loc: x.clone(),
                };
                // PR-ReadEx: read from the flow-last event on x
                for e in last_act(pre, x) {
                    let post = pre.extend(bar.clone()).restrict(e, x, self.tid);
                    self.step(cur, rest, steps, post);
                }
                // PR-ReadNew: assume a fresh chain of promises ending on x
                let mut counts: BTreeMap<(ThreadId, Loc), usize> = BTreeMap::new();
                for d in &pre.events {
                    if let ActionLabel::Prm { tid, loc, .. } = &d.label {
                        *counts.entry((*tid, loc.clone())).or_insert(0) += 1;
                    }
                }
                let mut budget: BTreeMap<Loc, usize> = BTreeMap::new();
                for &(_, ref y, _) in &self.menu.labels {
                    budget.entry(y.clone()).or_insert_with(|| {
                        rest.iter().map(|s| s.path_max_loads(y)).sum()
                    });
                }
                let mut unbarred: BTreeMap<Loc, usize> = BTreeMap::new();
                for e in unbarred_reads(pre) {
                    let y = pre.label(e).loc().expect("read without location").clone();
                    *unbarred.entry(y).or_insert(0) += 1;
                }
                let mut chain: Vec<ActionLabel> = Vec::new();
                self.chains(cur, rest, pre, steps, x, &bar, &mut chain, &mut counts, &budget,
                            &unbarred);
            }
        }
    }

    /// Enumerate read chains: every element respects the per-(thread, loc)
    /// promise caps, and every element except the final one (which is
    /// consumed by the current load) must be consumable by a later load of
    /// its location.
    #[allow(clippy::too_many_arguments)]
    fn chains(
        &mut self,
        cur: &Statement,
        rest: &[&Statement],
        pre: &EventStructure,
        steps: &[ProofStep],
        x: &Loc,
        bar: &ExtendItem,
        chain: &mut Vec<ActionLabel>,
        counts: &mut BTreeMap<(ThreadId, Loc), usize>,
        budget: &BTreeMap<Loc, usize>,
        unbarred: &BTreeMap<Loc, usize>,
    ) {
        if self.full() {
            self.out.bound_hit = true;
            return;
        }
        for (tid, y, v) in self.menu.labels.clone() {
            let key = (tid, y.clone());
            let used = counts.get(&key).copied().unwrap_or(0);
            if used >= self.menu.caps[&key] {
                continue;
            }
            counts.insert(key.clone(), used + 1);
            chain.push(ActionLabel::Prm { tid, loc: y.clone(), val: v, ts: None });
            if y == *x && self.dangling_ok(chain, x, budget, unbarred) {
                let chained = pre
                    .append_read_chain(chain)
                    .expect("menu chains are sequential reads");
                self.step(cur, rest, steps, chained.extend(bar.clone()));
            }
            if self.dangling_extendable(chain, budget, unbarred) {
                self.chains(cur, rest, pre, steps, x, bar, chain, counts, budget, unbarred);
            }
            chain.pop();
            counts.insert(key, used);
        }
    }

    /// After this load consumes the chain's last element, every other
    /// unbarred read must fit within the loads still ahead.
    fn dangling_ok(
        &self,
        chain: &[ActionLabel],
        x: &Loc,
        budget: &BTreeMap<Loc, usize>,
        unbarred: &BTreeMap<Loc, usize>,
    ) -> bool {
        let mut open = unbarred.clone();
        for l in chain {
            let y = l.loc().expect("chain labels are reads").clone();
            *open.entry(y).or_insert(0) += 1;
        }
        *open.entry(x.clone()).or_insert(1) -= 1;
        open.iter().all(|(y, n)| *n <= budget.get(y).copied().unwrap_or(0))
    }

    /// A chain prefix is worth extending while its elements could still all
    /// be consumed later.
    fn dangling_extendable(
        &self,
        chain: &[ActionLabel],
        budget: &BTreeMap<Loc, usize>,
        unbarred: &BTreeMap<Loc, usize>,
    ) -> bool {
        let mut open = unbarred.clone();
        for l in chain {
            let y = l.loc().expect("chain labels are reads").clone();
            *open.entry(y).or_insert(0) += 1;
        }
        open.iter().all(|(y, n)| *n <= budget.get(y).copied().unwrap_or(0))
    }
}

/// The flow-last events of Act^x: events every other x-event is flow-before.
/// Structures built by the proof rules keep Act^x totally ordered, so this
/// is at most a singleton.
fn last_act(es: &EventStructure, x: &Loc) -> Vec<EventId> {
    let acts: Vec<EventId> = es
        .event_ids()
        .filter(|&e| es.label(e).is_memory() && es.label(e).acts_on(x))
        .collect();
    acts.iter()
        .copied()
        .filter(|&e| acts.iter().all(|&d| d == e || es.flow_before(d, e)))
        .collect()
}

/// Read events with no bar on their location directly flow-after them.
fn unbarred_reads(es: &EventStructure) -> Vec<EventId> {
    es.event_ids()
        .filter(|&e| {
            let ActionLabel::Prm { loc, .. } = es.label(e) else {
                return false;
            };
            !es.event_ids().any(|b| {
                es.flow.contains(&(e, b))
                    && matches!(es.label(b), ActionLabel::BarLoc { loc: l, .. } if l == loc)
            })
        })
        .collect()
}
