//! Location-coloured flow event structures and the operators that grow
//! thread-local (conflict-free) structures during proof outline
//! construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::litmus::ast::{Expr, Loc, Reg, ThreadId, Val};
use crate::promising::Timestamp;

use super::label::ActionLabel;

pub type EventId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventData {
    pub label: ActionLabel,
    /// For events of a parallel composition: one slot per thread, `None`
    /// standing for ⋆. Local structures carry no slots.
    pub slots: Option<Vec<Option<EventId>>>,
}

/// A finite event structure: events with action labels, an irreflexive flow
/// relation carrying location-restriction sets, and a symmetric conflict
/// relation (empty for thread-local structures).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStructure {
    pub events: Vec<EventData>,
    pub flow: BTreeSet<(EventId, EventId)>,
    /// Location restrictions, kept only for edges with a non-empty set.
    pub lambda: BTreeMap<(EventId, EventId), BTreeSet<Loc>>,
    /// Conflict pairs, stored with the smaller id first.
    pub conflict: BTreeSet<(EventId, EventId)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("read chain is not sequential")]
    NonSequentialChain,
    #[error("read chain contains a non-read label")]
    NonReadChain,
}

/// The structure Ini: a single ini-labelled event, empty relations.
pub fn ini_structure() -> EventStructure {
    EventStructure {
        events: vec![EventData { label: ActionLabel::Ini, slots: None }],
        flow: BTreeSet::new(),
        lambda: BTreeMap::new(),
        conflict: BTreeSet::new(),
    }
}

/// Items addable to a conflict-free structure via the ⊕-operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtendItem {
    Ff { tid: ThreadId, loc: Loc, val: Val, ts: Option<Timestamp> },
    /// ⊕^a: a fulfill whose value came from register `reg`, additionally
    /// ordered after the last bar on that register.
    FfViaReg { reg: Reg, tid: ThreadId, loc: Loc, val: Val, ts: Option<Timestamp> },
    BarLoc { tid: ThreadId, reg: Reg, loc: Loc },
    BarExp { tid: ThreadId, reg: Reg, exp: Expr },
    Fnc { tid: ThreadId },
    Tst { tid: ThreadId, cond: crate::litmus::ast::BExpr },
}

impl EventStructure {
    pub fn label(&self, e: EventId) -> &ActionLabel {
        &self.events[e].label
    }

    pub fn event_ids(&self) -> impl Iterator<Item = EventId> {
        0..self.events.len()
    }

    pub fn ini_event(&self) -> EventId {
        self.event_ids()
            .find(|&e| self.events[e].label == ActionLabel::Ini)
            .expect("structure without ini event")
    }

    pub fn in_conflict(&self, a: EventId, b: EventId) -> bool {
        self.conflict.contains(&(a.min(b), a.max(b)))
    }

    pub fn restriction(&self, d: EventId, f: EventId) -> BTreeSet<Loc> {
        self.lambda.get(&(d, f)).cloned().unwrap_or_default()
    }

    /// All events flow-reachable from `e` in one or more steps.
    pub fn flow_successors(&self, e: EventId) -> BTreeSet<EventId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![e];
        while let Some(d) = stack.pop() {
            for &(a, b) in &self.flow {
                if a == d && out.insert(b) {
                    stack.push(b);
                }
            }
        }
        out
    }

    pub fn flow_before(&self, d: EventId, e: EventId) -> bool {
        self.flow_successors(d).contains(&e)
    }

    /// last_α for a single exact label: the unique α-labelled event with
    /// every other α-labelled event transitively flow-before it.
    pub fn last_exact(&self, label: &ActionLabel) -> Option<EventId> {
        let with: Vec<EventId> =
            self.event_ids().filter(|&e| self.label(e) == label).collect();
        match with.len() {
            0 => None,
            1 => Some(with[0]),
            _ => {
                let last = with
                    .iter()
                    .copied()
                    .find(|&e| {
                        with.iter().all(|&d| d == e || self.flow_before(d, e))
                    })
                    .expect("multiple equally-labelled events without a flow-last one");
                Some(last)
            }
        }
    }

    /// last lifted to a set of actions described by a predicate: the union
    /// of last_α over every exact label α (present in the structure) that
    /// satisfies the predicate.
    pub fn last_matching(&self, pred: impl Fn(&ActionLabel) -> bool) -> BTreeSet<EventId> {
        let labels: BTreeSet<&ActionLabel> = self
            .events
            .iter()
            .map(|d| &d.label)
            .filter(|l| pred(l))
            .collect();
        labels
            .into_iter()
            .filter_map(|l| self.last_exact(&l.clone()))
            .collect()
    }

    fn push_event(&mut self, label: ActionLabel, preds: BTreeSet<EventId>) -> EventId {
        let e = self.events.len();
        self.events.push(EventData { label, slots: None });
        for p in preds {
            self.flow.insert((p, e));
        }
        e
    }

    /// The ⊕-operators of the proof rules: add one fresh event with the flow
    /// edges prescribed for its label.
    pub fn extend(&self, item: ExtendItem) -> EventStructure {
        debug_assert!(self.conflict.is_empty());
        let mut es = self.clone();
        match item {
            ExtendItem::Ff { tid, loc, val, ts } => {
                let preds = es.last_matching(|l| {
                    l.acts_on(&loc)
                        | matches!(l, ActionLabel::Fnc { tid: t } if *t == tid)
                        | matches!(l, ActionLabel::Tst { tid: t, .. } if *t == tid)
                });
                es.push_event(ActionLabel::Ff { tid, loc, val, ts }, preds);
            }
            ExtendItem::FfViaReg { reg, tid, loc, val, ts } => {
                let preds = es.last_matching(|l| {
                    l.acts_on(&loc)
                        | matches!(l, ActionLabel::Fnc { tid: t } if *t == tid)
                        | matches!(l, ActionLabel::Tst { tid: t, .. } if *t == tid)
                        | (l.bar_reg() == Some(&reg))
                });
                es.push_event(ActionLabel::Ff { tid, loc, val, ts }, preds);
            }
            ExtendItem::BarLoc { tid, reg, loc } => {
                let preds = es.last_matching(|l| {
                    l.acts_on(&loc)
                        | matches!(l, ActionLabel::Fnc { tid: t } if *t == tid)
                        | l.is_bar()
                });
                es.push_event(ActionLabel::BarLoc { tid, reg, loc }, preds);
            }
            ExtendItem::BarExp { tid, reg, exp } => {
                let mut regs = exp.registers();
                regs.insert(reg.clone());
                let preds = es.last_matching(|l| match l.bar_reg() {
                    Some(b) => regs.contains(b),
                    None => false,
                });
                es.push_event(ActionLabel::BarExp { tid, reg, exp }, preds);
            }
            ExtendItem::Fnc { tid } => {
                let preds = es.last_matching(|l| !matches!(l, ActionLabel::Tst { .. }));
                es.push_event(ActionLabel::Fnc { tid }, preds);
            }
            ExtendItem::Tst { tid, cond } => {
                let regs = cond.registers();
                let mut preds = es.last_matching(|l| match l.bar_reg() {
                    Some(b) => regs.contains(b),
                    None => false,
                });
                // A repeated identical test gets no fresh bar predecessor, so
                // order it after the previous occurrence to keep every label's
                // flow-last event unique.
                preds.extend(es.last_matching(|l| {
                    matches!(l, ActionLabel::Tst { tid: t, cond: c } if *t == tid && *c == cond)
                }));
                es.push_event(ActionLabel::Tst { tid, cond }, preds);
            }
        }
        es
    }

    /// ⊕ ℰ′: append a sequential chain of read events. Each chain event on
    /// location x is additionally ordered after the last fence, bar and
    /// fulfill-on-x events of the base structure; the ini event counts as a
    /// fulfill on every location (e_ini.loc = x for all x).
    pub fn append_read_chain(
        &self,
        chain: &[ActionLabel],
    ) -> Result<EventStructure, StructureError> {
        if chain.iter().any(|l| !l.is_read()) {
            return Err(StructureError::NonReadChain);
        }
        let mut es = self.clone();
        let mut prev: Option<EventId> = None;
        for label in chain {
            let x = label.loc().ok_or(StructureError::NonReadChain)?.clone();
            let mut preds = es.last_matching(|l| {
                matches!(l, ActionLabel::Fnc { .. })
                    | l.is_bar()
                    | matches!(l, ActionLabel::Ff { loc, .. } if *loc == x)
                    | matches!(l, ActionLabel::Ini)
            });
            // Keep the chain itself sequential and do not route chain
            // elements through each other's location clause.
            preds.retain(|&p| p < self.events.len());
            if let Some(p) = prev {
                preds.insert(p);
            }
            prev = Some(es.push_event(label.clone(), preds));
        }
        Ok(es)
    }

    /// rstr_e^x: add x to the restriction set of every flow edge from `e`
    /// into the decisive reads and writes of thread τ — the events whose
    /// timestamps bound v_read ⊔ coh(x) in the assertion semantics.
    pub fn restrict(&self, e: EventId, x: &Loc, tid: ThreadId) -> EventStructure {
        let mut es = self.clone();
        let mut targets = self.pr_fnc(tid);
        targets.retain(|&f| {
            matches!(self.label(f), ActionLabel::Ff { tid: t, .. } if *t == tid)
        });
        targets.append(&mut self.pr_bar_thread(tid));
        targets.extend(
            self.event_ids().filter(|&f| {
                matches!(self.label(f), ActionLabel::Ff { tid: t, loc, .. }
                         if *t == tid && loc == x)
            }),
        );
        for f in targets {
            if self.flow.contains(&(e, f)) {
                es.lambda.entry((e, f)).or_default().insert(x.clone());
            }
        }
        es
    }

    fn memory_events_before(&self, lasts: &BTreeSet<EventId>) -> BTreeSet<EventId> {
        self.event_ids()
            .filter(|&e| {
                self.label(e).is_memory()
                    && lasts.iter().any(|&l| self.flow_before(e, l))
            })
            .collect()
    }

    /// prFnc_τ: memory events strictly flow-before the last fence of τ.
    pub fn pr_fnc(&self, tid: ThreadId) -> BTreeSet<EventId> {
        let lasts =
            self.last_matching(|l| matches!(l, ActionLabel::Fnc { tid: t } if *t == tid));
        self.memory_events_before(&lasts)
    }

    /// prBar_a: memory events strictly flow-before a last bar on register a.
    pub fn pr_bar_reg(&self, a: &Reg) -> BTreeSet<EventId> {
        let lasts = self.last_matching(|l| l.bar_reg() == Some(a));
        self.memory_events_before(&lasts)
    }

    /// prBar_τ: union of prBar_a over the registers of τ.
    pub fn pr_bar_thread(&self, tid: ThreadId) -> BTreeSet<EventId> {
        let regs: BTreeSet<Reg> = self
            .events
            .iter()
            .filter(|d| d.label.tid() == Some(tid))
            .filter_map(|d| d.label.bar_reg().cloned())
            .collect();
        regs.iter().flat_map(|a| self.pr_bar_reg(a)).collect()
    }

    /// prBar^x_τ: memory events strictly flow-before a last bar of τ on
    /// location x. This is the reading that makes coh(x) agree with the
    /// operational semantics on worked examples.
    pub fn pr_bar_loc(&self, tid: ThreadId, x: &Loc) -> BTreeSet<EventId> {
        let lasts = self.last_matching(|l| {
            matches!(l, ActionLabel::BarLoc { tid: t, loc, .. } if *t == tid && loc == x)
        });
        self.memory_events_before(&lasts)
    }

    /// prTst_τ: memory events strictly flow-before the last test of τ.
    pub fn pr_tst(&self, tid: ThreadId) -> BTreeSet<EventId> {
        let lasts =
            self.last_matching(|l| matches!(l, ActionLabel::Tst { tid: t, .. } if *t == tid));
        self.memory_events_before(&lasts)
    }

    /// Human-readable name of an event: composite events print their slot
    /// tuple, local events their id.
    pub fn event_name(&self, e: EventId) -> String {
        match &self.events[e].slots {
            Some(slots) => {
                let parts: Vec<String> = slots
                    .iter()
                    .map(|s| match s {
                        Some(i) => format!("e{}", i),
                        None => "*".to_string(),
                    })
                    .collect();
                format!("({})", parts.join(","))
            }
            None => format!("e{}", e),
        }
    }

    /// DOT export with flow edges annotated by their restriction sets and
    /// conflicts drawn as dashed undirected edges.
    pub fn to_dot(&self, highlight: Option<&BTreeSet<EventId>>) -> String {
        let mut out = String::from("digraph es {\n  rankdir=LR;\n");
        for e in self.event_ids() {
            let style = match highlight {
                Some(c) if c.contains(&e) => ",style=filled,fillcolor=lightgrey",
                _ => "",
            };
            let _ = writeln!(
                out,
                "  n{} [label=\"{}: {}\"{}];",
                e,
                self.event_name(e),
                self.label(e),
                style
            );
        }
        for &(a, b) in &self.flow {
            let lam = self.restriction(a, b);
            if lam.is_empty() {
                let _ = writeln!(out, "  n{} -> n{};", a, b);
            } else {
                let locs: Vec<String> = lam.iter().map(|l| l.to_string()).collect();
                let _ = writeln!(out, "  n{} -> n{} [label=\"{{{}}}\"];", a, b, locs.join(","));
            }
        }
        for &(a, b) in &self.conflict {
            let _ = writeln!(out, "  n{} -> n{} [dir=none,style=dashed,color=orange];", a, b);
        }
        out.push_str("}\n");
        out
    }
}
