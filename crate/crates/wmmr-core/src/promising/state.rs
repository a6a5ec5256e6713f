//! Timestamped machine state: memory of write messages, per-thread views,
//! promise sets and register valuations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::litmus::ast::*;

/// Index into [`Memory`]; 0 is the initialisation message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub usize);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    /// View join: timestamps form a join-semilattice under max.
    pub fn join(self, other: Timestamp) -> Timestamp {
        Timestamp(self.0.max(other.0))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WriteMessage {
    /// The initialisation message at timestamp 0: every location reads 0.
    Ini,
    Write { loc: Loc, val: Val, tid: ThreadId },
}

impl WriteMessage {
    /// Whether this message writes location `x` (ini writes every location).
    pub fn writes(&self, x: &Loc) -> bool {
        match self {
            WriteMessage::Ini => true,
            WriteMessage::Write { loc, .. } => loc == x,
        }
    }

    pub fn val(&self) -> Val {
        match self {
            WriteMessage::Ini => 0,
            WriteMessage::Write { val, .. } => *val,
        }
    }
}

/// Append-only sequence of write messages; position = timestamp.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Memory(Vec<WriteMessage>);

impl Memory {
    pub fn new() -> Memory {
        Memory(vec![WriteMessage::Ini])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always holds ini
    }

    pub fn get(&self, t: Timestamp) -> &WriteMessage {
        &self.0[t.0]
    }

    /// Timestamp the next appended message will occupy.
    pub fn next_timestamp(&self) -> Timestamp {
        Timestamp(self.0.len())
    }

    pub fn push(&mut self, w: WriteMessage) -> Timestamp {
        debug_assert!(!matches!(w, WriteMessage::Ini));
        self.0.push(w);
        Timestamp(self.0.len() - 1)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = Timestamp> {
        (0..self.0.len()).map(Timestamp)
    }

    /// Timestamps of messages written by `tid` (never 0).
    pub fn owned_by(&self, tid: ThreadId) -> BTreeSet<Timestamp> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, w)| matches!(w, WriteMessage::Write { tid: t, .. } if *t == tid))
            .map(|(i, _)| Timestamp(i))
            .collect()
    }

    /// True iff no message in (lo, hi] writes `x`.
    pub fn no_write_in_range(&self, x: &Loc, lo: Timestamp, hi: Timestamp) -> bool {
        self.0[lo.0 + 1..=hi.0.min(self.0.len() - 1)]
            .iter()
            .all(|w| !w.writes(x))
    }

    /// Value of the last write to `x`, or 0 if only ini writes it.
    pub fn last_value(&self, x: &Loc) -> Val {
        self.0
            .iter()
            .rev()
            .find(|w| w.writes(x))
            .map(|w| w.val())
            .unwrap_or(0)
    }
}

impl Default for Memory {
    fn default() -> Self {
        Memory::new()
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match w {
                WriteMessage::Ini => write!(f, "ini")?,
                WriteMessage::Write { loc, val, tid } => {
                    write!(f, "<{loc}:={val}>_{tid}@{i}")?
                }
            }
        }
        write!(f, "]")
    }
}

/// Per-thread state of Fig. 2: promises, coherence views, registers, and the
/// four scalar views.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TState {
    pub prom: BTreeSet<Timestamp>,
    pub coh: BTreeMap<Loc, Timestamp>,
    pub regs: BTreeMap<Reg, (Val, Timestamp)>,
    pub v_read: Timestamp,
    pub v_w_old: Timestamp,
    pub v_w_new: Timestamp,
    pub v_ctrl: Timestamp,
}

impl TState {
    /// `ts_ini`: all views 0, coh = λx.0, regs = λa.0@0.
    pub fn initial() -> TState {
        TState {
            prom: BTreeSet::new(),
            coh: BTreeMap::new(),
            regs: BTreeMap::new(),
            v_read: Timestamp::ZERO,
            v_w_old: Timestamp::ZERO,
            v_w_new: Timestamp::ZERO,
            v_ctrl: Timestamp::ZERO,
        }
    }

    pub fn coh(&self, x: &Loc) -> Timestamp {
        self.coh.get(x).copied().unwrap_or(Timestamp::ZERO)
    }

    pub fn reg(&self, a: &Reg) -> (Val, Timestamp) {
        self.regs.get(a).copied().unwrap_or((0, Timestamp::ZERO))
    }

    /// Pointwise view comparison used by the monotonicity check: true iff
    /// every view of `self` is ≤ the corresponding view of `other`.
    pub fn views_le(&self, other: &TState) -> bool {
        if self.v_read > other.v_read
            || self.v_w_old > other.v_w_old
            || self.v_w_new > other.v_w_new
            || self.v_ctrl > other.v_ctrl
        {
            return false;
        }
        for (x, t) in &self.coh {
            if *t > other.coh(x) {
                return false;
            }
        }
        for (a, (_, v)) in &self.regs {
            if *v > other.reg(a).1 {
                return false;
            }
        }
        true
    }
}

/// Evaluate an arithmetic expression against a register file, returning the
/// value together with the join of the views of all registers involved.
pub fn expeval(expr: &Expr, ts: &TState) -> (Val, Timestamp) {
    match expr {
        Expr::Const(k) => (*k, Timestamp::ZERO),
        Expr::Reg(a) => ts.reg(a),
        Expr::Bin(op, l, r) => {
            let (v1, t1) = expeval(l, ts);
            let (v2, t2) = expeval(r, ts);
            (op.apply(v1, v2), t1.join(t2))
        }
    }
}

/// Boolean counterpart of [`expeval`].
pub fn bexpeval(expr: &BExpr, ts: &TState) -> (bool, Timestamp) {
    match expr {
        BExpr::Cmp(op, l, r) => {
            let (v1, t1) = expeval(l, ts);
            let (v2, t2) = expeval(r, ts);
            (op.apply(v1, v2), t1.join(t2))
        }
        BExpr::And(l, r) => {
            let (b1, t1) = bexpeval(l, ts);
            let (b2, t2) = bexpeval(r, ts);
            (b1 && b2, t1.join(t2))
        }
        BExpr::Or(l, r) => {
            let (b1, t1) = bexpeval(l, ts);
            let (b2, t2) = bexpeval(r, ts);
            (b1 || b2, t1.join(t2))
        }
        BExpr::Not(l) => {
            let (b, t) = bexpeval(l, ts);
            (!b, t)
        }
    }
}

/// Whole-program state: one (remaining statement, thread state) per thread
/// plus the shared memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgState {
    /// Index i holds thread i+1.
    pub threads: Vec<(Statement, TState)>,
    pub memory: Memory,
}

impl ProgState {
    pub fn initial(test: &LitmusTest) -> ProgState {
        ProgState {
            threads: test.threads.iter().map(|(_, s)| (s.clone(), TState::initial())).collect(),
            memory: Memory::new(),
        }
    }
}

/// Transition labels of Fig. 2, with the acted-on timestamp where relevant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionLabel {
    Prm { tid: ThreadId, loc: Loc, val: Val, ts: Timestamp },
    Rd { tid: ThreadId, reg: Reg, loc: Loc, val: Val, ts: Timestamp },
    /// `via` is the source register of a register store, if any.
    Ff { tid: ThreadId, via: Option<Reg>, loc: Loc, val: Val, ts: Timestamp },
    Fnc { tid: ThreadId },
    Lst { tid: ThreadId, reg: Reg, expr: Expr },
    Asm { tid: ThreadId, cond: BExpr },
}

impl TransitionLabel {
    pub fn tid(&self) -> ThreadId {
        match self {
            TransitionLabel::Prm { tid, .. }
            | TransitionLabel::Rd { tid, .. }
            | TransitionLabel::Ff { tid, .. }
            | TransitionLabel::Fnc { tid }
            | TransitionLabel::Lst { tid, .. }
            | TransitionLabel::Asm { tid, .. } => *tid,
        }
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Prm { tid, loc, val, ts } => {
                write!(f, "{tid}: prm({loc},{val})@t={ts}")
            }
            TransitionLabel::Rd { tid, reg, loc, val, ts } => {
                write!(f, "{tid}: rd({reg},{loc},{val})@t={ts}")
            }
            TransitionLabel::Ff { tid, via, loc, val, ts } => match via {
                Some(a) => write!(f, "{tid}: ff({loc},{val} via {a})@t={ts}"),
                None => write!(f, "{tid}: ff({loc},{val})@t={ts}"),
            },
            TransitionLabel::Fnc { tid } => write!(f, "{tid}: fnc"),
            TransitionLabel::Lst { tid, reg, expr } => write!(f, "{tid}: lst({reg},{expr})"),
            TransitionLabel::Asm { tid, cond } => write!(f, "{tid}: asm({cond})"),
        }
    }
}

/// An accepted execution: its transition labels in order.
pub type Trace = Vec<TransitionLabel>;

pub fn format_trace(trace: &Trace) -> String {
    let mut out = String::new();
    for l in trace {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}
