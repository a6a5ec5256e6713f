//! Action labels for events: reads from promises, fulfills, register bars,
//! fences and tests. Read labels name the thread that made the promise;
//! fulfill labels name the thread executing the store. Labels may carry a
//! timestamp annotation, used when replaying operational traces.

use std::fmt;

use crate::litmus::ast::{BExpr, Expr, Loc, Reg, ThreadId, Val};
use crate::promising::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionLabel {
    Ini,
    /// Read from a promise made by `tid`.
    Prm { tid: ThreadId, loc: Loc, val: Val, ts: Option<Timestamp> },
    /// Fulfill by `tid` of its own promise.
    Ff { tid: ThreadId, loc: Loc, val: Val, ts: Option<Timestamp> },
    /// Register bar recording a load `reg := loc`.
    BarLoc { tid: ThreadId, reg: Reg, loc: Loc },
    /// Register bar recording an assignment `reg := exp`.
    BarExp { tid: ThreadId, reg: Reg, exp: Expr },
    Fnc { tid: ThreadId },
    Tst { tid: ThreadId, cond: BExpr },
}

impl ActionLabel {
    /// Memory events are the ones mapped to timestamps: reads, fulfills, ini.
    pub fn is_memory(&self) -> bool {
        matches!(self, ActionLabel::Ini | ActionLabel::Prm { .. } | ActionLabel::Ff { .. })
    }

    pub fn is_read(&self) -> bool {
        matches!(self, ActionLabel::Prm { .. })
    }

    pub fn is_fulfill(&self) -> bool {
        matches!(self, ActionLabel::Ff { .. })
    }

    pub fn is_bar(&self) -> bool {
        matches!(self, ActionLabel::BarLoc { .. } | ActionLabel::BarExp { .. })
    }

    /// Membership in Act^x. The ini event counts as acting on every location.
    pub fn acts_on(&self, x: &Loc) -> bool {
        match self {
            ActionLabel::Ini => true,
            ActionLabel::Prm { loc, .. } | ActionLabel::Ff { loc, .. } => loc == x,
            _ => false,
        }
    }

    /// The location of a non-ini memory event.
    pub fn loc(&self) -> Option<&Loc> {
        match self {
            ActionLabel::Prm { loc, .. } | ActionLabel::Ff { loc, .. } => Some(loc),
            _ => None,
        }
    }

    pub fn bar_reg(&self) -> Option<&Reg> {
        match self {
            ActionLabel::BarLoc { reg, .. } | ActionLabel::BarExp { reg, .. } => Some(reg),
            _ => None,
        }
    }

    pub fn tid(&self) -> Option<ThreadId> {
        match self {
            ActionLabel::Ini => None,
            ActionLabel::Prm { tid, .. }
            | ActionLabel::Ff { tid, .. }
            | ActionLabel::BarLoc { tid, .. }
            | ActionLabel::BarExp { tid, .. }
            | ActionLabel::Fnc { tid }
            | ActionLabel::Tst { tid, .. } => Some(*tid),
        }
    }

    pub fn timestamp(&self) -> Option<Timestamp> {
        match self {
            ActionLabel::Ini => Some(Timestamp::ZERO),
            ActionLabel::Prm { ts, .. } | ActionLabel::Ff { ts, .. } => *ts,
            _ => None,
        }
    }

    /// Whether a fulfill and a read are complementary for synchronisation:
    /// same promising thread, location and value. Timestamp annotations are
    /// compared only when present on both sides.
    pub fn complements(&self, other: &ActionLabel) -> bool {
        match (self, other) {
            (
                ActionLabel::Ff { tid, loc, val, ts },
                ActionLabel::Prm { tid: t2, loc: l2, val: v2, ts: s2 },
            ) => {
                tid == t2
                    && loc == l2
                    && val == v2
                    && match (ts, s2) {
                        (Some(a), Some(b)) => a == b,
                        _ => true,
                    }
            }
            (ActionLabel::Prm { .. }, ActionLabel::Ff { .. }) => other.complements(self),
            _ => false,
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts = |t: &Option<Timestamp>| match t {
            Some(t) => format!("@t={}", t.0),
            None => String::new(),
        };
        match self {
            ActionLabel::Ini => write!(f, "ini"),
            ActionLabel::Prm { tid, loc, val, ts: t } => {
                write!(f, "prm({},{},{}){}", tid.0, loc, val, ts(t))
            }
            ActionLabel::Ff { tid, loc, val, ts: t } => {
                write!(f, "ff({},{},{}){}", tid.0, loc, val, ts(t))
            }
            ActionLabel::BarLoc { reg, loc, .. } => write!(f, "bar({},{})", reg, loc),
            ActionLabel::BarExp { reg, exp, .. } => write!(f, "bar({},{})", reg, exp),
            ActionLabel::Fnc { tid } => write!(f, "fnc_{}", tid.0),
            ActionLabel::Tst { tid, cond } => write!(f, "tst({},{})", tid.0, cond),
        }
    }
}
