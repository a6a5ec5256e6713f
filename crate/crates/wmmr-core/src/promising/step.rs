//! Single-thread transitions: the atomic rules of Fig. 2 (Promise, Read,
//! Fulfill, Fence, Register, Assume) plus structural traversal of seq/choice.

use crate::litmus::ast::*;

use super::state::*;

/// Context for enumerating promise steps: where may promises write, and with
/// which values. Promise values are drawn from the frontend's value universe;
/// the rule itself allows arbitrary values, but unfulfillable promises never
/// survive to an accepted trace.
#[derive(Debug, Clone)]
pub struct StepCtx {
    pub locs: Vec<Loc>,
    pub values: Vec<Val>,
    /// Offer Promise successors at all (off during promises-first phase 2,
    /// where the candidate memory is fixed up front).
    pub allow_promise: bool,
    /// Upper bound on memory growth for promise steps.
    pub max_memory: usize,
}

impl StepCtx {
    pub fn no_promises() -> StepCtx {
        StepCtx { locs: Vec::new(), values: Vec::new(), allow_promise: false, max_memory: 0 }
    }
}

/// One successor of a thread step. `append` is the message a Promise step
/// adds to memory; all other rules leave memory untouched.
#[derive(Debug, Clone)]
pub struct Successor {
    pub label: TransitionLabel,
    pub stmt: Statement,
    pub ts: TState,
    pub append: Option<WriteMessage>,
}

/// True iff the statement can reduce to skip without performing any action
/// (it is skip, a choice with such a branch, or a sequence of two such).
pub fn may_terminate(s: &Statement) -> bool {
    match s {
        Statement::Skip => true,
        Statement::Seq(a, b) => may_terminate(a) && may_terminate(b),
        Statement::Choice(a, b) => may_terminate(a) || may_terminate(b),
        _ => false,
    }
}

/// Collapse leading skips in sequences so that equivalent continuations
/// deduplicate; choice is left untouched (it is a real branching point).
pub fn normalize(s: Statement) -> Statement {
    match s {
        Statement::Seq(a, b) => {
            let a = normalize(*a);
            let b = normalize(*b);
            if a == Statement::Skip {
                b
            } else if b == Statement::Skip {
                a
            } else {
                Statement::seq(a, b)
            }
        }
        other => other,
    }
}

/// All successors of `(stmt, ts)` in `memory` under the atomic rules,
/// including Promise steps when the context allows them.
pub fn thread_step(
    tid: ThreadId,
    stmt: &Statement,
    ts: &TState,
    memory: &Memory,
    ctx: &StepCtx,
) -> Vec<Successor> {
    let mut out = Vec::new();
    stmt_step(tid, stmt, ts, memory, &mut out);
    for s in &mut out {
        s.stmt = normalize(std::mem::replace(&mut s.stmt, Statement::Skip));
    }
    if ctx.allow_promise && memory.len() < ctx.max_memory {
        let t = memory.next_timestamp();
        for x in &ctx.locs {
            for &k in &ctx.values {
                let mut ts2 = ts.clone();
                ts2.prom.insert(t);
                out.push(Successor {
                    label: TransitionLabel::Prm { tid, loc: x.clone(), val: k, ts: t },
                    stmt: stmt.clone(),
                    ts: ts2,
                    append: Some(WriteMessage::Write { loc: x.clone(), val: k, tid }),
                });
            }
        }
    }
    out
}

/// Structural traversal: atomic statements step by their rule; seq steps in
/// its head (or, if the head can silently finish, in its tail); choice offers
/// both branches.
fn stmt_step(
    tid: ThreadId,
    stmt: &Statement,
    ts: &TState,
    memory: &Memory,
    out: &mut Vec<Successor>,
) {
    match stmt {
        Statement::Skip => {}
        Statement::Seq(a, b) => {
            let mut head = Vec::new();
            stmt_step(tid, a, ts, memory, &mut head);
            for s in head {
                out.push(Successor {
                    stmt: Statement::seq(s.stmt, (**b).clone()),
                    ..s
                });
            }
            if may_terminate(a) {
                stmt_step(tid, b, ts, memory, out);
            }
        }
        Statement::Choice(a, b) => {
            stmt_step(tid, a, ts, memory, out);
            stmt_step(tid, b, ts, memory, out);
        }
        Statement::Iterate(_) => {
            panic!("iterate must be elaborated before execution")
        }
        Statement::Load(a, x) => {
            // Read: any t with M(t) a write to x whose value is not shadowed
            // by a later x-write up to v_read ⊔ coh(x).
            let horizon = ts.v_read.join(ts.coh(x));
            for t in memory.timestamps() {
                if !memory.get(t).writes(x) {
                    continue;
                }
                if t < horizon && !memory.no_write_in_range(x, t, horizon) {
                    continue;
                }
                let k = memory.get(t).val();
                let v_post = ts.v_read.join(t);
                let mut ts2 = ts.clone();
                ts2.regs.insert(a.clone(), (k, v_post));
                ts2.coh.insert(x.clone(), ts.coh(x).join(v_post));
                ts2.v_read = v_post;
                out.push(Successor {
                    label: TransitionLabel::Rd {
                        tid,
                        reg: a.clone(),
                        loc: x.clone(),
                        val: k,
                        ts: t,
                    },
                    stmt: Statement::Skip,
                    ts: ts2,
                    append: None,
                });
            }
        }
        Statement::Store(x, rv) => {
            // Fulfill: discharge a promise t on x holding the stored value,
            // provided v_wNew ⊔ v_C ⊔ coh(x) ⊔ v_rv < t.
            let (k, v_rv) = match rv {
                StoreRv::Const(k) => (*k, Timestamp::ZERO),
                StoreRv::Reg(a) => ts.reg(a),
            };
            let floor = ts.v_w_new.join(ts.v_ctrl).join(ts.coh(x)).join(v_rv);
            for &t in &ts.prom {
                match memory.get(t) {
                    WriteMessage::Write { loc, val, tid: wt }
                        if loc == x && *val == k && *wt == tid && floor < t =>
                    {
                        let mut ts2 = ts.clone();
                        ts2.prom.remove(&t);
                        ts2.coh.insert(x.clone(), t);
                        ts2.v_w_old = ts.v_w_old.join(t);
                        out.push(Successor {
                            label: TransitionLabel::Ff {
                                tid,
                                via: match rv {
                                    StoreRv::Const(_) => None,
                                    StoreRv::Reg(a) => Some(a.clone()),
                                },
                                loc: x.clone(),
                                val: k,
                                ts: t,
                            },
                            stmt: Statement::Skip,
                            ts: ts2,
                            append: None,
                        });
                    }
                    _ => {}
                }
            }
        }
        Statement::Dmb => {
            let v = ts.v_read.join(ts.v_w_old);
            let mut ts2 = ts.clone();
            ts2.v_read = v;
            ts2.v_w_new = v;
            out.push(Successor {
                label: TransitionLabel::Fnc { tid },
                stmt: Statement::Skip,
                ts: ts2,
                append: None,
            });
        }
        Statement::RegAssign(a, e) => {
            let (k, v) = expeval(e, ts);
            let (_, u) = ts.reg(a);
            let mut ts2 = ts.clone();
            ts2.regs.insert(a.clone(), (k, u.join(v)));
            out.push(Successor {
                label: TransitionLabel::Lst { tid, reg: a.clone(), expr: e.clone() },
                stmt: Statement::Skip,
                ts: ts2,
                append: None,
            });
        }
        Statement::Asm(b) => {
            let (holds, v) = bexpeval(b, ts);
            if holds {
                let mut ts2 = ts.clone();
                ts2.v_ctrl = ts.v_ctrl.join(v);
                out.push(Successor {
                    label: TransitionLabel::Asm { tid, cond: b.clone() },
                    stmt: Statement::Skip,
                    ts: ts2,
                    append: None,
                });
            }
            // false condition: blocks (no successor)
        }
    }
}
