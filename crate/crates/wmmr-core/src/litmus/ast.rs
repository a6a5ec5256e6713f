//! Program AST for litmus tests: threads of statements over shared locations
//! and thread-local registers, plus the outcome predicate of the test.

use std::collections::BTreeSet;
use std::fmt;

/// Values stored in memory and registers.
pub type Val = i64;

/// 1-based thread identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThreadId(pub u32);

impl fmt::Display for ThreadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A shared memory location.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc(pub String);

impl Loc {
    pub fn new(s: impl Into<String>) -> Self {
        Loc(s.into())
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A thread-local register. Register names are globally unique: the parser
/// rejects a register appearing in two different threads.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reg(pub String);

impl Reg {
    pub fn new(s: impl Into<String>) -> Self {
        Reg(s.into())
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn apply(self, a: Val, b: Val) -> Val {
        match self {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        })
    }
}

/// Arithmetic expression over local registers and constants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Val),
    Reg(Reg),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn registers(&self) -> BTreeSet<Reg> {
        let mut out = BTreeSet::new();
        self.collect_registers(&mut out);
        out
    }

    fn collect_registers(&self, out: &mut BTreeSet<Reg>) {
        match self {
            Expr::Const(_) => {}
            Expr::Reg(r) => {
                out.insert(r.clone());
            }
            Expr::Bin(_, a, b) => {
                a.collect_registers(out);
                b.collect_registers(out);
            }
        }
    }

    pub fn constants(&self) -> BTreeSet<Val> {
        let mut out = BTreeSet::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut BTreeSet<Val>) {
        match self {
            Expr::Const(k) => {
                out.insert(*k);
            }
            Expr::Reg(_) => {}
            Expr::Bin(_, a, b) => {
                a.collect_constants(out);
                b.collect_constants(out);
            }
        }
    }

    /// Number of arithmetic operator applications in the expression.
    pub fn op_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Reg(_) => 0,
            Expr::Bin(_, a, b) => 1 + a.op_count() + b.op_count(),
        }
    }

    pub fn operators(&self) -> BTreeSet<BinOp> {
        let mut out = BTreeSet::new();
        self.collect_operators(&mut out);
        out
    }

    fn collect_operators(&self, out: &mut BTreeSet<BinOp>) {
        if let Expr::Bin(op, a, b) = self {
            out.insert(*op);
            a.collect_operators(out);
            b.collect_operators(out);
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(k) => write!(f, "{k}"),
            Expr::Reg(r) => write!(f, "{r}"),
            Expr::Bin(op, a, b) => write!(f, "({a} {op} {b})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl CmpOp {
    pub fn apply(self, a: Val, b: Val) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        })
    }
}

/// Boolean expression over local registers and constants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BExpr {
    Cmp(CmpOp, Expr, Expr),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
    Not(Box<BExpr>),
}

impl BExpr {
    pub fn registers(&self) -> BTreeSet<Reg> {
        let mut out = BTreeSet::new();
        self.collect_registers(&mut out);
        out
    }

    fn collect_registers(&self, out: &mut BTreeSet<Reg>) {
        match self {
            BExpr::Cmp(_, a, b) => {
                a.collect_registers(out);
                b.collect_registers(out);
            }
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                a.collect_registers(out);
                b.collect_registers(out);
            }
            BExpr::Not(a) => a.collect_registers(out),
        }
    }

    pub fn constants(&self) -> BTreeSet<Val> {
        let mut out = BTreeSet::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut BTreeSet<Val>) {
        match self {
            BExpr::Cmp(_, a, b) => {
                out.extend(a.constants());
                out.extend(b.constants());
            }
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                a.collect_constants(out);
                b.collect_constants(out);
            }
            BExpr::Not(a) => a.collect_constants(out),
        }
    }

    pub fn op_count(&self) -> usize {
        match self {
            BExpr::Cmp(_, a, b) => a.op_count() + b.op_count(),
            BExpr::And(a, b) | BExpr::Or(a, b) => a.op_count() + b.op_count(),
            BExpr::Not(a) => a.op_count(),
        }
    }

    pub fn operators(&self) -> BTreeSet<BinOp> {
        let mut out = BTreeSet::new();
        self.collect_operators(&mut out);
        out
    }

    fn collect_operators(&self, out: &mut BTreeSet<BinOp>) {
        match self {
            BExpr::Cmp(_, a, b) => {
                out.extend(a.operators());
                out.extend(b.operators());
            }
            BExpr::And(a, b) | BExpr::Or(a, b) => {
                a.collect_operators(out);
                b.collect_operators(out);
            }
            BExpr::Not(a) => a.collect_operators(out),
        }
    }

    pub fn negate(&self) -> BExpr {
        BExpr::Not(Box::new(self.clone()))
    }
}

impl fmt::Display for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BExpr::Cmp(op, a, b) => write!(f, "{a} {op} {b}"),
            BExpr::And(a, b) => write!(f, "({a} /\\ {b})"),
            BExpr::Or(a, b) => write!(f, "({a} \\/ {b})"),
            BExpr::Not(a) => write!(f, "!({a})"),
        }
    }
}

/// The value written by a store: either a constant or a local register.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StoreRv {
    Const(Val),
    Reg(Reg),
}

impl fmt::Display for StoreRv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreRv::Const(k) => write!(f, "{k}"),
            StoreRv::Reg(r) => write!(f, "{r}"),
        }
    }
}

/// Statements of the core language. `while`/`if` are parser sugar and are
/// desugared into `Asm`/`Choice`/`Iterate` before reaching this AST.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    Skip,
    /// `a := x` — read location `x` into register `a`.
    Load(Reg, Loc),
    /// `x := rv` — write a constant or register to location `x`.
    Store(Loc, StoreRv),
    /// `a := η` — local register assignment.
    RegAssign(Reg, Expr),
    Dmb,
    Asm(BExpr),
    Seq(Box<Statement>, Box<Statement>),
    Choice(Box<Statement>, Box<Statement>),
    /// `S*` — unbounded iteration; the bound is supplied by `elaborate`.
    Iterate(Box<Statement>),
}

impl Statement {
    pub fn seq(a: Statement, b: Statement) -> Statement {
        Statement::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Statement, b: Statement) -> Statement {
        Statement::Choice(Box::new(a), Box::new(b))
    }

    /// Registers written or read anywhere in the statement.
    pub fn registers(&self) -> BTreeSet<Reg> {
        let mut out = BTreeSet::new();
        self.collect_registers(&mut out);
        out
    }

    fn collect_registers(&self, out: &mut BTreeSet<Reg>) {
        match self {
            Statement::Skip | Statement::Dmb => {}
            Statement::Load(a, _) => {
                out.insert(a.clone());
            }
            Statement::Store(_, rv) => {
                if let StoreRv::Reg(a) = rv {
                    out.insert(a.clone());
                }
            }
            Statement::RegAssign(a, e) => {
                out.insert(a.clone());
                out.extend(e.registers());
            }
            Statement::Asm(b) => out.extend(b.registers()),
            Statement::Seq(a, b) | Statement::Choice(a, b) => {
                a.collect_registers(out);
                b.collect_registers(out);
            }
            Statement::Iterate(a) => a.collect_registers(out),
        }
    }

    pub fn locations(&self) -> BTreeSet<Loc> {
        let mut out = BTreeSet::new();
        self.collect_locations(&mut out);
        out
    }

    fn collect_locations(&self, out: &mut BTreeSet<Loc>) {
        match self {
            Statement::Load(_, x) | Statement::Store(x, _) => {
                out.insert(x.clone());
            }
            Statement::Seq(a, b) | Statement::Choice(a, b) => {
                a.collect_locations(out);
                b.collect_locations(out);
            }
            Statement::Iterate(a) => a.collect_locations(out),
            _ => {}
        }
    }

    pub fn constants(&self) -> BTreeSet<Val> {
        let mut out = BTreeSet::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut BTreeSet<Val>) {
        match self {
            Statement::Store(_, StoreRv::Const(k)) => {
                out.insert(*k);
            }
            Statement::RegAssign(_, e) => out.extend(e.constants()),
            Statement::Asm(b) => out.extend(b.constants()),
            Statement::Seq(a, b) | Statement::Choice(a, b) => {
                a.collect_constants(out);
                b.collect_constants(out);
            }
            Statement::Iterate(a) => a.collect_constants(out),
            _ => {}
        }
    }

    pub fn operators(&self) -> BTreeSet<BinOp> {
        let mut out = BTreeSet::new();
        self.collect_operators(&mut out);
        out
    }

    fn collect_operators(&self, out: &mut BTreeSet<BinOp>) {
        match self {
            Statement::RegAssign(_, e) => out.extend(e.operators()),
            Statement::Asm(b) => out.extend(b.operators()),
            Statement::Seq(a, b) | Statement::Choice(a, b) => {
                a.collect_operators(out);
                b.collect_operators(out);
            }
            Statement::Iterate(a) => a.collect_operators(out),
            _ => {}
        }
    }

    pub fn op_count(&self) -> usize {
        match self {
            Statement::RegAssign(_, e) => e.op_count(),
            Statement::Asm(b) => b.op_count(),
            Statement::Seq(a, b) | Statement::Choice(a, b) => a.op_count() + b.op_count(),
            Statement::Iterate(a) => a.op_count(),
            _ => 0,
        }
    }

    pub fn contains_iterate(&self) -> bool {
        match self {
            Statement::Iterate(_) => true,
            Statement::Seq(a, b) | Statement::Choice(a, b) => {
                a.contains_iterate() || b.contains_iterate()
            }
            _ => false,
        }
    }

    /// Maximum number of stores to `x` along any single execution path.
    pub fn path_max_stores(&self, x: &Loc) -> usize {
        match self {
            Statement::Store(y, _) if y == x => 1,
            Statement::Seq(a, b) => a.path_max_stores(x) + b.path_max_stores(x),
            Statement::Choice(a, b) => a.path_max_stores(x).max(b.path_max_stores(x)),
            Statement::Iterate(_) => {
                panic!("path_max_stores on an unelaborated statement")
            }
            _ => 0,
        }
    }

    /// Maximum number of stores (to any location) along any execution path.
    pub fn path_max_stores_total(&self) -> usize {
        match self {
            Statement::Store(_, _) => 1,
            Statement::Seq(a, b) => a.path_max_stores_total() + b.path_max_stores_total(),
            Statement::Choice(a, b) => {
                a.path_max_stores_total().max(b.path_max_stores_total())
            }
            Statement::Iterate(_) => {
                panic!("path_max_stores_total on an unelaborated statement")
            }
            _ => 0,
        }
    }

    /// Maximum number of loads of `x` along any single execution path.
    pub fn path_max_loads(&self, x: &Loc) -> usize {
        match self {
            Statement::Load(_, y) if y == x => 1,
            Statement::Seq(a, b) => a.path_max_loads(x) + b.path_max_loads(x),
            Statement::Choice(a, b) => a.path_max_loads(x).max(b.path_max_loads(x)),
            Statement::Iterate(_) => panic!("path_max_loads on an unelaborated statement"),
            _ => 0,
        }
    }

    /// Constant values a store to `x` can syntactically write, plus a flag
    /// for register stores (which can write anything in the value universe).
    pub fn storable(&self, x: &Loc) -> (BTreeSet<Val>, bool) {
        let mut consts = BTreeSet::new();
        let mut from_reg = false;
        self.collect_storable(x, &mut consts, &mut from_reg);
        (consts, from_reg)
    }

    fn collect_storable(&self, x: &Loc, consts: &mut BTreeSet<Val>, from_reg: &mut bool) {
        match self {
            Statement::Store(y, rv) if y == x => match rv {
                StoreRv::Const(k) => {
                    consts.insert(*k);
                }
                StoreRv::Reg(_) => *from_reg = true,
            },
            Statement::Seq(a, b) | Statement::Choice(a, b) => {
                a.collect_storable(x, consts, from_reg);
                b.collect_storable(x, consts, from_reg);
            }
            Statement::Iterate(a) => a.collect_storable(x, consts, from_reg),
            _ => {}
        }
    }
}

/// One conjunct of the outcome predicate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeClause {
    /// `a = κ` on a final register value.
    Reg(Reg, Val),
    /// `x = κ` on the last write to `x` in the final memory.
    Mem(Loc, Val),
}

impl fmt::Display for OutcomeClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeClause::Reg(r, k) => write!(f, "{r}={k}"),
            OutcomeClause::Mem(x, k) => write!(f, "{x}={k}"),
        }
    }
}

/// Conjunction of outcome clauses, e.g. `exists (a=1 /\ b=1)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutcomePredicate {
    pub clauses: Vec<OutcomeClause>,
}

impl fmt::Display for OutcomePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.clauses {
            if !first {
                write!(f, " /\\ ")?;
            }
            first = false;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Reachable,
    Unreachable,
    Unspecified,
}

/// A parsed litmus test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LitmusTest {
    pub name: String,
    /// Thread ids are distinct and contiguous 1..n, in order.
    pub threads: Vec<(ThreadId, Statement)>,
    pub outcome: OutcomePredicate,
    pub expected: Expected,
    /// All shared locations of the test (declared plus used).
    pub locations: BTreeSet<Loc>,
}

impl LitmusTest {
    pub fn thread(&self, tid: ThreadId) -> &Statement {
        &self.threads[(tid.0 - 1) as usize].1
    }

    pub fn thread_ids(&self) -> impl Iterator<Item = ThreadId> + '_ {
        self.threads.iter().map(|(t, _)| *t)
    }

    /// Registers of a given thread.
    pub fn registers_of(&self, tid: ThreadId) -> BTreeSet<Reg> {
        self.thread(tid).registers()
    }

    pub fn all_constants(&self) -> BTreeSet<Val> {
        self.threads.iter().flat_map(|(_, s)| s.constants()).collect()
    }
}
