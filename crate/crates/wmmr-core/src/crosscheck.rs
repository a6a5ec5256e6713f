//! Randomized cross-validation of the two engines: seeded program
//! generation, operational-vs-proof valuation-set equality, promises-first
//! vs unrestricted scheduling, and the view-monotonicity suite.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::litmus::ast::*;
use crate::litmus::{elaborate, pretty};
use crate::promising::{explore, explore_unrestricted, ExploreBounds};
use crate::proof::{enumerate_valuations, ProofBounds};

/// Shape bounds for the random program generator.
#[derive(Debug, Clone)]
pub struct GenShape {
    pub min_threads: usize,
    pub max_threads: usize,
    pub max_stmts_per_thread: usize,
    /// Cap on stores across all threads, keeping state spaces tractable.
    pub max_total_stores: usize,
    pub locations: Vec<Loc>,
    pub values: Vec<Val>,
}

impl Default for GenShape {
    fn default() -> Self {
        GenShape {
            min_threads: 2,
            max_threads: 3,
            max_stmts_per_thread: 4,
            max_total_stores: 4,
            locations: vec![Loc::new("x"), Loc::new("y")],
            values: vec![0, 1, 2],
        }
    }
}

impl GenShape {
    /// A smaller shape for comparisons against the unrestricted-scheduler
    /// oracle, whose state space grows much faster than promises-first.
    pub fn oracle() -> GenShape {
        GenShape {
            min_threads: 2,
            max_threads: 2,
            max_stmts_per_thread: 3,
            max_total_stores: 3,
            locations: vec![Loc::new("x"), Loc::new("y")],
            values: vec![0, 1],
        }
    }
}

/// One engine disagreement, with everything needed to reproduce it.
#[derive(Debug, Clone)]
pub struct Discrepancy {
    pub index: usize,
    pub program: String,
    pub details: String,
}

#[derive(Debug, Clone, Default)]
pub struct CrosscheckReport {
    pub checked: usize,
    /// Programs skipped because an engine hit a bound (neither side is
    /// trusted on incomplete enumerations).
    pub skipped: usize,
    pub monotonicity_violations: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl CrosscheckReport {
    pub fn ok(&self) -> bool {
        self.discrepancies.is_empty() && self.monotonicity_violations == 0
    }
}

/// A random loop-free test within the shape. Register names are globally
/// unique; assume statements only test registers the thread has already
/// written, so programs are never trivially stuck.
pub fn random_test(rng: &mut impl Rng, shape: &GenShape, name: String) -> LitmusTest {
    let n = rng.gen_range(shape.min_threads..=shape.max_threads);
    let mut threads = Vec::new();
    let mut all_regs: Vec<Reg> = Vec::new();
    let mut store_budget = shape.max_total_stores;
    for t in 1..=n {
        let mut written: Vec<Reg> = Vec::new();
        let mut fresh = 0usize;
        let count = rng.gen_range(1..=shape.max_stmts_per_thread);
        let mut stmts: Vec<Statement> = Vec::new();
        for _ in 0..count {
            stmts.push(random_stmt(rng, shape, t, &mut written, &mut fresh, &mut store_budget, true));
        }
        all_regs.extend(written.iter().cloned());
        let program = stmts
            .into_iter()
            .reduce(Statement::seq)
            .unwrap_or(Statement::Skip);
        threads.push((ThreadId(t as u32), program));
    }
    let outcome = OutcomePredicate {
        clauses: match all_regs.first() {
            Some(a) => vec![OutcomeClause::Reg(a.clone(), 0)],
            None => vec![OutcomeClause::Mem(shape.locations[0].clone(), 0)],
        },
    };
    LitmusTest {
        name,
        threads,
        outcome,
        expected: Expected::Unspecified,
        locations: shape.locations.iter().cloned().collect(),
    }
}

fn random_stmt(
    rng: &mut impl Rng,
    shape: &GenShape,
    t: usize,
    written: &mut Vec<Reg>,
    fresh: &mut usize,
    store_budget: &mut usize,
    allow_choice: bool,
) -> Statement {
    let new_reg = |fresh: &mut usize| {
        let r = Reg::new(format!("r{t}_{fresh}"));
        *fresh += 1;
        r
    };
    let loc = shape.locations[rng.gen_range(0..shape.locations.len())].clone();
    let val = shape.values[rng.gen_range(0..shape.values.len())];
    match rng.gen_range(0..10u32) {
        0..=2 => {
            let a = new_reg(fresh);
            written.push(a.clone());
            Statement::Load(a, loc)
        }
        3..=5 if *store_budget > 0 => {
            *store_budget -= 1;
            let rv = if !written.is_empty() && rng.gen_bool(0.3) {
                StoreRv::Reg(written[rng.gen_range(0..written.len())].clone())
            } else {
                StoreRv::Const(val)
            };
            Statement::Store(loc, rv)
        }
        6 => {
            let a = new_reg(fresh);
            let exp = if !written.is_empty() && rng.gen_bool(0.5) {
                Expr::Bin(
                    BinOp::Add,
                    Box::new(Expr::Reg(written[rng.gen_range(0..written.len())].clone())),
                    Box::new(Expr::Const(val)),
                )
            } else {
                Expr::Const(val)
            };
            written.push(a.clone());
            Statement::RegAssign(a, exp)
        }
        7 => Statement::Dmb,
        8 if !written.is_empty() => {
            let a = written[rng.gen_range(0..written.len())].clone();
            let op = [CmpOp::Eq, CmpOp::Ne, CmpOp::Le][rng.gen_range(0..3)];
            Statement::Asm(BExpr::Cmp(op, Expr::Reg(a), Expr::Const(val)))
        }
        9 if allow_choice => {
            let left = random_stmt(rng, shape, t, written, fresh, store_budget, false);
            let right = random_stmt(rng, shape, t, written, fresh, store_budget, false);
            Statement::choice(left, right)
        }
        _ => {
            let a = new_reg(fresh);
            written.push(a.clone());
            Statement::Load(a, loc)
        }
    }
}

/// Run `count` seeded cross-checks: the proof engine's valuation set must
/// equal the interpreter's, and no view-monotonicity violation may occur.
/// With `oracle` set, each program is additionally explored under the
/// unrestricted scheduler (promises anywhere, per-step certification) and
/// the valuation sets compared; use a small shape for that mode.
pub fn run_crosscheck(seed: u64, count: usize, shape: &GenShape, oracle: bool) -> CrosscheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CrosscheckReport::default();
    let op_bounds = ExploreBounds {
        check_monotonicity: true,
        max_states: 300_000,
        ..ExploreBounds::default()
    };
    let proof_bounds = ProofBounds::default();
    for i in 0..count {
        let test = random_test(&mut rng, shape, format!("rand-{seed}-{i}"));
        let t = elaborate(&test, 2);
        let Ok(op) = explore(&t, &op_bounds) else {
            report.skipped += 1;
            continue;
        };
        let (proof_vals, complete) = enumerate_valuations(&t, &proof_bounds);
        if op.bounded_incomplete || !complete {
            report.skipped += 1;
            continue;
        }
        let unres = if oracle {
            match explore_unrestricted(&t, &op_bounds) {
                Ok(r) if !r.bounded_incomplete => Some(r),
                _ => {
                    report.skipped += 1;
                    continue;
                }
            }
        } else {
            None
        };
        report.checked += 1;
        report.monotonicity_violations += op.monotonicity_violations;
        let op_vals = op.valuations();
        if let Some(unres) = unres {
            report.monotonicity_violations += unres.monotonicity_violations;
            if op_vals != unres.valuations() {
                report.discrepancies.push(Discrepancy {
                    index: i,
                    program: pretty(&test),
                    details: diff(
                        "promises-first",
                        &op_vals,
                        "unrestricted",
                        &unres.valuations(),
                    ),
                });
            }
        }
        if op_vals != proof_vals {
            report.discrepancies.push(Discrepancy {
                index: i,
                program: pretty(&test),
                details: diff("operational", &op_vals, "proof", &proof_vals),
            });
        }
    }
    report
}

fn diff<T: std::fmt::Debug + Ord>(
    an: &str,
    a: &BTreeSet<T>,
    bn: &str,
    b: &BTreeSet<T>,
) -> String {
    let only_a: Vec<&T> = a.difference(b).collect();
    let only_b: Vec<&T> = b.difference(a).collect();
    format!("only {an}: {only_a:?}; only {bn}: {only_b:?}")
}
