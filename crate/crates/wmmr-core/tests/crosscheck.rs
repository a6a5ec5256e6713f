use wmmr_core::crosscheck::*;
use wmmr_core::litmus::Loc;

#[test]
fn crosscheck_is_deterministic() {
    let a = run_crosscheck(7, 20, &GenShape::default(), false);
    let b = run_crosscheck(7, 20, &GenShape::default(), false);
    assert_eq!(a.checked, b.checked);
    assert_eq!(a.skipped, b.skipped);
    assert_eq!(a.discrepancies.len(), b.discrepancies.len());
}

#[test]
fn crosscheck_small_batch_agrees() {
    let r = run_crosscheck(1, 40, &GenShape::default(), false);
    assert!(r.checked > 0);
    for d in &r.discrepancies {
        panic!("#{}: {}\n{}", d.index, d.details, d.program);
    }
    assert_eq!(r.monotonicity_violations, 0);
}

#[test]
fn oracle_mode_small_batch_agrees() {
    let r = run_crosscheck(11, 25, &GenShape::oracle(), true);
    assert!(r.checked > 0);
    for d in &r.discrepancies {
        panic!("#{}: {}\n{}", d.index, d.details, d.program);
    }
    assert_eq!(r.monotonicity_violations, 0);
}

#[test]
fn zero_count_is_empty() {
    let r = run_crosscheck(1, 0, &GenShape::default(), false);
    assert_eq!(r.checked, 0);
    assert!(r.ok());
}

#[test]
fn single_location_shape_agrees() {
    let shape = GenShape {
        min_threads: 2,
        max_threads: 2,
        max_stmts_per_thread: 3,
        max_total_stores: 3,
        locations: vec![Loc::new("x")],
        values: vec![0, 1],
    };
    let r = run_crosscheck(3, 40, &shape, true);
    assert!(r.checked > 0);
    for d in &r.discrepancies {
        panic!("#{}: {}\n{}", d.index, d.details, d.program);
    }
}
