//! Human-readable rendering of witnesses: per-thread proof outlines as
//! interleaved program/assertion text, configurations as ordered event
//! lists plus the graph export, and operational traces.

use std::fmt::Write as _;

use wmmr_core::estructure::EventStructure;
use wmmr_core::litmus::Statement;
use wmmr_core::promising::format_trace;
use wmmr_core::proof::ReachWitness;

/// One-line event-structure summary: events, flow edges and restrictions.
pub fn render_structure(es: &EventStructure) -> String {
    let mut out = String::new();
    let names: Vec<String> = es
        .event_ids()
        .map(|e| format!("{}:{}", es.event_name(e), es.label(e)))
        .collect();
    write!(out, "{{{}}}", names.join(", ")).unwrap();
    let mut edges: Vec<String> = Vec::new();
    for &(d, f) in &es.flow {
        let l = es.restriction(d, f);
        if l.is_empty() {
            edges.push(format!("{} -> {}", es.event_name(d), es.event_name(f)));
        } else {
            let locs: Vec<&str> = l.iter().map(|x| x.0.as_str()).collect();
            edges.push(format!(
                "{} ->{{{}}} {}",
                es.event_name(d),
                locs.join(","),
                es.event_name(f)
            ));
        }
    }
    if !edges.is_empty() {
        write!(out, "  flow: {}", edges.join("; ")).unwrap();
    }
    out
}

fn render_stmt_line(s: &Statement) -> String {
    // statements recorded in outline steps are atomic
    match s {
        Statement::Skip => "skip".into(),
        Statement::Dmb => "dmb".into(),
        Statement::Load(a, x) => format!("{a} := {x}"),
        Statement::Store(x, rv) => format!("{x} := {rv}"),
        Statement::RegAssign(a, e) => format!("{a} := {e}"),
        Statement::Asm(b) => format!("asm {b}"),
        other => format!("{other:?}"),
    }
}

/// The full proof-engine witness: each thread's outline interleaving
/// statements with post-assertions, the chosen configuration with its
/// order, the final state, and the composition graph.
pub fn render_proof_witness(w: &ReachWitness) -> String {
    let mut out = String::new();
    for o in &w.outlines {
        writeln!(out, "thread {}:", o.tid).unwrap();
        writeln!(out, "  [Ini]").unwrap();
        for step in &o.steps {
            writeln!(out, "    {}", render_stmt_line(&step.stmt)).unwrap();
            writeln!(out, "  [{}]", render_structure(&step.post)).unwrap();
        }
    }
    let comp = &w.composition;
    let order: Vec<String> = w.witness.order.iter().map(|&e| comp.event_name(e)).collect();
    writeln!(out, "configuration order: {}", order.join(" < ")).unwrap();
    let config: Vec<String> = w
        .witness
        .config
        .iter()
        .filter(|e| !w.witness.order.contains(e))
        .map(|&e| comp.event_name(e))
        .collect();
    if !config.is_empty() {
        writeln!(out, "non-memory events: {}", config.join(", ")).unwrap();
    }
    writeln!(out, "final memory: {}", w.memory).unwrap();
    let vals: Vec<String> =
        w.valuation.iter().map(|(a, v)| format!("{a}={v}")).collect();
    writeln!(out, "final registers: {}", vals.join(", ")).unwrap();
    writeln!(out, "composition graph:").unwrap();
    out.push_str(&comp.to_dot(Some(&w.witness.config)));
    out
}

/// An operational witness trace, one transition per line.
pub fn render_trace(trace: &wmmr_core::promising::Trace) -> String {
    format_trace(trace)
}
