//! Batch execution of litmus files and report assembly.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use wmmr_core::litmus::{elaborate, parse_litmus, Expected, LitmusTest};
use wmmr_core::promising::{check_outcome, explore, ExploreBounds};
use wmmr_core::proof::{check_reachable, ProofBounds, Verdict};

use crate::render;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Engine {
    Both,
    Op,
    Proof,
}

/// Settings for one `check` run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: Engine,
    pub unroll: usize,
    pub max_memory: Option<usize>,
    /// Global state cap, from --max-states or WMMR_MAX_STATES.
    pub max_states: Option<usize>,
    pub json: bool,
    pub witness: bool,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: Engine::Both,
            unroll: 2,
            max_memory: None,
            max_states: None,
            json: false,
            witness: false,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineVerdict {
    Reachable,
    Unreachable,
    BoundedUnknown,
}

impl std::fmt::Display for EngineVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EngineVerdict::Reachable => write!(f, "reachable"),
            EngineVerdict::Unreachable => write!(f, "unreachable"),
            EngineVerdict::BoundedUnknown => write!(f, "bounded-unknown"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub name: String,
    pub file: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<EngineVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<EngineVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proof: Option<EngineVerdict>,
    pub agreement: bool,
    pub bounded_unknown: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Report {
    pub tests: Vec<TestReport>,
    pub errors: Vec<FileError>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileError {
    pub file: String,
    pub error: String,
}

impl Report {
    pub fn exit_code(&self, strict: bool) -> i32 {
        if !self.errors.is_empty() {
            2
        } else if self.tests.iter().any(|t| !t.agreement) {
            1
        } else if strict && self.tests.iter().any(|t| t.bounded_unknown) {
            3
        } else {
            0
        }
    }
}

/// Collect `.lit` files from the given paths (directories are walked,
/// non-recursively sorted for determinism).
pub fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("reading directory {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "lit"))
                .collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn expected_verdict(e: Expected) -> Option<EngineVerdict> {
    match e {
        Expected::Reachable => Some(EngineVerdict::Reachable),
        Expected::Unreachable => Some(EngineVerdict::Unreachable),
        Expected::Unspecified => None,
    }
}

fn check_one(test: &LitmusTest, file: &Path, config: &RunConfig) -> TestReport {
    let start = Instant::now();
    let t = elaborate(test, config.unroll as u32);

    let mut op_verdict = None;
    let mut proof_verdict = None;
    let mut witness = None;

    if matches!(config.engine, Engine::Both | Engine::Op) {
        let mut bounds = ExploreBounds {
            max_memory: config.max_memory,
            ..ExploreBounds::default()
        };
        if let Some(cap) = config.max_states {
            bounds.max_states = cap;
        }
        op_verdict = Some(match explore(&t, &bounds) {
            Ok(r) => {
                let v = check_outcome(&r, &t.outcome);
                if v.reachable {
                    if config.witness && witness.is_none() {
                        witness = v.witness.as_ref().map(render::render_trace);
                    }
                    EngineVerdict::Reachable
                } else if r.bounded_incomplete {
                    EngineVerdict::BoundedUnknown
                } else {
                    EngineVerdict::Unreachable
                }
            }
            Err(_) => EngineVerdict::BoundedUnknown,
        });
    }

    if matches!(config.engine, Engine::Both | Engine::Proof) {
        let mut bounds = ProofBounds::default();
        if let Some(cap) = config.max_states {
            bounds.max_tuples = cap;
        }
        let r = check_reachable(&t, &bounds);
        proof_verdict = Some(match r.verdict {
            Verdict::Reachable => EngineVerdict::Reachable,
            Verdict::Unreachable => EngineVerdict::Unreachable,
            Verdict::BoundedUnknown => EngineVerdict::BoundedUnknown,
        });
        if config.witness {
            if let Some(w) = &r.witness {
                witness = Some(render::render_proof_witness(w));
            }
        }
    }

    let expected = expected_verdict(t.expected);
    let decided: Vec<EngineVerdict> = [op_verdict, proof_verdict]
        .into_iter()
        .flatten()
        .filter(|v| *v != EngineVerdict::BoundedUnknown)
        .collect();
    let bounded_unknown = [op_verdict, proof_verdict]
        .into_iter()
        .flatten()
        .any(|v| v == EngineVerdict::BoundedUnknown);
    // agreement: all decided verdicts equal each other and the expectation
    let agreement = decided.windows(2).all(|w| w[0] == w[1])
        && match expected {
            Some(e) => decided.iter().all(|v| *v == e),
            None => true,
        };

    TestReport {
        name: t.name.clone(),
        file: file.display().to_string(),
        outcome: t.outcome.to_string(),
        expected,
        op: op_verdict,
        proof: proof_verdict,
        agreement,
        bounded_unknown,
        witness,
        wall_ms: start.elapsed().as_millis() as u64,
    }
}

/// Run the configured engines over every test in `paths`. Tests run
/// concurrently; results are merged deterministically by (name, file).
pub fn run(config: &RunConfig, paths: &[PathBuf]) -> Result<Report> {
    let files = collect_files(paths)?;
    let mut report = Report::default();
    let mut parsed: Vec<(PathBuf, LitmusTest)> = Vec::new();
    for f in &files {
        let src = match std::fs::read_to_string(f) {
            Ok(s) => s,
            Err(e) => {
                report
                    .errors
                    .push(FileError { file: f.display().to_string(), error: e.to_string() });
                continue;
            }
        };
        match parse_litmus(&src) {
            Ok(t) => parsed.push((f.clone(), t)),
            Err(e) => {
                report
                    .errors
                    .push(FileError { file: f.display().to_string(), error: e.to_string() });
            }
        }
    }
    let mut tests: Vec<TestReport> = std::thread::scope(|s| {
        let handles: Vec<_> = parsed
            .iter()
            .map(|(f, t)| s.spawn(move || check_one(t, f, config)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("checker panicked")).collect()
    });
    tests.sort_by(|a, b| (&a.name, &a.file).cmp(&(&b.name, &b.file)));
    report.tests = tests;
    Ok(report)
}

/// Plain-text rendering of a report.
pub fn format_report(report: &Report, witness: bool) -> String {
    let mut out = String::new();
    for e in &report.errors {
        out.push_str(&format!("error: {}: {}\n", e.file, e.error));
    }
    for t in &report.tests {
        let verdicts = [("op", t.op), ("proof", t.proof)]
            .iter()
            .filter_map(|(n, v)| v.map(|v| format!("{n}={v}")))
            .collect::<Vec<_>>()
            .join(" ");
        let status = if !t.agreement {
            "MISMATCH"
        } else if t.bounded_unknown {
            "UNKNOWN"
        } else {
            "ok"
        };
        out.push_str(&format!(
            "{:<10} {:<28} exists ({})  {}  [{status}] ({} ms)\n",
            t.name, t.file, t.outcome, verdicts, t.wall_ms
        ));
        if witness {
            if let Some(w) = &t.witness {
                for line in w.lines() {
                    out.push_str(&format!("    {line}\n"));
                }
            }
        }
    }
    out
}
