//! wmmr: dual-engine reachability checker for weak-memory litmus tests.

mod render;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use wmmr_core::crosscheck::{run_crosscheck, GenShape};
use wmmr_core::litmus::Loc;

use report::{format_report, run, Engine, RunConfig};

#[derive(Parser)]
#[command(name = "wmmr", version, about = "Weak-memory reachability checker")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check litmus files with one or both engines.
    Check {
        /// Litmus files or directories containing .lit files.
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        engine: Engine,
        /// Iteration unrolling depth.
        #[arg(long, default_value_t = 2)]
        unroll: usize,
        /// Override the memory-length cap of the operational engine.
        #[arg(long)]
        max_memory: Option<usize>,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
        /// Include a witness for reachable outcomes.
        #[arg(long)]
        witness: bool,
        /// Exit nonzero when any verdict is bounded-unknown.
        #[arg(long)]
        strict: bool,
    },
    /// Cross-validate the engines on random programs.
    Crosscheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Also compare against the unrestricted-scheduler oracle
        /// (uses a smaller default program shape).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 3)]
        max_threads: usize,
        #[arg(long, default_value_t = 4)]
        max_stmts: usize,
        #[arg(long, default_value_t = 4)]
        max_stores: usize,
        /// Number of shared locations (1 or 2).
        #[arg(long, default_value_t = 2)]
        locations: usize,
    },
}

fn max_states_from_env() -> Option<usize> {
    std::env::var("WMMR_MAX_STATES").ok().and_then(|s| s.parse().ok())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn main_inner() -> Result<u8> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Check { paths, engine, unroll, max_memory, json, witness, strict } => {
            let config = RunConfig {
                engine,
                unroll,
                max_memory,
                max_states: max_states_from_env(),
                json,
                witness,
                strict,
            };
            let rep = run(&config, &paths)?;
            if config.json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                print!("{}", format_report(&rep, config.witness));
            }
            Ok(rep.exit_code(config.strict) as u8)
        }
        Cmd::Crosscheck { seed, count, oracle, max_threads, max_stmts, max_stores, locations } => {
            let mut shape = if oracle { GenShape::oracle() } else { GenShape::default() };
            shape.max_threads = max_threads.clamp(shape.min_threads, 4);
            shape.max_stmts_per_thread = max_stmts.max(1);
            shape.max_total_stores = max_stores;
            shape.locations = [Loc::new("x"), Loc::new("y")]
                .into_iter()
                .take(locations.clamp(1, 2))
                .collect();
            let r = run_crosscheck(seed, count, &shape, oracle);
            println!(
                "crosscheck: {} checked, {} skipped, {} monotonicity violations, {} discrepancies",
                r.checked,
                r.skipped,
                r.monotonicity_violations,
                r.discrepancies.len()
            );
            for d in &r.discrepancies {
                println!("--- discrepancy #{}\n{}\n{}", d.index, d.details, d.program);
            }
            Ok(if r.ok() { 0 } else { 1 })
        }
    }
}
