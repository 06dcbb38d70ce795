use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use colmod_core::editor::render_read;
use colmod_core::sim::{self, vectors, Schedule, Script, SimError};

/// Deterministic multi-client simulator.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a script file (`<client> <vtime_ns> <editor line>` per line).
    Run {
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deliver every frame after 1 ns, without duplicates or drops.
        #[arg(long)]
        reliable: bool,
        /// Fault injection: this client ignores remote DELETEs.
        #[arg(long)]
        drop_remote_deletes: Option<usize>,
    },
    /// Random edits from several clients over many seeds.
    Fuzz {
        #[arg(long, default_value_t = 3)]
        clients: usize,
        /// Random actions per client.
        #[arg(long, default_value_t = 50)]
        ops: usize,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
    },
    /// Check every delivery order of every short graph-op sequence.
    Exhaustive {
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
    /// Mean local apply latency per model size.
    Bench {
        #[arg(long, default_value = "1000,2000,4000", value_parser = colmod_cli::parse_sizes)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
    /// Write the frame-level conformance vectors as JSON.
    Vectors {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match Args::parse().cmd {
        Cmd::Run {
            script,
            seed,
            reliable,
            drop_remote_deletes,
        } => {
            let text = match std::fs::read_to_string(&script) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("{}: {e}", script.display());
                    return ExitCode::from(2);
                }
            };
            let script: Script = match text.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            let mut schedule = if reliable {
                Schedule::reliable(seed)
            } else {
                Schedule::seeded(seed)
            };
            schedule.drop_remote_deletes = drop_remote_deletes;
            match sim::run_simulation(&script, &schedule) {
                Ok(report) => {
                    for (client, at, out) in &report.outputs {
                        println!("[{client}@{at}] {}", out.trim_end());
                    }
                    println!("--- converged: {} clients", report.views.len());
                    print!("{}", render_read(&report.views[0]));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::FAILURE
                }
            }
        }
        Cmd::Fuzz {
            clients,
            ops,
            seeds,
            first_seed,
        } => {
            let mut failed = 0;
            for seed in first_seed..first_seed + seeds {
                let script = Script::fuzz(clients, ops, seed);
                if let Err(e) = sim::run_simulation(&script, &Schedule::seeded(seed)) {
                    failed += 1;
                    println!("seed {seed}: {e}");
                    if let SimError::DivergenceDetected { trace, .. } = e {
                        print!("{trace}");
                    }
                }
            }
            println!("{seeds} seeds, {clients} clients x {ops} ops: {failed} failures");
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Cmd::Exhaustive { max_len } => match sim::exhaustive_interleavings(max_len) {
            Ok(n) => {
                println!("{n} sequences, every delivery order agrees");
                ExitCode::SUCCESS
            }
            Err(c) => {
                println!("orders {:?} and {:?} disagree for:", c.first, c.second);
                for (op, stamp) in &c.ops {
                    println!("  {stamp} {op:?}");
                }
                ExitCode::FAILURE
            }
        },
        Cmd::Bench { sizes, repeats } => {
            println!("{:>8}  {:>12}", "ops", "mean/op");
            for (n, d) in sim::measure_degradation(&sizes, repeats) {
                println!("{n:>8}  {:>12?}", d);
            }
            ExitCode::SUCCESS
        }
        Cmd::Vectors { out } => {
            let json = vectors::to_json(&vectors::conformance_vectors());
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, json) {
                        eprintln!("{}: {e}", path.display());
                        return ExitCode::FAILURE;
                    }
                }
                None => print!("{json}"),
            }
            ExitCode::SUCCESS
        }
    }
}
