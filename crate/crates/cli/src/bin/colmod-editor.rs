use std::fs::File;
use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use colmod_cli::{run_editor, NET_TIMEOUT};
use colmod_core::client::ClientSession;
use colmod_core::editor::{bootstrap_mindmap_metamodel, HELP};
use colmod_core::linguistic::ConformanceMode;
use colmod_net::Connection;
use uuid::Uuid;

/// Command-line mindmap editor.
#[derive(Parser)]
#[command(version, after_help = HELP)]
struct Args {
    #[arg(long, default_value = colmod_cli::DEFAULT_SERVER)]
    server: String,
    /// Issue the mindmap metamodel (skips elements that already exist).
    #[arg(long)]
    bootstrap: bool,
    /// Replay editor lines from a file instead of reading stdin.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Reject local edits that introduce linguistic violations.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    client_id: Option<Uuid>,
    #[arg(long, default_value = "warn")]
    log_level: String,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = colmod_cli::init_logging(&args.log_level) {
        eprintln!("{e}");
        return ExitCode::from(2);
    }
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let mut session = ClientSession::new(args.client_id.unwrap_or_else(Uuid::new_v4));
    if args.strict {
        session
            .model_mut()
            .set_conformance_mode(ConformanceMode::Strict);
    }
    let conn = Connection::connect_tcp(&args.server, session)?;
    conn.wait_live(NET_TIMEOUT)?;
    let mut out = io::stdout().lock();
    if args.bootstrap {
        let n = conn.with_session(|s| bootstrap_mindmap_metamodel(s))??;
        println!("bootstrap: {n} commands issued");
    }
    match &args.script {
        Some(path) => {
            let file = BufReader::new(File::open(path)?);
            run_editor(&conn, file, &mut out, true)?;
        }
        None => run_editor(&conn, io::stdin().lock(), &mut out, false)?,
    }
    conn.wait_confirmed(NET_TIMEOUT)?;
    Ok(())
}
