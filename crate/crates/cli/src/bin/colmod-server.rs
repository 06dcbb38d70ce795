use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use colmod_core::server::DEFAULT_QUEUE_CAPACITY;
use colmod_net::{run_server, SharedHub};

/// Broadcast hub: stores every update and relays it to all clients.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// TCP address for line-framed clients.
    #[arg(long, default_value = colmod_cli::DEFAULT_SERVER)]
    listen: SocketAddr,
    /// Address for the WebSocket endpoint (`/ws`).
    #[arg(long)]
    web_listen: Option<SocketAddr>,
    /// Directory served next to the WebSocket endpoint.
    #[arg(long, requires = "web_listen")]
    static_dir: Option<PathBuf>,
    /// Live frames a connection may lag behind before it is dropped.
    #[arg(long, default_value_t = DEFAULT_QUEUE_CAPACITY)]
    queue_capacity: usize,
    #[arg(long, default_value = "info")]
    log_level: String,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = colmod_cli::init_logging(&args.log_level) {
        eprintln!("{e}");
        return ExitCode::from(2);
    }
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("runtime: {e}");
            return ExitCode::FAILURE;
        }
    };
    let hub = SharedHub::new(args.queue_capacity);
    match rt.block_on(run_server(
        hub,
        Some(args.listen),
        args.web_listen,
        args.static_dir,
    )) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            tracing::error!(error = %e, "server stopped");
            ExitCode::FAILURE
        }
    }
}
