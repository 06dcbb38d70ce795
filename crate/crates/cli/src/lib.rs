//! Shared pieces of the command-line tools.

use std::io::{self, BufRead, IsTerminal, Write};
use std::time::Duration;

use colmod_core::editor::Outcome;
use colmod_net::{Connection, NetError};

pub const DEFAULT_SERVER: &str = "127.0.0.1:7450";

/// Installs a stderr logger at `level` (error, warn, info, debug, trace).
pub fn init_logging(level: &str) -> Result<(), String> {
    let level: tracing::Level = level
        .parse()
        .map_err(|_| format!("invalid log level {level:?}"))?;
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(io::stderr)
        .try_init()
        .map_err(|e| e.to_string())
}

/// Comma-separated sizes, e.g. `1000,2000,4000`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad size {p:?}")))
        .collect()
}

/// Runs editor lines from `input` until EOF or QUIT. Blank lines and lines
/// starting with `#` are skipped. With `echo`, each line is printed before
/// its output (script replay).
pub fn run_editor<R: BufRead, W: Write>(
    conn: &Connection,
    input: R,
    out: &mut W,
    echo: bool,
) -> Result<(), NetError> {
    let prompt = !echo && io::stdin().is_terminal();
    if prompt {
        write!(out, "> ")?;
        out.flush()?;
    }
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            if echo {
                writeln!(out, "> {trimmed}")?;
            }
            match conn.execute(trimmed)? {
                Outcome::Quit => break,
                Outcome::Output(text) => {
                    out.write_all(text.as_bytes())?;
                    if !text.is_empty() && !text.ends_with('\n') {
                        writeln!(out)?;
                    }
                }
            }
        }
        if prompt {
            write!(out, "> ")?;
            out.flush()?;
        }
    }
    Ok(())
}

/// How long tools wait for the join handshake or for echoes.
pub const NET_TIMEOUT: Duration = Duration::from_secs(10);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse_with_spaces() {
        assert_eq!(parse_sizes("1000, 4000").unwrap(), vec![1000, 4000]);
        assert!(parse_sizes("1000,x").unwrap_err().contains("\"x\""));
    }
}
