use std::io;

use tokio::io::{AsyncBufReadExt, AsyncRead, AsyncWrite, AsyncWriteExt, BufReader};
use tokio::net::TcpListener;

use crate::shared::SharedHub;

/// Accepts TCP connections forever, one task per connection.
pub async fn serve_tcp(listener: TcpListener, hub: SharedHub) -> io::Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        let _ = stream.set_nodelay(true);
        tracing::info!(%peer, "tcp connection");
        let hub = hub.clone();
        tokio::spawn(async move {
            if let Err(e) = serve_stream(stream, hub).await {
                tracing::debug!(%peer, error = %e, "connection closed");
            }
        });
    }
}

/// Runs the line protocol over any byte stream until EOF, an I/O error,
/// or the hub dropping the connection.
pub async fn serve_stream<S>(stream: S, hub: SharedHub) -> io::Result<()>
where
    S: AsyncRead + AsyncWrite + Unpin,
{
    let (read, mut write) = tokio::io::split(stream);
    let mut lines = BufReader::new(read).lines();
    let conn = hub.open();
    loop {
        tokio::select! {
            line = lines.next_line() => match line? {
                Some(line) => {
                    if let Err(e) = conn.receive(&line) {
                        tracing::warn!(conn = conn.id(), error = %e, "malformed frame ignored");
                    }
                }
                None => return Ok(()),
            },
            _ = conn.wait() => {
                let Some(frames) = conn.drain() else {
                    return Ok(());
                };
                let mut buf = String::new();
                for f in frames {
                    buf.push_str(&f);
                    buf.push('\n');
                }
                write.write_all(buf.as_bytes()).await?;
                write.flush().await?;
            }
        }
    }
}
