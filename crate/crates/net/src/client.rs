//! Blocking client: a [`ClientSession`] driven over any byte stream by a
//! reader thread.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use colmod_core::client::{ClientError, ClientSession};
use colmod_core::command::{ApplyResult, Command};
use colmod_core::editor::{self, Outcome};
use colmod_core::physical::ModelView;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("timed out")]
    Timeout,
    #[error("connection closed")]
    Closed,
}

struct Shared {
    session: Mutex<ClientSession>,
    changed: Condvar,
    closed: AtomicBool,
    writer: Mutex<Box<dyn Write + Send>>,
}

impl Shared {
    fn session(&self) -> MutexGuard<'_, ClientSession> {
        self.session.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Writes whatever the session has queued. The writer lock is held
    /// across take and write so concurrent flushes keep frame order.
    fn flush(&self) -> io::Result<()> {
        let mut w = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let frames = self.session().take_outgoing();
        if frames.is_empty() {
            return Ok(());
        }
        let mut buf = String::new();
        for f in &frames {
            buf.push_str(&f.encode_line());
        }
        let res = w.write_all(buf.as_bytes()).and_then(|_| w.flush());
        if res.is_err() {
            self.session().requeue(frames);
            self.close();
        }
        res
    }

    fn close(&self) {
        self.closed.store(true, Ordering::SeqCst);
        self.session().disconnected();
        self.changed.notify_all();
    }
}

pub struct Connection {
    shared: Arc<Shared>,
    reader: Option<JoinHandle<()>>,
}

impl Connection {
    pub fn connect_tcp(addr: impl ToSocketAddrs, session: ClientSession) -> Result<Self, NetError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        Connection::over(reader, stream, session)
    }

    /// Starts the join handshake over an already connected stream pair.
    pub fn over<R, W>(reader: R, writer: W, mut session: ClientSession) -> Result<Self, NetError>
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        session.connect();
        let shared = Arc::new(Shared {
            session: Mutex::new(session),
            changed: Condvar::new(),
            closed: AtomicBool::new(false),
            writer: Mutex::new(Box::new(writer)),
        });
        shared.flush()?;
        let bg = Arc::clone(&shared);
        let handle = std::thread::Builder::new()
            .name("colmod-reader".into())
            .spawn(move || read_loop(BufReader::new(reader), &bg))?;
        Ok(Connection {
            shared,
            reader: Some(handle),
        })
    }

    pub fn is_closed(&self) -> bool {
        self.shared.closed.load(Ordering::SeqCst)
    }

    /// Blocks until `done` holds for the session, the connection closes or
    /// `timeout` passes.
    pub fn wait_for(
        &self,
        timeout: Duration,
        done: impl Fn(&ClientSession) -> bool,
    ) -> Result<(), NetError> {
        let deadline = Instant::now() + timeout;
        let mut s = self.shared.session();
        loop {
            if done(&s) {
                return Ok(());
            }
            if self.is_closed() {
                return Err(NetError::Closed);
            }
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(NetError::Timeout);
            }
            s = self
                .shared
                .changed
                .wait_timeout(s, left)
                .unwrap_or_else(|p| p.into_inner())
                .0;
        }
    }

    pub fn wait_live(&self, timeout: Duration) -> Result<(), NetError> {
        self.wait_for(timeout, ClientSession::is_live)
    }

    /// Waits until every local update has been echoed back by the server.
    pub fn wait_confirmed(&self, timeout: Duration) -> Result<(), NetError> {
        self.wait_for(timeout, |s| s.unconfirmed() == 0)
    }

    pub fn submit(&self, cmd: &Command) -> Result<ApplyResult, NetError> {
        let r = self.shared.session().submit(cmd)?;
        self.shared.flush()?;
        Ok(r)
    }

    /// Runs one editor line against the session and sends the result.
    pub fn execute(&self, line: &str) -> Result<Outcome, NetError> {
        let out = editor::execute(&mut *self.shared.session(), line);
        self.shared.flush()?;
        Ok(out)
    }

    /// Runs `f` with the session locked, then sends anything it queued.
    pub fn with_session<T>(&self, f: impl FnOnce(&mut ClientSession) -> T) -> Result<T, NetError> {
        let out = f(&mut self.shared.session());
        self.shared.flush()?;
        Ok(out)
    }

    pub fn view(&self) -> ModelView {
        self.shared.session().model().read_model()
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        // The reader exits when the peer closes; do not block on it here.
        self.reader.take();
    }
}

fn read_loop<R: Read>(reader: BufReader<R>, shared: &Shared) {
    for line in reader.lines() {
        let Ok(line) = line else { break };
        if line.is_empty() {
            continue;
        }
        if let Err(e) = shared.session().receive(&line) {
            tracing::warn!(error = %e, "frame ignored");
        }
        shared.changed.notify_all();
        if shared.flush().is_err() {
            return;
        }
    }
    shared.close();
}
