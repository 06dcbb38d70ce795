use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::os::unix::net::UnixStream;
use std::time::Duration;

use colmod_core::client::ClientSession;
use colmod_core::command::Command;
use colmod_net::{serve_stream, serve_tcp, Connection, SharedHub};
use uuid::Uuid;

const T: Duration = Duration::from_secs(10);

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .unwrap()
}

fn tcp_server(rt: &tokio::runtime::Runtime, hub: SharedHub) -> SocketAddr {
    let listener = rt
        .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
        .unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(serve_tcp(listener, hub));
    addr
}

fn pipe(rt: &tokio::runtime::Runtime, hub: &SharedHub, id: u128) -> Connection {
    let (ours, theirs) = UnixStream::pair().unwrap();
    theirs.set_nonblocking(true).unwrap();
    let hub = hub.clone();
    rt.spawn(async move {
        let s = tokio::net::UnixStream::from_std(theirs).unwrap();
        let _ = serve_stream(s, hub).await;
    });
    let reader = ours.try_clone().unwrap();
    Connection::over(reader, ours, ClientSession::new(Uuid::from_u128(id))).unwrap()
}

fn cmd(s: &str) -> Command {
    Command::parse(s).unwrap()
}

#[test]
fn edits_propagate_over_tcp() {
    let rt = runtime();
    let addr = tcp_server(&rt, SharedHub::default());
    let a = Connection::connect_tcp(addr, ClientSession::new(Uuid::from_u128(1))).unwrap();
    let b = Connection::connect_tcp(addr, ClientSession::new(Uuid::from_u128(2))).unwrap();
    a.wait_live(T).unwrap();
    b.wait_live(T).unwrap();
    assert!(a.submit(&cmd("CREATE -name x -v 1")).unwrap().is_applied());
    b.wait_for(T, |s| s.model().read_model().element("x").is_some())
        .unwrap();
    assert!(b.submit(&cmd("UPDATE -name x -v 2")).unwrap().is_applied());
    a.wait_for(T, |s| {
        s.model()
            .read_model()
            .element("x")
            .is_some_and(|x| x.attributes["v"] == "2")
    })
    .unwrap();
    a.wait_confirmed(T).unwrap();
    b.wait_confirmed(T).unwrap();
    assert_eq!(a.view(), b.view());
}

#[test]
fn late_joiner_receives_the_history() {
    let rt = runtime();
    let hub = SharedHub::default();
    let a = pipe(&rt, &hub, 1);
    a.wait_live(T).unwrap();
    for i in 0..20 {
        a.submit(&cmd(&format!("CREATE -name n{i}"))).unwrap();
    }
    a.submit(&cmd("DELETE -name n3")).unwrap();
    a.wait_confirmed(T).unwrap();
    let late = pipe(&rt, &hub, 2);
    late.wait_live(T).unwrap();
    assert_eq!(late.view(), a.view());
    assert_eq!(late.view().elements.len(), 19);
}

#[test]
fn editor_lines_run_through_the_connection() {
    let rt = runtime();
    let hub = SharedHub::default();
    let a = pipe(&rt, &hub, 1);
    let b = pipe(&rt, &hub, 2);
    a.wait_live(T).unwrap();
    b.wait_live(T).unwrap();
    a.with_session(|s| colmod_core::editor::bootstrap_mindmap_metamodel(s))
        .unwrap()
        .unwrap();
    a.execute("CREATE MindMap m").unwrap();
    a.wait_confirmed(T).unwrap();
    b.wait_for(T, |s| s.model().read_model().element("m").is_some())
        .unwrap();
    assert_eq!(a.view(), b.view());
}

#[test]
fn malformed_lines_do_not_close_the_connection() {
    let rt = runtime();
    let addr = tcp_server(&rt, SharedHub::default());
    let mut raw = TcpStream::connect(addr).unwrap();
    raw.set_read_timeout(Some(T)).unwrap();
    raw.write_all(b"BOGUS\nU\tnot\tenough\nSREQ\n").unwrap();
    let mut r = BufReader::new(raw.try_clone().unwrap());
    let mut line = String::new();
    r.read_line(&mut line).unwrap();
    assert_eq!(line, "SBEG\n");
    line.clear();
    r.read_line(&mut line).unwrap();
    assert_eq!(line, "SEND\n");
    let frame = "U\t00000000-0000-0000-0000-000000000001\t5\t00000000-0000-0000-0000-000000000001\tCREATE -name  spaced\n";
    raw.write_all(frame.as_bytes()).unwrap();
    line.clear();
    r.read_line(&mut line).unwrap();
    assert_eq!(line, frame, "relayed byte for byte");
}
