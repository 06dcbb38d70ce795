use std::io::Write;
use std::net::TcpListener;
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

fn bin(name: &str) -> Command {
    Command::new(match name {
        "sim" => env!("CARGO_BIN_EXE_colmod-sim"),
        "editor" => env!("CARGO_BIN_EXE_colmod-editor"),
        "server" => env!("CARGO_BIN_EXE_colmod-server"),
        _ => unreachable!(),
    })
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SCRIPT: &str = "\
# two editors, one mindmap
0 1000 BOOTSTRAP
0 2000 CREATE MindMap mindmap_0
1 9000000 UPDATE mindmap_0 title todolist
0 9000000 CREATE CentralTopic tasks
1 20000000 LINK mindmap_0.topic TO tasks
0 30000000 VIOLATIONS
";

#[test]
fn sim_runs_a_script_to_convergence() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(SCRIPT.as_bytes()).unwrap();
    let out = bin("sim")
        .args(["run", "--seed", "4", "--script"])
        .arg(f.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("--- converged: 2 clients"), "{text}");
    assert!(
        text.contains("mindmap_0 : MindMap title=todolist"),
        "{text}"
    );
    assert!(text.contains("[topic_0]: tasks : CentralTopic"), "{text}");
}

#[test]
fn sim_rejects_a_malformed_script() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(b"0 abc READ\n").unwrap();
    let out = bin("sim")
        .args(["run", "--script"])
        .arg(f.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn sim_reports_an_injected_divergence() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(b"0 1000 CREATE MindMap m\n0 2000000 DELETE m\n1 9000000 READ\n")
        .unwrap();
    let out = bin("sim")
        .args([
            "run",
            "--reliable",
            "--drop-remote-deletes",
            "1",
            "--script",
        ])
        .arg(f.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("DELETE"));
}

#[test]
fn sim_fuzz_and_exhaustive_pass() {
    let out = bin("sim")
        .args(["fuzz", "--seeds", "3", "--ops", "20"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 failures"));
    let out = bin("sim")
        .args(["exhaustive", "--max-len", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out), "462 sequences, every delivery order agrees\n");
}

#[test]
fn sim_vectors_match_the_checked_in_file() {
    let out = bin("sim").arg("vectors").output().unwrap();
    assert!(out.status.success());
    let file = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../vectors/conformance.json"
    ))
    .unwrap();
    assert!(stdout(&out) == file);
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start_server() -> (Server, String) {
    let addr = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .to_string();
    let child = bin("server")
        .args(["--listen", &addr, "--log-level", "error"])
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(10);
    while std::net::TcpStream::connect(&addr).is_err() {
        assert!(Instant::now() < deadline, "server did not start");
        std::thread::sleep(Duration::from_millis(20));
    }
    (Server(child), addr)
}

fn editor(addr: &str, extra: &[&str], stdin: &str) -> String {
    let mut child = bin("editor")
        .args(["--server", addr])
        .args(extra)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

#[test]
fn editors_share_a_model_through_the_server() {
    let (_server, addr) = start_server();
    let mut script = tempfile::NamedTempFile::new().unwrap();
    script
        .write_all(b"CREATE MindMap mindmap_0\nUPDATE mindmap_0 title todolist\n")
        .unwrap();
    let first = editor(
        &addr,
        &["--bootstrap", "--script", script.path().to_str().unwrap()],
        "",
    );
    assert!(
        first.starts_with("bootstrap: 12 commands issued\n"),
        "{first}"
    );
    assert!(
        first.contains("> CREATE MindMap mindmap_0\nok\n"),
        "{first}"
    );

    let second = editor(&addr, &["--bootstrap"], "READ\nOBJECTS\n");
    assert!(
        second.starts_with("bootstrap: 0 commands issued\n"),
        "{second}"
    );
    assert!(
        second.contains("mindmap_0 : MindMap title=todolist"),
        "{second}"
    );
}

#[test]
fn strict_editor_refuses_inconsistent_edits() {
    let (_server, addr) = start_server();
    let out = editor(
        &addr,
        &["--bootstrap", "--strict"],
        "CREATE MindMap m\nCREATE CentralTopic tasks\nREAD\n",
    );
    assert!(
        out.contains("rejected by strict conformance: m has 0 topic links"),
        "{out}"
    );
    assert!(!out.contains("m : MindMap"), "{out}");
    assert!(out.contains("tasks : CentralTopic"), "{out}");
}
