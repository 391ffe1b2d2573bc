use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use axum::body::Body;
use axum::http::Request;
use commlab_service::{build_state, router, ServiceConfig};
use http_body_util::BodyExt;
use tower::ServiceExt;

fn course_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../course")
}

fn task_file(lab: &str, task: &str) -> PathBuf {
    course_dir().join(lab).join(task).join("task.toml")
}

fn script(lab: &str, task: &str, name: &str) -> PathBuf {
    course_dir().join(lab).join(task).join(name)
}

fn commlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(args)
        .env_remove("COMMLAB_PORT")
        .env_remove("COMMLAB_COURSE")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
    }
}

/// A one-task course holding a copy of lab1/task2.
fn single_task_course() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("course.toml"),
        "title = \"Scratch\"\n\n[[labs]]\nid = \"lab1\"\ntitle = \"Bits\"\ntasks = [\"task2\"]\n",
    )
    .unwrap();
    copy_dir(&course_dir().join("lab1/task2"), &dir.path().join("lab1/task2"));
    dir
}

#[test]
fn shipped_course_validates() {
    let o = commlab(&["validate", s(&course_dir())]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    let (valid, total) = last.split_once(" of ").unwrap();
    assert!(last.ends_with("tasks valid"));
    assert_eq!(valid, total.split(' ').next().unwrap());
}

#[test]
fn broken_starters_name_the_rule() {
    let dir = single_task_course();
    let starter = dir.path().join("lab1/task2/starter.lab");
    fs::write(&starter, "tx_bs = [1 2\n").unwrap();
    let o = commlab(&["validate", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("lab1/task2 FAIL starter-executes"),
        "{}",
        stdout(&o)
    );

    fs::copy(dir.path().join("lab1/task2/reference.lab"), &starter).unwrap();
    let o = commlab(&["validate", s(dir.path()), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failed: Vec<&str> = v[0]["rules"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == false)
        .map(|r| r["rule"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["starter-fails-specifically"]);
}

#[test]
fn empty_directories_have_no_course() {
    let dir = tempfile::tempdir().unwrap();
    let o = commlab(&["validate", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no course found"), "{}", stderr(&o));
}

#[test]
fn run_dumps_figures_and_workspace() {
    let o = commlab(&[
        "run",
        s(&task_file("lab1", "task1")),
        s(&script("lab1", "task1", "task.lab")),
        "--seed",
        "7",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("figure ")).count(), 2);
    assert!(out.contains("Received message: Finished!"));
    assert!(out.lines().any(|l| l.starts_with("rx_msg = ")));
}

#[test]
fn seeded_runs_repeat_exactly() {
    let args = [
        "run".to_string(),
        s(&task_file("lab5", "task1")).to_string(),
        s(&script("lab5", "task1", "reference.lab")).to_string(),
        "--seed".into(),
        "7".into(),
    ];
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let a = commlab(&args);
    let b = commlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.clone();
    other[4] = "8";
    assert_ne!(commlab(&other).stdout, a.stdout);
}

#[test]
fn run_reports_syntax_errors_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lab");
    fs::write(&bad, "x = 1;\ny = (2 + ;\n").unwrap();
    let o = commlab(&["run", s(&task_file("lab1", "task1")), s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let task = task_file("lab1", "task2");
    let o = commlab(&[
        "check",
        s(&task),
        s(&script("lab1", "task2", "reference.lab")),
        "--seed",
        "1",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("lab1/task2 PASS"));

    let o = commlab(&[
        "check",
        s(&task),
        s(&script("lab1", "task2", "starter.lab")),
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("8 bits for every character"), "{}", stdout(&o));

    let dir = tempfile::tempdir().unwrap();
    let cheat = dir.path().join("cheat.lab");
    let reference = fs::read_to_string(script("lab1", "task2", "reference.lab")).unwrap();
    fs::write(&cheat, format!("bits = text2bitseq('x');\n{reference}")).unwrap();
    let o = commlab(&["check", s(&task), s(&cheat)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("text2bitseq may not be used in this task (line 1)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn closed_stdout_is_not_a_crash() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(["validate", s(&course_dir())])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let o = child.wait_with_output().unwrap();
    assert!(!stderr(&o).contains("panicked"), "{}", stderr(&o));
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("service.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn serve_prints_a_banner() {
    let dir = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = write_config(
        dir.path(),
        &format!(
            "port = {port}\ncourse = \"{}\"\ndata_dir = \"data\"\n",
            course_dir().display()
        ),
    );
    let mut child = Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(["serve", "--config", s(&cfg)])
        .env_remove("COMMLAB_PORT")
        .env_remove("COMMLAB_COURSE")
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    assert!(line.contains(&format!("127.0.0.1:{port}/api/v1")), "{line}");

    let mut stream = std::net::TcpStream::connect(("127.0.0.1", port)).unwrap();
    stream
        .write_all(b"GET /api/v1/progress/nobody HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n")
        .unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    assert!(reply.starts_with("HTTP/1.1 404"), "{reply}");
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(dir.path().join("data").is_dir());
}

#[test]
fn serve_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let course = course_dir();
    for body in [
        format!("port = 99999\ncourse = \"{}\"\n", course.display()),
        format!("port = \"http\"\ncourse = \"{}\"\n", course.display()),
        "port = 8123\ncourse = \"missing\"\n".to_string(),
    ] {
        let cfg = write_config(dir.path(), &body);
        let o = commlab(&["serve", "--config", s(&cfg)]);
        assert_eq!(o.status.code(), Some(1), "{body}");
        assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));
    }
    let o = commlab(&["serve", "--config", s(&dir.path().join("absent.toml"))]);
    assert_eq!(o.status.code(), Some(1));
}

async fn service_report(app: &axum::Router, task: &str, source: &str, seed: u64) -> serde_json::Value {
    let body = serde_json::json!({ "student": "cli", "task": task, "source": source, "seed": seed });
    let req = Request::post("/api/v1/check")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    v["report"].clone()
}

#[tokio::test]
async fn cli_and_service_agree() {
    let app = router(build_state(&ServiceConfig::for_course(course_dir())).unwrap());
    let cases = [
        ("lab1", "task2", "starter.lab", 3u64),
        ("lab1", "task2", "reference.lab", 3),
        ("lab1", "task2", "mistake_reversed.lab", 4),
        ("lab5", "task1", "reference.lab", 5),
        ("lab8", "task1", "starter.lab", 6),
    ];
    for (lab, task, file, seed) in cases {
        let path = script(lab, task, file);
        let o = commlab(&[
            "check",
            s(&task_file(lab, task)),
            s(&path),
            "--seed",
            &seed.to_string(),
            "--json",
        ]);
        let cli: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let source = fs::read_to_string(&path).unwrap();
        let service = service_report(&app, &format!("{lab}/{task}"), &source, seed).await;
        assert_eq!(cli, service, "{lab}/{task} {file}");
        assert_eq!(o.status.success(), cli["verdict"] == "pass");
    }
}
