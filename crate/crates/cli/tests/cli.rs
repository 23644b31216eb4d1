use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn masc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_masc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const MASC: &str = "[masc]\nn = 16\ntheta = 0.1\neta_start = 0.1\neta_step = 0.05\np = 5\nk = 3\n";

fn write_config(dir: &Path, data: &str, extra: &str) -> String {
    let p = dir.join("exp.conf");
    std::fs::write(&p, format!("[data]\n{data}\n{MASC}{extra}")).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gen_then_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("moons.csv");
    let o = masc(&["gen", "two-moons:m=300,noise=0.03,seed=5", "-o", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x0,x1,label\n"));
    assert_eq!(text.lines().count(), 301);

    let conf = write_config(dir.path(), "file = moons.csv", "[output]\ndir = results\n");
    let o = masc(&["run", &conf]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("points:   300"), "{out}");
    assert!(out.contains("accuracy:"), "{out}");
    for f in ["labels.csv", "queries.csv", "budget_curve.csv", "metrics.txt", "confusion.csv"] {
        assert!(dir.path().join("results").join(f).is_file(), "{f}");
    }
    let labels = std::fs::read_to_string(dir.path().join("results/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 301);
}

#[test]
fn runs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "generate = two-moons:m=400,seed=9", "");
    let mut logs = Vec::new();
    for threads in ["1", "3"] {
        let o = Command::new(env!("CARGO_BIN_EXE_masc"))
            .args(["run", &conf])
            .env("MASC_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        logs.push((
            std::fs::read(dir.path().join("out/queries.csv")).unwrap(),
            std::fs::read(dir.path().join("out/labels.csv")).unwrap(),
        ));
    }
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let o = masc(&["run", d.join("absent.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    std::fs::write(d.join("bad.conf"), "[masc]\nn = sixteen\n").unwrap();
    let o = masc(&["run", d.join("bad.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let conf = write_config(d, "file = missing.csv", "");
    let o = masc(&["run", &conf]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("missing.csv"));

    std::fs::write(d.join("unlabeled.csv"), "x,y\n0,0\n1,1\n").unwrap();
    let conf = write_config(d, "file = unlabeled.csv", "");
    let o = masc(&["run", &conf]);
    assert_eq!(o.status.code(), Some(4));

    let conf = write_config(d, "generate = two-moons:m=100", "eta_max = 0.05\n");
    let o = masc(&["run", &conf]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).contains("nothing to extend from"));

    let conf = write_config(d, "generate = two-moons:m=100", "oracle = human\n");
    let o = masc(&["run", &conf]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("masc serve"));

    let o = masc(&["gen", "spirals", "-o", d.join("x.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_masc"))
        .args(["gen", "two-moons", "-o", d.join("y.csv").to_str().unwrap()])
        .env("MASC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_from_sources_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.txt");
    let o = masc(&[
        "spectrum",
        "--sources",
        "0.5:1,2.0:0.8,-1.5:0.6",
        "-n",
        "64",
        "--threshold",
        "0.4",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("3 peaks"), "{text}");
    let peaks: Vec<(f64, f64)> = text
        .lines()
        .skip(2)
        .map(|l| {
            let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    for ((x, h), (want_x, want_h)) in peaks.iter().zip([(-1.5, 0.6), (0.5, 1.0), (2.0, 0.8)]) {
        assert!((x - want_x).abs() < 0.01 && (h - want_h).abs() < 0.01, "{x} {h}");
    }
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 64 * 32);

    // moment file: a unit mass at 1.0, degree 8
    let mut m = String::new();
    for l in -7i32..=7 {
        let t = -(l as f64);
        m.push_str(&format!("{l} {} {}\n", t.cos(), t.sin()));
    }
    let mf = dir.path().join("m.txt");
    std::fs::write(&mf, m).unwrap();
    let o = masc(&["spectrum", mf.to_str().unwrap(), "--grid", "800", "--threshold", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("degree 8, 800 grid points"), "{text}");
    assert!(text.contains("1 peaks"), "{text}");

    let o = masc(&["spectrum", "--sources", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn serve_boots_a_session() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "generate = two-moons:m=200,seed=2", "");
    let mut child = Command::new(env!("CARGO_BIN_EXE_masc"))
        .args(["serve", &conf, "--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let listening = lines.next().unwrap().unwrap();
    let session = lines.next().unwrap().unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(listening.starts_with("listening on http://127.0.0.1:"), "{listening}");
    let id = session.strip_prefix("session ").unwrap();
    assert_eq!(id.len(), 16);
    assert!(id.chars().all(|c| c.is_ascii_hexdigit()));
}
