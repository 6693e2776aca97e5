//! End-to-end tests of the command line interface: emitted files, byte
//! determinism across thread counts, and the exit code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_urel"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("urel-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("scratch dir is writable");
    dir
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).expect("config is writable");
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().expect("no signal"), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn run_outputs_are_byte_identical_across_thread_counts_and_reruns() {
    let dir = scratch("det");
    let cfg = write_config(
        &dir,
        "case.cfg",
        "preset = example3\nt_star = 1\nx_star = 1\nn = 120\n\
         snapshot_times = 0.5, 1.0\nemit_spacetime = true\n",
    );
    let outs = [dir.join("a"), dir.join("b"), dir.join("c")];
    for (out, threads) in outs.iter().zip(["1", "4", "4"]) {
        run_ok(&[
            "run",
            cfg.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
    }
    let files =
        ["snapshot_00.csv", "snapshot_01.csv", "spacetime_p.csv", "spacetime_v.csv", "diagnostics.txt"];
    for name in files {
        let a = fs::read(outs[0].join(name)).expect(name);
        let b = fs::read(outs[1].join(name)).expect(name);
        let c = fs::read(outs[2].join(name)).expect(name);
        assert!(!a.is_empty(), "{name} is empty");
        assert!(a == b && b == c, "{name} differs between runs");
    }
    let snap = fs::read_to_string(outs[0].join("snapshot_00.csv")).unwrap();
    assert!(snap.starts_with("t,x,a,b,p,u,v,c,entropy_density\n"), "unexpected header");
    let grid = fs::read_to_string(outs[0].join("spacetime_p.csv")).unwrap();
    assert!(grid.starts_with("t,"), "space-time dump lacks the axis header");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn config_errors_name_the_line_and_exit_with_one() {
    let dir = scratch("cfg");
    let cfg = write_config(
        &dir,
        "bad.cfg",
        "preset = example1\nt_star = 1\nbogus_key = 3\nx_star = 1\n",
    );
    let (code, stderr) = exit_code(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code, 1, "stderr: {stderr}");
    assert!(stderr.contains("line 3"), "diagnostic lacks the line number: {stderr}");

    let (code, stderr) = exit_code(&["run", dir.join("missing.cfg").to_str().unwrap()]);
    assert_eq!(code, 1, "stderr: {stderr}");
    assert!(stderr.contains("missing.cfg"), "diagnostic lacks the path: {stderr}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn runtime_domain_errors_exit_with_two() {
    let dir = scratch("dom");
    let cfg = write_config(&dir, "ok.cfg", "preset = example1\nt_star = 1\nx_star = 1\nn = 20\n");
    let (code, stderr) = exit_code(&[
        "run",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.join("out").to_str().unwrap(),
        "--keep-history",
        "--decimation",
        "0",
    ]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("decimation"), "unexpected diagnostic: {stderr}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn verify_prints_one_line_per_property() {
    let out = run_ok(&["verify", "lemmas"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3, "expected one line per property: {stdout}");
    for line in &lines {
        assert!(line.contains("trials=") && line.contains("worst_margin="), "{line}");
        assert!(line.ends_with("PASS"), "{line}");
    }
    let (code, stderr) = exit_code(&["verify", "bogus"]);
    assert_eq!(code, 1, "stderr: {stderr}");
    assert!(stderr.contains("bogus"), "unexpected diagnostic: {stderr}");
}

#[test]
fn linear_emits_closed_form_profiles() {
    let dir = scratch("lin");
    let cfg = write_config(
        &dir,
        "lin.cfg",
        "preset = custom\nvariables = ab\nt_star = 2\nx_star = 3\nn = 30\n\
         snapshot_times = 0.5, 2\n\n\
         [segment]\nrange = 0 1\na = 1\nb = 0\n\n\
         [segment]\nrange = 1 inf\na = 2\nb = 0\n",
    );
    run_ok(&["linear", cfg.to_str().unwrap(), "--out-dir", dir.join("out").to_str().unwrap()]);
    for name in ["linear_00.csv", "linear_01.csv"] {
        let text = fs::read_to_string(dir.join("out").join(name)).expect(name);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,a,b"), "{name} header");
        let mut rows = 0;
        for line in lines {
            let cells: Vec<f64> =
                line.split(',').map(|c| c.parse().expect("numeric cell")).collect();
            assert_eq!(cells.len(), 4, "{name}: {line}");
            rows += 1;
        }
        assert!(rows > 0, "{name} has no rows");
    }
    let _ = fs::remove_dir_all(&dir);
}
