use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phigamma"));
    c.env_remove("PHIGAMMA_REPORT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn check_golden(file: &str, args: &[&str]) {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let want = std::fs::read_to_string(golden_dir().join(file)).unwrap();
    assert_eq!(stdout(&out), want, "golden mismatch for {file}");
}

#[test]
fn decompose_goldens() {
    let mut seen = 0;
    for entry in std::fs::read_dir(golden_dir()).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        let Some(stem) = name
            .strip_prefix("decompose-")
            .and_then(|s| s.strip_suffix(".txt"))
        else {
            continue;
        };
        let (scenario, k) = stem.rsplit_once("-k").unwrap();
        check_golden(&name, &["decompose", scenario, "--k", k]);
        seen += 1;
    }
    assert_eq!(seen, 18);
}

#[test]
fn sheaf_goldens() {
    for s in [
        "diagonal-2",
        "diagonal-3-2",
        "rank-one-0",
        "rank-one-3-2",
        "zero",
    ] {
        check_golden(
            &format!("sheaf-{s}-level1.txt"),
            &["sheaf", "--scenario", s, "--level", "1"],
        );
    }
}

fn mus(args: &[&str]) -> Vec<String> {
    let out = run(&[&["--json"], args].concat());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["mu"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn decompose_eigenvalues() {
    assert_eq!(mus(&["decompose", "diagonal-5", "--k", "1"]), ["35", "15"]);
    // k = 0: a single eigenvalue α² - 1
    assert_eq!(mus(&["decompose", "diagonal-5", "--k", "0"]), ["24"]);
    assert_eq!(
        mus(&["decompose", "zero", "--k", "0", "--alpha", "3/2"]),
        ["5/4"]
    );
    assert_eq!(
        mus(&["decompose", "zero", "--k", "0", "--trunc", "6"]),
        ["-1"]
    );
}

#[test]
fn pbw_normal_forms() {
    for (args, want) in [
        (vec!["pbw", "u+*u-"], "u-*u+ + h\n"),
        (vec!["pbw", "c", "--central", "1,3"], "3\n"),
        (vec!["pbw", "h^2-2*h+4*u+*u-", "--central", "1,3"], "3\n"),
        (vec!["pbw", "a+ - a-"], "h\n"),
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out), want, "{args:?}");
    }
}

#[test]
fn verify_exit_codes() {
    assert_eq!(run(&["verify", "nosuch"]).status.code(), Some(2));
    let out = run(&["verify", "symk"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("[pass]"));
    let out = run(&["--json", "verify", "series"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["suite"], "series");
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = std::env::temp_dir().join(format!("phigamma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.toml");
    std::fs::write(
        &bad,
        "name = \"x\"\nrank = 1\ntrunc = 4\nprime = 3\nalpha = \"1/0\"\nnabla = [[\"0\"]]\n",
    )
    .unwrap();
    let out = run(&["decompose", bad.to_str().unwrap(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    assert_eq!(
        run(&["decompose", "no-such-scenario", "--k", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["pbw", "u+ *"]).status.code(), Some(2));
    assert_eq!(run(&["pbw", "c", "--central", "1"]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_is_deterministic_and_reported() {
    let args = ["decompose", "zero", "--k", "2"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let dir = std::env::temp_dir().join(format!("phigamma-report-{}", std::process::id()));
    let out = bin()
        .args(["--json", "sheaf", "--scenario", "zero", "--level", "1"])
        .env("PHIGAMMA_REPORT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let saved = std::fs::read(dir.join("sheaf-zero-level1.json")).unwrap();
    assert_eq!(saved, out.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}
