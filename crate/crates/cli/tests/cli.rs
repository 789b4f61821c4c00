use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anisolattice_cli::report::{ErrorReport, RunReport, RunResult, SpectralReport, VerifyOutput};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anisolattice"))
}

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_rational_line() {
    let s = specs().join("rational_line.json");
    let out: VerifyOutput = serde_json::from_str(&stdout(&run(&["verify", "--subspace", s.to_str().unwrap()]))).unwrap();
    assert_eq!(out.subspace.gamma, vec![vec!["2".to_string(), "1".to_string()]]);
    assert_eq!(out.subspace.gamma_star, vec![vec!["2/5".to_string(), "1/5".to_string()]]);
    assert_eq!(out.subspace.covolume_sq, "5");
    assert!(out.verify.all_passed);
}

#[test]
fn count_horizontal_line() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"n": 2, "basis": [["1", "0"]]}"#);
    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&["count", "--subspace", &s, "--eps", "1/2"]))).unwrap();
    assert_eq!(v["total"], 3);
}

#[test]
fn malformed_json_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"subspace\": ");
    let o = run(&["run", "--spec", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err: ErrorReport = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err.kind, "input");
    assert_eq!(err.exit_code, 2);
    assert_eq!(err.schema_version, 1);
}

#[test]
fn budget_exceeded_exit_code() {
    let s = specs().join("rational_line.json");
    let o = run(&["count", "--subspace", s.to_str().unwrap(), "--eps", "1/100000", "--budget", "100"]);
    assert_eq!(o.status.code(), Some(3));
    let err: ErrorReport = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err.kind, "budget");
}

#[test]
fn degenerate_fit_exit_code() {
    // Zero remainders are dropped, leaving a single usable row.
    let dir = tempfile::tempdir().unwrap();
    let csv = write(
        dir.path(),
        "rows.csv",
        "eps_num,eps_den,count,leading,remainder,predicted_exponent,ambiguous_count\n\
         1,2,3,3.0,0.0,0.0,0\n1,4,5,5.0,0.0,0.0,0\n1,8,9,8.0,1.0,0.0,0\n",
    );
    let o = run(&["fit", "--input", &csv]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec = specs().join("rational_line_sweep.json");
    stdout(&run(&["run", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: RunReport = serde_json::from_str(&text).unwrap();
    let again: RunReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, again);
    let RunResult::Fit { rows, fit } = &report.result else {
        panic!("expected a fit report")
    };
    assert_eq!(rows.len(), 6);
    assert_eq!(fit.n_points + fit.dropped.len(), 6);
    assert!(dir.path().join("sweep.csv").exists());
}

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let s = specs().join("rational_line.json");
    let d = write(
        dir.path(),
        "d.json",
        r#"{"type": "superellipsoid", "center": ["0", "0"], "radii": ["1", "1"], "power": 3}"#,
    );
    let sweep = |out: &str| {
        let out = dir.path().join(out);
        stdout(&run(&[
            "sweep",
            "--subspace",
            s.to_str().unwrap(),
            "--domain",
            &d,
            "--eps-grid",
            "1/4,1/8,1/16",
            "--samples",
            "20000",
            "--seed",
            "11",
            "--threads",
            "2",
            "--out",
            out.to_str().unwrap(),
        ]));
        std::fs::read(out).unwrap()
    };
    let (a, b) = (sweep("a.csv"), sweep("b.csv"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn spectral_counts_agree() {
    let s = specs().join("rational_line.json");
    let o = run(&[
        "spectral",
        "--subspace",
        s.to_str().unwrap(),
        "--A",
        "1/2,0",
        "--eps",
        "1/2",
        "--mu",
        "1",
    ]);
    let r: SpectralReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.counting_function, 6);
    assert_eq!(r.lattice_count, 6);
    assert_eq!(r.equivalent_ball_center, vec!["9/20".to_string(), "1/10".to_string()]);
}

#[test]
fn bundled_specs_parse() {
    for entry in std::fs::read_dir(specs()).unwrap() {
        let p = entry.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        let ok = if text.contains("\"mode\"") {
            serde_json::from_str::<anisolattice_cli::input::ProblemSpec>(&text).is_ok()
        } else {
            serde_json::from_str::<anisolattice_cli::input::SubspaceInput>(&text)
                .map(|s| s.build().is_ok())
                .unwrap_or(false)
        };
        assert!(ok, "{}", p.display());
    }
}
