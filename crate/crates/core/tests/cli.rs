//! End-to-end runs of the `intrinsic-arrow` binary.

use std::path::Path;
use std::process::{Command, Output};

use intrinsic_arrow::emit::{read_csv, read_summary};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intrinsic-arrow"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn identical_runs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    for (out, threads) in [("a.csv", "1"), ("b.csv", "2")] {
        let o = run(
            &[
                "fidelity-curve",
                "--seed",
                "9",
                "--samples",
                "4000",
                "--out",
                out,
                "--threads",
                threads,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);

    let (columns, rows) = read_csv(&dir.path().join("a.csv")).unwrap();
    assert_eq!(columns, ["delta_i", "f_closed", "f_empirical", "stderr"]);
    let grid: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(grid, (0..=12).map(|k| 0.5 * k as f64).collect::<Vec<_>>());
    let summary = read_summary(&dir.path().join("a.summary.json")).unwrap();
    assert_eq!(summary.config.seed, 9);
    assert_eq!(summary.config.n_samples, 4000);
    assert_eq!(summary.row_count, 13);
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "ramp.toml",
        r#"
kind = "langevin"
seed = 4
n_samples = 50
output = "out/ramp.json"
format = "json"

[langevin]
lambda = 1.0
gamma = 0.5
dt = 0.01
protocol = [[0.0, 0.0], [1.0, 1.0], [2.0, 1.0]]
"#,
    );
    let o = run(&["langevin", "--config", &config], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_summary(&dir.path().join("out/ramp.json")).unwrap();
    assert_eq!(doc.rows.map(|r| r.len()), Some(100));
    assert_eq!(doc.config.seed, 4);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("integral_relation"), "{stdout}");
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(
        dir.path(),
        "typo.toml",
        "kind = \"langevin\"\n[langevin]\nlamda = 1.0\ngamma = 0.5\n",
    );
    let o = run(&["langevin", "--config", &typo], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lamda"));

    let o = run(&["classical", "--config", &typo], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let big = write(
        dir.path(),
        "big.toml",
        "kind = \"quantum\"\n[quantum]\nd = 9\nn = 2\nspectrum = [1.0, 0.0]\n",
    );
    let o = run(&["quantum", "--config", &big], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("quantum.d"));

    assert_eq!(
        run(&["classical", "--format", "xml"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["classical", "--samples", "0"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["nonsense"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn verify_exit_code_reflects_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let pass = write(
        dir.path(),
        "pass.toml",
        "kind = \"verify\"\n[verify]\ncriteria = [2, 7, 8]\n",
    );
    let o = run(&["verify", "--config", &pass, "--out", "v.csv"], dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let (_, rows) = read_csv(&dir.path().join("v.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == 1.0));
}
