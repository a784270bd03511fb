use std::path::Path;
use std::process::Command;

use hubbard_vqe::experiment::SweepTable;

const TINY: &str = r#"
u_grid = [-1.0, 2.0]
algorithms = ["ED", "MF", "VHA-PS"]
reps = 1

[lattice]
nx = 2
ny = 1
periodic = false

[optimizer]
restarts = 2
max_evals = 200
"#;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hubbard-vqe"))
}

fn sweep(config: &Path, out: &Path) -> std::process::Output {
    binary()
        .args(["sweep-u", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--jobs", "1"])
        .output()
        .unwrap()
}

#[test]
fn sweep_writes_table_config_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(&config, TINY).unwrap();
    let out = dir.path().join("run");
    let status = sweep(&config, &out);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let table = SweepTable::read(&out.join("u_sweep.csv")).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert!(table.rows.iter().all(|r| r.error.is_empty()));
    for f in ["u_sweep.toml", "energy_error.svg", "order_parameters.svg"] {
        assert!(out.join(f).exists(), "{f} missing");
    }

    let again = dir.path().join("again");
    assert!(sweep(&config, &again).status.success());
    assert_eq!(std::fs::read(out.join("u_sweep.csv")).unwrap(), std::fs::read(again.join("u_sweep.csv")).unwrap());

    let replot = dir.path().join("replot");
    let status = binary().arg("plot").arg(out.join("u_sweep.csv")).arg("--out").arg(&replot).output().unwrap();
    assert!(status.status.success());
    assert_eq!(
        std::fs::read(out.join("order_parameters.svg")).unwrap(),
        std::fs::read(replot.join("order_parameters.svg")).unwrap()
    );
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("typo.toml");
    std::fs::write(&config, "u_gird = [1.0]\n").unwrap();
    let status = sweep(&config, dir.path()).status;
    assert_eq!(status.code(), Some(1));
    assert_eq!(sweep(&dir.path().join("absent.toml"), dir.path()).status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let out = binary().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}
