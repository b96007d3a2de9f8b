use std::fs;
use std::path::Path;

use shor_rabi::cli::{run, Cli, Command};

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.ini");
    fs::write(&path, body).unwrap();
    path
}

fn cli(command: Command, config: &Path, out: &Path) -> Cli {
    Cli { command, config: Some(config.to_path_buf()), out: Some(out.to_path_buf()), seed: None, trajectories: None, quadrature_points: None }
}

const BASE: &str = "[hamiltonian]\nomega = 0.1\nj = 1\n";

#[test]
fn fig3_dots_follow_the_rabi_curve() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let files = run(&cli(Command::Fig3, &config, dir.path())).unwrap();
    let text = fs::read_to_string(&files[0]).unwrap();
    assert!(text.starts_with("# schema=shor-rabi/fig3/v1 "));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut dots = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        if rec[6].is_empty() {
            continue;
        }
        let omega_t: f64 = rec[2].parse().unwrap();
        let dot: f64 = rec[6].parse().unwrap();
        assert!((dot - omega_t.cos().powi(2)).abs() < 1e-10);
        dots += 1;
    }
    assert!(dots > 10);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{BASE}[noise]\nepsilon = 0.02\nsteps = 8\n[schedule]\nn = 4\nperiods = 2\n[experiment]\nseed = 5\ntrajectories = 20\n");
    let config = write_config(dir.path(), &body);
    for command in [Command::Sequence, Command::Evolve] {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        let first = run(&cli(command, &config, &a)).unwrap();
        let second = run(&cli(command, &config, &b)).unwrap();
        assert_eq!(first.len(), second.len());
        for (x, y) in first.iter().zip(&second) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
        }
    }
}

#[test]
fn seed_flag_changes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{BASE}[noise]\nepsilon = 0.05\nsteps = 8\n[experiment]\ntrajectories = 50\n");
    let config = write_config(dir.path(), &body);
    let mut args = cli(Command::Evolve, &config, &dir.path().join("a"));
    let a = run(&args).unwrap();
    args.seed = Some(99);
    args.out = Some(dir.path().join("b"));
    let b = run(&args).unwrap();
    assert_ne!(fs::read(&a[1]).unwrap(), fs::read(&b[1]).unwrap());
}

#[test]
fn kl_check_writes_chi_and_logical_search() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BASE);
    let files = run(&cli(Command::KlCheck, &config, dir.path())).unwrap();
    let chi = fs::read_to_string(&files[0]).unwrap();
    assert!(chi.contains("violations=0"));
    assert_eq!(chi.lines().count(), 2 + 28 * 28);
    let logical = fs::read_to_string(&files[1]).unwrap();
    assert!(logical.contains("2,351,\n"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[hamiltonian]\nomega = 0.1\nj = 1\nbogus = 3\n");
    let err = run(&cli(Command::Fig3, &config, dir.path())).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let missing = dir.path().join("absent.ini");
    assert_eq!(run(&cli(Command::Fig3, &missing, dir.path())).unwrap_err().exit_code(), 2);
}

#[test]
fn invariant_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[hamiltonian]\nomega = 0.1\nj = 1\nzeta1 = 1\nzeta2 = 1\n");
    let err = run(&cli(Command::Diagnostics, &config, dir.path())).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_shor-rabi");
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[hamiltonian]\nomega = 0.1\n");
    let status = std::process::Command::new(bin).args(["fig3", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = std::process::Command::new(bin).args(["nonsense"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
