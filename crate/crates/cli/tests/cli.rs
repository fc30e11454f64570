use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn shipped(name: &str) -> PathBuf {
    scenarios().join(format!("{name}.toml"))
}

fn optomech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
        .args(args)
        .output()
        .unwrap()
}

fn run(verb: &str, scenario: &Path, extra: &[&str]) -> Output {
    let mut args = vec![verb, "--scenario", scenario.to_str().unwrap()];
    args.extend_from_slice(extra);
    optomech(&args)
}

/// Writes a modified copy of a shipped scenario.
fn variant(dir: &Path, name: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let text = fs::read_to_string(shipped(name)).unwrap();
    let path = dir.join(format!("{name}_variant.toml"));
    fs::write(&path, edit(text)).unwrap();
    path
}

#[test]
fn shipped_scenarios_validate() {
    for name in [
        "fig1_cw",
        "fig2_sum",
        "fig2_half",
        "fig2_weak",
        "fig3_nanosphere",
    ] {
        let out = run("validate", &shipped(name), &[]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
    }
}

#[test]
fn steady_csv_is_deterministic() {
    let a = run("steady", &shipped("fig1_cw"), &[]);
    let b = run("steady", &shipped("fig1_cw"), &["--threads", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_over_tau,eta_min,E_N,nbar1,nbar2"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!(row[0].is_infinite());
    assert!(row[1] > 0.5 && row[1] < 0.75);
}

#[test]
fn steady_report_has_covariance() {
    let out = run(
        "steady",
        &shipped("fig1_cw"),
        &["--format", "report", "--diffusion", "high-t"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["options"]["diffusion"], "high-temperature");
    assert_eq!(v["result"]["covariance"].as_array().unwrap().len(), 8);
    assert_eq!(v["result"]["stable"], true);
}

#[test]
fn evolve_writes_files_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let o = out_dir.to_str().unwrap();
    let a = run("evolve", &shipped("fig2_sum"), &["--out", o]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let csv = fs::read(out_dir.join("fig2_sum.evolve.csv")).unwrap();
    let b = run("evolve", &shipped("fig2_sum"), &["--out", o]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(csv, fs::read(out_dir.join("fig2_sum.evolve.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("t_over_tau,eta_min,E_N,nbar1,nbar2\n"));
    assert_eq!(text.lines().count(), 1 + 801);

    let r = run(
        "evolve",
        &shipped("fig2_sum"),
        &["--out", o, "--format", "report"],
    );
    assert_eq!(r.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("fig2_sum.evolve.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["orbit"]["entangled"], true);
    assert_eq!(v["result"]["orbit"]["converged"], true);
}

#[test]
fn quasistatic_mean_field_runs() {
    let out = run(
        "evolve",
        &shipped("fig2_half"),
        &["--meanfield", "quasistatic", "--format", "report"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["options"]["meanfield"], "quasistatic");
}

#[test]
fn effective_lists_three_pairs() {
    let out = run(
        "effective",
        &shipped("fig2_sum"),
        &["--jformula", "single-power"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("j,l,j0,j1,j2,residual"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sweep_rows_follow_grid_order() {
    let out = run("sweep", &shipped("fig1_cw"), &["--threads", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let ratios: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 19);
    assert!(ratios.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(
        run("sweep", &shipped("fig1_cw"), &["--threads", "1"]).stdout,
        text.into_bytes()
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let bad_key = variant(dir.path(), "fig1_cw", |t| {
        t.replace("temperature = 0.1", "temperature = 0.1\nhumidity = 0.3")
    });
    assert_eq!(run("validate", &bad_key, &[]).status.code(), Some(2));
    assert_eq!(run("steady", &bad_key, &[]).status.code(), Some(2));

    let missing = dir.path().join("absent.toml");
    assert_eq!(run("steady", &missing, &[]).status.code(), Some(2));

    let no_sweep = variant(dir.path(), "fig2_sum", |t| t);
    assert_eq!(run("sweep", &no_sweep, &[]).status.code(), Some(2));

    let blue = variant(dir.path(), "fig1_cw", |t| {
        t.replace("mechanical_ratio = 1.0", "mechanical_ratio = -1.0")
    });
    let out = run("steady", &blue, &[]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let short = variant(dir.path(), "fig2_sum", |t| {
        t.replace("t_max_tau = 400.0", "t_max_tau = 2.0")
    });
    let out = run("evolve", &short, &[]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!out.stdout.is_empty());
}
