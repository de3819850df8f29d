use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mcl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("mcl runs")
}

fn plan_root(out: &Path) -> PathBuf {
    let mut dirs: Vec<PathBuf> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "one plan directory");
    dirs.pop().unwrap()
}

const TINY: &str = "nx = 8\nny = 16\nnz = 8\nt_final = 0.5\ndiagnostics_every = 0.25\n";

#[test]
fn every_subcommand_has_help() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in [
        "multiplier-check",
        "linear-mode",
        "linear-sweep",
        "simulate",
        "threshold-sweep",
        "norms-report",
    ] {
        let o = mcl(&[sub, "--help"], tmp.path());
        assert!(o.status.success(), "{sub} --help");
        let text = String::from_utf8_lossy(&o.stdout);
        assert!(
            text.contains("--allow-out-of-theorem") && text.contains("--jobs"),
            "{sub}"
        );
    }
    assert!(mcl(&["--help"], tmp.path()).status.success());
}

#[test]
fn threshold_sweep_is_combined_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{TINY}sweep_nu = [1e-2, 1e-3]\nsweep_epsilon = [1e-3, 1e-2]\n");
    fs::write(tmp.path().join("plan.toml"), cfg).unwrap();
    let mut roots = Vec::new();
    for (out, jobs) in [("a", "1"), ("b", "3")] {
        let o = mcl(
            &["threshold-sweep", "--config", "plan.toml", "--out", out, "--jobs", jobs],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        roots.push(plan_root(&tmp.path().join(out)));
    }
    assert_eq!(roots[0].file_name(), roots[1].file_name());
    let table = fs::read_to_string(roots[0].join("threshold.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("cell_id,status,nu,alpha,epsilon,sigma,e0,peak_amplification"));
    assert!(lines[1..].iter().all(|l| l.contains(",ok,")));
    for name in ["threshold.csv", "records.csv"] {
        assert_eq!(
            fs::read(roots[0].join(name)).unwrap(),
            fs::read(roots[1].join(name)).unwrap(),
            "{name}"
        );
    }
    let cell = fs::read_dir(&roots[0])
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.is_dir())
        .unwrap();
    for f in ["config", "diagnostics.csv", "states.bin", "log", "summary.csv"] {
        assert!(cell.join(f).exists(), "{f}");
    }
}

#[test]
fn out_of_theorem_alpha_needs_the_override() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), format!("{TINY}alpha = 5.0\n")).unwrap();
    let o = mcl(&["simulate", "--config", "c.toml", "--out", "o"], tmp.path());
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("warning") && err.contains("8p"), "{err}");
    assert!(!tmp.path().join("o").exists());
    let o = mcl(
        &["simulate", "--config", "c.toml", "--out", "o", "--allow-out-of-theorem"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn empty_sweep_gives_header_only_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "sweep_nu = []\n").unwrap();
    let o = mcl(&["norms-report", "--config", "c.toml", "--out", "o"], tmp.path());
    assert!(o.status.success());
    let root = plan_root(&tmp.path().join("o"));
    let text = fs::read_to_string(root.join("norms_report.csv")).unwrap();
    assert_eq!(
        text.trim_end(),
        "bound_id,inequality,lhs,rhs_scale,measured_constant,class,N_used,c0_power"
    );
    let o = mcl(&["linear-sweep", "--config", "c.toml", "--out", "l"], tmp.path());
    assert!(o.status.success());
    let root = plan_root(&tmp.path().join("l"));
    assert_eq!(
        fs::read_to_string(root.join("scaling_g2.csv")).unwrap().trim_end(),
        "nu,peak,t_peak,slope_global"
    );
}

#[test]
fn failing_cells_are_isolated() {
    let tmp = tempfile::tempdir().unwrap();
    // the large amplitude violates the CFL limit on the first step
    fs::write(
        tmp.path().join("c.toml"),
        format!("{TINY}dt = 0.25\nsweep_epsilon = [1e-3, 50.0]\n"),
    )
    .unwrap();
    let o = mcl(
        &["threshold-sweep", "--config", "c.toml", "--out", "o", "--jobs", "2"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let root = plan_root(&tmp.path().join("o"));
    let table = fs::read_to_string(root.join("threshold.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",ok,") && rows[1].contains(",failed,"), "{table}");
    let failed = fs::read_dir(&root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().contains("001_"))
        .unwrap();
    let log = fs::read_to_string(failed.join("log")).unwrap();
    assert!(
        log.contains("Cfl") || log.contains("CFL") || log.contains("cfl"),
        "{log}"
    );
}

#[test]
fn linear_sweep_reports_g2_scaling() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "sweep_nu = [1e-2, 1e-3, 1e-4]\neta_max = 4.0\n",
    )
    .unwrap();
    let o = mcl(&["linear-sweep", "--config", "c.toml", "--out", "o"], tmp.path());
    assert!(o.status.success());
    let root = plan_root(&tmp.path().join("o"));
    let mut r = csv::Reader::from_path(root.join("scaling_g2.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["nu", "peak", "t_peak", "slope_global"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let slope: f64 = rows[0][3].parse().unwrap();
    assert!((slope + 2.0 / 3.0).abs() < 0.05, "{slope}");
}

#[test]
fn environment_overrides_reach_the_plan() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mcl"))
        .args(["multiplier-check", "--out", "o"])
        .env("MCL_NU", "1e-4")
        .env("MCL_TIMES", "[0.0, 5.0]")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let root = plan_root(&tmp.path().join("o"));
    let plan = fs::read_to_string(root.join("plan.toml")).unwrap();
    assert!(plan.contains("nu = 0.0001"), "{plan}");
    let text = fs::read_to_string(root.join("multipliers.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",0.0001,")));
    assert!(text.lines().skip(1).any(|l| l.starts_with("M1,5.0,")));
}

#[test]
fn unknown_keys_fail_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "nu = 1e-3\nviscosity = 2\n").unwrap();
    let o = mcl(&["simulate", "--config", "c.toml", "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("viscosity"));
}
