//! Plan expansion, child-process execution and output aggregation.
//!
//! Layout: `<out>/<plan-hash>/<cell-id>/{config, <outputs>, log}` plus the
//! combined files at `<out>/<plan-hash>/`.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use mhd_couette::diagnostics::BOUND_CSV_HEADER;
use mhd_couette::linear_modes::loglog_fit;
use sha2::{Digest, Sha256};

use crate::cells::{sweep_families, PeakRow, ThresholdRow, CONFIG_FILE, LOG_FILE};
use crate::config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    MultiplierCheck,
    LinearMode,
    LinearSweep,
    Simulate,
    ThresholdSweep,
    NormsReport,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::MultiplierCheck => "multiplier-check",
            Kind::LinearMode => "linear-mode",
            Kind::LinearSweep => "linear-sweep",
            Kind::Simulate => "simulate",
            Kind::ThresholdSweep => "threshold-sweep",
            Kind::NormsReport => "norms-report",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub id: String,
    pub config: Config,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub kind: Kind,
    pub config: Config,
    pub cells: Vec<Cell>,
}

/// Plain decimal for moderate magnitudes, scientific otherwise.
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:e}").replace('-', "m")
}

impl Plan {
    pub fn new(kind: Kind, config: Config) -> Self {
        let cells = config
            .expand()
            .into_iter()
            .enumerate()
            .map(|(i, c)| Cell {
                id: format!(
                    "{i:03}_nu{}_a{}_eps{}_s{}-{}",
                    fmt_num(c.nu),
                    fmt_num(c.alpha),
                    fmt_num(c.epsilon),
                    c.sigma[0],
                    c.sigma[1]
                ),
                config: c,
            })
            .collect();
        Self { kind, config, cells }
    }

    /// Short content hash of the kind and the canonical config text.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind.name().as_bytes());
        h.update(b"\n");
        h.update(self.config.to_toml().as_bytes());
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Cells whose `alpha` lies outside `|alpha| > 8p`.
    pub fn out_of_theorem(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| !c.config.within_theorem()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub cell_id: String,
    pub ok: bool,
    pub digest: String,
    pub wall_seconds: f64,
}

/// SHA-256 over the cell's files (names and bytes), excluding the log.
pub fn digest_dir(dir: &Path) -> Result<String> {
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != LOG_FILE)
        .collect();
    names.sort();
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update([0u8]);
        h.update(fs::read(dir.join(&n))?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn run_child(exe: &Path, kind: Kind, dir: &Path) -> Result<bool> {
    let log = File::create(dir.join(LOG_FILE))?;
    let status = Command::new(exe)
        .arg("run-cell")
        .arg("--kind")
        .arg(kind.name())
        .arg(dir)
        .stdin(Stdio::null())
        .stdout(log.try_clone()?)
        .stderr(log)
        .status()
        .with_context(|| format!("spawning {}", exe.display()))?;
    Ok(status.success())
}

/// Writes the plan, runs every cell in its own process with at most `jobs`
/// alive at once, then emits the combined files.
pub fn execute(plan: &Plan, out: &Path, jobs: usize) -> Result<(PathBuf, Vec<RunRecord>)> {
    let root = out.join(plan.hash());
    fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
    fs::write(
        root.join("plan.toml"),
        format!("kind = {:?}\n{}", plan.kind.name(), plan.config.to_toml()),
    )?;
    for cell in &plan.cells {
        let dir = root.join(&cell.id);
        fs::create_dir_all(&dir)?;
        // stale outputs would leak into the digest
        for e in fs::read_dir(&dir)? {
            let p = e?.path();
            if p.is_file() {
                fs::remove_file(p)?;
            }
        }
        fs::write(dir.join(CONFIG_FILE), cell.config.to_toml())?;
    }
    let exe = std::env::current_exe().context("locating own executable")?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; plan.cells.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(plan.cells.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = plan.cells.get(i) else { break };
                let dir = root.join(&cell.id);
                let start = Instant::now();
                let ok = match run_child(&exe, plan.kind, &dir) {
                    Ok(ok) => ok,
                    Err(e) => {
                        let _ = fs::write(dir.join(LOG_FILE), format!("{e:#}\n"));
                        false
                    }
                };
                let wall_seconds = start.elapsed().as_secs_f64();
                if let Ok(mut f) = fs::OpenOptions::new().append(true).open(dir.join(LOG_FILE)) {
                    let _ = writeln!(
                        f,
                        "status: {}, wall time {wall_seconds:.3} s",
                        if ok { "ok" } else { "failed" }
                    );
                }
                let digest = digest_dir(&dir).unwrap_or_default();
                results.lock().unwrap()[i] = Some(RunRecord {
                    cell_id: cell.id.clone(),
                    ok,
                    digest,
                    wall_seconds,
                });
            });
        }
    });
    let records: Vec<RunRecord> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect();
    write_records(&root, &records)?;
    emit_plot_data(plan, &root, &records)?;
    Ok((root, records))
}

fn write_records(root: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(root.join("records.csv"))?;
    w.write_record(["cell_id", "status", "digest"])?;
    for r in records {
        w.write_record([
            r.cell_id.as_str(),
            if r.ok { "ok" } else { "failed" },
            r.digest.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Combined per-family CSV files; header-only when there are no records.
pub fn emit_plot_data(plan: &Plan, root: &Path, records: &[RunRecord]) -> Result<()> {
    let ok_cells = || {
        plan.cells
            .iter()
            .zip(records)
            .filter(|(_, r)| r.ok)
            .map(|(c, _)| root.join(&c.id))
    };
    match plan.kind {
        Kind::MultiplierCheck => concat_csv(
            &root.join("multipliers.csv"),
            &crate::cells::MULTIPLIER_HEADER,
            ok_cells().map(|d| d.join("multipliers.csv")),
        ),
        Kind::LinearMode => concat_csv(
            &root.join("linear_summary.csv"),
            &["system", "k", "eta", "l", "nu", "alpha", "t_final", "t_peak", "peak"],
            ok_cells().map(|d| d.join("summary.csv")),
        ),
        Kind::NormsReport => concat_csv(
            &root.join("norms_report.csv"),
            &BOUND_CSV_HEADER,
            ok_cells().map(|d| d.join("bounds.csv")),
        ),
        Kind::Simulate => Ok(()),
        Kind::LinearSweep => {
            let mut rows: Vec<PeakRow> = Vec::new();
            for d in ok_cells() {
                let mut r = csv::Reader::from_path(d.join("peaks.csv"))?;
                for row in r.deserialize() {
                    rows.push(row?);
                }
            }
            for family in sweep_families(&plan.config)? {
                let fam: Vec<&PeakRow> = rows.iter().filter(|r| r.family == family).collect();
                let nus: Vec<f64> = fam.iter().map(|r| r.nu).collect();
                let peaks: Vec<f64> = fam.iter().map(|r| r.peak).collect();
                let slope = if fam.len() >= 2 {
                    loglog_fit(&nus, &peaks).0
                } else {
                    f64::NAN
                };
                let mut w = csv::Writer::from_path(root.join(format!("scaling_{family}.csv")))?;
                w.write_record(["nu", "peak", "t_peak", "slope_global"])?;
                for r in &fam {
                    w.write_record([num(r.nu), num(r.peak), num(r.t_peak), num(slope)])?;
                }
                w.flush()?;
            }
            Ok(())
        }
        Kind::ThresholdSweep => {
            let mut w = csv::Writer::from_path(root.join("threshold.csv"))?;
            w.write_record([
                "cell_id",
                "status",
                "nu",
                "alpha",
                "epsilon",
                "sigma",
                "e0",
                "peak_amplification",
                "t_peak",
                "final_amplification",
                "max_div",
            ])?;
            for (cell, rec) in plan.cells.iter().zip(records) {
                let row: Option<ThresholdRow> = if rec.ok {
                    let mut r = csv::Reader::from_path(root.join(&cell.id).join("summary.csv"))?;
                    r.deserialize().next().transpose()?
                } else {
                    None
                };
                let mut fields = vec![cell.id.clone(), if row.is_some() { "ok" } else { "failed" }.to_string()];
                match row {
                    Some(r) => fields.extend([
                        num(r.nu),
                        num(r.alpha),
                        num(r.epsilon),
                        r.sigma,
                        num(r.e0),
                        num(r.peak_amplification),
                        num(r.t_peak),
                        num(r.final_amplification),
                        num(r.max_div),
                    ]),
                    None => {
                        let c = &cell.config;
                        fields.extend([
                            num(c.nu),
                            num(c.alpha),
                            num(c.epsilon),
                            format!("{}/{}", c.sigma[0], c.sigma[1]),
                        ]);
                        fields.extend(std::iter::repeat(String::new()).take(5));
                    }
                }
                w.write_record(&fields)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

/// Concatenates CSV files that share `header`, writing the header once.
fn concat_csv(dest: &Path, header: &[&str], parts: impl Iterator<Item = PathBuf>) -> Result<()> {
    let mut w = csv::Writer::from_path(dest)?;
    w.write_record(header)?;
    for p in parts {
        let mut r = csv::Reader::from_path(&p).with_context(|| format!("reading {}", p.display()))?;
        if r.headers()?.iter().ne(header.iter().copied()) {
            bail!("{} does not have the expected columns", p.display());
        }
        for rec in r.records() {
            w.write_record(&rec?)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_nothing_in_the_config() {
        let a = Plan::new(Kind::Simulate, Config::default());
        let b = Plan::new(
            Kind::Simulate,
            Config {
                seed: 1,
                ..Config::default()
            },
        );
        let c = Plan::new(Kind::NormsReport, Config::default());
        assert_eq!(a.hash(), Plan::new(Kind::Simulate, Config::default()).hash());
        assert_ne!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn cells_get_distinct_ids() {
        let cfg = Config {
            sweep_nu: Some(vec![1e-2, 1e-3]),
            sweep_alpha: Some(vec![9.0, 10.0]),
            ..Config::default()
        };
        let plan = Plan::new(Kind::ThresholdSweep, cfg);
        let mut ids: Vec<&str> = plan.cells.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids.len(), 4);
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 4);
        assert!(ids.iter().all(|i| !i.contains('/')));
    }

    #[test]
    fn alpha_below_threshold_is_flagged() {
        let cfg = Config {
            sweep_alpha: Some(vec![5.0, 10.0]),
            ..Config::default()
        };
        let plan = Plan::new(Kind::Simulate, cfg);
        let flagged = plan.out_of_theorem();
        assert_eq!(flagged.len(), 1);
        assert_eq!(flagged[0].config.alpha, 5.0);
    }
}
