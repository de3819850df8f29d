//! Work done inside one child process for one sweep cell.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mhd_couette::diagnostics::{write_rows_csv, BoundAccumulator};
use mhd_couette::linear_modes::{homogeneous_peak, HomogeneousQuantity, LinearModeSystem, SystemKind};
use mhd_couette::multipliers::{
    m1_exponent, m1_rate, m2_exponent, m2_rate, m3_closed_form, m3_value, m_combined, upsilon, M3Method,
    UPSILON_DEFAULT_KMAX,
};
use mhd_couette::quadrature::{integrate, QuadOptions};
use mhd_couette::solver::{run, run_with, snapshot::write_snapshots, Trajectory};
use mhd_couette::Frequency;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::plan::Kind;

pub const CONFIG_FILE: &str = "config";
pub const LOG_FILE: &str = "log";

pub fn run_cell(kind: Kind, dir: &Path) -> Result<()> {
    let text = std::fs::read_to_string(dir.join(CONFIG_FILE)).context("reading cell config")?;
    // the orchestrator already applied environment overrides
    let cfg = Config::from_toml_with_env(&text, Vec::new())?;
    match kind {
        Kind::MultiplierCheck => multiplier_check(&cfg, dir),
        Kind::LinearMode => linear_mode(&cfg, dir),
        Kind::LinearSweep => linear_sweep(&cfg, dir),
        Kind::Simulate => simulate(&cfg, dir).map(|_| ()),
        Kind::ThresholdSweep => threshold(&cfg, dir),
        Kind::NormsReport => norms_report(&cfg, dir),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn frequency(v: [f64; 3]) -> Result<Frequency> {
    if v[0].fract() != 0.0 || v[2].fract() != 0.0 {
        bail!("mode [{}, {}, {}] needs integer k and l", v[0], v[1], v[2]);
    }
    Ok(Frequency::new(v[0] as i64, v[1], v[2] as i64))
}

#[derive(Serialize)]
pub struct MultiplierRow {
    pub which: &'static str,
    pub t: f64,
    pub k: i64,
    pub eta: f64,
    pub l: i64,
    pub nu: f64,
    pub alpha: f64,
    pub value: f64,
    pub method: &'static str,
    pub error_bound: f64,
}

pub const MULTIPLIER_HEADER: [&str; 10] = [
    "which",
    "t",
    "k",
    "eta",
    "l",
    "nu",
    "alpha",
    "value",
    "method",
    "error_bound",
];

fn multiplier_check(cfg: &Config, dir: &Path) -> Result<()> {
    let params = cfg.params()?;
    let opts = QuadOptions::default();
    let mut w = csv_writer(&dir.join("multipliers.csv"))?;
    for &mv in &cfg.modes {
        let fr = frequency(mv)?;
        for &t in &cfg.times {
            if t < 0.0 {
                bail!("multiplier times must be >= 0, got {t}");
            }
            let row = |which, value, method, error_bound| MultiplierRow {
                which,
                t,
                k: fr.k,
                eta: fr.eta,
                l: fr.l,
                nu: params.nu,
                alpha: params.alpha,
                value,
                method,
                error_bound,
            };
            if fr.k != 0 {
                let q1 = integrate(|s| m1_rate(s, fr), 0.0, t, opts)?;
                let q2 = integrate(|s| m2_rate(s, fr, params.nu), 0.0, t, opts)?;
                w.serialize(row("M1", (-m1_exponent(fr, 0.0, t)).exp(), "closed_form", 0.0))?;
                w.serialize(row("M1", (-q1.value).exp(), "quadrature", q1.error))?;
                w.serialize(row(
                    "M2",
                    (-m2_exponent(fr, params.nu, 0.0, t)).exp(),
                    "closed_form",
                    0.0,
                ))?;
                w.serialize(row("M2", (-q2.value).exp(), "quadrature", q2.error))?;
            } else {
                let u = upsilon(t, fr, UPSILON_DEFAULT_KMAX);
                w.serialize(row("Upsilon", u.value, u.method.as_str(), u.error_bound))?;
                let q = m3_value(t, fr)?;
                w.serialize(row("M3", q.value, q.method.as_str(), q.error_bound))?;
                let c = m3_closed_form(t, fr, UPSILON_DEFAULT_KMAX);
                w.serialize(row("M3", c.value, c.method.as_str(), c.error_bound))?;
            }
            let m = m_combined(t, fr, &params, M3Method::ClosedForm)?;
            w.serialize(row("M", m.value, m.method.as_str(), m.error_bound))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn default_initial(kind: SystemKind, fr: Frequency) -> Vec<Complex64> {
    let c = |re: f64| Complex64::new(re, 0.0);
    match kind {
        SystemKind::HomogeneousQG => vec![c(1.0), c(1.0)],
        SystemKind::NonhomogeneousF2 => vec![c(1.0), c(0.0)],
        SystemKind::NonhomogeneousSymV2 => vec![c(1.0), c(-1.0)],
        SystemKind::NonhomogeneousFull => vec![c(0.0), c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)],
        SystemKind::ZeroModeLiftup => {
            // solenoidal at k = 0: eta U^2 + l U^3 = 0
            let (eta, l) = (fr.eta, fr.l as f64);
            let n = (eta * eta + l * l).sqrt().max(1e-300);
            vec![c(0.0), c(l / n), c(-eta / n), c(0.0), c(0.0), c(0.0)]
        }
    }
}

fn linear_system(cfg: &Config) -> Result<LinearModeSystem> {
    let kind = cfg.system_kind()?;
    let fr = frequency(cfg.mode)?;
    let initial = if cfg.initial.is_empty() {
        default_initial(kind, fr)
    } else {
        cfg.initial.iter().map(|z| Complex64::new(z[0], z[1])).collect()
    };
    LinearModeSystem::new(kind, fr, cfg.params()?, initial).map_err(|e| anyhow!(e))
}

#[derive(Serialize)]
struct LinearSummary<'a> {
    system: &'a str,
    k: i64,
    eta: f64,
    l: i64,
    nu: f64,
    alpha: f64,
    t_final: f64,
    t_peak: f64,
    peak: f64,
}

fn linear_mode(cfg: &Config, dir: &Path) -> Result<()> {
    let sys = linear_system(cfg)?;
    let t_final = cfg.linear_horizon();
    let sol = sys.integrate(t_final)?;
    let dim = sys.kind.dimension();
    let mut w = csv_writer(&dir.join("envelope.csv"))?;
    let mut header = vec!["t".to_string(), "amplification".to_string()];
    header.extend((0..dim).map(|i| format!("abs_y{i}")));
    w.write_record(&header)?;
    let envs: Vec<Vec<f64>> = (0..dim).map(|i| sol.component_envelope(i)).collect();
    for (n, t) in sol.times.iter().enumerate() {
        let mut rec = vec![t.to_string(), sol.amplification[n].to_string()];
        rec.extend(envs.iter().map(|e| e[n].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let mut s = csv_writer(&dir.join("summary.csv"))?;
    s.serialize(LinearSummary {
        system: sys.kind.name(),
        k: sys.mode.k,
        eta: sys.mode.eta,
        l: sys.mode.l,
        nu: sys.params.nu,
        alpha: sys.params.alpha,
        t_final,
        t_peak: sol.peak.0,
        peak: sol.peak.1,
    })?;
    s.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct PeakRow {
    pub family: String,
    pub nu: f64,
    pub peak: f64,
    pub t_peak: f64,
    pub eta: f64,
}

/// Scaling families produced by `linear-sweep` for a config.
pub fn sweep_families(cfg: &Config) -> Result<Vec<String>> {
    Ok(match cfg.system_kind()? {
        SystemKind::HomogeneousQG => vec!["g2".into(), "q2".into()],
        other => vec![other.name().into()],
    })
}

fn linear_sweep(cfg: &Config, dir: &Path) -> Result<()> {
    let kind = cfg.system_kind()?;
    let mut rows = Vec::new();
    if kind == SystemKind::HomogeneousQG {
        let fr = frequency(cfg.mode)?;
        // validates the mode class
        linear_system(cfg)?;
        let jmax = (cfg.eta_max * cfg.eta_m as f64).round() as i64;
        for (family, q) in [("g2", HomogeneousQuantity::G2), ("q2", HomogeneousQuantity::Q2)] {
            let best = (-jmax..=jmax)
                .map(|j| {
                    let eta = j as f64 / cfg.eta_m as f64;
                    let (t, v) = homogeneous_peak(q, Frequency::new(fr.k, eta, fr.l), cfg.nu);
                    (v, t, eta)
                })
                .fold((f64::NEG_INFINITY, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
            rows.push(PeakRow {
                family: family.into(),
                nu: cfg.nu,
                peak: best.0,
                t_peak: best.1,
                eta: best.2,
            });
        }
    } else {
        let sys = linear_system(cfg)?;
        let sol = sys.integrate(cfg.linear_horizon())?;
        rows.push(PeakRow {
            family: kind.name().into(),
            nu: cfg.nu,
            peak: sol.peak.1,
            t_peak: sol.peak.0,
            eta: sys.mode.eta,
        });
    }
    let mut w = csv_writer(&dir.join("peaks.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<()> {
    let mut w = csv_writer(&dir.join("diagnostics.csv"))?;
    for s in &traj.samples {
        w.serialize(s)?;
    }
    w.flush()?;
    write_snapshots(&dir.join("states.bin"), &traj.states)?;
    for e in &traj.remap_events {
        eprintln!(
            "remap at t = {}: shear shift {}, dropped energy {:e}",
            e.t, e.shear_shift, e.dropped_energy
        );
    }
    Ok(())
}

fn simulate(cfg: &Config, dir: &Path) -> Result<Trajectory> {
    let sim = cfg.sim_config()?;
    let traj = run(&sim)?;
    write_trajectory(&traj, dir)?;
    Ok(traj)
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct ThresholdRow {
    pub nu: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub sigma: String,
    pub e0: f64,
    /// `max_t sqrt(E(t) / E(0))`.
    pub peak_amplification: f64,
    pub t_peak: f64,
    pub final_amplification: f64,
    pub max_div: f64,
}

fn threshold(cfg: &Config, dir: &Path) -> Result<()> {
    let traj = simulate(cfg, dir)?;
    let e0 = traj.samples[0].energy;
    let amp = |e: f64| if e0 > 0.0 { (e / e0).sqrt() } else { 0.0 };
    let (t_peak, peak) = traj
        .samples
        .iter()
        .map(|s| (s.t, amp(s.energy)))
        .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let last = traj.samples.last().expect("at least one sample");
    let row = ThresholdRow {
        nu: cfg.nu,
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        sigma: format!("{}/{}", cfg.sigma[0], cfg.sigma[1]),
        e0,
        peak_amplification: peak,
        t_peak,
        final_amplification: amp(last.energy),
        max_div: traj.samples.iter().map(|s| s.div_u.max(s.div_b)).fold(0.0, f64::max),
    };
    let mut w = csv_writer(&dir.join("summary.csv"))?;
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}

fn norms_report(cfg: &Config, dir: &Path) -> Result<()> {
    let sim = cfg.sim_config()?;
    let mut boot = BoundAccumulator::bootstrap(sim.params, sim.epsilon, sim.sobolev_n);
    let mut theo = BoundAccumulator::theorem(sim.params, sim.epsilon, sim.sobolev_n);
    let mut failure = None;
    let traj = run_with(&sim, |state, _| {
        if failure.is_none() {
            if let Err(e) = boot.push(state).and_then(|_| theo.push(state)) {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    write_trajectory(&traj, dir)?;
    let mut rows = boot.finish()?;
    rows.extend(theo.finish()?);
    let mut w = BufWriter::new(File::create(dir.join("bounds.csv"))?);
    write_rows_csv(&mut w, &rows)?;
    w.flush()?;
    Ok(())
}
