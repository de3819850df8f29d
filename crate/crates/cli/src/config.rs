//! Experiment configuration: a flat TOML table with optional sweep axes.
//!
//! Every key can be overridden from the environment as `MCL_<KEY>`, e.g.
//! `MCL_NU=1e-4` or `MCL_SWEEP_NU="[1e-2, 1e-3]"`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use mhd_couette::grid::{GridSpec, PhysParams, RationalShearAngle};
use mhd_couette::linear_modes::SystemKind;
use mhd_couette::solver::{InitialCondition, RemapPolicy, SimConfig};
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "MCL_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub nu: f64,
    pub alpha: f64,
    /// Shear angle `q / p` as `[q, p]`.
    pub sigma: [i64; 2],
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub m: usize,
    pub dt: f64,
    pub t_final: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// `random_band`, `single_mode` or `file`.
    pub ic: String,
    /// Lattice mode `[k, j, l]` for `ic = "single_mode"`.
    pub ic_mode: [i64; 3],
    pub ic_file: Option<PathBuf>,
    /// `none` or `periodic`.
    pub remap: String,
    pub diagnostics_every: f64,
    pub sobolev_n: f64,
    pub band: f64,
    pub nonlinear: bool,
    pub snapshot_every: usize,

    /// Linear system name for `linear-mode` and `linear-sweep`.
    pub system: String,
    /// Frequency `[k, eta, l]` of the linear mode.
    pub mode: [f64; 3],
    /// Initial amplitudes as `[re, im]` pairs; empty picks a default per system.
    pub initial: Vec<[f64; 2]>,
    /// Horizon of linear runs; unset means `10 nu^{-1/3}`.
    pub linear_t_final: Option<f64>,
    /// Homogeneous peaks are maximized over `eta = j / eta_m`, `|eta| <= eta_max`.
    pub eta_max: f64,
    pub eta_m: usize,

    /// Frequencies `[k, eta, l]` and times for `multiplier-check`.
    pub modes: Vec<[f64; 3]>,
    pub times: Vec<f64>,

    pub sweep_nu: Option<Vec<f64>>,
    pub sweep_alpha: Option<Vec<f64>>,
    pub sweep_epsilon: Option<Vec<f64>>,
    pub sweep_sigma: Option<Vec<[i64; 2]>>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            nu: 1e-3,
            alpha: 10.0,
            sigma: [1, 1],
            nx: 32,
            ny: 64,
            nz: 32,
            m: 4,
            dt: 0.05,
            t_final: 1.0,
            epsilon: 1e-3,
            seed: 0,
            ic: "random_band".into(),
            ic_mode: [1, 0, -1],
            ic_file: None,
            remap: "none".into(),
            diagnostics_every: 0.25,
            sobolev_n: 5.0,
            band: 4.0,
            nonlinear: true,
            snapshot_every: 0,
            system: "homogeneous_qg".into(),
            mode: [1.0, 0.0, -1.0],
            initial: Vec::new(),
            linear_t_final: None,
            eta_max: 8.0,
            eta_m: 8,
            modes: vec![[1.0, 0.0, -1.0], [1.0, 0.0, 0.0], [2.0, 1.5, 3.0], [0.0, 0.0, 1.0]],
            times: vec![0.0, 1.0, 10.0, 100.0],
            sweep_nu: None,
            sweep_alpha: None,
            sweep_epsilon: None,
            sweep_sigma: None,
        }
    }
}

fn known_keys() -> BTreeSet<String> {
    let v = toml::Value::try_from(Config::default()).expect("default config serializes");
    let mut keys: BTreeSet<String> = v.as_table().expect("table").keys().cloned().collect();
    // optional keys are absent from the serialized defaults
    for k in [
        "ic_file",
        "linear_t_final",
        "sweep_nu",
        "sweep_alpha",
        "sweep_epsilon",
        "sweep_sigma",
    ] {
        keys.insert(k.into());
    }
    keys
}

/// Parses an override value as TOML, falling back to a bare string.
fn env_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

impl Config {
    /// Builds a config from TOML text plus `MCL_*` overrides from `env`.
    pub fn from_toml_with_env(text: &str, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut table: toml::Table = text.parse().context("malformed config")?;
        let known = known_keys();
        for (k, v) in env {
            if let Some(key) = k.strip_prefix(ENV_PREFIX) {
                let key = key.to_ascii_lowercase();
                if known.contains(&key) {
                    table.insert(key, env_value(&v));
                }
            }
        }
        let unknown: Vec<&String> = table.keys().filter(|k| !known.contains(*k)).collect();
        if !unknown.is_empty() {
            let list: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            bail!("unknown config keys: {}", list.join(", "));
        }
        let cfg: Config = toml::Value::Table(table).try_into().context("invalid config value")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            None => String::new(),
        };
        Self::from_toml_with_env(&text, std::env::vars())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.shear_angle()?;
        self.remap_policy()?;
        self.system_kind()?;
        if !matches!(self.ic.as_str(), "random_band" | "single_mode" | "file") {
            bail!("ic must be random_band, single_mode or file, got {:?}", self.ic);
        }
        if self.ic == "file" && self.ic_file.is_none() {
            bail!("ic = \"file\" needs ic_file");
        }
        if self.eta_m == 0 {
            bail!("eta_m must be positive");
        }
        if let Some(t) = self.linear_t_final {
            if !(t > 0.0) {
                bail!("linear_t_final must be positive, got {t}");
            }
        }
        Ok(())
    }

    pub fn shear_angle(&self) -> Result<RationalShearAngle> {
        RationalShearAngle::new(self.sigma[0], self.sigma[1]).map_err(|e| anyhow!(e))
    }

    pub fn remap_policy(&self) -> Result<RemapPolicy> {
        match self.remap.as_str() {
            "none" => Ok(RemapPolicy::None),
            "periodic" => Ok(RemapPolicy::PeriodicAtIntegerMultiples),
            other => bail!("remap must be none or periodic, got {other:?}"),
        }
    }

    pub fn system_kind(&self) -> Result<SystemKind> {
        SystemKind::parse(&self.system).ok_or_else(|| anyhow!("unknown linear system {:?}", self.system))
    }

    pub fn params(&self) -> Result<PhysParams> {
        PhysParams::new(self.nu, self.alpha, self.shear_angle()?).map_err(|e| anyhow!(e))
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let grid = GridSpec::new(self.nx, self.ny, self.nz, self.m).map_err(|e| anyhow!(e))?;
        let mut c = SimConfig::new(grid, self.params()?);
        c.dt = self.dt;
        c.t_final = self.t_final;
        c.epsilon = self.epsilon;
        c.seed = self.seed;
        c.ic_kind = match self.ic.as_str() {
            "single_mode" => InitialCondition::SingleMode {
                k: self.ic_mode[0],
                j: self.ic_mode[1],
                l: self.ic_mode[2],
            },
            "file" => InitialCondition::File(self.ic_file.clone().unwrap_or_default()),
            _ => InitialCondition::RandomBand,
        };
        c.remap_policy = self.remap_policy()?;
        c.diagnostics_every = self.diagnostics_every;
        c.sobolev_n = self.sobolev_n;
        c.band = self.band;
        c.nonlinear = self.nonlinear;
        c.snapshot_every = self.snapshot_every;
        c.validate().map_err(|e| anyhow!(e))?;
        Ok(c)
    }

    pub fn linear_horizon(&self) -> f64 {
        self.linear_t_final.unwrap_or_else(|| 10.0 / self.nu.max(1e-12).cbrt())
    }

    /// `|alpha| > 8p`, the hypothesis of the stability theorem.
    pub fn within_theorem(&self) -> bool {
        let p = self.shear_angle().map(|s| s.p()).unwrap_or(self.sigma[1].abs());
        self.alpha.abs() > 8.0 * p as f64
    }

    /// One config per point of the sweep grid, in a fixed nested order.
    pub fn expand(&self) -> Vec<Config> {
        let nus = self.sweep_nu.clone().unwrap_or_else(|| vec![self.nu]);
        let alphas = self.sweep_alpha.clone().unwrap_or_else(|| vec![self.alpha]);
        let epss = self.sweep_epsilon.clone().unwrap_or_else(|| vec![self.epsilon]);
        let sigmas = self.sweep_sigma.clone().unwrap_or_else(|| vec![self.sigma]);
        let mut out = Vec::new();
        for &sigma in &sigmas {
            for &alpha in &alphas {
                for &nu in &nus {
                    for &epsilon in &epss {
                        let mut c = self.clone();
                        c.nu = nu;
                        c.alpha = alpha;
                        c.epsilon = epsilon;
                        c.sigma = sigma;
                        c.sweep_nu = None;
                        c.sweep_alpha = None;
                        c.sweep_epsilon = None;
                        c.sweep_sigma = None;
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}
