use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ModeIndex, PhysParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// Random phases on `|k|, |l|, |eta| <= band`.
    RandomBand,
    /// One Fourier mode (and its conjugate) in every component.
    SingleMode { k: i64, j: i64, l: i64 },
    /// First record of a snapshot file.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemapPolicy {
    /// Relabel `eta` every `1/m` of time so `|eta - k t|` stays bounded.
    PeriodicAtIntegerMultiples,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub params: PhysParams,
    pub dt: f64,
    pub t_final: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub ic_kind: InitialCondition,
    pub remap_policy: RemapPolicy,
    pub diagnostics_every: f64,
    /// Sobolev index `N`; the initial data is normalized in `H^{N+2}`.
    pub sobolev_n: f64,
    /// Frequency band of random initial data.
    pub band: f64,
    /// Turns the quadratic terms off for linear-regime runs.
    pub nonlinear: bool,
    /// Keep every `snapshot_every`-th diagnostic sample; 0 keeps the endpoints only.
    pub snapshot_every: usize,
}

impl SimConfig {
    pub fn new(grid: GridSpec, params: PhysParams) -> Self {
        Self {
            grid,
            params,
            dt: 0.05,
            t_final: 1.0,
            epsilon: 1e-3,
            seed: 0,
            ic_kind: InitialCondition::RandomBand,
            remap_policy: RemapPolicy::None,
            diagnostics_every: 0.25,
            sobolev_n: 5.0,
            band: 4.0,
            nonlinear: true,
            snapshot_every: 1,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn steps_per_sample(&self) -> usize {
        ((self.diagnostics_every / self.dt).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.params.validate()?;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        let n = self.t_final / self.dt;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return bad(format!(
                "t_final = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            ));
        }
        if !(self.diagnostics_every > 0.0) {
            return bad(format!(
                "diagnostics_every must be positive, got {}",
                self.diagnostics_every
            ));
        }
        let s = self.diagnostics_every / self.dt;
        if s.round() < 1.0 || (s - s.round()).abs() > 1e-9 * s.max(1.0) {
            return bad(format!(
                "diagnostics_every = {} is not a positive multiple of dt = {}",
                self.diagnostics_every, self.dt
            ));
        }
        if self.remap_policy == RemapPolicy::PeriodicAtIntegerMultiples {
            let r = 1.0 / (self.grid.m as f64 * self.dt);
            if r.round() < 1.0 || (r - r.round()).abs() > 1e-9 * r {
                return bad(format!(
                    "remapping needs 1/m = {} to be a multiple of dt",
                    1.0 / self.grid.m as f64
                ));
            }
        }
        if self.sobolev_n < 0.0 {
            return bad(format!("sobolev_n must be >= 0, got {}", self.sobolev_n));
        }
        if let InitialCondition::SingleMode { k, j, l } = self.ic_kind {
            let mode = ModeIndex::new(k, j, l);
            if !self.grid.is_retained(mode) || (k, j, l) == (0, 0, 0) {
                return bad(format!("initial mode {mode:?} must be a nonzero retained mode"));
            }
        }
        Ok(())
    }
}
