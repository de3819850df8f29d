//! Driving a full simulation: initial data, stepping, remapping, sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{MhdState, SpectralVectorField};
use crate::grid::ModeIndex;
use crate::random::random_band_field;
use crate::spectral::{div_l_residual, leray_project_in_place, sobolev_norm_vector};

use super::config::{InitialCondition, RemapPolicy, SimConfig};
use super::energy::energy_rate;
use super::remap::remap_shear_frame;
use super::rhs::RhsEvaluator;
use super::snapshot::read_snapshots;
use super::stepper::Stepper;

/// Scalar summary recorded every `diagnostics_every`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticSample {
    pub t: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub magnetic: f64,
    /// `dE/dt` predicted by the balance law at this state.
    pub energy_rate: f64,
    /// Rate just before a remap performed at this sample; equals
    /// `energy_rate` otherwise.
    pub energy_rate_before_remap: f64,
    pub remapped: bool,
    pub div_u: f64,
    pub div_b: f64,
    /// Energy discarded by remaps since the previous sample.
    pub dropped_energy: f64,
}

impl DiagnosticSample {
    pub fn of(state: &MhdState, dropped_energy: f64) -> Self {
        let kinetic = 0.5 * state.u.norm_sq();
        let magnetic = 0.5 * state.b.norm_sq();
        let rate = energy_rate(state);
        Self {
            t: state.t,
            energy: kinetic + magnetic,
            kinetic,
            magnetic,
            energy_rate: rate,
            energy_rate_before_remap: rate,
            remapped: false,
            div_u: div_l_residual(&state.u, state.t),
            div_b: div_l_residual(&state.b, state.t),
            dropped_energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemapEvent {
    pub t: f64,
    pub shear_shift: i64,
    pub dropped_energy: f64,
}

/// Samples at strictly increasing times plus the decimated states.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<DiagnosticSample>,
    pub states: Vec<MhdState>,
    pub remap_events: Vec<RemapEvent>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn final_state(&self) -> Option<&MhdState> {
        self.states.last()
    }
}

fn band_keep(config: &SimConfig) -> impl Fn(ModeIndex) -> bool + '_ {
    let g = config.grid;
    let band = config.band;
    move |mode: ModeIndex| {
        (mode.k, mode.j, mode.l) != (0, 0, 0)
            && g.is_retained(mode)
            && (mode.k as f64).abs() <= band
            && (mode.l as f64).abs() <= band
            && mode.eta(g.m).abs() <= band
    }
}

/// Seeded, projected initial data with `||(U, B)||_{H^{N+2}} = epsilon`.
pub fn initial_state(config: &SimConfig) -> Result<MhdState> {
    config.validate()?;
    let g = config.grid;
    let mut state = MhdState::zeros(g, config.params);
    match &config.ic_kind {
        InitialCondition::File(path) => {
            let mut states = read_snapshots(path, config.params)?;
            if states.is_empty() {
                return Err(Error::Snapshot(format!("{} holds no records", path.display())));
            }
            let s = states.swap_remove(0);
            if s.grid() != g {
                return Err(Error::GridMismatch(format!(
                    "snapshot grid {:?} differs from config grid {:?}",
                    s.grid(),
                    g
                )));
            }
            return Ok(s);
        }
        InitialCondition::RandomBand => {
            let keep = band_keep(config);
            let base = config.seed.wrapping_mul(6);
            for (c, f) in state.u.comps.iter_mut().chain(state.b.comps.iter_mut()).enumerate() {
                *f = random_band_field(g, base.wrapping_add(c as u64), true, &keep);
            }
        }
        InitialCondition::SingleMode { k, j, l } => {
            let mode = ModeIndex::new(*k, *j, *l);
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            for f in state.u.comps.iter_mut().chain(state.b.comps.iter_mut()) {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                f.set_hermitian(mode, z)?;
            }
        }
    }
    for v in [&mut state.u, &mut state.b] {
        leray_project_in_place(v, 0.0);
        v.enforce_hermitian();
    }
    let n = config.sobolev_n + 2.0;
    let norm = (sobolev_norm_vector(&state.u, n).powi(2) + sobolev_norm_vector(&state.b, n).powi(2)).sqrt();
    if config.epsilon == 0.0 {
        return Ok(MhdState::zeros(g, config.params));
    }
    if norm == 0.0 {
        return Err(Error::InvalidParameter("initial data vanishes after projection".into()));
    }
    let s = config.epsilon / norm;
    let scale = |v: &SpectralVectorField| {
        let mut out = v.scale(s);
        out.div_free_moving_frame = true;
        out
    };
    state.u = scale(&state.u);
    state.b = scale(&state.b);
    Ok(state)
}

pub fn run(config: &SimConfig) -> Result<Trajectory> {
    run_with(config, |_, _| {})
}

/// `run` with a callback invoked on every recorded sample.
pub fn run_with(config: &SimConfig, observer: impl FnMut(&MhdState, &DiagnosticSample)) -> Result<Trajectory> {
    let state = initial_state(config)?;
    run_from_state(config, state, observer)
}

/// Steps `state` for `config.t_final` time units.
pub fn run_from_state(
    config: &SimConfig,
    mut state: MhdState,
    mut observer: impl FnMut(&MhdState, &DiagnosticSample),
) -> Result<Trajectory> {
    config.validate()?;
    let stepper = Stepper::new(RhsEvaluator::new(config.grid, config.nonlinear));
    let steps = config.steps();
    let per_sample = config.steps_per_sample();
    let per_remap = match config.remap_policy {
        RemapPolicy::PeriodicAtIntegerMultiples => Some((1.0 / (config.grid.m as f64 * config.dt)).round() as usize),
        RemapPolicy::None => None,
    };
    let t0 = state.t;
    let mut traj = Trajectory::default();
    let keep_state = |sample_no: usize, last: bool| {
        last || sample_no == 0 || (config.snapshot_every > 0 && sample_no % config.snapshot_every == 0)
    };

    let first = DiagnosticSample::of(&state, 0.0);
    observer(&state, &first);
    traj.samples.push(first);
    traj.states.push(state.clone());
    let mut dropped = 0.0;
    let mut sample_no = 0;
    for n in 1..=steps {
        state = stepper.step(&state, config.dt)?;
        // land exactly on the lattice of step times
        state.t = t0 + n as f64 * config.dt;
        for v in [&mut state.u, &mut state.b] {
            v.set_t_frame(state.t);
        }
        let last = n == steps;
        let sampled = n % per_sample == 0 || last;
        let mut rate_before = None;
        if let Some(r) = per_remap {
            if n % r == 0 {
                if sampled {
                    rate_before = Some(energy_rate(&state));
                }
                let (s, d) = remap_shear_frame(&state)?;
                state = s;
                dropped += d;
                traj.remap_events.push(RemapEvent {
                    t: state.t,
                    shear_shift: state.u.comps[0].shear_shift,
                    dropped_energy: d,
                });
            }
        }
        if sampled {
            sample_no += 1;
            let mut sample = DiagnosticSample::of(&state, dropped);
            if let Some(r) = rate_before {
                sample.energy_rate_before_remap = r;
                sample.remapped = true;
            }
            dropped = 0.0;
            observer(&state, &sample);
            traj.samples.push(sample);
            if keep_state(sample_no, last) {
                traj.states.push(state.clone());
            }
        }
    }
    Ok(traj)
}
